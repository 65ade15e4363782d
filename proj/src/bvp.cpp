#include "percont/bvp.hpp"

#include <cmath>
#include <limits>

#include "percont/errors.hpp"

namespace percont {

namespace {

double inf_norm(const Vec& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

std::vector<double> to_std(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

MeshFunction PeriodicSolution::as_mesh(double T, int k) const {
    MeshFunction z(M, T, k);
    z.values = to_std(values);
    return z;
}

NewtonResult damped_newton(const std::function<Vec(const Vec&)>& residual,
                           const std::function<SpMat(const Vec&)>& jacobian, Vec x0, const NewtonOptions& opt) {
    Vec x = std::move(x0);
    Vec r;
    try {
        r = residual(x);
    } catch (const DomainViolation& e) {
        throw ConvergenceFailure(std::string("start outside the domain: ") + e.what(), to_std(x),
                                 std::numeric_limits<double>::infinity());
    } catch (const EvalError& e) {
        throw ConvergenceFailure(std::string("start not evaluable: ") + e.what(), to_std(x),
                                 std::numeric_limits<double>::infinity());
    }
    double norm = inf_norm(r);
    int it = 0;
    for (; it < opt.max_iter && norm > opt.tol; ++it) {
        SpMat J;
        try {
            J = jacobian(x);
        } catch (const DomainViolation&) {
            throw ConvergenceFailure("Jacobian stencil left the domain", to_std(x), norm);
        } catch (const EvalError&) {
            throw ConvergenceFailure("Jacobian not evaluable", to_std(x), norm);
        }
        Vec dx;
        try {
            dx = sparse_solve(J, -r);
        } catch (const SingularLinearSolve& e) {
            throw ConvergenceFailure(std::string("singular Newton step: ") + e.what(), to_std(x), norm);
        }
        double alpha = 1.0;
        bool accepted = false;
        for (int h = 0; h <= opt.max_halvings; ++h, alpha *= 0.5) {
            const Vec xc = x + alpha * dx;
            Vec rc;
            try {
                rc = residual(xc);
            } catch (const DomainViolation&) {
                continue;
            } catch (const EvalError&) {
                continue;
            }
            const double nc = inf_norm(rc);
            if (std::isfinite(nc) && nc < norm) {
                x = xc;
                r = std::move(rc);
                norm = nc;
                accepted = true;
                break;
            }
        }
        if (!accepted) throw ConvergenceFailure("no decrease after step halving", to_std(x), norm);
    }
    if (norm > opt.tol) throw ConvergenceFailure("iteration limit reached", to_std(x), norm);
    return {std::move(x), norm, it};
}

Vec residual(const HomotopyFamily& fam, const Vec& X, int M, double lambda, Exec exec) {
    return midpoint_residual(fam, X, M, lambda, exec);
}

CyclicBlockJacobian jacobian_fd(const HomotopyFamily& fam, const Vec& X, int M, double lambda, Exec exec) {
    return midpoint_jacobian(fam, X, M, lambda, exec);
}

PeriodicSolution newton_correct(const HomotopyFamily& fam, const Vec& X0, int M, double lambda,
                                const NewtonOptions& opt) {
    auto res = [&](const Vec& X) { return midpoint_residual(fam, X, M, lambda, opt.exec); };
    auto jac = [&](const Vec& X) { return midpoint_jacobian(fam, X, M, lambda, opt.exec).to_sparse(); };
    NewtonResult nr = damped_newton(res, jac, X0, opt);
    return {M, lambda, std::move(nr.x), nr.residual_norm, nr.iterations};
}

Vec constant_mesh(const Vec& x, int M) {
    Vec X(static_cast<Eigen::Index>(M) * x.size());
    for (int j = 0; j < M; ++j) X.segment(j * x.size(), x.size()) = x;
    return X;
}

std::vector<StartPoint> solve_averaged_start(const AveragedMap& hhat, const CyclicSystem& sys, const Window& window,
                                             int M, const degree::SignSumOptions& zopt) {
    const degree::Box box = window.omega1_box();
    const std::vector<Vec> zeros = degree::find_zeros(hhat, box, zopt);
    if (zeros.empty()) throw NoStartingZero("no zero of the averaged map in the window box of constants");
    std::vector<StartPoint> out;
    for (const Vec& w : zeros) {
        Vec x = Vec::Zero(sys.state_dim());
        x.head(sys.m) = w;
        out.push_back({w, constant_mesh(x, M)});
    }
    return out;
}

std::vector<StartPoint> solve_averaged_start(const CyclicSystem& sys, const Window& window, const QuadratureRule& q,
                                             int M, const degree::SignSumOptions& zopt) {
    return solve_averaged_start(h_hat(sys, q), sys, window, M, zopt);
}

}  // namespace percont
