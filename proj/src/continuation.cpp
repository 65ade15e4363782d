#include "percont/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "percont/errors.hpp"

namespace percont {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double inf_norm(const Vec& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

// Index of the first bound inside its tolerance band, or -1.
int first_hit(const std::vector<double>& margins, const std::vector<double>& tols) {
    for (std::size_t i = 0; i < margins.size(); ++i)
        if (!(margins[i] > tols[i])) return static_cast<int>(i);
    return -1;
}

struct Engine {
    const BranchProblem& prob;
    const ContinuationOptions& opt;

    // Newton at fixed lambda; empty on failure.
    std::optional<NewtonResult> correct(const Vec& pred, double lambda) const {
        auto res = [&](const Vec& u) { return prob.residual(u, lambda); };
        auto jac = [&](const Vec& u) { return prob.jacobian(u, lambda); };
        try {
            return damped_newton(res, jac, pred, opt.newton);
        } catch (const ConvergenceFailure&) {
        } catch (const SingularLinearSolve&) {
        }
        return std::nullopt;
    }

    TracePoint make_point(const Vec& u, double lambda, double step, double rnorm) const {
        return {lambda, u, step, rnorm, prob.norms(u)};
    }

    int hit(const Vec& u) const { return first_hit(prob.margins(u), prob.margin_tols()); }

    // [J, R_lambda; row_u^T, row_lambda] as a sparse matrix.
    SpMat bordered(const Vec& u, double lambda, const Vec& row_u, double row_lambda) const {
        const SpMat J = prob.jacobian(u, lambda);
        const Vec rl = prob.lambda_derivative(u, lambda);
        const Eigen::Index N = J.rows();
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(J.nonZeros() + 2 * N + 1));
        for (int c = 0; c < J.outerSize(); ++c)
            for (SpMat::InnerIterator it(J, c); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
        for (Eigen::Index i = 0; i < N; ++i) {
            if (rl[i] != 0.0) trip.emplace_back(i, N, rl[i]);
            if (row_u[i] != 0.0) trip.emplace_back(N, i, row_u[i]);
        }
        trip.emplace_back(N, N, row_lambda);
        SpMat B(N + 1, N + 1);
        B.setFromTriplets(trip.begin(), trip.end());
        return B;
    }

    double wnorm(const Vec& z) const {
        const Eigen::Index N = z.size() - 1;
        return std::sqrt(prob.weight() * z.head(N).squaredNorm() + z[N] * z[N]);
    }

    // Unit tangent (W-norm) with <tangent, prev>_W = positive.
    Vec tangent(const Vec& z, const Vec& prev) const {
        const Eigen::Index N = z.size() - 1;
        const SpMat B = bordered(z.head(N), z[N], prob.weight() * prev.head(N), prev[N]);
        Vec rhs = Vec::Zero(N + 1);
        rhs[N] = 1.0;
        Vec tau = sparse_solve(B, rhs);
        return tau / wnorm(tau);
    }

    // Corrects the predictor z0 + s tau on the hyperplane <tau, z - z0>_W = s.
    std::optional<NewtonResult> correct_arc(const Vec& z0, const Vec& tau, double s) const {
        const Eigen::Index N = z0.size() - 1;
        const double w = prob.weight();
        auto res = [&](const Vec& z) {
            Vec g(N + 1);
            g.head(N) = prob.residual(z.head(N), z[N]);
            g[N] = w * tau.head(N).dot(z.head(N) - z0.head(N)) + tau[N] * (z[N] - z0[N]) - s;
            return g;
        };
        auto jac = [&](const Vec& z) { return bordered(z.head(N), z[N], w * tau.head(N), tau[N]); };
        try {
            return damped_newton(res, jac, z0 + s * tau, opt.newton);
        } catch (const ConvergenceFailure&) {
        } catch (const SingularLinearSolve&) {
        }
        return std::nullopt;
    }

    double state_residual(const Vec& z) const {
        const Eigen::Index N = z.size() - 1;
        return inf_norm(prob.residual(z.head(N), z[N]));
    }

    void set_exit(ContinuationTrace& tr, const Vec& u, double lambda, double step, double rnorm) const {
        const auto m = prob.margins(u);
        const int b = std::max(hit(u), 0);
        tr.status = TraceStatus::boundary_exit;
        tr.exit_bound = b;
        tr.exit_margin = m.empty() ? 0.0 : m[static_cast<std::size_t>(b)];
        tr.event_point = make_point(u, lambda, step, rnorm);
    }

    // Bisection in lambda between an interior point and an exterior lambda.
    void refine_exit_natural(ContinuationTrace& tr, Vec ua, double la, double lb, const Vec& ub) const {
        Vec u_out = ub;
        double r_out = inf_norm(prob.residual(ub, lb));
        for (int it = 0; it < opt.max_bisections && lb - la > opt.bisection_tol; ++it) {
            const double lm = 0.5 * (la + lb);
            auto sol = correct(ua, lm);
            if (!sol || hit(sol->x) >= 0) {
                lb = lm;
                if (sol) u_out = sol->x, r_out = sol->residual_norm;
            } else {
                la = lm;
                ua = sol->x;
            }
        }
        tr.lambda_star = 0.5 * (la + lb);
        if (hit(u_out) >= 0) {
            set_exit(tr, u_out, lb, lb - la, r_out);
        } else {
            set_exit(tr, ua, la, lb - la, inf_norm(prob.residual(ua, la)));
        }
    }

    // Bisection in arclength for a boundary exit inside (0, ds].
    void refine_exit_arc(ContinuationTrace& tr, const Vec& z0, const Vec& tau, double ds, Vec z_out) const {
        const Eigen::Index N = z0.size() - 1;
        double lo = 0.0, hi = ds;
        Vec z_in = z0;
        for (int it = 0; it < opt.max_bisections && hi - lo > opt.bisection_tol; ++it) {
            const double sm = 0.5 * (lo + hi);
            auto sol = correct_arc(z0, tau, sm);
            if (!sol || hit(sol->x.head(N)) >= 0) {
                hi = sm;
                if (sol) z_out = sol->x;
            } else {
                lo = sm;
                z_in = sol->x;
            }
        }
        tr.lambda_star = 0.5 * (z_in[N] + z_out[N]);
        const Vec& ev = hit(z_out.head(N)) >= 0 ? z_out : z_in;
        set_exit(tr, ev.head(N), ev[N], hi - lo, state_residual(ev));
    }

    void refine_fold(ContinuationTrace& tr, const Vec& z0, const Vec& tau, double ds, Vec z_best) const {
        const Eigen::Index N = z0.size() - 1;
        double lo = 0.0, hi = ds;
        for (int it = 0; it < 64 && hi - lo > 1e-3 * opt.bisection_tol; ++it) {
            const double sm = 0.5 * (lo + hi);
            auto sol = correct_arc(z0, tau, sm);
            if (!sol) break;
            Vec tc;
            try {
                tc = tangent(sol->x, tau);
            } catch (const SingularLinearSolve&) {
                break;
            }
            (tc[N] * tau[N] > 0.0 ? lo : hi) = sm;
            z_best = sol->x;
        }
        if (auto sol = correct_arc(z0, tau, 0.5 * (lo + hi))) z_best = sol->x;
        tr.status = TraceStatus::fold_detected;
        tr.lambda_star = z_best[N];
        tr.event_point = make_point(z_best.head(N), z_best[N], hi - lo, state_residual(z_best));
    }
};

Vec stack(const Vec& u, double lambda) {
    Vec z(u.size() + 1);
    z.head(u.size()) = u;
    z[u.size()] = lambda;
    return z;
}

ContinuationTrace arclength_from(const Engine& eng, ContinuationTrace tr, Vec u, double lambda, double ds) {
    const BranchProblem& prob = eng.prob;
    const ContinuationOptions& opt = eng.opt;
    const Eigen::Index N = prob.size();
    Vec z = stack(u, lambda);
    Vec up = Vec::Zero(N + 1);
    up[N] = 1.0;
    Vec tau;
    try {
        tau = eng.tangent(z, up);
    } catch (const SingularLinearSolve&) {
        tr.status = TraceStatus::step_failure;
        tr.lambda_star = lambda;
        tr.detail = "singular bordered Jacobian at the start";
        return tr;
    }
    int steps = 0;
    while (true) {
        if (++steps > opt.max_steps) {
            tr.status = TraceStatus::step_failure;
            tr.lambda_star = z[N];
            tr.detail = "max_steps reached";
            return tr;
        }
        auto sol = eng.correct_arc(z, tau, ds);
        Vec tau1;
        if (sol) {
            try {
                tau1 = eng.tangent(sol->x, tau);
            } catch (const SingularLinearSolve&) {
                sol.reset();
            }
        }
        if (!sol) {
            ds *= 0.5;
            if (ds < opt.ds_min) {
                tr.status = TraceStatus::step_failure;
                tr.lambda_star = z[N];
                tr.detail = "arclength step below ds_min";
                return tr;
            }
            continue;
        }
        const Vec& z1 = sol->x;
        if (eng.hit(z1.head(N)) >= 0) {
            eng.refine_exit_arc(tr, z, tau, ds, z1);
            return tr;
        }
        if (z1[N] >= opt.target && z[N] < opt.target) {
            const double frac = (opt.target - z[N]) / (z1[N] - z[N]);
            const Vec pred = z.head(N) + frac * (z1.head(N) - z.head(N));
            if (auto fin = eng.correct(pred, opt.target)) {
                if (eng.hit(fin->x) >= 0) {
                    eng.refine_exit_natural(tr, z.head(N), z[N], opt.target, fin->x);
                    return tr;
                }
                tr.points.push_back(eng.make_point(fin->x, opt.target, ds, fin->residual_norm));
                tr.status = TraceStatus::reached_target;
                tr.lambda_star = opt.target;
                return tr;
            }
        }
        if (tau1[N] * tau[N] < 0.0) {
            eng.refine_fold(tr, z, tau, ds, z1);
            return tr;
        }
        tr.points.push_back(eng.make_point(z1.head(N), z1[N], ds, eng.state_residual(z1)));
        z = z1;
        tau = tau1;
        if (sol->iterations <= 3) ds = std::min(1.5 * ds, opt.ds_max);
    }
}

ContinuationTrace start_trace(const BranchProblem& prob, ContinuationMode mode) {
    ContinuationTrace tr;
    tr.mode = mode;
    tr.norm_names = prob.norm_names();
    return tr;
}

}  // namespace

std::string to_string(TraceStatus s) {
    switch (s) {
        case TraceStatus::reached_target: return "ReachedTarget";
        case TraceStatus::boundary_exit: return "BoundaryExit";
        case TraceStatus::fold_detected: return "FoldDetected";
        case TraceStatus::step_failure: return "StepFailure";
    }
    return "?";
}

std::string to_string(ContinuationMode m) { return m == ContinuationMode::natural ? "natural" : "arclength"; }

ContinuationMode continuation_mode_from_string(const std::string& s) {
    if (s == "natural") return ContinuationMode::natural;
    if (s == "arclength") return ContinuationMode::arclength;
    throw Error("unknown continuation mode '" + s + "' (valid: natural, arclength)");
}

double ContinuationTrace::max_lambda() const {
    double v = -kInf;
    for (const auto& p : points) v = std::max(v, p.lambda);
    if (event_point) v = std::max(v, event_point->lambda);
    return v;
}

std::vector<double> block_sup_norms(const Vec& X, int M, int n, int m) {
    std::vector<double> out(static_cast<std::size_t>(n), 0.0);
    const int k = n * m;
    for (int j = 0; j < M; ++j)
        for (int i = 0; i < n; ++i)
            out[static_cast<std::size_t>(i)] =
                std::max(out[static_cast<std::size_t>(i)], X.segment(j * k + i * m, m).norm());
    return out;
}

namespace {

double derivative_sup(const Vec& X, int M, const CyclicSystem& sys, const Window& w) {
    const int k = sys.state_dim();
    double sup = 0.0;
    for (int j = 0; j < M; ++j) {
        double v;
        try {
            v = w.derivative_norm(j * sys.T / M, X.segment(j * k, k));
        } catch (const Error&) {
            return kInf;
        }
        sup = std::max(sup, v);
    }
    return sup;
}

std::vector<double> periodic_margins(const Vec& X, int M, const CyclicSystem& sys, const Window& w) {
    const auto sups = block_sup_norms(X, M, sys.n, sys.m);
    std::vector<double> out;
    for (int i = 0; i < sys.n; ++i) out.push_back(w.rho[static_cast<std::size_t>(i)] - sups[static_cast<std::size_t>(i)]);
    if (w.derivative_bound && w.derivative_norm) out.push_back(*w.derivative_bound - derivative_sup(X, M, sys, w));
    return out;
}

std::vector<double> periodic_tols(const CyclicSystem& sys, const Window& w) {
    std::vector<double> out;
    for (int i = 0; i < sys.n; ++i) out.push_back(w.boundary_tol_factor * w.rho[static_cast<std::size_t>(i)]);
    if (w.derivative_bound && w.derivative_norm) out.push_back(w.boundary_tol_factor * *w.derivative_bound);
    return out;
}

}  // namespace

PeriodicBranch::PeriodicBranch(HomotopyFamily fam, int M, Window window, Exec exec)
    : fam_(std::move(fam)), M_(M), window_(std::move(window)), exec_(exec) {
    window_.validate(fam_.base.n, fam_.base.m);
    if (window_.derivative_bound && !window_.derivative_norm)
        throw Error("window has a derivative bound but no derivative probe");
}

int PeriodicBranch::size() const { return M_ * fam_.base.state_dim(); }

Vec PeriodicBranch::residual(const Vec& u, double lambda) const { return midpoint_residual(fam_, u, M_, lambda, exec_); }

SpMat PeriodicBranch::jacobian(const Vec& u, double lambda) const {
    return midpoint_jacobian(fam_, u, M_, lambda, exec_).to_sparse();
}

Vec PeriodicBranch::lambda_derivative(const Vec& u, double lambda) const {
    return midpoint_lambda_derivative(fam_, u, M_, lambda, exec_);
}

std::vector<double> PeriodicBranch::margins(const Vec& u) const { return periodic_margins(u, M_, fam_.base, window_); }

std::vector<double> PeriodicBranch::margin_tols() const { return periodic_tols(fam_.base, window_); }

std::vector<double> PeriodicBranch::norms(const Vec& u) const {
    auto out = block_sup_norms(u, M_, fam_.base.n, fam_.base.m);
    if (window_.derivative_bound && window_.derivative_norm) out.push_back(derivative_sup(u, M_, fam_.base, window_));
    return out;
}

std::vector<std::string> PeriodicBranch::norm_names() const {
    std::vector<std::string> out;
    for (int i = 1; i <= fam_.base.n; ++i) out.push_back("sup_x" + std::to_string(i));
    if (window_.derivative_bound && window_.derivative_norm) out.push_back("sup_dx");
    return out;
}

bool PeriodicBranch::degenerate_at(double lambda) const {
    return fam_.kind == HomotopyKind::scaling && lambda == 0.0;
}

AlgebraicBranch::AlgebraicBranch(AlgebraicMap f, int k, std::vector<double> lo, std::vector<double> hi)
    : f_(std::move(f)), k_(k), lo_(std::move(lo)), hi_(std::move(hi)) {
    if (static_cast<int>(lo_.size()) != k_ || static_cast<int>(hi_.size()) != k_)
        throw DimensionMismatch("algebraic window must have one bound pair per unknown");
    for (int c = 0; c < k_; ++c)
        if (!(lo_[static_cast<std::size_t>(c)] < hi_[static_cast<std::size_t>(c)]))
            throw Error("algebraic window is empty along axis " + std::to_string(c));
}

Vec AlgebraicBranch::residual(const Vec& u, double lambda) const { return f_(u, lambda); }

SpMat AlgebraicBranch::jacobian(const Vec& u, double lambda) const {
    Eigen::MatrixXd J(k_, k_);
    for (int c = 0; c < k_; ++c) {
        const double h = 1e-7 * std::max(1.0, std::abs(u[c]));
        Vec p = u, q = u;
        p[c] += h;
        q[c] -= h;
        J.col(c) = (f_(p, lambda) - f_(q, lambda)) / (2.0 * h);
    }
    return J.sparseView();
}

Vec AlgebraicBranch::lambda_derivative(const Vec& u, double lambda) const {
    const double h = 1e-7 * std::max(1.0, std::abs(lambda));
    return (f_(u, lambda + h) - f_(u, lambda - h)) / (2.0 * h);
}

std::vector<double> AlgebraicBranch::margins(const Vec& u) const {
    std::vector<double> out;
    for (int c = 0; c < k_; ++c)
        out.push_back(std::min(u[c] - lo_[static_cast<std::size_t>(c)], hi_[static_cast<std::size_t>(c)] - u[c]));
    return out;
}

std::vector<double> AlgebraicBranch::margin_tols() const {
    std::vector<double> out;
    for (int c = 0; c < k_; ++c) {
        double s = 1.0;
        for (double b : {lo_[static_cast<std::size_t>(c)], hi_[static_cast<std::size_t>(c)]})
            if (std::isfinite(b)) s = std::max(s, std::abs(b));
        out.push_back(1e-8 * s);
    }
    return out;
}

std::vector<double> AlgebraicBranch::norms(const Vec& u) const { return std::vector<double>(u.data(), u.data() + u.size()); }

std::vector<std::string> AlgebraicBranch::norm_names() const {
    std::vector<std::string> out;
    for (int c = 1; c <= k_; ++c) out.push_back("x" + std::to_string(c));
    return out;
}

ContinuationTrace continue_natural(const BranchProblem& prob, const Vec& u0, double lambda0,
                                   const ContinuationOptions& opt) {
    Engine eng{prob, opt};
    ContinuationTrace tr = start_trace(prob, ContinuationMode::natural);
    Vec u = u0;
    double lambda = lambda0;
    double r0 = inf_norm(prob.residual(u, lambda));
    if (r0 > opt.newton.tol && !prob.degenerate_at(lambda)) {
        auto sol = eng.correct(u, lambda);
        if (!sol) {
            tr.status = TraceStatus::step_failure;
            tr.lambda_star = lambda;
            tr.detail = "start does not satisfy the corrector tolerance";
            return tr;
        }
        u = sol->x;
        r0 = sol->residual_norm;
    }
    tr.points.push_back(eng.make_point(u, lambda, 0.0, r0));
    if (eng.hit(u) >= 0) {
        tr.lambda_star = lambda;
        eng.set_exit(tr, u, lambda, 0.0, r0);
        tr.detail = "start on the window boundary";
        return tr;
    }

    std::optional<std::pair<Vec, double>> prev;
    double step = opt.lambda_step0;
    int steps = 0;
    while (lambda < opt.target) {
        if (++steps > opt.max_steps) {
            tr.status = TraceStatus::step_failure;
            tr.lambda_star = lambda;
            tr.detail = "max_steps reached";
            return tr;
        }
        const double ln = lambda + step >= opt.target - 1e-12 ? opt.target : lambda + step;
        Vec pred = u;
        if (prev) pred = u + (u - prev->first) * ((ln - lambda) / (lambda - prev->second));
        auto sol = eng.correct(pred, ln);
        if (!sol) {
            step *= 0.5;
            if (step < opt.step_min) {
                tr.status = TraceStatus::step_failure;
                tr.lambda_star = lambda;
                tr.detail = "lambda step below step_min";
                if (!opt.arclength_fallback) return tr;
                ContinuationTrace fb = arclength_from(eng, tr, u, lambda, opt.ds0);
                fb.used_fallback = true;
                return fb;
            }
            continue;
        }
        if (eng.hit(sol->x) >= 0) {
            eng.refine_exit_natural(tr, u, lambda, ln, sol->x);
            return tr;
        }
        prev = std::make_pair(u, lambda);
        u = sol->x;
        lambda = ln;
        tr.points.push_back(eng.make_point(u, lambda, ln - prev->second, sol->residual_norm));
        if (sol->iterations <= 3) step = std::min(1.5 * step, opt.step_max);
    }
    tr.status = TraceStatus::reached_target;
    tr.lambda_star = lambda;
    return tr;
}

ContinuationTrace continue_arclength(const BranchProblem& prob, const Vec& u0, double lambda0,
                                     const ContinuationOptions& opt) {
    Engine eng{prob, opt};
    ContinuationTrace tr = start_trace(prob, ContinuationMode::arclength);
    Vec u = u0;
    double lambda = lambda0;
    double r0 = inf_norm(prob.residual(u, lambda));
    tr.points.push_back(eng.make_point(u, lambda, 0.0, r0));
    if (prob.degenerate_at(lambda) || r0 > opt.newton.tol) {
        // The scaling family is singular at lambda = 0: take one natural step first.
        const double ln = prob.degenerate_at(lambda) ? lambda + opt.lambda_step0 : lambda;
        auto sol = eng.correct(u, ln);
        if (!sol) {
            tr.status = TraceStatus::step_failure;
            tr.lambda_star = lambda;
            tr.detail = "initial correction failed";
            return tr;
        }
        if (ln != lambda) {
            u = sol->x;
            lambda = ln;
            tr.points.push_back(eng.make_point(u, lambda, ln - lambda0, sol->residual_norm));
        } else {
            u = sol->x;
            tr.points.back() = eng.make_point(u, lambda, 0.0, sol->residual_norm);
        }
    }
    if (eng.hit(u) >= 0) {
        tr.lambda_star = lambda;
        eng.set_exit(tr, u, lambda, 0.0, tr.points.back().residual_norm);
        tr.detail = "start on the window boundary";
        return tr;
    }
    return arclength_from(eng, std::move(tr), u, lambda, opt.ds0);
}

ContinuationTrace trace_branch(const BranchProblem& prob, const Vec& u0, double lambda0, ContinuationMode mode,
                               const ContinuationOptions& opt) {
    return mode == ContinuationMode::natural ? continue_natural(prob, u0, lambda0, opt)
                                             : continue_arclength(prob, u0, lambda0, opt);
}

ContinuationTrace algebraic_continue(const AlgebraicMap& f, const Vec& x0, const std::vector<double>& lo,
                                     const std::vector<double>& hi, ContinuationMode mode,
                                     const ContinuationOptions& opt) {
    const double r = inf_norm(f(x0, 0.0));
    if (r > 1e-8) throw Error("algebraic start is not a zero at lambda = 0 (|f| = " + std::to_string(r) + ")");
    AlgebraicBranch prob(f, static_cast<int>(x0.size()), lo, hi);
    return trace_branch(prob, x0, 0.0, mode, opt);
}

std::optional<BoundaryHit> detect_boundary_exit(const PeriodicSolution& sol, const CyclicSystem& sys,
                                                const Window& window) {
    const auto m = periodic_margins(sol.values, sol.M, sys, window);
    const auto tol = periodic_tols(sys, window);
    const int i = first_hit(m, tol);
    if (i < 0) return std::nullopt;
    return BoundaryHit{i, m[static_cast<std::size_t>(i)], i >= sys.n};
}

}  // namespace percont
