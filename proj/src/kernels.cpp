#include "percont/kernels.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SparseLU>

#include "percont/errors.hpp"

namespace percont {

namespace {

void check_size(const HomotopyFamily& fam, const Vec& X, int M) {
    if (M < 4) throw Error("mesh needs M >= 4");
    if (X.size() != static_cast<Eigen::Index>(M) * fam.base.state_dim())
        throw DimensionMismatch("mesh vector has size " + std::to_string(X.size()) + ", expected " +
                                std::to_string(M * fam.base.state_dim()));
}

struct Edge {
    double t;
    Vec mid;
};

Edge edge(const HomotopyFamily& fam, const Vec& X, int M, int j) {
    const int k = fam.base.state_dim();
    const double dt = fam.base.T / M;
    const int jn = (j + 1) % M;
    return {(j + 0.5) * dt, 0.5 * (X.segment(j * k, k) + X.segment(jn * k, k))};
}

}  // namespace

SpMat CyclicBlockJacobian::to_sparse() const {
    const Eigen::Index N = static_cast<Eigen::Index>(M) * k;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(2 * M * k * k));
    for (int j = 0; j < M; ++j) {
        const int jn = (j + 1) % M;
        for (int r = 0; r < k; ++r)
            for (int c = 0; c < k; ++c) {
                const auto& a = A[static_cast<std::size_t>(j)];
                const auto& b = B[static_cast<std::size_t>(j)];
                if (a(r, c) != 0.0) trip.emplace_back(j * k + r, j * k + c, a(r, c));
                if (b(r, c) != 0.0) trip.emplace_back(j * k + r, jn * k + c, b(r, c));
            }
    }
    SpMat S(N, N);
    S.setFromTriplets(trip.begin(), trip.end());
    return S;
}

Eigen::MatrixXd CyclicBlockJacobian::to_dense() const { return Eigen::MatrixXd(to_sparse()); }

Vec midpoint_residual(const HomotopyFamily& fam, const Vec& X, int M, double lambda, Exec exec) {
    check_size(fam, X, M);
    const int k = fam.base.state_dim();
    const double dt = fam.base.T / M;
    Vec R(X.size());
    for_each_index(exec, static_cast<std::size_t>(M), [&](std::size_t jj) {
        const int j = static_cast<int>(jj), jn = (j + 1) % M;
        const Edge e = edge(fam, X, M, j);
        R.segment(j * k, k) = (X.segment(jn * k, k) - X.segment(j * k, k)) / dt - eval_rhs(fam, e.t, e.mid, lambda);
    });
    return R;
}

CyclicBlockJacobian midpoint_jacobian(const HomotopyFamily& fam, const Vec& X, int M, double lambda, Exec exec) {
    check_size(fam, X, M);
    const int k = fam.base.state_dim();
    const double dt = fam.base.T / M;
    CyclicBlockJacobian J{M, k, std::vector<Eigen::MatrixXd>(static_cast<std::size_t>(M)),
                          std::vector<Eigen::MatrixXd>(static_cast<std::size_t>(M))};
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(k, k) / dt;
    for_each_index(exec, static_cast<std::size_t>(M), [&](std::size_t jj) {
        const Edge e = edge(fam, X, M, static_cast<int>(jj));
        Eigen::MatrixXd D(k, k);
        for (int c = 0; c < k; ++c) {
            // A node shift of delta moves the midpoint by delta / 2.
            const double delta = 1e-7 * std::max(1.0, std::abs(e.mid[c]));
            Vec p = e.mid, q = e.mid;
            p[c] += 0.5 * delta;
            q[c] -= 0.5 * delta;
            D.col(c) = (eval_rhs(fam, e.t, p, lambda) - eval_rhs(fam, e.t, q, lambda)) / (2.0 * delta);
        }
        J.A[jj] = -I - D;
        J.B[jj] = I - D;
    });
    return J;
}

Vec midpoint_lambda_derivative(const HomotopyFamily& fam, const Vec& X, int M, double lambda, Exec exec) {
    check_size(fam, X, M);
    const CyclicSystem& s = fam.base;
    const int k = s.state_dim();
    Vec D = Vec::Zero(X.size());
    for_each_index(exec, static_cast<std::size_t>(M), [&](std::size_t jj) {
        const int j = static_cast<int>(jj);
        const Edge e = edge(fam, X, M, j);
        s.require_contains(e.mid, e.t);
        Vec v;
        if (fam.kind == HomotopyKind::scaling) {
            v = s.h(e.t, e.mid);
        } else {
            const double h = 1e-7 * std::max(1.0, std::abs(lambda));
            v = (fam.h_tilde(e.t, e.mid, lambda + h) - fam.h_tilde(e.t, e.mid, lambda - h)) / (2.0 * h);
        }
        D.segment(j * k + (s.n - 1) * s.m, s.m) = -v;
    });
    return D;
}

Vec sparse_solve(const SpMat& A, const Vec& b) {
    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(A);
    lu.factorize(A);
    if (lu.info() != Eigen::Success) throw SingularLinearSolve("sparse LU factorization failed: " + lu.lastErrorMessage());
    Vec x = lu.solve(b);
    if (lu.info() != Eigen::Success || !x.allFinite()) throw SingularLinearSolve("sparse LU solve failed");
    return x;
}

}  // namespace percont
