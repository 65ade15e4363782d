#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "percont/degree.hpp"

namespace percont {

using Vec = Eigen::VectorXd;

/// Numerical stand-in for the open set Omega: per-block sup-norm bounds, the
/// box of constants (w, 0, ..., 0), and an optional derivative bound.
struct Window {
    std::vector<double> rho;  // max_t |x_i(t)| < rho[i]
    std::vector<double> omega1_lo;
    std::vector<double> omega1_hi;
    std::optional<double> derivative_bound;
    /// |x'(t)| recovered from the state, required with derivative_bound.
    std::function<double(double t, const Vec& x)> derivative_norm;
    double boundary_tol_factor = 1e-8;

    /// Throws Error naming the offending field.
    void validate(int n, int m) const;
    degree::Region omega1() const;
    degree::Box omega1_box() const;
    /// Box ]-rho_i, rho_i[^m of block i (0-based).
    degree::Box block_box(int i, int m) const;
};

struct BoundaryHit {
    int block = 0;  // 0-based; n denotes the derivative bound
    double margin = 0.0;
    bool derivative = false;
};

}  // namespace percont
