// Test-side reference formulas, kept independent of the library code paths.
#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Vec = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

/// Cofactor expansion; fine for the small matrices in tests.
inline double det(const Eigen::MatrixXd& a) {
    const Eigen::Index n = a.rows();
    if (n == 1) return a(0, 0);
    if (n == 2) return a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    double s = 0.0;
    for (Eigen::Index c = 0; c < n; ++c) {
        Eigen::MatrixXd minor(n - 1, n - 1);
        for (Eigen::Index i = 1; i < n; ++i)
            for (Eigen::Index j = 0, k = 0; j < n; ++j)
                if (j != c) minor(i - 1, k++) = a(i, j);
        s += ((c % 2 == 0) ? 1.0 : -1.0) * a(0, c) * det(minor);
    }
    return s;
}

inline int sign(double v) { return (v > 0.0) - (v < 0.0); }

/// Winding number of t -> f(gamma(t)) around 0 by dense angle accumulation.
inline int winding_dense(const std::function<Vec(const Vec&)>& f, double lo0, double hi0, double lo1, double hi1,
                         int per_edge = 2500) {
    std::vector<Vec> pts;
    auto edge = [&](double ax, double ay, double bx, double by) {
        for (int k = 0; k < per_edge; ++k) {
            const double s = static_cast<double>(k) / per_edge;
            Vec p(2);
            p << ax + s * (bx - ax), ay + s * (by - ay);
            pts.push_back(p);
        }
    };
    edge(lo0, lo1, hi0, lo1);
    edge(hi0, lo1, hi0, hi1);
    edge(hi0, hi1, lo0, hi1);
    edge(lo0, hi1, lo0, lo1);
    double total = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const Vec a = f(pts[i]);
        const Vec b = f(pts[(i + 1) % pts.size()]);
        total += std::atan2(a[0] * b[1] - a[1] * b[0], a[0] * b[0] + a[1] * b[1]);
    }
    return static_cast<int>(std::lround(total / (2.0 * kPi)));
}

/// Arithmetic mean of f at N equispaced points of [0, T); exact for trig
/// polynomials of degree below N.
inline double periodic_mean(const std::function<double(double)>& f, double T, int N = 4096) {
    double s = 0.0;
    for (int j = 0; j < N; ++j) s += f(T * j / N);
    return s / N;
}

/// x(t) = a0 + sum_k a_k cos(2 pi k t) + b_k sin(2 pi k t) with T = 1.
struct TrigPath {
    double a0 = 0.0;
    std::vector<double> a, b;

    double x(double t) const {
        double v = a0;
        for (std::size_t k = 0; k < a.size(); ++k) {
            const double w = 2.0 * kPi * static_cast<double>(k + 1);
            v += a[k] * std::cos(w * t) + b[k] * std::sin(w * t);
        }
        return v;
    }
    double dx(double t) const {
        double v = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) {
            const double w = 2.0 * kPi * static_cast<double>(k + 1);
            v += w * (-a[k] * std::sin(w * t) + b[k] * std::cos(w * t));
        }
        return v;
    }
};

/// Random path with max |x'| kept below `slope` so it fits Minkowski domains.
inline TrigPath random_path(std::mt19937_64& rng, int modes, double slope) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    TrigPath p;
    p.a0 = 0.3 * u(rng);
    double bound = 0.0;
    for (int k = 1; k <= modes; ++k) {
        p.a.push_back(u(rng) / k);
        p.b.push_back(u(rng) / k);
        bound += 2.0 * kPi * k * (std::abs(p.a.back()) + std::abs(p.b.back()));
    }
    const double scale = slope / bound;
    for (std::size_t k = 0; k < p.a.size(); ++k) {
        p.a[k] *= scale;
        p.b[k] *= scale;
    }
    return p;
}

/// Manufactured solution x*(t) = 0.1 sin(2 pi t) of (phi(x'))' = c(t) + x - x*
/// with phi(y) = y / sqrt(1 - y^2).
inline double xstar(double t) { return 0.1 * std::sin(2.0 * kPi * t); }
inline double dxstar(double t) { return 0.2 * kPi * std::cos(2.0 * kPi * t); }
inline double minkowski(double y) { return y / std::sqrt(1.0 - y * y); }
inline double minkowski_inv(double z) { return z / std::sqrt(1.0 + z * z); }

}  // namespace oracle
