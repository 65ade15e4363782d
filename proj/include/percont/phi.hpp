#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "percont/check.hpp"
#include "percont/expr.hpp"
#include "percont/parallel.hpp"
#include "percont/quadrature.hpp"

namespace percont::phi {

using Vec = Eigen::VectorXd;
using PointFn = std::function<Vec(double t, const Vec& s)>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// phi^{-1}(t, s) = sigma(t, s) * tau(s).
struct Factorization {
    std::function<double(double t, const Vec& s)> sigma;
    std::function<Vec(const Vec& s)> tau;
};

/// A time-dependent homeomorphism phi(t, .) : U -> V, with U and V open
/// balls centred at 0 (radius possibly infinite).
struct PhiOperator {
    std::string name;
    int m = 1;
    double T = 1.0;
    PointFn forward;
    std::optional<PointFn> inverse;  // empty: damped Newton
    double domain_radius = kInf;
    double range_radius = kInf;
    std::optional<Factorization> factorization;
    /// phi(t, s) = psi(t, |s|) s / |s| with psi increasing in |s|.
    bool radial = false;
    /// k with phi^{-1}(t, c z) = c^k phi^{-1}(t, z) for c > 0, when known.
    std::optional<double> inverse_homogeneity;
};

// Catalog.
PhiOperator identity(int m, double T);
PhiOperator p_laplacian(double p, int m, double T);
/// p given as an expression in `t`; q(t) = p(t) / (p(t) - 1) pointwise.
PhiOperator pt_laplacian(const expr::Expression& p_of_t, int m, double T);
PhiOperator mean_curvature(int m, double T);
PhiOperator minkowski(int m, double T);
/// m = 2: R(2 pi t / T) s.
PhiOperator rotation(double T);
/// m = 2: (s1, s2) -> (-s2, -s1).
PhiOperator swap_negate(double T);
/// eta(t) * inner(t, s), eta an expression in `t` that must stay positive.
PhiOperator scaled(const expr::Expression& eta_of_t, const PhiOperator& inner);
/// Forward components over (t, s1..sm); optional inverse components over (t, z1..zm).
PhiOperator custom(const std::vector<expr::Expression>& forward, const std::vector<expr::Expression>& inverse,
                   double T, double domain_radius = kInf, double range_radius = kInf);

/// Variable lists used by `custom`.
std::vector<std::string> forward_variables(int m);
std::vector<std::string> inverse_variables(int m);

std::vector<std::string> catalog_names();

struct InverseOptions {
    double tol = 1e-12;
    int max_iter = 60;
};

/// Throws DomainViolation when |s| >= domain_radius or the value is not finite.
Vec phi_eval(const PhiOperator& op, double t, const Vec& s);
/// Throws RangeViolation when |z| >= range_radius, NewtonDivergence on failure.
Vec phi_inverse(const PhiOperator& op, double t, const Vec& z, const InverseOptions& opt = {});

struct PhiCheckOptions {
    int t_count = 32;
    int s_count = 32;
    double tol = 1e-9;
    int pair_count = 256;
    double tol_collision = 1e-8;
    std::uint64_t seed = 20240521;
    Exec exec = Exec::parallel;
};

/// Entries phi1..phi4.
CheckReport check_phi_axioms(const PhiOperator& op, const PhiCheckOptions& opt = {});
/// Entry phi_star: sampled injectivity of Psi(s) = mean over t of phi^{-1}(t, s).
CheckReport check_phi_star(const PhiOperator& op, const QuadratureRule& q, const PhiCheckOptions& opt = {});
/// Entry phi_sharp. Throws MissingFactorization.
CheckReport check_phi_sharp(const PhiOperator& op, const PhiCheckOptions& opt = {});
/// Entries H1 (monotonicity) and H2 (coercivity).
CheckReport check_legacy_monotone_coercive(const PhiOperator& op, const PhiCheckOptions& opt = {});

/// Sample points of the open ball of radius r in R^m: a symmetric grid for
/// m = 1, seeded uniform draws otherwise. Always contains 0 first.
std::vector<Vec> ball_samples(int m, double r, int count, std::uint64_t seed);

}  // namespace percont::phi
