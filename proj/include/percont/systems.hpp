#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "percont/expr.hpp"
#include "percont/phi.hpp"

namespace percont {

using Vec = Eigen::VectorXd;

/// (t, w in R^m) -> R^m.
using BlockField = std::function<Vec(double t, const Vec& w)>;
/// (t, x in R^{nm}) -> R^m.
using StateField = std::function<Vec(double t, const Vec& x)>;
/// (t, x, lambda) -> R^m.
using DeformField = std::function<Vec(double t, const Vec& x, double lambda)>;
/// (t, x, y) -> R^m with x, y in R^m.
using SecondOrderField = std::function<Vec(double t, const Vec& x, const Vec& y)>;

/// Open box in R^m (bounds may be infinite), optionally intersected with an
/// open Euclidean ball centred at 0.
struct BlockDomain {
    std::vector<double> lo;
    std::vector<double> hi;
    double ball_radius = std::numeric_limits<double>::infinity();

    static BlockDomain whole(int m);
    static BlockDomain ball(int m, double radius);
    bool contains(const Vec& w) const;
};

/// x_i' = g_i(t, x_{i+1}) for i < n, x_n' = h(t, x_1, ..., x_n).
struct CyclicSystem {
    int n = 2;
    int m = 1;
    double T = 1.0;
    std::vector<BlockField> g;  // n - 1 fields
    StateField h;
    std::vector<BlockDomain> domain;  // n blocks

    /// Throws DimensionMismatch or DomainMissingOrigin.
    void validate() const;
    int state_dim() const { return n * m; }
    Vec block(const Vec& x, int i) const { return x.segment(i * m, m); }
    bool contains(const Vec& x) const;
    /// Throws DomainViolation naming the first offending block.
    void require_contains(const Vec& x, double t) const;
};

/// State variable names: x1..xn for m = 1, x{i}_{k} otherwise.
std::vector<std::string> state_variables(int n, int m);
std::vector<std::string> block_variables(int i, int m);  // 1-based block

/// Builds fields from expressions: g_exprs[i] has m components over t and the
/// variables of block i + 2; h_exprs has m components over t and all blocks.
CyclicSystem build_cyclic(int n, int m, double T, const std::vector<std::vector<std::string>>& g_exprs,
                          const std::vector<std::string>& h_exprs, std::vector<BlockDomain> domain);

/// Second-order field from m expressions over t, x (x1..xm) and y (y1..ym).
SecondOrderField parse_second_order_field(const std::vector<std::string>& exprs, int m);
std::vector<std::string> second_order_variables(int m);

/// (phi(t, x'))' = f(t, x, x') as x1' = phi^{-1}(t, x2), x2' = f(t, x1, phi^{-1}(t, x2)).
/// D_2 is the range ball of phi shrunk by 0.999.
CyclicSystem reduce_second_order(const phi::PhiOperator& op, const SecondOrderField& f);
/// g_1 = phi^{-1}, g_j = identity for 1 < j < n, last block h.
CyclicSystem reduce_higher_order(const phi::PhiOperator& op, const StateField& h, int n);

enum class HomotopyKind { scaling, deformation };

std::string to_string(HomotopyKind k);

struct HomotopyFamily {
    CyclicSystem base;
    HomotopyKind kind = HomotopyKind::scaling;
    DeformField h_tilde;  // deformation only
    /// Deformation only. Autonomous for cyclic problems; for reduced
    /// second-order problems it may depend on t through phi^{-1}(t, 0) = 0.
    StateField h0;

    /// Last-block field at lambda.
    Vec last_block(double t, const Vec& x, double lambda) const;
};

struct EndpointCheckOptions {
    int samples = 100;
    double tol = 1e-9;
    std::uint64_t seed = 7;
};

/// Throws EndpointMismatch when the sampled endpoints of h_tilde disagree
/// with h (lambda = 1) or h0 (lambda = 0).
HomotopyFamily make_homotopy(const CyclicSystem& sys, HomotopyKind kind, DeformField h_tilde = {},
                             StateField h0 = {}, const EndpointCheckOptions& opt = {});

/// h_tilde over (t, state variables, lambda); h0 over the state variables only.
HomotopyFamily make_homotopy_from_exprs(const CyclicSystem& sys, HomotopyKind kind,
                                        const std::vector<std::string>& h_tilde_exprs,
                                        const std::vector<std::string>& h0_exprs, const EndpointCheckOptions& opt = {});

/// (g_1(t, x_2), ..., g_{n-1}(t, x_n), last block). Throws DomainViolation.
Vec eval_rhs(const HomotopyFamily& fam, double t, const Vec& x, double lambda);

}  // namespace percont
