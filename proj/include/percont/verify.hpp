#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "percont/averaging.hpp"
#include "percont/bvp.hpp"
#include "percont/check.hpp"
#include "percont/continuation.hpp"
#include "percont/degree.hpp"
#include "percont/phi.hpp"
#include "percont/window.hpp"

namespace percont::verify {

struct H2Options {
    int grid_per_axis = 41;
    double tol = 1e-9;        // |g_i(t, 0)| bound
    double zero_tol = 1e-8;   // a w != 0 with max_t |g_i(t, w)| below this is a common zero
    int extra_times = 17;     // pseudo-random times beyond the quadrature nodes
    int pool = 48;            // samples for the injectivity test of g_i^#
    double tol_collision = 1e-8;
    std::uint64_t seed = 31;
    Exec exec = Exec::parallel;
};

/// Entries h2_origin, h2_zero, h2_injective.
CheckReport check_h2(const CyclicSystem& sys, const Window& window, const QuadratureRule& q, const H2Options& opt = {});

struct H34Options {
    double tol = 1e-9;
    int boundary_samples = 0;  // per axis; 0 picks by dimension
    degree::DegreeOptions degree{};
    degree::SignSumOptions zeros{};
};

/// Entries h3 (boundary clearance proxy, heuristic) and h4 (degree).
CheckReport check_h3_h4(const AveragedMap& hhat, const Window& window, const H34Options& opt = {},
                        std::vector<Vec>* zeros_out = nullptr);
CheckReport check_h3_h4(const CyclicSystem& sys, const Window& window, const QuadratureRule& q,
                        const H34Options& opt = {});

struct ProductFormula {
    int direct = 0;           // deg(l, Omega cap ker L)
    int eta_product = 0;      // (-1)^{m(n+1)} deg(eta_n) prod deg(eta_i)
    int theorem_product = 0;  // (-1)^m deg(hat h) prod deg(g_i^#)
    bool certified = false;   // every degree certified
    int deg_hhat = 0;
    std::vector<int> deg_g;
    std::vector<int> deg_eta;
    degree::DegreeResult direct_result;
};

/// Computes the three integers and throws MismatchDetected unless they agree.
ProductFormula product_formula_check(const CyclicSystem& sys, const Window& window, const QuadratureRule& q,
                                     const degree::DegreeOptions& opt = {});
CheckEntry product_formula_entry(const ProductFormula& pf);
/// product_formula_check as a report entry: a mismatch or an undefined degree
/// (zero on the boundary, refinement exhausted) becomes a failing entry.
CheckEntry product_formula_report(const CyclicSystem& sys, const Window& window, const QuadratureRule& q,
                                  const degree::DegreeOptions& opt, std::optional<ProductFormula>& out);

struct RunOptions {
    int M = 128;
    QuadratureRule q{};
    ContinuationMode mode = ContinuationMode::natural;
    ContinuationOptions continuation = [] {
        ContinuationOptions c;
        c.arclength_fallback = true;
        return c;
    }();
    H2Options h2{};
    H34Options h34{};
    degree::DegreeOptions degree{};
    phi::PhiCheckOptions phi{};
    bool product_check = true;
    Exec exec = Exec::parallel;
};

struct SecondOrderSolution {
    MeshFunction x;
    MeshFunction dx;
    /// Max over edges of the recovered second-order midpoint residual.
    double residual = 0.0;
};

struct RunResult {
    std::string theorem;
    CheckReport hypotheses;
    std::optional<ProductFormula> product;
    std::vector<StartPoint> starts;
    std::vector<ContinuationTrace> traces;
    std::vector<PeriodicSolution> solutions;  // lambda = 1
    std::vector<SecondOrderSolution> recovered;
    std::string stop_reason;

    /// Hypotheses pass and some trace reached lambda = 1.
    bool pass() const;
};

RunResult run_theorem31(const HomotopyFamily& fam, const Window& window, const RunOptions& opt = {});
RunResult run_theorem32(const HomotopyFamily& fam, const Window& window, const RunOptions& opt = {});

struct SecondOrderDeformation {
    /// f_tilde(t, x, y, lambda).
    std::function<Vec(double t, const Vec& x, const Vec& y, double lambda)> f_tilde;
    /// f_0(x, y), autonomous.
    std::function<Vec(const Vec& x, const Vec& y)> f0;
};

/// Throws PhiChecksFailed when (phi1)-(phi4) or both (phi*) and (phi#) fail.
RunResult run_theorem41(const phi::PhiOperator& op, const SecondOrderField& f, Window window,
                        const RunOptions& opt = {}, const std::optional<SecondOrderDeformation>& deform = {});

/// Checks (phi1)-(phi4), then (phi#) when a factorization exists, else (phi*).
CheckReport phi_hypotheses(const phi::PhiOperator& op, const QuadratureRule& q, const phi::PhiCheckOptions& opt);

/// Recovers x = x_1 and x' = phi^{-1}(t, x_2) and evaluates
/// (phi(t_{j+1}, x'_{j+1}) - phi(t_j, x'_j)) / dt - f at every edge midpoint.
SecondOrderSolution recover_second_order(const phi::PhiOperator& op, const SecondOrderField& f,
                                         const PeriodicSolution& sol, double lambda);

}  // namespace percont::verify
