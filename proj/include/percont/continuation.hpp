#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "percont/bvp.hpp"
#include "percont/window.hpp"

namespace percont {

/// A branch R(u, lambda) = 0 together with the window it must stay inside.
class BranchProblem {
public:
    virtual ~BranchProblem() = default;
    virtual int size() const = 0;
    virtual Vec residual(const Vec& u, double lambda) const = 0;
    virtual SpMat jacobian(const Vec& u, double lambda) const = 0;
    virtual Vec lambda_derivative(const Vec& u, double lambda) const = 0;
    /// Distance to each window bound, positive inside.
    virtual std::vector<double> margins(const Vec& u) const = 0;
    /// Tolerance band per bound.
    virtual std::vector<double> margin_tols() const = 0;
    /// Reported norms (per-block sup norms).
    virtual std::vector<double> norms(const Vec& u) const = 0;
    virtual std::vector<std::string> norm_names() const = 0;
    /// True where the Jacobian is singular by construction.
    virtual bool degenerate_at(double /*lambda*/) const { return false; }
    /// Weight of the state part in the arclength inner product.
    virtual double weight() const { return 1.0 / size(); }
};

/// Periodic midpoint discretization of a homotopy family on M nodes.
class PeriodicBranch : public BranchProblem {
public:
    PeriodicBranch(HomotopyFamily fam, int M, Window window, Exec exec = Exec::parallel);

    int size() const override;
    Vec residual(const Vec& u, double lambda) const override;
    SpMat jacobian(const Vec& u, double lambda) const override;
    Vec lambda_derivative(const Vec& u, double lambda) const override;
    std::vector<double> margins(const Vec& u) const override;
    std::vector<double> margin_tols() const override;
    std::vector<double> norms(const Vec& u) const override;
    std::vector<std::string> norm_names() const override;
    bool degenerate_at(double lambda) const override;

    const HomotopyFamily& family() const { return fam_; }
    int mesh_size() const { return M_; }
    const Window& window() const { return window_; }

private:
    HomotopyFamily fam_;
    int M_;
    Window window_;
    Exec exec_;
};

using AlgebraicMap = std::function<Vec(const Vec& x, double lambda)>;

/// f(x, lambda) = 0 in R^k inside the open box ]lo, hi[.
class AlgebraicBranch : public BranchProblem {
public:
    AlgebraicBranch(AlgebraicMap f, int k, std::vector<double> lo, std::vector<double> hi);

    int size() const override { return k_; }
    Vec residual(const Vec& u, double lambda) const override;
    SpMat jacobian(const Vec& u, double lambda) const override;
    Vec lambda_derivative(const Vec& u, double lambda) const override;
    std::vector<double> margins(const Vec& u) const override;
    std::vector<double> margin_tols() const override;
    std::vector<double> norms(const Vec& u) const override;
    std::vector<std::string> norm_names() const override;

private:
    AlgebraicMap f_;
    int k_;
    std::vector<double> lo_, hi_;
};

enum class TraceStatus { reached_target, boundary_exit, fold_detected, step_failure };

std::string to_string(TraceStatus s);

enum class ContinuationMode { natural, arclength };

std::string to_string(ContinuationMode m);
ContinuationMode continuation_mode_from_string(const std::string& s);

struct TracePoint {
    double lambda = 0.0;
    Vec values;
    double step = 0.0;  // lambda step (natural) or arclength step
    double residual_norm = 0.0;
    std::vector<double> norms;
};

struct ContinuationTrace {
    ContinuationMode mode = ContinuationMode::natural;
    std::vector<TracePoint> points;
    TraceStatus status = TraceStatus::step_failure;
    /// Event parameter: exit, fold, or last accepted lambda.
    double lambda_star = 0.0;
    /// BoundaryExit: 0-based bound index (an index past the blocks is the derivative bound).
    int exit_bound = -1;
    double exit_margin = 0.0;
    /// Solution at the exit or fold event; not part of `points`.
    std::optional<TracePoint> event_point;
    bool used_fallback = false;
    std::string detail;
    std::vector<std::string> norm_names;

    double max_lambda() const;
};

struct ContinuationOptions {
    double lambda_step0 = 0.02;
    double step_min = 1e-6;
    double step_max = 0.1;
    double target = 1.0;
    double ds0 = 0.02;
    double ds_min = 1e-6;
    double ds_max = 0.1;
    int max_steps = 2000;
    /// After a natural StepFailure, retry once in arclength mode.
    bool arclength_fallback = false;
    int max_bisections = 40;
    double bisection_tol = 1e-8;
    NewtonOptions newton{};
};

ContinuationTrace continue_natural(const BranchProblem& prob, const Vec& u0, double lambda0,
                                   const ContinuationOptions& opt = {});
ContinuationTrace continue_arclength(const BranchProblem& prob, const Vec& u0, double lambda0,
                                     const ContinuationOptions& opt = {});
ContinuationTrace trace_branch(const BranchProblem& prob, const Vec& u0, double lambda0, ContinuationMode mode,
                               const ContinuationOptions& opt = {});

/// Starts from x0 at lambda = 0; throws Error if |f(x0, 0)| exceeds 1e-8.
ContinuationTrace algebraic_continue(const AlgebraicMap& f, const Vec& x0, const std::vector<double>& lo,
                                     const std::vector<double>& hi, ContinuationMode mode,
                                     const ContinuationOptions& opt = {});

/// First bound whose sup norm is within boundary_tol of its limit, with the signed margin.
std::optional<BoundaryHit> detect_boundary_exit(const PeriodicSolution& sol, const CyclicSystem& sys,
                                                const Window& window);

/// Sup over nodes of the Euclidean norm of each block.
std::vector<double> block_sup_norms(const Vec& X, int M, int n, int m);

}  // namespace percont
