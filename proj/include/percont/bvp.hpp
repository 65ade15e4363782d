#pragma once

#include <functional>
#include <vector>

#include "percont/averaging.hpp"
#include "percont/kernels.hpp"
#include "percont/window.hpp"

namespace percont {

/// Mesh values of all n blocks at M nodes (node-major), with lambda attached.
struct PeriodicSolution {
    int M = 0;
    double lambda = 0.0;
    Vec values;
    double residual_norm = 0.0;
    int iterations = 0;

    MeshFunction as_mesh(double T, int k) const;
};

struct NewtonOptions {
    double tol = 1e-10;
    int max_iter = 25;
    int max_halvings = 40;
    Exec exec = Exec::parallel;
};

struct NewtonResult {
    Vec x;
    double residual_norm = 0.0;
    int iterations = 0;
};

/// Damped Newton in the max norm. Evaluations that throw DomainViolation or
/// EvalError count as rejected steps. A singular Newton system or a stalled
/// iteration throws ConvergenceFailure with the best iterate.
NewtonResult damped_newton(const std::function<Vec(const Vec&)>& residual,
                           const std::function<SpMat(const Vec&)>& jacobian, Vec x0, const NewtonOptions& opt);

Vec residual(const HomotopyFamily& fam, const Vec& X, int M, double lambda, Exec exec = Exec::parallel);
CyclicBlockJacobian jacobian_fd(const HomotopyFamily& fam, const Vec& X, int M, double lambda,
                                Exec exec = Exec::parallel);

PeriodicSolution newton_correct(const HomotopyFamily& fam, const Vec& X0, int M, double lambda,
                                const NewtonOptions& opt = {});

struct StartPoint {
    Vec w;   // zero of the averaged map in Omega_1
    Vec X0;  // (w, 0, ..., 0) at every node
};

/// Zeros of `hhat` in the window box of constants, as constant mesh starts.
/// Throws NoStartingZero.
std::vector<StartPoint> solve_averaged_start(const AveragedMap& hhat, const CyclicSystem& sys, const Window& window,
                                             int M, const degree::SignSumOptions& zopt = {});
std::vector<StartPoint> solve_averaged_start(const CyclicSystem& sys, const Window& window, const QuadratureRule& q,
                                             int M, const degree::SignSumOptions& zopt = {});

/// Constant mesh vector with every node equal to x.
Vec constant_mesh(const Vec& x, int M);

}  // namespace percont
