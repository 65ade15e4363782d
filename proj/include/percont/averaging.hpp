#pragma once

#include <functional>
#include <vector>

#include "percont/parallel.hpp"
#include "percont/quadrature.hpp"
#include "percont/systems.hpp"

namespace percont {

/// M samples of a T-periodic R^k valued function at t_j = j T / M, stored
/// node-major. Node M is node 0 and is not stored.
struct MeshFunction {
    int M = 0;
    double T = 1.0;
    int k = 1;
    std::vector<double> values;

    MeshFunction() = default;
    MeshFunction(int M_, double T_, int k_);
    static MeshFunction sample(int M, double T, int k, const std::function<Vec(double)>& f);

    double dt() const { return T / M; }
    double t(int j) const { return j * T / M; }
    double& at(int j, int c) { return values[static_cast<std::size_t>(j) * k + c]; }
    double at(int j, int c) const { return values[static_cast<std::size_t>(j) * k + c]; }
    Vec node(int j) const;
    void set_node(int j, const Vec& v);
    /// Throws if M < 4 or a value is not finite.
    void validate() const;
};

using AveragedMap = std::function<Vec(const Vec&)>;

/// Arithmetic mean of the nodes (the periodic trapezoid mean).
Vec mean_value(const MeshFunction& z);

/// Cumulative trapezoid integral shifted to zero mean. Throws NonZeroMeanInput
/// when |mean(z)| exceeds tol.
MeshFunction zero_mean_antiderivative(const MeshFunction& z, double tol = 1e-9);

/// w -> (1/T) int_0^T g(t, w) dt. Field errors are rethrown with the time.
AveragedMap averaged_field(const BlockField& g, double T, const QuadratureRule& q);

/// g_i^# for the 1-based block index i < n.
AveragedMap g_sharp(const CyclicSystem& sys, int i, const QuadratureRule& q);
/// h^#(s_1, ..., s_n).
AveragedMap h_sharp(const CyclicSystem& sys, const QuadratureRule& q);
/// hat h(w) = h^#(w, 0, ..., 0). Throws DomainViolation if (w, 0, ..., 0) is outside D.
AveragedMap h_hat(const CyclicSystem& sys, const QuadratureRule& q);
/// hat h_0(w) = h_0(w, 0, ..., 0) for a deformation family.
AveragedMap h0_hat(const HomotopyFamily& fam);
/// l(s) = -(g_1^#(s_2), ..., g_{n-1}^#(s_n), h^#(s)).
AveragedMap ell_map(const CyclicSystem& sys, const QuadratureRule& q);

/// Nemytskii operator N on the mesh, at lambda for a homotopy family.
MeshFunction nemytskii(const HomotopyFamily& fam, const MeshFunction& x, double lambda, Exec exec = Exec::parallel);

/// Phi(x) = P x + Q N(x) + K (N(x) - Q N(x)), with J the identity.
MeshFunction mawhin_operator(const HomotopyFamily& fam, const MeshFunction& x, double lambda,
                             Exec exec = Exec::parallel);
MeshFunction mawhin_operator(const CyclicSystem& sys, const MeshFunction& x, Exec exec = Exec::parallel);

}  // namespace percont
