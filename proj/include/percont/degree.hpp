#pragma once

#include <array>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "percont/errors.hpp"
#include "percont/parallel.hpp"

namespace percont::degree {

using Vec = Eigen::VectorXd;
using Map = std::function<Vec(const Vec&)>;
using ScalarMap = std::function<double(double)>;

struct Interval {
    double a = -1.0;
    double b = 1.0;
};

struct Box {
    std::vector<double> lo;
    std::vector<double> hi;

    int dimension() const { return static_cast<int>(lo.size()); }
    bool contains_open(const Vec& x) const;
};

/// Convex, positively oriented polygon in the plane.
struct Polygon {
    std::vector<std::array<double, 2>> vertices;
};

class Region {
public:
    static Region interval(double a, double b);
    static Region box(std::vector<double> lo, std::vector<double> hi);
    static Region polygon(std::vector<std::array<double, 2>> vertices);

    int dimension() const;
    const std::variant<Interval, Box, Polygon>& shape() const noexcept { return shape_; }

    /// Axis-aligned box view; intervals become 1-D boxes. Throws for polygons.
    Box as_box() const;
    /// Closed boundary loop for planar regions, counter-clockwise.
    std::vector<std::array<double, 2>> boundary_loop() const;

private:
    explicit Region(std::variant<Interval, Box, Polygon> s) : shape_(std::move(s)) {}
    std::variant<Interval, Box, Polygon> shape_;
};

enum class Method { sign_1d, winding_2d, sign_sum };

std::string to_string(Method m);

struct DegreeResult {
    int value = 0;
    Method method = Method::sign_1d;
    bool certified = false;
    double boundary_min_norm = 0.0;
};

struct WindingOptions {
    int init_samples = 64;  // segments per boundary edge before refinement
    int max_refine = 20;    // bisection depth per segment
    double zero_tol = 1e-9;
    Exec exec = Exec::parallel;
};

struct SignSumOptions {
    int starts_per_axis = 0;  // 0: chosen from the dimension
    double newton_tol = 1e-10;
    int max_newton_iter = 60;
    double cluster_radius = 1e-6;  // max-norm
    double zero_tol = 1e-9;
    double singular_rcond = 1e-6;
    int boundary_samples_per_axis = 0;  // 0: chosen from the dimension
    Exec exec = Exec::parallel;
};

struct DegreeOptions {
    double zero_tol = 1e-9;
    WindingOptions winding{};
    SignSumOptions sign_sum{};
};

/// Results with boundary_min_norm below this multiple of zero_tol are never certified.
inline constexpr double kCertifyFactor = 1e3;

DegreeResult degree_1d(const ScalarMap& f, const Region& interval, double zero_tol = 1e-9);

DegreeResult degree_winding_2d(const Map& f, const Region& region, const WindingOptions& opts = {});

/// Heuristic: sum of Jacobian signs over the zeros found by multistart Newton.
/// If a zero is degenerate, the count is repeated for a small regular value
/// near 0 (same degree while it stays below the boundary norm).
DegreeResult degree_sign_sum(const Map& f, const Region& box, const SignSumOptions& opts = {});

/// Dimension 1: sign_1d; 2: winding_2d; 3 and up: sign_sum.
DegreeResult brouwer_degree(const Map& f, const Region& region, const DegreeOptions& opts = {});

/// Multistart damped Newton. Returns zeros strictly inside the box, clustered
/// at `cluster_radius` and sorted lexicographically.
std::vector<Vec> find_zeros(const Map& f, const Box& box, const SignSumOptions& opts = {});

/// Central finite-difference Jacobian with step rel_step * max(1, |x_k|).
Eigen::MatrixXd fd_jacobian(const Map& f, const Vec& x, double rel_step = 1e-6);

/// Minimum |f| on a sampled boundary of the box (face grids).
double sampled_boundary_min_norm(const Map& f, const Box& box, int samples_per_axis, Exec exec);

/// Adapts a scalar function to the vector interface.
Map lift(const ScalarMap& f);

}  // namespace percont::degree
