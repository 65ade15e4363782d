#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "percont/continuation.hpp"
#include "percont/phi.hpp"
#include "percont/systems.hpp"
#include "percont/verify.hpp"
#include "percont/window.hpp"

namespace percont::config {

using Json = nlohmann::ordered_json;

enum class ProblemKind { cyclic, second_order, higher_order, algebraic };

std::string to_string(ProblemKind k);

struct HomotopyConfig {
    HomotopyKind kind = HomotopyKind::scaling;
    std::vector<std::string> h_tilde;  // cyclic / higher order: (t, state, lambda)
    std::vector<std::string> h0;       // cyclic / higher order: state
    std::vector<std::string> f_tilde;  // second order: (t, x, y, lambda)
    std::vector<std::string> f0;       // second order: (x, y)
};

struct AlgebraicConfig {
    std::vector<std::string> f;  // over x (or x1..xk) and lambda
    std::vector<double> x0;
    std::vector<double> lo;
    std::vector<double> hi;
};

struct NumericsConfig {
    int M = 128;
    int quad_panels = 256;
    QuadratureKind quad_kind = QuadratureKind::composite_simpson;
    std::uint64_t seed = 20240521;
    ContinuationMode mode = ContinuationMode::natural;
    double newton_tol = 1e-10;
    int newton_max_iter = 25;
    double lambda_step0 = 0.02;
    double step_min = 1e-6;
    double step_max = 0.1;
    double ds0 = 0.02;
    double ds_min = 1e-6;
    double ds_max = 0.1;
    int max_steps = 2000;
    bool arclength_fallback = true;
    double hypothesis_tol = 1e-9;
    bool product_check = true;
};

struct DegreeConfig {
    double zero_tol = 1e-9;
    int winding_samples = 64;
    int winding_refine = 20;
    int starts_per_axis = 0;
};

struct ProblemConfig {
    std::string id;
    ProblemKind kind = ProblemKind::cyclic;
    int n = 2;
    int m = 1;
    double T = 1.0;
    std::vector<std::vector<std::string>> g;
    std::vector<std::string> h;
    std::vector<std::string> f;
    /// Normalized operator spec: {"name": ..., parameters}.
    Json phi;
    HomotopyConfig homotopy;
    std::vector<BlockDomain> domain;  // empty: whole space
    Window window;
    AlgebraicConfig algebraic;
    NumericsConfig numerics;
    DegreeConfig degree;
};

/// Throws ConfigError naming the offending key.
ProblemConfig load_config(const std::filesystem::path& path);
/// Raw JSON document; throws ConfigError on I/O or syntax errors.
Json read_json(const std::filesystem::path& path);
ProblemConfig parse_config(const Json& doc);

/// Echo of the config with every default filled in.
Json to_json(const ProblemConfig& cfg);

/// Operator from a spec: a string such as "p_laplacian(3)" or an object {"name": ...}.
phi::PhiOperator build_phi(const Json& spec, int m, double T, const std::string& key = "phi");
/// Normalized object form of a spec.
Json normalize_phi(const Json& spec, const std::string& key = "phi");

/// Problem objects built from a config.
CyclicSystem build_system(const ProblemConfig& cfg);
HomotopyFamily build_family(const ProblemConfig& cfg);
SecondOrderField build_second_order_field(const ProblemConfig& cfg);
std::optional<verify::SecondOrderDeformation> build_second_order_deformation(const ProblemConfig& cfg);
AlgebraicMap build_algebraic(const ProblemConfig& cfg);
/// Window with the derivative probe wired for reduced problems.
Window build_window(const ProblemConfig& cfg);

QuadratureRule quadrature(const ProblemConfig& cfg);
ContinuationOptions continuation_options(const ProblemConfig& cfg);
degree::DegreeOptions degree_options(const ProblemConfig& cfg);
verify::RunOptions run_options(const ProblemConfig& cfg);

}  // namespace percont::config
