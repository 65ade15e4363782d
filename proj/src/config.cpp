#include "percont/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <regex>
#include <set>
#include <sstream>

#include "percont/errors.hpp"

namespace percont::config {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

std::string index_key(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

void require_object(const Json& v, const std::string& path) {
    if (!v.is_object()) throw ConfigError(path, "expected an object");
}

void require_keys(const Json& obj, const std::string& path, const std::set<std::string>& allowed) {
    require_object(obj, path);
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key())) throw ConfigError(join(path, it.key()), "unknown key");
}

double as_number(const Json& v, const std::string& key, bool allow_null = false) {
    if (allow_null && v.is_null()) return kInf;
    if (!v.is_number()) throw ConfigError(key, allow_null ? "expected a number or null" : "expected a number");
    return v.get<double>();
}

int as_int(const Json& v, const std::string& key) {
    if (!v.is_number_integer()) throw ConfigError(key, "expected an integer");
    return v.get<int>();
}

std::string as_string(const Json& v, const std::string& key) {
    if (!v.is_string()) throw ConfigError(key, "expected a string");
    return v.get<std::string>();
}

bool as_bool(const Json& v, const std::string& key) {
    if (!v.is_boolean()) throw ConfigError(key, "expected a boolean");
    return v.get<bool>();
}

// A number is accepted where a list of length one is expected.
std::vector<double> number_list(const Json& v, const std::string& key, bool allow_null = false) {
    if (v.is_number() || v.is_null()) return {as_number(v, key, allow_null)};
    if (!v.is_array()) throw ConfigError(key, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_number(v[i], index_key(key, i), allow_null));
    return out;
}

// A string is accepted where a list of length one is expected.
std::vector<std::string> component_list(const Json& v, const std::string& key, int m) {
    std::vector<std::string> out;
    if (v.is_string()) {
        out.push_back(v.get<std::string>());
    } else if (v.is_array()) {
        for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_string(v[i], index_key(key, i)));
    } else {
        throw ConfigError(key, "expected an expression or an array of expressions");
    }
    if (static_cast<int>(out.size()) != m)
        throw ConfigError(key, "expected " + std::to_string(m) + " components, got " + std::to_string(out.size()));
    return out;
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json numbers_or_null(const std::vector<double>& v) {
    Json a = Json::array();
    for (double x : v) a.push_back(number_or_null(x));
    return a;
}

struct Components {
    std::vector<expr::Expression> comps;

    Vec operator()(const std::vector<double>& values) const {
        Vec out(static_cast<Eigen::Index>(comps.size()));
        for (std::size_t i = 0; i < comps.size(); ++i) out[static_cast<Eigen::Index>(i)] = comps[i].evaluate(values);
        return out;
    }
};

std::shared_ptr<const Components> compile(const std::vector<std::string>& src, const std::vector<std::string>& vars,
                                          const std::string& key) {
    auto c = std::make_shared<Components>();
    for (std::size_t i = 0; i < src.size(); ++i) {
        try {
            c->comps.push_back(expr::Expression::parse(src[i], vars));
        } catch (const ParseError& e) {
            throw ConfigError(index_key(key, i), e.what());
        }
    }
    return c;
}

std::vector<double> values_of(double t, const Vec& x) {
    std::vector<double> v{t};
    v.insert(v.end(), x.data(), x.data() + x.size());
    return v;
}

std::vector<std::string> with_time(std::vector<std::string> vars) {
    vars.insert(vars.begin(), "t");
    return vars;
}

// x1..xm, y1..ym and the aliases x, y when m = 1.
std::vector<std::string> xy_variables(int m) {
    std::vector<std::string> v = second_order_variables(m);
    v.erase(v.begin());
    return v;
}

std::vector<double> xy_values(const Vec& x, const Vec& y) {
    std::vector<double> v(x.data(), x.data() + x.size());
    v.insert(v.end(), y.data(), y.data() + y.size());
    if (x.size() == 1) {
        v.push_back(x[0]);
        v.push_back(y[0]);
    }
    return v;
}

std::vector<std::string> algebraic_variables(int k) {
    std::vector<std::string> v;
    for (int i = 1; i <= k; ++i) v.push_back("x" + std::to_string(i));
    if (k == 1) v.push_back("x");
    v.push_back("lambda");
    return v;
}

void parse_phi_object(const Json& spec, const std::string& key, Json& out);

Json phi_from_string(const std::string& text, const std::string& key) {
    static const std::regex re(R"(^\s*([a-z_]+)\s*(?:\((.*)\))?\s*$)");
    std::smatch mt;
    if (!std::regex_match(text, mt, re)) throw ConfigError(key, "cannot parse operator '" + text + "'");
    const std::string name = mt[1];
    const std::string arg = mt[2];
    Json obj{{"name", name}};
    if (name == "p_laplacian") {
        try {
            std::size_t used = 0;
            obj["p"] = std::stod(arg, &used);
            if (arg.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(arg);
        } catch (const std::exception&) {
            throw ConfigError(key, "p_laplacian needs a numeric exponent, got '" + arg + "'");
        }
    } else if (name == "pt_laplacian") {
        obj["p"] = arg;
    } else if (!arg.empty()) {
        throw ConfigError(key, "operator '" + name + "' takes no arguments in string form");
    }
    Json out;
    parse_phi_object(obj, key, out);
    return out;
}

std::string valid_names() {
    std::string s;
    for (const auto& n : phi::catalog_names()) s += (s.empty() ? "" : ", ") + n;
    return s;
}

void parse_phi_object(const Json& spec, const std::string& key, Json& out) {
    require_object(spec, key);
    if (!spec.contains("name")) throw ConfigError(join(key, "name"), "missing operator name");
    const std::string name = as_string(spec["name"], join(key, "name"));
    out = Json{{"name", name}};
    if (name == "identity" || name == "minkowski" || name == "mean_curvature" || name == "rotation" ||
        name == "swap_negate") {
        require_keys(spec, key, {"name"});
    } else if (name == "p_laplacian") {
        require_keys(spec, key, {"name", "p"});
        if (!spec.contains("p")) throw ConfigError(join(key, "p"), "missing exponent");
        const double p = as_number(spec["p"], join(key, "p"));
        if (!(p > 1.0)) throw ConfigError(join(key, "p"), "exponent must exceed 1");
        out["p"] = p;
    } else if (name == "pt_laplacian") {
        require_keys(spec, key, {"name", "p"});
        if (!spec.contains("p")) throw ConfigError(join(key, "p"), "missing exponent expression");
        out["p"] = spec["p"].is_number() ? std::to_string(spec["p"].get<double>()) : as_string(spec["p"], join(key, "p"));
    } else if (name == "scaled") {
        require_keys(spec, key, {"name", "eta", "inner"});
        if (!spec.contains("eta") || !spec.contains("inner")) throw ConfigError(key, "scaled needs eta and inner");
        out["eta"] = as_string(spec["eta"], join(key, "eta"));
        out["inner"] = normalize_phi(spec["inner"], join(key, "inner"));
    } else if (name == "custom") {
        require_keys(spec, key, {"name", "forward", "inverse", "domain_radius", "range_radius"});
        if (!spec.contains("forward")) throw ConfigError(join(key, "forward"), "missing forward expressions");
        const Json& fw = spec["forward"];
        out["forward"] = fw.is_string() ? Json::array({fw}) : fw;
        out["inverse"] = spec.contains("inverse")
                             ? (spec["inverse"].is_string() ? Json::array({spec["inverse"]}) : spec["inverse"])
                             : Json::array();
        out["domain_radius"] = spec.contains("domain_radius") ? spec["domain_radius"] : Json(nullptr);
        out["range_radius"] = spec.contains("range_radius") ? spec["range_radius"] : Json(nullptr);
    } else {
        throw ConfigError(join(key, "name"), "unknown operator '" + name + "'; valid names: " + valid_names());
    }
}

Json parse_homotopy(const Json& v, ProblemConfig& cfg) {
    require_keys(v, "homotopy", {"kind", "h_tilde", "h0", "f_tilde", "f0"});
    HomotopyConfig& h = cfg.homotopy;
    const std::string kind = v.contains("kind") ? as_string(v["kind"], "homotopy.kind") : "scaling";
    if (kind == "scaling") {
        h.kind = HomotopyKind::scaling;
    } else if (kind == "deformation") {
        h.kind = HomotopyKind::deformation;
    } else {
        throw ConfigError("homotopy.kind", "expected scaling or deformation");
    }
    if (h.kind == HomotopyKind::deformation) {
        if (cfg.kind == ProblemKind::second_order) {
            if (!v.contains("f_tilde") || !v.contains("f0"))
                throw ConfigError("homotopy", "second-order deformation needs f_tilde and f0");
            h.f_tilde = component_list(v["f_tilde"], "homotopy.f_tilde", cfg.m);
            h.f0 = component_list(v["f0"], "homotopy.f0", cfg.m);
        } else {
            if (!v.contains("h_tilde") || !v.contains("h0"))
                throw ConfigError("homotopy", "deformation needs h_tilde and h0");
            h.h_tilde = component_list(v["h_tilde"], "homotopy.h_tilde", cfg.m);
            h.h0 = component_list(v["h0"], "homotopy.h0", cfg.m);
        }
    }
    return v;
}

void parse_window(const Json& v, ProblemConfig& cfg) {
    require_keys(v, "window", {"rho", "omega1_lo", "omega1_hi", "derivative_bound", "boundary_tol_factor"});
    Window& w = cfg.window;
    if (!v.contains("rho")) throw ConfigError("window.rho", "missing");
    if (!v.contains("omega1_lo") || !v.contains("omega1_hi")) throw ConfigError("window.omega1", "missing bounds");
    w.rho = number_list(v["rho"], "window.rho");
    w.omega1_lo = number_list(v["omega1_lo"], "window.omega1_lo");
    w.omega1_hi = number_list(v["omega1_hi"], "window.omega1_hi");
    if (v.contains("derivative_bound") && !v["derivative_bound"].is_null())
        w.derivative_bound = as_number(v["derivative_bound"], "window.derivative_bound");
    if (v.contains("boundary_tol_factor"))
        w.boundary_tol_factor = as_number(v["boundary_tol_factor"], "window.boundary_tol_factor");
    if (w.derivative_bound && cfg.kind == ProblemKind::cyclic)
        throw ConfigError("window.derivative_bound", "only available for second- and higher-order problems");
    w.validate(cfg.n, cfg.m);
}

void parse_domain(const Json& v, ProblemConfig& cfg) {
    if (!v.is_array() || static_cast<int>(v.size()) != cfg.n)
        throw ConfigError("domain", "expected an array of " + std::to_string(cfg.n) + " block domains");
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string key = index_key("domain", i);
        require_keys(v[i], key, {"lo", "hi", "ball_radius"});
        BlockDomain d = BlockDomain::whole(cfg.m);
        if (v[i].contains("lo")) d.lo = number_list(v[i]["lo"], join(key, "lo"), true);
        if (v[i].contains("hi")) d.hi = number_list(v[i]["hi"], join(key, "hi"), true);
        for (double& x : d.lo)
            if (std::isinf(x)) x = -kInf;
        if (static_cast<int>(d.lo.size()) != cfg.m || static_cast<int>(d.hi.size()) != cfg.m)
            throw ConfigError(key, "expected " + std::to_string(cfg.m) + " bounds per side");
        if (v[i].contains("ball_radius")) d.ball_radius = as_number(v[i]["ball_radius"], join(key, "ball_radius"), true);
        if (!d.contains(Vec::Zero(cfg.m))) throw ConfigError(key, "block domain must contain 0");
        cfg.domain.push_back(d);
    }
}

void parse_algebraic(const Json& v, ProblemConfig& cfg) {
    require_keys(v, "algebraic", {"f", "x0", "lo", "hi"});
    AlgebraicConfig& a = cfg.algebraic;
    for (const char* k : {"f", "x0", "lo", "hi"})
        if (!v.contains(k)) throw ConfigError(join("algebraic", k), "missing");
    a.x0 = number_list(v["x0"], "algebraic.x0");
    const int k = static_cast<int>(a.x0.size());
    a.f = component_list(v["f"], "algebraic.f", k);
    a.lo = number_list(v["lo"], "algebraic.lo");
    a.hi = number_list(v["hi"], "algebraic.hi");
    if (static_cast<int>(a.lo.size()) != k || static_cast<int>(a.hi.size()) != k)
        throw ConfigError("algebraic", "lo and hi need one bound per unknown");
    for (int i = 0; i < k; ++i) {
        const auto c = static_cast<std::size_t>(i);
        if (!(a.lo[c] < a.x0[c] && a.x0[c] < a.hi[c]))
            throw ConfigError(index_key("algebraic.x0", c), "must lie strictly inside ]lo, hi[");
    }
}

void parse_numerics(const Json& v, NumericsConfig& nc) {
    require_keys(v, "numerics",
                 {"M", "quad_panels", "quad_kind", "seed", "mode", "newton_tol", "newton_max_iter", "lambda_step0",
                  "step_min", "step_max", "ds0", "ds_min", "ds_max", "max_steps", "arclength_fallback",
                  "hypothesis_tol", "product_check"});
    auto num = [&](const char* k, double& dst) {
        if (v.contains(k)) dst = as_number(v[k], join("numerics", k));
    };
    auto integer = [&](const char* k, int& dst) {
        if (v.contains(k)) dst = as_int(v[k], join("numerics", k));
    };
    integer("M", nc.M);
    integer("quad_panels", nc.quad_panels);
    if (v.contains("quad_kind")) {
        try {
            nc.quad_kind = quadrature_kind_from_string(as_string(v["quad_kind"], "numerics.quad_kind"));
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            throw ConfigError("numerics.quad_kind", e.what());
        }
    }
    if (v.contains("seed")) {
        if (!v["seed"].is_number_unsigned() && !v["seed"].is_number_integer())
            throw ConfigError("numerics.seed", "expected a non-negative integer");
        nc.seed = v["seed"].get<std::uint64_t>();
    }
    if (v.contains("mode")) {
        try {
            nc.mode = continuation_mode_from_string(as_string(v["mode"], "numerics.mode"));
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            throw ConfigError("numerics.mode", e.what());
        }
    }
    num("newton_tol", nc.newton_tol);
    integer("newton_max_iter", nc.newton_max_iter);
    num("lambda_step0", nc.lambda_step0);
    num("step_min", nc.step_min);
    num("step_max", nc.step_max);
    num("ds0", nc.ds0);
    num("ds_min", nc.ds_min);
    num("ds_max", nc.ds_max);
    integer("max_steps", nc.max_steps);
    if (v.contains("arclength_fallback"))
        nc.arclength_fallback = as_bool(v["arclength_fallback"], "numerics.arclength_fallback");
    num("hypothesis_tol", nc.hypothesis_tol);
    if (v.contains("product_check")) nc.product_check = as_bool(v["product_check"], "numerics.product_check");
}

void validate_numerics(const NumericsConfig& nc) {
    if (nc.M < 4) throw ConfigError("numerics.M", "must be at least 4");
    try {
        QuadratureRule{nc.quad_kind, nc.quad_panels}.validate();
    } catch (const Error& e) {
        throw ConfigError("numerics.quad_panels", e.what());
    }
    auto positive = [](double v, const char* k) {
        if (!(v > 0.0)) throw ConfigError(std::string("numerics.") + k, "must be positive");
    };
    positive(nc.newton_tol, "newton_tol");
    positive(nc.lambda_step0, "lambda_step0");
    positive(nc.step_min, "step_min");
    positive(nc.step_max, "step_max");
    positive(nc.ds0, "ds0");
    positive(nc.ds_min, "ds_min");
    positive(nc.ds_max, "ds_max");
    positive(nc.hypothesis_tol, "hypothesis_tol");
    if (nc.newton_max_iter < 1) throw ConfigError("numerics.newton_max_iter", "must be at least 1");
    if (nc.max_steps < 1) throw ConfigError("numerics.max_steps", "must be at least 1");
    if (nc.step_min > nc.step_max) throw ConfigError("numerics.step_min", "exceeds step_max");
    if (nc.ds_min > nc.ds_max) throw ConfigError("numerics.ds_min", "exceeds ds_max");
}

void parse_degree(const Json& v, DegreeConfig& dc) {
    require_keys(v, "degree", {"zero_tol", "winding_samples", "winding_refine", "starts_per_axis"});
    if (v.contains("zero_tol")) dc.zero_tol = as_number(v["zero_tol"], "degree.zero_tol");
    if (v.contains("winding_samples")) dc.winding_samples = as_int(v["winding_samples"], "degree.winding_samples");
    if (v.contains("winding_refine")) dc.winding_refine = as_int(v["winding_refine"], "degree.winding_refine");
    if (v.contains("starts_per_axis")) dc.starts_per_axis = as_int(v["starts_per_axis"], "degree.starts_per_axis");
    if (!(dc.zero_tol > 0.0)) throw ConfigError("degree.zero_tol", "must be positive");
    if (dc.winding_samples < 4) throw ConfigError("degree.winding_samples", "must be at least 4");
    if (dc.winding_refine < 0) throw ConfigError("degree.winding_refine", "must be non-negative");
    if (dc.starts_per_axis < 0) throw ConfigError("degree.starts_per_axis", "must be non-negative");
}

// Builds every field once so expression errors surface at load time.
void validate_problem(const ProblemConfig& cfg) {
    try {
        if (cfg.kind == ProblemKind::algebraic) {
            build_algebraic(cfg);
            return;
        }
        if (!cfg.phi.is_null()) build_phi(cfg.phi, cfg.m, cfg.T);
        build_family(cfg);
        if (cfg.kind == ProblemKind::second_order) build_second_order_deformation(cfg);
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError("fields", e.what());
    }
}

}  // namespace

std::string to_string(ProblemKind k) {
    switch (k) {
        case ProblemKind::cyclic: return "cyclic";
        case ProblemKind::second_order: return "second_order";
        case ProblemKind::higher_order: return "higher_order";
        case ProblemKind::algebraic: return "algebraic";
    }
    return "cyclic";
}

Json normalize_phi(const Json& spec, const std::string& key) {
    if (spec.is_string()) return phi_from_string(spec.get<std::string>(), key);
    Json out;
    parse_phi_object(spec, key, out);
    return out;
}

phi::PhiOperator build_phi(const Json& spec, int m, double T, const std::string& key) {
    const Json s = normalize_phi(spec, key);
    const std::string name = s["name"].get<std::string>();
    auto need_m2 = [&] {
        if (m != 2) throw ConfigError(key, "operator '" + name + "' requires m = 2");
    };
    try {
        if (name == "identity") return phi::identity(m, T);
        if (name == "p_laplacian") return phi::p_laplacian(s["p"].get<double>(), m, T);
        if (name == "pt_laplacian")
            return phi::pt_laplacian(expr::Expression::parse(s["p"].get<std::string>(), {"t"}), m, T);
        if (name == "mean_curvature") return phi::mean_curvature(m, T);
        if (name == "minkowski") return phi::minkowski(m, T);
        if (name == "rotation") {
            need_m2();
            return phi::rotation(T);
        }
        if (name == "swap_negate") {
            need_m2();
            return phi::swap_negate(T);
        }
        if (name == "scaled")
            return phi::scaled(expr::Expression::parse(s["eta"].get<std::string>(), {"t"}),
                               build_phi(s["inner"], m, T, join(key, "inner")));
        const std::vector<std::string> fw = component_list(s["forward"], join(key, "forward"), m);
        std::vector<expr::Expression> fe, ie;
        for (const auto& e : fw) fe.push_back(expr::Expression::parse(e, phi::forward_variables(m)));
        if (!s["inverse"].empty()) {
            for (const auto& e : component_list(s["inverse"], join(key, "inverse"), m))
                ie.push_back(expr::Expression::parse(e, phi::inverse_variables(m)));
        }
        return phi::custom(fe, ie, T, as_number(s["domain_radius"], join(key, "domain_radius"), true),
                           as_number(s["range_radius"], join(key, "range_radius"), true));
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(key, e.what());
    }
}

ProblemConfig parse_config(const Json& doc) {
    require_keys(doc, "", {"id", "kind", "n", "m", "T", "g", "h", "f", "phi", "homotopy", "domain", "window",
                           "algebraic", "numerics", "degree"});
    ProblemConfig cfg;
    cfg.id = doc.contains("id") ? as_string(doc["id"], "id") : "problem";
    const std::string kind = doc.contains("kind") ? as_string(doc["kind"], "kind") : "cyclic";
    if (kind == "cyclic") {
        cfg.kind = ProblemKind::cyclic;
    } else if (kind == "second_order") {
        cfg.kind = ProblemKind::second_order;
    } else if (kind == "higher_order") {
        cfg.kind = ProblemKind::higher_order;
    } else if (kind == "algebraic") {
        cfg.kind = ProblemKind::algebraic;
    } else {
        throw ConfigError("kind", "expected cyclic, second_order, higher_order or algebraic");
    }
    if (doc.contains("numerics")) parse_numerics(doc["numerics"], cfg.numerics);
    validate_numerics(cfg.numerics);
    if (doc.contains("degree")) parse_degree(doc["degree"], cfg.degree);

    if (cfg.kind == ProblemKind::algebraic) {
        for (const char* k : {"n", "m", "T", "g", "h", "f", "phi", "homotopy", "domain", "window"})
            if (doc.contains(k)) throw ConfigError(k, "not used by algebraic problems");
        if (!doc.contains("algebraic")) throw ConfigError("algebraic", "missing");
        parse_algebraic(doc["algebraic"], cfg);
        validate_problem(cfg);
        return cfg;
    }
    if (doc.contains("algebraic")) throw ConfigError("algebraic", "only used by algebraic problems");
    if (doc.contains("m")) cfg.m = as_int(doc["m"], "m");
    if (cfg.m < 1) throw ConfigError("m", "must be at least 1");
    if (doc.contains("n")) cfg.n = as_int(doc["n"], "n");
    if (cfg.n < 2) throw ConfigError("n", "must be at least 2");
    if (doc.contains("T")) cfg.T = as_number(doc["T"], "T");
    if (!(cfg.T > 0.0) || !std::isfinite(cfg.T)) throw ConfigError("T", "must be positive");

    switch (cfg.kind) {
        case ProblemKind::cyclic: {
            for (const char* k : {"f", "phi"})
                if (doc.contains(k)) throw ConfigError(k, "not used by cyclic problems");
            if (!doc.contains("g") || !doc["g"].is_array() || static_cast<int>(doc["g"].size()) != cfg.n - 1)
                throw ConfigError("g", "expected an array of " + std::to_string(cfg.n - 1) + " fields");
            for (std::size_t i = 0; i < doc["g"].size(); ++i)
                cfg.g.push_back(component_list(doc["g"][i], index_key("g", i), cfg.m));
            if (!doc.contains("h")) throw ConfigError("h", "missing");
            cfg.h = component_list(doc["h"], "h", cfg.m);
            if (doc.contains("domain")) parse_domain(doc["domain"], cfg);
            break;
        }
        case ProblemKind::second_order: {
            if (cfg.n != 2) throw ConfigError("n", "second-order problems have n = 2");
            for (const char* k : {"g", "h", "domain"})
                if (doc.contains(k)) throw ConfigError(k, "not used by second-order problems");
            if (!doc.contains("f")) throw ConfigError("f", "missing");
            cfg.f = component_list(doc["f"], "f", cfg.m);
            break;
        }
        case ProblemKind::higher_order: {
            for (const char* k : {"g", "f", "domain"})
                if (doc.contains(k)) throw ConfigError(k, "not used by higher-order problems");
            if (!doc.contains("h")) throw ConfigError("h", "missing");
            cfg.h = component_list(doc["h"], "h", cfg.m);
            break;
        }
        case ProblemKind::algebraic: break;
    }
    if (cfg.kind != ProblemKind::cyclic) {
        if (!doc.contains("phi")) throw ConfigError("phi", "missing operator");
        cfg.phi = normalize_phi(doc["phi"]);
    }
    if (doc.contains("homotopy")) parse_homotopy(doc["homotopy"], cfg);
    if (!doc.contains("window")) throw ConfigError("window", "missing");
    parse_window(doc["window"], cfg);
    validate_problem(cfg);
    return cfg;
}

ProblemConfig load_config(const std::filesystem::path& path) { return parse_config(read_json(path)); }

Json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file '" + path.string() + "'");
    Json doc;
    try {
        doc = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError("", "JSON parse error in '" + path.string() + "' at byte " + std::to_string(e.byte) + ": " +
                                  e.what());
    }
    return doc;
}

Json to_json(const ProblemConfig& cfg) {
    Json j;
    j["id"] = cfg.id;
    j["kind"] = to_string(cfg.kind);
    if (cfg.kind == ProblemKind::algebraic) {
        j["algebraic"] = {{"f", cfg.algebraic.f},
                          {"x0", cfg.algebraic.x0},
                          {"lo", cfg.algebraic.lo},
                          {"hi", cfg.algebraic.hi}};
    } else {
        j["n"] = cfg.n;
        j["m"] = cfg.m;
        j["T"] = cfg.T;
        if (!cfg.g.empty()) j["g"] = cfg.g;
        if (!cfg.h.empty()) j["h"] = cfg.h;
        if (!cfg.f.empty()) j["f"] = cfg.f;
        if (!cfg.phi.is_null()) j["phi"] = cfg.phi;
        Json hom{{"kind", to_string(cfg.homotopy.kind)}};
        if (!cfg.homotopy.h_tilde.empty()) hom["h_tilde"] = cfg.homotopy.h_tilde;
        if (!cfg.homotopy.h0.empty()) hom["h0"] = cfg.homotopy.h0;
        if (!cfg.homotopy.f_tilde.empty()) hom["f_tilde"] = cfg.homotopy.f_tilde;
        if (!cfg.homotopy.f0.empty()) hom["f0"] = cfg.homotopy.f0;
        j["homotopy"] = hom;
        if (!cfg.domain.empty()) {
            Json d = Json::array();
            for (const BlockDomain& b : cfg.domain)
                d.push_back({{"lo", numbers_or_null(b.lo)},
                             {"hi", numbers_or_null(b.hi)},
                             {"ball_radius", number_or_null(b.ball_radius)}});
            j["domain"] = d;
        }
        j["window"] = {{"rho", cfg.window.rho},
                       {"omega1_lo", cfg.window.omega1_lo},
                       {"omega1_hi", cfg.window.omega1_hi},
                       {"derivative_bound",
                        cfg.window.derivative_bound ? Json(*cfg.window.derivative_bound) : Json(nullptr)},
                       {"boundary_tol_factor", cfg.window.boundary_tol_factor}};
    }
    const NumericsConfig& nc = cfg.numerics;
    j["numerics"] = {{"M", nc.M},
                     {"quad_panels", nc.quad_panels},
                     {"quad_kind", to_string(nc.quad_kind)},
                     {"seed", nc.seed},
                     {"mode", to_string(nc.mode)},
                     {"newton_tol", nc.newton_tol},
                     {"newton_max_iter", nc.newton_max_iter},
                     {"lambda_step0", nc.lambda_step0},
                     {"step_min", nc.step_min},
                     {"step_max", nc.step_max},
                     {"ds0", nc.ds0},
                     {"ds_min", nc.ds_min},
                     {"ds_max", nc.ds_max},
                     {"max_steps", nc.max_steps},
                     {"arclength_fallback", nc.arclength_fallback},
                     {"hypothesis_tol", nc.hypothesis_tol},
                     {"product_check", nc.product_check}};
    j["degree"] = {{"zero_tol", cfg.degree.zero_tol},
                   {"winding_samples", cfg.degree.winding_samples},
                   {"winding_refine", cfg.degree.winding_refine},
                   {"starts_per_axis", cfg.degree.starts_per_axis}};
    return j;
}

CyclicSystem build_system(const ProblemConfig& cfg) {
    switch (cfg.kind) {
        case ProblemKind::cyclic: return build_cyclic(cfg.n, cfg.m, cfg.T, cfg.g, cfg.h, cfg.domain);
        case ProblemKind::second_order:
            return reduce_second_order(build_phi(cfg.phi, cfg.m, cfg.T), build_second_order_field(cfg));
        case ProblemKind::higher_order: {
            auto c = compile(cfg.h, with_time(state_variables(cfg.n, cfg.m)), "h");
            StateField h = [c](double t, const Vec& x) { return (*c)(values_of(t, x)); };
            return reduce_higher_order(build_phi(cfg.phi, cfg.m, cfg.T), h, cfg.n);
        }
        case ProblemKind::algebraic: break;
    }
    throw ConfigError("kind", "algebraic problems have no cyclic system");
}

HomotopyFamily build_family(const ProblemConfig& cfg) {
    const CyclicSystem sys = build_system(cfg);
    const HomotopyConfig& h = cfg.homotopy;
    if (h.kind == HomotopyKind::scaling) return make_homotopy(sys, HomotopyKind::scaling);
    if (cfg.kind != ProblemKind::second_order) return make_homotopy_from_exprs(sys, h.kind, h.h_tilde, h.h0);
    const phi::PhiOperator op = build_phi(cfg.phi, cfg.m, cfg.T);
    const auto d = build_second_order_deformation(cfg);
    const auto ft = d->f_tilde;
    const auto f0 = d->f0;
    const int m = cfg.m;
    DeformField ht = [op, ft, m](double t, const Vec& x, double lambda) {
        return ft(t, x.head(m), phi::phi_inverse(op, t, x.segment(m, m)), lambda);
    };
    StateField h0 = [op, f0, m](double t, const Vec& x) {
        return f0(x.head(m), phi::phi_inverse(op, t, x.segment(m, m)));
    };
    return make_homotopy(sys, HomotopyKind::deformation, ht, h0);
}

SecondOrderField build_second_order_field(const ProblemConfig& cfg) {
    try {
        return parse_second_order_field(cfg.f, cfg.m);
    } catch (const ParseError& e) {
        throw ConfigError("f", e.what());
    }
}

std::optional<verify::SecondOrderDeformation> build_second_order_deformation(const ProblemConfig& cfg) {
    if (cfg.kind != ProblemKind::second_order || cfg.homotopy.kind != HomotopyKind::deformation) return std::nullopt;
    std::vector<std::string> tv = second_order_variables(cfg.m);
    tv.push_back("lambda");
    auto ft = compile(cfg.homotopy.f_tilde, tv, "homotopy.f_tilde");
    auto f0 = compile(cfg.homotopy.f0, xy_variables(cfg.m), "homotopy.f0");
    verify::SecondOrderDeformation d;
    d.f_tilde = [ft](double t, const Vec& x, const Vec& y, double lambda) {
        std::vector<double> v{t};
        const std::vector<double> xy = xy_values(x, y);
        v.insert(v.end(), xy.begin(), xy.end());
        v.push_back(lambda);
        return (*ft)(v);
    };
    d.f0 = [f0](const Vec& x, const Vec& y) { return (*f0)(xy_values(x, y)); };
    return d;
}

AlgebraicMap build_algebraic(const ProblemConfig& cfg) {
    const int k = static_cast<int>(cfg.algebraic.x0.size());
    auto c = compile(cfg.algebraic.f, algebraic_variables(k), "algebraic.f");
    return [c, k](const Vec& x, double lambda) {
        std::vector<double> v(x.data(), x.data() + x.size());
        if (k == 1) v.push_back(x[0]);
        v.push_back(lambda);
        return (*c)(v);
    };
}

Window build_window(const ProblemConfig& cfg) {
    Window w = cfg.window;
    if (w.derivative_bound && !w.derivative_norm && cfg.kind != ProblemKind::cyclic) {
        const phi::PhiOperator op = build_phi(cfg.phi, cfg.m, cfg.T);
        const int m = cfg.m;
        w.derivative_norm = [op, m](double t, const Vec& x) {
            return phi::phi_inverse(op, t, x.segment(m, m)).norm();
        };
    }
    return w;
}

QuadratureRule quadrature(const ProblemConfig& cfg) { return {cfg.numerics.quad_kind, cfg.numerics.quad_panels}; }

ContinuationOptions continuation_options(const ProblemConfig& cfg) {
    const NumericsConfig& nc = cfg.numerics;
    ContinuationOptions c;
    c.lambda_step0 = nc.lambda_step0;
    c.step_min = nc.step_min;
    c.step_max = nc.step_max;
    c.ds0 = nc.ds0;
    c.ds_min = nc.ds_min;
    c.ds_max = nc.ds_max;
    c.max_steps = nc.max_steps;
    c.arclength_fallback = nc.arclength_fallback;
    c.newton.tol = nc.newton_tol;
    c.newton.max_iter = nc.newton_max_iter;
    return c;
}

degree::DegreeOptions degree_options(const ProblemConfig& cfg) {
    degree::DegreeOptions d;
    d.zero_tol = cfg.degree.zero_tol;
    d.winding.init_samples = cfg.degree.winding_samples;
    d.winding.max_refine = cfg.degree.winding_refine;
    d.winding.zero_tol = cfg.degree.zero_tol;
    d.sign_sum.starts_per_axis = cfg.degree.starts_per_axis;
    d.sign_sum.zero_tol = cfg.degree.zero_tol;
    return d;
}

verify::RunOptions run_options(const ProblemConfig& cfg) {
    verify::RunOptions r;
    r.M = cfg.numerics.M;
    r.q = quadrature(cfg);
    r.mode = cfg.numerics.mode;
    r.continuation = continuation_options(cfg);
    r.degree = degree_options(cfg);
    r.h2.tol = cfg.numerics.hypothesis_tol;
    r.h2.seed = cfg.numerics.seed + 1;
    r.h34.tol = cfg.numerics.hypothesis_tol;
    r.h34.degree = r.degree;
    r.h34.zeros = r.degree.sign_sum;
    r.phi.tol = cfg.numerics.hypothesis_tol;
    r.phi.seed = cfg.numerics.seed;
    r.product_check = cfg.numerics.product_check;
    return r;
}

}  // namespace percont::config
