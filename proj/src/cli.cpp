#include "percont/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "percont/config.hpp"
#include "percont/errors.hpp"
#include "percont/report.hpp"
#include "percont/verify.hpp"

namespace percont::cli {

namespace {

using config::Json;
using config::ProblemConfig;
using config::ProblemKind;

struct Options {
    std::string config;
    std::string out = "percont_out";
    std::optional<int> mesh;
    std::optional<std::uint64_t> seed;
    std::optional<int> quad;
    std::string mode;
    bool timings = false;
    bool points = false;
};

struct Outcome {
    bool pass = false;
    std::string status;
    Json body = Json::object();
    std::vector<ContinuationTrace> traces;
};

Json traces_json(const std::vector<ContinuationTrace>& traces, bool points) {
    Json a = Json::array();
    for (const auto& tr : traces) a.push_back(report::to_json(tr, points));
    return a;
}

Json vec_json(const Vec& v) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(report::number(v[i]));
    return a;
}

bool all_reached(const std::vector<ContinuationTrace>& traces) {
    if (traces.empty()) return false;
    for (const auto& tr : traces)
        if (tr.status != TraceStatus::reached_target) return false;
    return true;
}

std::string combined_status(const std::vector<ContinuationTrace>& traces) {
    if (traces.empty()) return "fail";
    for (const auto& tr : traces)
        if (tr.status != TraceStatus::reached_target) return to_string(tr.status);
    return to_string(TraceStatus::reached_target);
}

void require_cyclic_like(const ProblemConfig& cfg, const std::string& cmd) {
    if (cfg.kind == ProblemKind::algebraic) throw ConfigError("kind", "'" + cmd + "' needs a cyclic-type problem");
}

// The system whose averages enter the hypotheses: h0 replaces h for deformations.
CyclicSystem averaged_system(const HomotopyFamily& fam) {
    CyclicSystem s = fam.base;
    if (fam.kind == HomotopyKind::deformation) s.h = fam.h0;
    return s;
}

AveragedMap averaged_last(const HomotopyFamily& fam, const QuadratureRule& q) {
    return fam.kind == HomotopyKind::deformation ? h0_hat(fam) : h_hat(fam.base, q);
}

degree::Box product_box(const Window& w, int n, int m) {
    degree::Box b = w.omega1_box();
    for (int i = 1; i < n; ++i) {
        const degree::Box bi = w.block_box(i, m);
        b.lo.insert(b.lo.end(), bi.lo.begin(), bi.lo.end());
        b.hi.insert(b.hi.end(), bi.hi.begin(), bi.hi.end());
    }
    return b;
}

Json degree_json(const degree::DegreeResult& d) {
    return {{"value", d.value},
            {"method", degree::to_string(d.method)},
            {"certified", d.certified},
            {"boundary_min_norm", report::number(d.boundary_min_norm)}};
}

Json degree_or_error(const degree::Map& f, const degree::Region& r, const degree::DegreeOptions& opt,
                     std::optional<int>* value = nullptr) {
    try {
        const degree::DegreeResult d = degree::brouwer_degree(f, r, opt);
        if (value) *value = d.value;
        return degree_json(d);
    } catch (const ZeroOnBoundary& e) {
        return {{"error", e.what()}};
    } catch (const RefinementExhausted& e) {
        return {{"error", e.what()}};
    }
}

Outcome cmd_degree(const ProblemConfig& cfg) {
    Outcome o;
    const degree::DegreeOptions dopt = config::degree_options(cfg);
    std::optional<int> main_value;
    Json deg = Json::object();
    if (cfg.kind == ProblemKind::algebraic) {
        const AlgebraicMap f = config::build_algebraic(cfg);
        const degree::Map f0 = [f](const Vec& x) { return f(x, 0.0); };
        deg["f_lambda0"] = degree_or_error(f0, degree::Region::box(cfg.algebraic.lo, cfg.algebraic.hi), dopt,
                                           &main_value);
    } else {
        const HomotopyFamily fam = config::build_family(cfg);
        const CyclicSystem sys = averaged_system(fam);
        const QuadratureRule q = config::quadrature(cfg);
        const Window w = config::build_window(cfg);
        deg["hhat"] = degree_or_error(averaged_last(fam, q), w.omega1(), dopt, &main_value);
        Json gs = Json::array();
        for (int i = 1; i < sys.n; ++i) {
            const degree::Box b = w.block_box(i, sys.m);
            gs.push_back(degree_or_error(g_sharp(sys, i, q), degree::Region::box(b.lo, b.hi), dopt));
        }
        deg["g_sharp"] = gs;
        const degree::Box pb = product_box(w, sys.n, sys.m);
        deg["ell"] = degree_or_error(ell_map(sys, q), degree::Region::box(pb.lo, pb.hi), dopt);
    }
    o.body["degrees"] = deg;
    o.pass = main_value && *main_value != 0;
    o.status = o.pass ? "pass" : "fail";
    return o;
}

Outcome cmd_average(const ProblemConfig& cfg) {
    require_cyclic_like(cfg, "average");
    Outcome o;
    const HomotopyFamily fam = config::build_family(cfg);
    const QuadratureRule q = config::quadrature(cfg);
    const Window w = config::build_window(cfg);
    const AveragedMap hh = averaged_last(fam, q);
    degree::SignSumOptions zopt = config::degree_options(cfg).sign_sum;
    const std::vector<Vec> zeros = degree::find_zeros(hh, w.omega1_box(), zopt);
    Json zs = Json::array();
    for (const Vec& z : zeros) zs.push_back({{"w", vec_json(z)}, {"hhat_norm", report::number(hh(z).norm())}});
    o.body["zeros"] = zs;
    const int m = cfg.m;
    if (m <= 2) {
        const int per = m == 1 ? 33 : 9;
        const degree::Box b = w.omega1_box();
        Json grid = Json::array();
        for (int a = 0; a < per; ++a) {
            for (int c = 0; c < (m == 2 ? per : 1); ++c) {
                Vec p(m);
                p[0] = b.lo[0] + (b.hi[0] - b.lo[0]) * (a + 0.5) / per;
                if (m == 2) p[1] = b.lo[1] + (b.hi[1] - b.lo[1]) * (c + 0.5) / per;
                try {
                    grid.push_back({{"w", vec_json(p)}, {"hhat", vec_json(hh(p))}});
                } catch (const DomainViolation&) {
                }
            }
        }
        o.body["hhat_samples"] = grid;
    }
    o.pass = !zeros.empty();
    o.status = o.pass ? "pass" : "fail";
    return o;
}

phi::PhiOperator require_phi(const ProblemConfig& cfg) {
    if (cfg.phi.is_null()) throw ConfigError("phi", "this problem has no operator");
    return config::build_phi(cfg.phi, cfg.m, cfg.T);
}

Outcome cmd_check_phi(const ProblemConfig& cfg) {
    Outcome o;
    const phi::PhiOperator op = require_phi(cfg);
    const verify::RunOptions ro = config::run_options(cfg);
    CheckReport rep = verify::phi_hypotheses(op, ro.q, ro.phi);
    CheckReport legacy = phi::check_legacy_monotone_coercive(op, ro.phi);
    for (auto& e : legacy.entries) e.mandatory = false;
    o.pass = rep.pass();
    rep.append(legacy);
    o.body["hypotheses"] = report::to_json(rep);
    o.status = o.pass ? "pass" : "fail";
    return o;
}

CheckReport cyclic_hypotheses(const ProblemConfig& cfg, std::optional<verify::ProductFormula>& product) {
    const HomotopyFamily fam = config::build_family(cfg);
    const CyclicSystem sys = averaged_system(fam);
    const Window w = config::build_window(cfg);
    const verify::RunOptions ro = config::run_options(cfg);
    CheckReport rep;
    if (!cfg.phi.is_null()) rep.append(verify::phi_hypotheses(require_phi(cfg), ro.q, ro.phi));
    rep.append(verify::check_h2(sys, w, ro.q, ro.h2));
    rep.append(verify::check_h3_h4(averaged_last(fam, ro.q), w, ro.h34));
    if (ro.product_check) rep.entries.push_back(verify::product_formula_report(sys, w, ro.q, ro.degree, product));
    return rep;
}

Outcome cmd_check_hypotheses(const ProblemConfig& cfg) {
    require_cyclic_like(cfg, "check-hypotheses");
    Outcome o;
    std::optional<verify::ProductFormula> product;
    const CheckReport rep = cyclic_hypotheses(cfg, product);
    o.body["hypotheses"] = report::to_json(rep);
    if (product) o.body["product_formula"] = report::to_json(*product);
    o.pass = rep.pass();
    o.status = o.pass ? "pass" : "fail";
    return o;
}

Outcome algebraic_trace(const ProblemConfig& cfg) {
    Outcome o;
    const AlgebraicMap f = config::build_algebraic(cfg);
    Vec x0(static_cast<Eigen::Index>(cfg.algebraic.x0.size()));
    for (std::size_t i = 0; i < cfg.algebraic.x0.size(); ++i) x0[static_cast<Eigen::Index>(i)] = cfg.algebraic.x0[i];
    o.traces.push_back(algebraic_continue(f, x0, cfg.algebraic.lo, cfg.algebraic.hi, cfg.numerics.mode,
                                          config::continuation_options(cfg)));
    o.pass = all_reached(o.traces);
    o.status = combined_status(o.traces);
    return o;
}

Outcome cmd_continue(const ProblemConfig& cfg) {
    if (cfg.kind == ProblemKind::algebraic) return algebraic_trace(cfg);
    Outcome o;
    const HomotopyFamily fam = config::build_family(cfg);
    const Window w = config::build_window(cfg);
    const verify::RunOptions ro = config::run_options(cfg);
    std::vector<StartPoint> starts;
    try {
        starts = solve_averaged_start(averaged_last(fam, ro.q), fam.base, w, ro.M, ro.h34.zeros);
    } catch (const NoStartingZero& e) {
        o.body["stop_reason"] = e.what();
        o.status = "fail";
        return o;
    }
    PeriodicBranch branch(fam, ro.M, w, ro.exec);
    Json sols = Json::array();
    for (const StartPoint& sp : starts) {
        Vec X0 = sp.X0;
        if (fam.kind == HomotopyKind::deformation) {
            try {
                X0 = newton_correct(fam, X0, ro.M, 0.0, ro.continuation.newton).values;
            } catch (const Error&) {
            }
        }
        o.traces.push_back(trace_branch(branch, X0, 0.0, ro.mode, ro.continuation));
        const ContinuationTrace& tr = o.traces.back();
        if (tr.status == TraceStatus::reached_target) {
            const TracePoint& p = tr.points.back();
            PeriodicSolution s{ro.M, p.lambda, p.values, p.residual_norm, 0};
            sols.push_back(report::to_json(s, fam.base.n, fam.base.m));
        }
    }
    o.body["solutions"] = sols;
    o.pass = all_reached(o.traces);
    o.status = combined_status(o.traces);
    return o;
}

Outcome cmd_product_check(const ProblemConfig& cfg) {
    require_cyclic_like(cfg, "product-check");
    Outcome o;
    const HomotopyFamily fam = config::build_family(cfg);
    const verify::RunOptions ro = config::run_options(cfg);
    std::optional<verify::ProductFormula> pf;
    const CheckEntry e =
        verify::product_formula_report(averaged_system(fam), config::build_window(cfg), ro.q, ro.degree, pf);
    o.body["product_formula"] = pf ? report::to_json(*pf) : report::to_json(e);
    o.pass = passes(e.verdict);
    o.status = o.pass ? "pass" : "fail";
    return o;
}

void fill_run(Outcome& o, const verify::RunResult& r, int n, int m) {
    o.body["theorem"] = r.theorem;
    o.body["hypotheses"] = report::to_json(r.hypotheses);
    if (r.product) o.body["product_formula"] = report::to_json(*r.product);
    Json starts = Json::array();
    for (const StartPoint& s : r.starts) starts.push_back(vec_json(s.w));
    o.body["starts"] = starts;
    Json sols = Json::array();
    for (std::size_t i = 0; i < r.solutions.size(); ++i) {
        Json s = report::to_json(r.solutions[i], n, m);
        if (i < r.recovered.size()) s["second_order"] = report::to_json(r.recovered[i]);
        sols.push_back(s);
    }
    o.body["solutions"] = sols;
    if (!r.stop_reason.empty()) o.body["stop_reason"] = r.stop_reason;
    o.traces = r.traces;
    o.pass = r.pass();
    o.status = o.pass ? "pass" : "fail";
}

Outcome phi_blocked(const ProblemConfig& cfg, const PhiChecksFailed& e) {
    Outcome o;
    const phi::PhiOperator op = require_phi(cfg);
    const verify::RunOptions ro = config::run_options(cfg);
    o.body["hypotheses"] = report::to_json(verify::phi_hypotheses(op, ro.q, ro.phi));
    o.body["stop_reason"] = e.what();
    o.status = "fail";
    return o;
}

Outcome cmd_run(const ProblemConfig& cfg) {
    const verify::RunOptions ro = config::run_options(cfg);
    switch (cfg.kind) {
        case ProblemKind::algebraic: return algebraic_trace(cfg);
        case ProblemKind::second_order: {
            Outcome o;
            const phi::PhiOperator op = require_phi(cfg);
            try {
                const verify::RunResult r =
                    verify::run_theorem41(op, config::build_second_order_field(cfg), config::build_window(cfg), ro,
                                          config::build_second_order_deformation(cfg));
                fill_run(o, r, 2, cfg.m);
            } catch (const PhiChecksFailed& e) {
                return phi_blocked(cfg, e);
            }
            return o;
        }
        case ProblemKind::higher_order:
        case ProblemKind::cyclic: {
            Outcome o;
            CheckReport phis;
            if (cfg.kind == ProblemKind::higher_order) {
                phis = verify::phi_hypotheses(require_phi(cfg), ro.q, ro.phi);
                if (!phis.pass()) return phi_blocked(cfg, PhiChecksFailed("operator checks failed"));
            }
            const HomotopyFamily fam = config::build_family(cfg);
            const Window w = config::build_window(cfg);
            verify::RunResult r = fam.kind == HomotopyKind::scaling ? verify::run_theorem31(fam, w, ro)
                                                                    : verify::run_theorem32(fam, w, ro);
            phis.append(r.hypotheses);
            r.hypotheses = phis;
            fill_run(o, r, cfg.n, cfg.m);
            return o;
        }
    }
    return {};
}

int execute(const std::string& command, const Options& opt) {
    const auto start = std::chrono::steady_clock::now();
    Json doc = config::read_json(opt.config);
    if (!doc.is_object()) throw ConfigError("", "config root must be an object");
    if (opt.mesh || opt.seed || opt.quad || !opt.mode.empty()) {
        Json& num = doc["numerics"];
        if (num.is_null()) num = Json::object();
        if (opt.mesh) num["M"] = *opt.mesh;
        if (opt.seed) num["seed"] = *opt.seed;
        if (opt.quad) num["quad_panels"] = *opt.quad;
        if (!opt.mode.empty()) num["mode"] = opt.mode;
    }
    const ProblemConfig cfg = config::parse_config(doc);

    Outcome o;
    if (command == "degree") o = cmd_degree(cfg);
    else if (command == "average") o = cmd_average(cfg);
    else if (command == "check-phi") o = cmd_check_phi(cfg);
    else if (command == "check-hypotheses") o = cmd_check_hypotheses(cfg);
    else if (command == "continue") o = cmd_continue(cfg);
    else if (command == "product-check") o = cmd_product_check(cfg);
    else o = cmd_run(cfg);

    const int code = o.pass ? 0 : 2;
    Json rep;
    rep["problem"] = cfg.id;
    rep["command"] = command;
    rep["status"] = o.status;
    rep["exit_code"] = code;
    rep["config"] = config::to_json(cfg);
    for (const char* k : {"hypotheses", "solutions"})
        if (!o.body.contains(k)) o.body[k] = Json::array();
    o.body["traces"] = traces_json(o.traces, opt.points);
    for (auto it = o.body.begin(); it != o.body.end(); ++it) rep[it.key()] = it.value();
    if (opt.timings) {
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        rep["timings"] = {{"total_seconds", secs}};
    } else {
        rep["timings"] = nullptr;
    }

    const std::filesystem::path out(opt.out);
    std::filesystem::create_directories(out);
    std::ofstream rj(out / "report.json");
    rj << rep.dump(2) << '\n';
    std::ofstream csv(out / "trace.csv");
    report::write_trace_csv(csv, o.traces);
    if (!rj || !csv) throw Error("cannot write outputs to '" + opt.out + "'");
    std::cout << command << ": " << o.status << '\n';
    return code;
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"Periodic continuation toolkit"};
    app.require_subcommand(1);
    Options opt;
    const char* names[][2] = {{"degree", "Brouwer degrees of the averaged maps"},
                              {"average", "Zeros and samples of the averaged last-block map"},
                              {"check-phi", "Operator checks"},
                              {"check-hypotheses", "Hypothesis checks of the cyclic problem"},
                              {"continue", "Continuation only"},
                              {"product-check", "Degree product formula"},
                              {"run", "Full pipeline"}};
    std::vector<CLI::App*> subs;
    for (const auto& nm : names) {
        CLI::App* sub = app.add_subcommand(nm[0], nm[1]);
        sub->add_option("--config", opt.config, "Problem config (JSON)")->required();
        sub->add_option("--out", opt.out, "Output directory");
        sub->add_option("--mesh", opt.mesh, "Mesh size M");
        sub->add_option("--seed", opt.seed, "Sampling seed");
        sub->add_option("--quad", opt.quad, "Quadrature panels");
        sub->add_option("--mode", opt.mode, "Continuation mode")->check(CLI::IsMember({"natural", "arclength"}));
        sub->add_flag("--timings", opt.timings, "Record wall-clock timings in the report");
        sub->add_flag("--points", opt.points, "Include every accepted trace point in the report");
        subs.push_back(sub);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    std::string command;
    for (CLI::App* s : subs)
        if (s->parsed()) command = s->get_name();
    try {
        return execute(command, opt);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace percont::cli
