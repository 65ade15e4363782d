#include "percont/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "percont/errors.hpp"

namespace percont::verify {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Window box of block `i` (0-based) clipped to the finite bounds of D_i.
degree::Box clipped_block_box(const CyclicSystem& sys, const Window& w, int i) {
    degree::Box b = w.block_box(i, sys.m);
    const BlockDomain& d = sys.domain[static_cast<std::size_t>(i)];
    for (int k = 0; k < sys.m; ++k) {
        const auto c = static_cast<std::size_t>(k);
        b.lo[c] = std::max(b.lo[c], d.lo[c]);
        b.hi[c] = std::min(b.hi[c], d.hi[c]);
        if (std::isfinite(d.ball_radius)) {
            b.lo[c] = std::max(b.lo[c], -d.ball_radius);
            b.hi[c] = std::min(b.hi[c], d.ball_radius);
        }
    }
    return b;
}

// Tensor grid strictly inside the box, `per_axis` points per axis.
std::vector<Vec> box_grid(const degree::Box& b, int per_axis) {
    const int m = b.dimension();
    std::vector<Vec> out;
    std::vector<int> idx(static_cast<std::size_t>(m), 0);
    while (true) {
        Vec w(m);
        for (int k = 0; k < m; ++k) {
            const auto c = static_cast<std::size_t>(k);
            w[k] = b.lo[c] + (b.hi[c] - b.lo[c]) * (idx[c] + 0.5) / per_axis;
        }
        out.push_back(w);
        int k = 0;
        while (k < m && ++idx[static_cast<std::size_t>(k)] == per_axis) idx[static_cast<std::size_t>(k++)] = 0;
        if (k == m) break;
    }
    return out;
}

std::vector<Vec> box_samples(const degree::Box& b, int count, std::uint64_t seed) {
    const int m = b.dimension();
    if (m == 1) return box_grid(b, count);
    std::mt19937_64 rng(seed);
    std::vector<Vec> out;
    for (int s = 0; s < count; ++s) {
        Vec w(m);
        for (int k = 0; k < m; ++k) {
            const auto c = static_cast<std::size_t>(k);
            w[k] = std::uniform_real_distribution<double>(b.lo[c], b.hi[c])(rng);
        }
        out.push_back(w);
    }
    return out;
}

void add_vector(CheckEntry& e, const std::string& key, const Vec& v) {
    for (Eigen::Index k = 0; k < v.size(); ++k) e.evidence[key + "_" + std::to_string(k + 1)] = v[k];
}

int degree_of(const AveragedMap& f, const degree::Box& b, const degree::DegreeOptions& opt, bool& certified) {
    const degree::DegreeResult r = degree::brouwer_degree(f, degree::Region::box(b.lo, b.hi), opt);
    certified = certified && r.certified;
    return r.value;
}

AveragedMap negate(const AveragedMap& f) {
    return [f](const Vec& w) { return Vec(-f(w)); };
}

std::vector<double> check_times(const CyclicSystem& sys, const QuadratureRule& q, int extra, std::uint64_t seed) {
    std::set<double> ts;
    for (const auto& nd : q.nodes(sys.T)) ts.insert(nd.t);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, sys.T);
    for (int k = 0; k < extra; ++k) ts.insert(u(rng));
    return {ts.begin(), ts.end()};
}

CheckEntry continuation_entry(const std::vector<ContinuationTrace>& traces) {
    int reached = 0, exits = 0;
    for (const auto& tr : traces) {
        reached += tr.status == TraceStatus::reached_target;
        exits += tr.status == TraceStatus::boundary_exit;
    }
    CheckEntry h1{"h1", exits == 0 ? Verdict::heuristic_pass : Verdict::fail,
                  {{"boundary_exits", exits}, {"traces", static_cast<double>(traces.size())}},
                  exits == 0 ? "no accepted point reached the window boundary" : "a branch reached the window boundary"};
    return h1;
}

RunResult run_family(const HomotopyFamily& fam, const CyclicSystem& averaged_sys, const AveragedMap& hhat,
                     const Window& window, const RunOptions& opt, bool correct_start, const std::string& theorem) {
    RunResult out;
    out.theorem = theorem;
    const CyclicSystem& sys = fam.base;
    window.validate(sys.n, sys.m);
    H2Options h2 = opt.h2;
    h2.exec = opt.exec;
    out.hypotheses.append(check_h2(averaged_sys, window, opt.q, h2));
    out.hypotheses.append(check_h3_h4(hhat, window, opt.h34));
    if (opt.product_check) {
        out.hypotheses.entries.push_back(product_formula_report(averaged_sys, window, opt.q, opt.degree, out.product));
    }
    try {
        out.starts = solve_averaged_start(hhat, sys, window, opt.M, opt.h34.zeros);
    } catch (const NoStartingZero& e) {
        out.stop_reason = e.what();
        out.hypotheses.entries.push_back({"starts", Verdict::fail, {{"count", 0}}, e.what()});
        return out;
    }
    out.hypotheses.entries.push_back(
        {"starts", Verdict::pass, {{"count", static_cast<double>(out.starts.size())}}, ""});

    PeriodicBranch branch(fam, opt.M, window, opt.exec);
    NewtonOptions nopt = opt.continuation.newton;
    nopt.exec = opt.exec;
    for (StartPoint& sp : out.starts) {
        Vec X0 = sp.X0;
        if (correct_start) {
            try {
                X0 = newton_correct(fam, X0, opt.M, 0.0, nopt).values;
            } catch (const Error&) {
            }
        }
        ContinuationTrace tr = trace_branch(branch, X0, 0.0, opt.mode, opt.continuation);
        if (tr.status == TraceStatus::reached_target) {
            const TracePoint& last = tr.points.back();
            const double r = residual(fam, last.values, opt.M, last.lambda, opt.exec).lpNorm<Eigen::Infinity>();
            out.solutions.push_back({opt.M, last.lambda, last.values, r, 0});
        }
        out.traces.push_back(std::move(tr));
    }
    out.hypotheses.entries.push_back(continuation_entry(out.traces));
    CheckEntry reach{"continuation",
                     out.solutions.empty() ? Verdict::fail : Verdict::pass,
                     {{"solutions", static_cast<double>(out.solutions.size())}},
                     out.solutions.empty() ? "no branch reached lambda = 1" : ""};
    out.hypotheses.entries.push_back(reach);
    if (out.solutions.empty() && out.stop_reason.empty()) out.stop_reason = "no branch reached lambda = 1";
    return out;
}

}  // namespace

CheckReport check_h2(const CyclicSystem& sys, const Window& window, const QuadratureRule& q, const H2Options& opt) {
    CheckReport rep;
    CheckEntry origin{"h2_origin", Verdict::pass, {}, ""};
    CheckEntry zero{"h2_zero", Verdict::pass, {}, ""};
    CheckEntry inj{"h2_injective", Verdict::pass, {}, ""};
    const std::vector<double> times = check_times(sys, q, opt.extra_times, opt.seed);
    double g0_max = 0.0, min_common = kInf;
    int collisions = 0, pairs = 0;
    double min_gap = kInf;
    bool monotone = true;

    for (int i = 1; i < sys.n; ++i) {
        const std::string tag = "g" + std::to_string(i);
        const BlockField& g = sys.g[static_cast<std::size_t>(i - 1)];
        const BlockDomain& dom = sys.domain[static_cast<std::size_t>(i)];
        const Vec zero_w = Vec::Zero(sys.m);
        if (!dom.contains(zero_w) || !(window.rho[static_cast<std::size_t>(i)] > 0.0)) {
            origin.verdict = Verdict::fail;
            origin.detail = "0 is not interior to the window block of " + tag;
        }
        const degree::Box box = clipped_block_box(sys, window, i);

        auto sup_t = [&](const Vec& w) {
            double s = 0.0;
            for (double t : times) s = std::max(s, g(t, w).lpNorm<Eigen::Infinity>());
            return s;
        };
        try {
            g0_max = std::max(g0_max, sup_t(zero_w));
        } catch (const Error& e) {
            g0_max = kInf;
            zero.detail = e.what();
        }

        std::vector<Vec> cands = box_grid(box, sys.m == 1 ? 2 * opt.grid_per_axis : opt.grid_per_axis);
        degree::SignSumOptions zopt;
        zopt.exec = opt.exec;
        const auto frozen = [&](const Vec& w) { return g(times.front(), w); };
        for (const Vec& z : degree::find_zeros(frozen, box, zopt)) cands.push_back(z);
        std::vector<double> sups(cands.size(), kInf);
        for_each_index(opt.exec, cands.size(), [&](std::size_t c) {
            if (cands[c].norm() < std::max(10.0 * opt.tol, 1e-6) || !dom.contains(cands[c])) return;
            try {
                sups[c] = sup_t(cands[c]);
            } catch (const Error&) {
            }
        });
        for (std::size_t c = 0; c < cands.size(); ++c) {
            if (sups[c] < min_common) min_common = sups[c];
            if (sups[c] <= opt.zero_tol && zero.verdict == Verdict::pass) {
                zero.verdict = Verdict::fail;
                zero.detail = tag + " vanishes for every sampled t at a nonzero w";
                add_vector(zero, "witness_w", cands[c]);
                zero.evidence["witness_block"] = i + 1;
            }
        }

        const AveragedMap gs = averaged_field(g, sys.T, q);
        std::vector<Vec> pool = box_samples(box, opt.pool, opt.seed + static_cast<std::uint64_t>(i));
        std::erase_if(pool, [&](const Vec& w) { return !dom.contains(w); });
        std::vector<Vec> vals(pool.size());
        std::vector<char> ok(pool.size(), 1);
        for_each_index(opt.exec, pool.size(), [&](std::size_t s) {
            try {
                vals[s] = gs(pool[s]);
            } catch (const Error&) {
                ok[s] = 0;
            }
        });
        for (std::size_t a = 0; a < pool.size(); ++a) {
            if (!ok[a]) continue;
            for (std::size_t b = a + 1; b < pool.size(); ++b) {
                if (!ok[b] || (pool[a] - pool[b]).norm() < 10.0 * opt.tol_collision) continue;
                ++pairs;
                const double gap = (vals[a] - vals[b]).norm();
                min_gap = std::min(min_gap, gap);
                if (gap < opt.tol_collision) ++collisions;
            }
        }
        if (sys.m == 1) {
            int up = 0, down = 0;
            for (std::size_t s = 1; s < pool.size(); ++s)
                if (ok[s] && ok[s - 1]) (vals[s][0] > vals[s - 1][0] ? up : down) += 1;
            monotone = monotone && (up == 0 || down == 0);
        }
    }
    if (g0_max > opt.tol) {
        zero.verdict = Verdict::fail;
        if (zero.detail.empty()) zero.detail = "g_i(t, 0) does not vanish";
    }
    zero.evidence["max_abs_g_at_zero"] = g0_max;
    zero.evidence["min_sup_t_abs_g_nonzero_w"] = min_common;
    inj.evidence = {{"collisions", collisions}, {"pairs_tested", pairs}, {"min_pair_gap", min_gap}};
    if (sys.m == 1) inj.evidence["monotone"] = monotone ? 1.0 : 0.0;
    if (collisions > 0 || !monotone) {
        inj.verdict = Verdict::fail;
        inj.detail = "averaged g is not injective on the samples";
    }
    rep.entries = {origin, zero, inj};
    return rep;
}

CheckReport check_h3_h4(const AveragedMap& hhat, const Window& window, const H34Options& opt,
                        std::vector<Vec>* zeros_out) {
    const degree::Box box = window.omega1_box();
    const int m = box.dimension();
    CheckReport rep;
    CheckEntry h3{"h3", Verdict::fail, {}, ""};
    CheckEntry h4{"h4", Verdict::fail, {}, ""};
    double bmin = 0.0;
    try {
        const int samples = opt.boundary_samples > 0 ? opt.boundary_samples : (m == 1 ? 2 : (m == 2 ? 257 : 17));
        bmin = degree::sampled_boundary_min_norm(hhat, box, samples, opt.degree.sign_sum.exec);
    } catch (const Error& e) {
        h3.detail = e.what();
    }
    h3.evidence["boundary_min_norm"] = bmin;
    const bool clear = bmin > opt.tol;
    if (clear) {
        h3.verdict = Verdict::heuristic_pass;
        h3.detail = "no zero of hat h on the sampled boundary";
    } else if (h3.detail.empty()) {
        h3.detail = "hat h vanishes on the sampled boundary";
    }

    std::vector<Vec> zeros;
    try {
        zeros = degree::find_zeros(hhat, box, opt.zeros);
    } catch (const Error&) {
    }
    h4.evidence["zero_count"] = static_cast<double>(zeros.size());
    for (std::size_t z = 0; z < zeros.size(); ++z) add_vector(h4, "zero" + std::to_string(z + 1), zeros[z]);
    try {
        const degree::DegreeResult d = degree::brouwer_degree(hhat, window.omega1(), opt.degree);
        h4.evidence["degree"] = d.value;
        h4.evidence["certified"] = d.certified ? 1.0 : 0.0;
        h4.evidence["degree_boundary_min_norm"] = d.boundary_min_norm;
        h4.detail = "method " + degree::to_string(d.method);
        if (d.value != 0 && clear) h4.verdict = d.certified ? Verdict::pass : Verdict::heuristic_pass;
        if (d.value == 0) h4.detail += "; degree is zero";
    } catch (const Error& e) {
        h4.detail = e.what();
    }
    if (zeros_out) *zeros_out = zeros;
    rep.entries = {h3, h4};
    return rep;
}

CheckReport check_h3_h4(const CyclicSystem& sys, const Window& window, const QuadratureRule& q,
                        const H34Options& opt) {
    return check_h3_h4(h_hat(sys, q), window, opt);
}

ProductFormula product_formula_check(const CyclicSystem& sys, const Window& window, const QuadratureRule& q,
                                     const degree::DegreeOptions& opt) {
    window.validate(sys.n, sys.m);
    const int n = sys.n, m = sys.m;
    ProductFormula pf;
    bool cert = true;

    std::vector<double> lo = window.omega1_lo, hi = window.omega1_hi;
    for (int i = 1; i < n; ++i) {
        const degree::Box b = window.block_box(i, m);
        lo.insert(lo.end(), b.lo.begin(), b.lo.end());
        hi.insert(hi.end(), b.hi.begin(), b.hi.end());
    }
    pf.direct_result = degree::brouwer_degree(ell_map(sys, q), degree::Region::box(lo, hi), opt);
    pf.direct = pf.direct_result.value;
    cert = cert && pf.direct_result.certified;

    const AveragedMap hh = h_hat(sys, q);
    pf.deg_hhat = degree_of(hh, window.omega1_box(), opt, cert);
    const int eta_n = degree_of(negate(hh), window.omega1_box(), opt, cert);
    int prod_g = 1, prod_eta = 1;
    for (int i = 1; i < n; ++i) {
        const AveragedMap gs = g_sharp(sys, i, q);
        const degree::Box b = window.block_box(i, m);
        const int dg = degree_of(gs, b, opt, cert);
        const int de = degree_of(negate(gs), b, opt, cert);
        pf.deg_g.push_back(dg);
        pf.deg_eta.push_back(de);
        prod_g *= dg;
        prod_eta *= de;
    }
    pf.deg_eta.push_back(eta_n);
    const int sign_eta = (m * (n + 1)) % 2 == 0 ? 1 : -1;
    const int sign_thm = m % 2 == 0 ? 1 : -1;
    pf.eta_product = sign_eta * eta_n * prod_eta;
    pf.theorem_product = sign_thm * pf.deg_hhat * prod_g;
    pf.certified = cert;
    if (pf.direct != pf.eta_product || pf.direct != pf.theorem_product)
        throw MismatchDetected("product formula mismatch: direct " + std::to_string(pf.direct) + ", eta product " +
                                   std::to_string(pf.eta_product) + ", theorem product " +
                                   std::to_string(pf.theorem_product),
                               pf.direct, pf.eta_product, pf.theorem_product);
    return pf;
}

CheckEntry product_formula_entry(const ProductFormula& pf) {
    CheckEntry e{"product_formula",
                 pf.certified ? Verdict::pass : Verdict::heuristic_pass,
                 {{"direct", pf.direct},
                  {"eta_product", pf.eta_product},
                  {"theorem_product", pf.theorem_product},
                  {"deg_hhat", pf.deg_hhat},
                  {"certified", pf.certified ? 1.0 : 0.0}},
                 "three degree integers agree"};
    for (std::size_t i = 0; i < pf.deg_g.size(); ++i) e.evidence["deg_g" + std::to_string(i + 1)] = pf.deg_g[i];
    return e;
}

bool RunResult::pass() const { return hypotheses.pass() && !solutions.empty(); }

CheckEntry product_formula_report(const CyclicSystem& sys, const Window& window, const QuadratureRule& q,
                                  const degree::DegreeOptions& opt, std::optional<ProductFormula>& out) {
    try {
        out = product_formula_check(sys, window, q, opt);
        return product_formula_entry(*out);
    } catch (const MismatchDetected& e) {
        return {"product_formula",
                Verdict::fail,
                {{"direct", e.direct()}, {"eta_product", e.eta_product()}, {"theorem_product", e.theorem_product()}},
                e.what()};
    } catch (const ZeroOnBoundary& e) {
        return {"product_formula", Verdict::fail, {}, std::string("degree undefined: ") + e.what()};
    } catch (const RefinementExhausted& e) {
        return {"product_formula", Verdict::fail, {}, std::string("degree undefined: ") + e.what()};
    }
}

RunResult run_theorem31(const HomotopyFamily& fam, const Window& window, const RunOptions& opt) {
    if (fam.kind != HomotopyKind::scaling) throw Error("run_theorem31 needs a scaling family");
    return run_family(fam, fam.base, h_hat(fam.base, opt.q), window, opt, false, "cyclic_scaling");
}

RunResult run_theorem32(const HomotopyFamily& fam, const Window& window, const RunOptions& opt) {
    if (fam.kind != HomotopyKind::deformation) throw Error("run_theorem32 needs a deformation family");
    CyclicSystem autonomous = fam.base;
    autonomous.h = fam.h0;
    return run_family(fam, autonomous, h0_hat(fam), window, opt, true, "cyclic_deformation");
}

CheckReport phi_hypotheses(const phi::PhiOperator& op, const QuadratureRule& q, const phi::PhiCheckOptions& opt) {
    CheckReport rep = phi::check_phi_axioms(op, opt);
    CheckReport star = phi::check_phi_star(op, q, opt);
    bool sharp_ok = false;
    if (op.factorization) {
        CheckReport sharp = phi::check_phi_sharp(op, opt);
        sharp.entries[0].mandatory = false;
        sharp_ok = passes(sharp.entries[0].verdict);
        rep.append(sharp);
    }
    star.entries[0].mandatory = !sharp_ok;
    rep.append(star);
    return rep;
}

SecondOrderSolution recover_second_order(const phi::PhiOperator& op, const SecondOrderField& f,
                                         const PeriodicSolution& sol, double lambda) {
    const int m = op.m, k = 2 * m, M = sol.M;
    const double T = op.T, dt = T / M;
    SecondOrderSolution out{MeshFunction(M, T, m), MeshFunction(M, T, m), 0.0};
    std::vector<Vec> z(static_cast<std::size_t>(M));
    for (int j = 0; j < M; ++j) {
        const Vec node = sol.values.segment(j * k, k);
        const Vec dx = phi::phi_inverse(op, j * dt, node.tail(m));
        out.x.set_node(j, node.head(m));
        out.dx.set_node(j, dx);
        z[static_cast<std::size_t>(j)] = phi::phi_eval(op, j * dt, dx);
    }
    for (int j = 0; j < M; ++j) {
        const int jn = (j + 1) % M;
        const double tm = (j + 0.5) * dt;
        const Vec& za = z[static_cast<std::size_t>(j)];
        const Vec& zb = z[static_cast<std::size_t>(jn)];
        const Vec xm = 0.5 * (out.x.node(j) + out.x.node(jn));
        const Vec ym = phi::phi_inverse(op, tm, Vec(0.5 * (za + zb)));
        const Vec r = (zb - za) / dt - lambda * f(tm, xm, ym);
        out.residual = std::max(out.residual, r.lpNorm<Eigen::Infinity>());
    }
    return out;
}

RunResult run_theorem41(const phi::PhiOperator& op, const SecondOrderField& f, Window window, const RunOptions& opt,
                        const std::optional<SecondOrderDeformation>& deform) {
    phi::PhiCheckOptions popt = opt.phi;
    popt.exec = opt.exec;
    const CheckReport phis = phi_hypotheses(op, opt.q, popt);
    if (!phis.pass()) {
        std::string failed;
        for (const auto& e : phis.entries)
            if (e.mandatory && !passes(e.verdict)) failed += (failed.empty() ? "" : ", ") + e.name;
        throw PhiChecksFailed(op.name + " fails " + failed);
    }
    const CyclicSystem sys = reduce_second_order(op, f);
    const int m = op.m;
    if (window.derivative_bound && !window.derivative_norm)
        window.derivative_norm = [op, m](double t, const Vec& x) {
            return phi::phi_inverse(op, t, x.segment(m, m)).norm();
        };
    RunResult out;
    if (!deform) {
        out = run_theorem31(make_homotopy(sys, HomotopyKind::scaling), window, opt);
    } else {
        const auto ft = deform->f_tilde;
        const auto f0 = deform->f0;
        DeformField ht = [op, ft, m](double t, const Vec& x, double lambda) {
            return ft(t, x.head(m), phi::phi_inverse(op, t, x.segment(m, m)), lambda);
        };
        StateField h0 = [op, f0, m](double t, const Vec& x) {
            return f0(x.head(m), phi::phi_inverse(op, t, x.segment(m, m)));
        };
        out = run_theorem32(make_homotopy(sys, HomotopyKind::deformation, ht, h0), window, opt);
    }
    out.theorem = deform ? "second_order_deformation" : "second_order_scaling";
    CheckReport merged = phis;
    merged.append(out.hypotheses);
    out.hypotheses = merged;
    double worst = 0.0;
    for (const PeriodicSolution& s : out.solutions) {
        SecondOrderSolution rec =
            deform ? recover_second_order(op, [&](double t, const Vec& x, const Vec& y) {
                         return deform->f_tilde(t, x, y, 1.0);
                     }, s, 1.0)
                   : recover_second_order(op, f, s, s.lambda);
        worst = std::max(worst, rec.residual);
        out.recovered.push_back(std::move(rec));
    }
    if (!out.solutions.empty()) {
        const double bound = 10.0 * opt.continuation.newton.tol;
        out.hypotheses.entries.push_back({"second_order_residual",
                                          worst <= bound ? Verdict::pass : Verdict::fail,
                                          {{"max_residual", worst}, {"bound", bound}},
                                          ""});
    }
    return out;
}

}  // namespace percont::verify
