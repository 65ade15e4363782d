#include "percont/phi.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "percont/errors.hpp"

namespace percont::phi {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

bool all_finite(const Vec& v) { return v.allFinite(); }

double eval_p(const expr::Expression& p, double t) {
    const double v = p.evaluate(std::span<const double>(&t, 1));
    if (!(v > 1.0) || !std::isfinite(v)) throw EvalError("pt_laplacian: p(t) must exceed 1, got " + std::to_string(v));
    return v;
}

// |s|^(e) s with the value at s = 0 taken as 0 (e > -1).
Vec power_map(const Vec& s, double e) {
    const double r = s.norm();
    if (r == 0.0) return Vec::Zero(s.size());
    return std::pow(r, e) * s;
}

double power_sigma(const Vec& s, double e) {
    const double r = s.norm();
    return r == 0.0 ? 0.0 : std::pow(r, e);
}

Factorization trivial_factorization() {
    return {[](double, const Vec&) { return 1.0; }, [](const Vec& s) { return s; }};
}

std::vector<double> time_grid(double T, int count) {
    count = std::max(count, 2);
    std::vector<double> ts(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) ts[static_cast<std::size_t>(k)] = T * k / (count - 1);
    ts.back() = T;
    return ts;
}

double sample_radius(double limit) { return std::min(0.95 * limit, 2.0); }

double fd_eps(double x) { return 1e-7 * std::max(1.0, std::abs(x)); }

Vec newton_inverse(const PhiOperator& op, double t, const Vec& z, const InverseOptions& opt, double& best) {
    const double target = opt.tol * std::max(1.0, z.norm());
    Vec s = Vec::Zero(op.m);
    Vec r = phi_eval(op, t, s) - z;
    best = r.norm();
    for (int it = 0; it < opt.max_iter && best > target; ++it) {
        Eigen::MatrixXd J(op.m, op.m);
        for (int c = 0; c < op.m; ++c) {
            const double h = fd_eps(s[c]);
            Vec sp = s, sm = s;
            sp[c] += h;
            sm[c] -= h;
            J.col(c) = (phi_eval(op, t, sp) - phi_eval(op, t, sm)) / (2.0 * h);
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
        if (!lu.isInvertible()) break;
        const Vec step = lu.solve(-r);
        double lambda = 1.0;
        bool accepted = false;
        for (int half = 0; half < 40; ++half, lambda *= 0.5) {
            const Vec cand = s + lambda * step;
            if (!(cand.norm() < op.domain_radius)) continue;
            Vec rc;
            try {
                rc = phi_eval(op, t, cand) - z;
            } catch (const Error&) {
                continue;
            }
            if (rc.norm() < best) {
                s = cand;
                r = rc;
                best = rc.norm();
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
    }
    return s;
}

Vec radial_inverse(const PhiOperator& op, double t, const Vec& z, double& best) {
    const double target = z.norm();
    const Vec dir = z / target;
    auto profile = [&](double r) { return phi_eval(op, t, r * dir).norm(); };
    double lo = 0.0, hi;
    if (std::isfinite(op.domain_radius)) {
        hi = std::nextafter(op.domain_radius, 0.0);
    } else {
        hi = 1.0;
        for (int k = 0; k < 1000 && profile(hi) < target; ++k) lo = hi, hi *= 2.0;
    }
    for (int k = 0; k < 200 && hi - lo > 0.0; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        double v;
        try {
            v = profile(mid);
        } catch (const DomainViolation&) {
            hi = mid;
            continue;
        }
        (v < target ? lo : hi) = mid;
    }
    const Vec s = 0.5 * (lo + hi) * dir;
    best = (phi_eval(op, t, s) - z).norm();
    return s;
}

}  // namespace

std::vector<std::string> forward_variables(int m) {
    std::vector<std::string> v{"t"};
    for (int i = 1; i <= m; ++i) v.push_back("s" + std::to_string(i));
    if (m == 1) v.push_back("s");
    return v;
}

std::vector<std::string> inverse_variables(int m) {
    std::vector<std::string> v{"t"};
    for (int i = 1; i <= m; ++i) v.push_back("z" + std::to_string(i));
    if (m == 1) v.push_back("z");
    return v;
}

std::vector<std::string> catalog_names() {
    return {"identity", "p_laplacian", "pt_laplacian", "mean_curvature", "minkowski",
            "rotation", "swap_negate", "scaled",      "custom"};
}

PhiOperator identity(int m, double T) {
    PhiOperator op;
    op.name = "identity";
    op.m = m;
    op.T = T;
    op.forward = [](double, const Vec& s) { return s; };
    op.inverse = [](double, const Vec& z) { return z; };
    op.factorization = trivial_factorization();
    op.radial = true;
    op.inverse_homogeneity = 1.0;
    return op;
}

PhiOperator p_laplacian(double p, int m, double T) {
    if (!(p > 1.0)) throw Error("p_laplacian: p must exceed 1");
    const double q = p / (p - 1.0);
    PhiOperator op;
    op.name = "p_laplacian";
    op.m = m;
    op.T = T;
    op.forward = [p](double, const Vec& s) { return power_map(s, p - 2.0); };
    op.inverse = [q](double, const Vec& z) { return power_map(z, q - 2.0); };
    op.factorization = Factorization{[q](double, const Vec& s) { return power_sigma(s, q - 2.0); },
                                     [](const Vec& s) { return s; }};
    op.radial = true;
    op.inverse_homogeneity = q - 1.0;
    return op;
}

PhiOperator pt_laplacian(const expr::Expression& p_of_t, int m, double T) {
    PhiOperator op;
    op.name = "pt_laplacian";
    op.m = m;
    op.T = T;
    op.forward = [p_of_t](double t, const Vec& s) { return power_map(s, eval_p(p_of_t, t) - 2.0); };
    op.inverse = [p_of_t](double t, const Vec& z) {
        const double p = eval_p(p_of_t, t);
        return power_map(z, p / (p - 1.0) - 2.0);
    };
    op.factorization = Factorization{[p_of_t](double t, const Vec& s) {
                                         const double p = eval_p(p_of_t, t);
                                         return power_sigma(s, p / (p - 1.0) - 2.0);
                                     },
                                     [](const Vec& s) { return s; }};
    op.radial = true;
    return op;
}

PhiOperator mean_curvature(int m, double T) {
    PhiOperator op;
    op.name = "mean_curvature";
    op.m = m;
    op.T = T;
    op.range_radius = 1.0;
    op.forward = [](double, const Vec& s) { return Vec(s / std::sqrt(1.0 + s.squaredNorm())); };
    op.inverse = [](double, const Vec& z) { return Vec(z / std::sqrt(1.0 - z.squaredNorm())); };
    op.factorization = Factorization{[](double, const Vec& z) { return 1.0 / std::sqrt(1.0 - z.squaredNorm()); },
                                     [](const Vec& z) { return z; }};
    op.radial = true;
    return op;
}

PhiOperator minkowski(int m, double T) {
    PhiOperator op;
    op.name = "minkowski";
    op.m = m;
    op.T = T;
    op.domain_radius = 1.0;
    op.forward = [](double, const Vec& s) { return Vec(s / std::sqrt(1.0 - s.squaredNorm())); };
    op.inverse = [](double, const Vec& z) { return Vec(z / std::sqrt(1.0 + z.squaredNorm())); };
    op.factorization = Factorization{[](double, const Vec& z) { return 1.0 / std::sqrt(1.0 + z.squaredNorm()); },
                                     [](const Vec& z) { return z; }};
    op.radial = true;
    return op;
}

PhiOperator rotation(double T) {
    PhiOperator op;
    op.name = "rotation";
    op.m = 2;
    op.T = T;
    op.forward = [T](double t, const Vec& s) {
        const double a = kTwoPi * t / T, c = std::cos(a), sn = std::sin(a);
        Vec out(2);
        out << c * s[0] - sn * s[1], sn * s[0] + c * s[1];
        return out;
    };
    op.inverse = [T](double t, const Vec& z) {
        const double a = kTwoPi * t / T, c = std::cos(a), sn = std::sin(a);
        Vec out(2);
        out << c * z[0] + sn * z[1], -sn * z[0] + c * z[1];
        return out;
    };
    op.inverse_homogeneity = 1.0;
    return op;
}

PhiOperator swap_negate(double T) {
    PhiOperator op;
    op.name = "swap_negate";
    op.m = 2;
    op.T = T;
    auto swap = [](const Vec& s) {
        Vec out(2);
        out << -s[1], -s[0];
        return out;
    };
    op.forward = [swap](double, const Vec& s) { return swap(s); };
    op.inverse = [swap](double, const Vec& z) { return swap(z); };
    op.factorization = Factorization{[](double, const Vec&) { return 1.0; }, swap};
    op.inverse_homogeneity = 1.0;
    return op;
}

PhiOperator scaled(const expr::Expression& eta_of_t, const PhiOperator& inner) {
    auto eta = [eta_of_t](double t) {
        const double v = eta_of_t.evaluate(std::span<const double>(&t, 1));
        if (!(v > 0.0) || !std::isfinite(v)) throw EvalError("scaled: eta(t) must be positive, got " + std::to_string(v));
        return v;
    };
    PhiOperator op;
    op.name = "scaled(" + inner.name + ")";
    op.m = inner.m;
    op.T = inner.T;
    op.domain_radius = inner.domain_radius;
    op.radial = inner.radial;
    op.inverse_homogeneity = inner.inverse_homogeneity;
    if (std::isfinite(inner.range_radius)) {
        double eta_min = kInf;
        for (double t : time_grid(inner.T, 1025)) eta_min = std::min(eta_min, eta(t));
        op.range_radius = inner.range_radius * eta_min;
    }
    const PointFn fwd = inner.forward;
    op.forward = [fwd, eta](double t, const Vec& s) { return Vec(eta(t) * fwd(t, s)); };
    if (inner.inverse) {
        const PointFn inv = *inner.inverse;
        op.inverse = [inv, eta](double t, const Vec& z) { return inv(t, z / eta(t)); };
    } else {
        const PhiOperator in = inner;
        op.inverse = [in, eta](double t, const Vec& z) { return phi_inverse(in, t, Vec(z / eta(t))); };
    }
    if (inner.factorization && inner.inverse_homogeneity) {
        const Factorization f = *inner.factorization;
        const double k = *inner.inverse_homogeneity;
        op.factorization =
            Factorization{[f, k, eta](double t, const Vec& s) { return std::pow(eta(t), -k) * f.sigma(t, s); }, f.tau};
    }
    return op;
}

PhiOperator custom(const std::vector<expr::Expression>& forward, const std::vector<expr::Expression>& inverse,
                   double T, double domain_radius, double range_radius) {
    const int m = static_cast<int>(forward.size());
    if (m < 1) throw DimensionMismatch("custom phi needs at least one component");
    if (!inverse.empty() && static_cast<int>(inverse.size()) != m)
        throw DimensionMismatch("custom phi: inverse has " + std::to_string(inverse.size()) + " components, expected " +
                                std::to_string(m));
    auto apply = [m](const std::vector<expr::Expression>& comps, double t, const Vec& s) {
        std::vector<double> vals{t};
        for (int i = 0; i < m; ++i) vals.push_back(s[i]);
        if (m == 1) vals.push_back(s[0]);
        Vec out(m);
        for (int i = 0; i < m; ++i) out[i] = comps[static_cast<std::size_t>(i)].evaluate(vals);
        return out;
    };
    PhiOperator op;
    op.name = "custom";
    op.m = m;
    op.T = T;
    op.domain_radius = domain_radius;
    op.range_radius = range_radius;
    op.forward = [apply, forward](double t, const Vec& s) { return apply(forward, t, s); };
    if (!inverse.empty()) op.inverse = [apply, inverse](double t, const Vec& z) { return apply(inverse, t, z); };
    return op;
}

Vec phi_eval(const PhiOperator& op, double t, const Vec& s) {
    if (s.size() != op.m)
        throw DimensionMismatch(op.name + ": argument has dimension " + std::to_string(s.size()) + ", expected " +
                                std::to_string(op.m));
    if (!(s.norm() < op.domain_radius))
        throw DomainViolation(op.name + ": |s| = " + std::to_string(s.norm()) + " outside U (radius " +
                              std::to_string(op.domain_radius) + ")");
    Vec out = op.forward(t, s);
    if (!all_finite(out)) throw DomainViolation(op.name + ": non-finite value at t = " + std::to_string(t));
    return out;
}

Vec phi_inverse(const PhiOperator& op, double t, const Vec& z, const InverseOptions& opt) {
    if (z.size() != op.m)
        throw DimensionMismatch(op.name + ": argument has dimension " + std::to_string(z.size()) + ", expected " +
                                std::to_string(op.m));
    if (!(z.norm() < op.range_radius))
        throw RangeViolation(op.name + ": |z| = " + std::to_string(z.norm()) + " outside V (radius " +
                             std::to_string(op.range_radius) + ")");
    if (op.inverse) {
        Vec s = (*op.inverse)(t, z);
        if (!all_finite(s)) throw RangeViolation(op.name + ": inverse not finite at t = " + std::to_string(t));
        return s;
    }
    if (z.norm() == 0.0) {
        const Vec zero = Vec::Zero(op.m);
        if (phi_eval(op, t, zero).norm() <= opt.tol) return zero;
    }
    const double target = opt.tol * std::max(1.0, z.norm());
    double best = kInf;
    Vec s = newton_inverse(op, t, z, opt, best);
    if (best <= target) return s;
    if (op.radial && z.norm() > 0.0) {
        double rbest = kInf;
        Vec sr = radial_inverse(op, t, z, rbest);
        if (rbest <= target) return sr;
        best = std::min(best, rbest);
    }
    throw NewtonDivergence(op.name + ": inversion failed at t = " + std::to_string(t), best);
}

std::vector<Vec> ball_samples(int m, double r, int count, std::uint64_t seed) {
    std::vector<Vec> out;
    out.push_back(Vec::Zero(m));
    const int rest = std::max(count - 1, 0);
    if (m == 1) {
        for (int k = 0; k < rest; ++k) {
            Vec v(1);
            v[0] = r * (2.0 * (k + 0.5) / rest - 1.0);
            out.push_back(v);
        }
        return out;
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int k = 0; k < rest; ++k) {
        Vec d(m);
        do {
            for (int i = 0; i < m; ++i) d[i] = normal(rng);
        } while (d.norm() < 1e-12);
        d /= d.norm();
        out.push_back(r * std::pow(unif(rng), 1.0 / m) * d);
    }
    return out;
}

CheckReport check_phi_axioms(const PhiOperator& op, const PhiCheckOptions& opt) {
    const std::vector<double> ts = time_grid(op.T, opt.t_count);
    const std::vector<Vec> ss = ball_samples(op.m, sample_radius(op.domain_radius), opt.s_count, opt.seed);
    const std::vector<Vec> zs = ball_samples(op.m, sample_radius(op.range_radius), opt.s_count, opt.seed + 1);

    struct Row {
        int escapes = 0, failures = 0;
        double max_forward = 0.0, phi2 = 0.0, rt_forward = 0.0, rt_backward = 0.0;
    };
    std::vector<Row> rows(ts.size());
    for_each_index(opt.exec, ts.size(), [&](std::size_t k) {
        Row& row = rows[k];
        const double t = ts[k];
        try {
            row.phi2 = phi_eval(op, t, Vec::Zero(op.m)).norm();
        } catch (const Error&) {
            row.phi2 = kInf;
        }
        for (const Vec& s : ss) {
            Vec z;
            try {
                z = phi_eval(op, t, s);
            } catch (const Error&) {
                ++row.escapes;
                continue;
            }
            row.max_forward = std::max(row.max_forward, z.norm());
            if (!(z.norm() < op.range_radius)) {
                ++row.escapes;
                continue;
            }
            try {
                row.rt_forward = std::max(row.rt_forward, (phi_inverse(op, t, z) - s).norm());
            } catch (const Error&) {
                ++row.failures;
            }
        }
        for (const Vec& z : zs) {
            try {
                const Vec s = phi_inverse(op, t, z);
                if (!(s.norm() < op.domain_radius)) {
                    ++row.failures;
                    continue;
                }
                row.rt_backward = std::max(row.rt_backward, (phi_eval(op, t, s) - z).norm());
            } catch (const Error&) {
                ++row.failures;
            }
        }
    });

    std::vector<double> phi3(ss.size(), 0.0);
    for_each_index(opt.exec, ss.size(), [&](std::size_t i) {
        try {
            phi3[i] = (phi_eval(op, 0.0, ss[i]) - phi_eval(op, op.T, ss[i])).norm();
        } catch (const Error&) {
            phi3[i] = kInf;
        }
    });

    Row tot;
    for (const Row& r : rows) {
        tot.escapes += r.escapes;
        tot.failures += r.failures;
        tot.max_forward = std::max(tot.max_forward, r.max_forward);
        tot.phi2 = std::max(tot.phi2, r.phi2);
        tot.rt_forward = std::max(tot.rt_forward, r.rt_forward);
        tot.rt_backward = std::max(tot.rt_backward, r.rt_backward);
    }
    const double phi3_max = *std::max_element(phi3.begin(), phi3.end());
    const double samples = static_cast<double>(ts.size() * ss.size());

    CheckReport rep;
    CheckEntry e1{"phi1", tot.escapes == 0 ? Verdict::pass : Verdict::fail,
                  {{"range_escapes", tot.escapes}, {"max_abs_value", tot.max_forward}, {"samples", samples}},
                  tot.escapes == 0 ? "" : "sampled values left V or were not finite"};
    CheckEntry e2{"phi2", tot.phi2 <= opt.tol ? Verdict::pass : Verdict::fail, {{"max_violation", tot.phi2}}, ""};
    CheckEntry e3{"phi3", phi3_max <= opt.tol ? Verdict::pass : Verdict::fail, {{"max_violation", phi3_max}}, ""};
    const double rt = std::max(tot.rt_forward, tot.rt_backward);
    const bool ok4 = tot.failures == 0 && rt <= opt.tol;
    CheckEntry e4{"phi4", ok4 ? Verdict::pass : Verdict::fail,
                  {{"max_roundtrip_forward", tot.rt_forward},
                   {"max_roundtrip_backward", tot.rt_backward},
                   {"inverse_failures", tot.failures}},
                  tot.failures == 0 ? "" : "inversion failed at some samples"};
    rep.entries = {e1, e2, e3, e4};
    return rep;
}

CheckReport check_phi_star(const PhiOperator& op, const QuadratureRule& q, const PhiCheckOptions& opt) {
    const std::vector<Vec> zs = ball_samples(op.m, sample_radius(op.range_radius), opt.s_count, opt.seed + 2);
    const auto nodes = q.nodes(op.T);
    std::vector<Vec> psi(zs.size());
    std::vector<char> failed(zs.size(), 0);
    for_each_index(opt.exec, zs.size(), [&](std::size_t i) {
        Vec acc = Vec::Zero(op.m);
        try {
            for (const auto& nd : nodes) acc += nd.weight * phi_inverse(op, nd.t, zs[i]);
        } catch (const Error&) {
            failed[i] = 1;
        }
        psi[i] = acc / op.T;
    });

    const double sep = 10.0 * opt.tol_collision;
    int collisions = 0, zero_hits = 0, failures = 0, pairs = 0;
    double min_gap = kInf, min_abs = kInf, max_abs = 0.0;
    for (std::size_t i = 0; i < zs.size(); ++i) {
        if (failed[i]) {
            ++failures;
            continue;
        }
        if (zs[i].norm() >= sep) {
            const double a = psi[i].norm();
            min_abs = std::min(min_abs, a);
            max_abs = std::max(max_abs, a);
            if (a < opt.tol_collision) ++zero_hits;
        }
        for (std::size_t j = i + 1; j < zs.size(); ++j) {
            if (failed[j] || (zs[i] - zs[j]).norm() < sep) continue;
            ++pairs;
            const double g = (psi[i] - psi[j]).norm();
            min_gap = std::min(min_gap, g);
            if (g < opt.tol_collision) ++collisions;
        }
    }
    bool monotone = true;
    if (op.m == 1) {
        std::vector<std::size_t> idx(zs.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return zs[a][0] < zs[b][0]; });
        int up = 0, down = 0;
        for (std::size_t k = 1; k < idx.size(); ++k) {
            if (zs[idx[k]][0] - zs[idx[k - 1]][0] < sep) continue;
            const double d = psi[idx[k]][0] - psi[idx[k - 1]][0];
            (d > 0 ? up : down) += 1;
        }
        monotone = up == 0 || down == 0;
    }
    const bool ok = collisions == 0 && zero_hits == 0 && failures == 0 && monotone;
    CheckEntry e{"phi_star", ok ? Verdict::pass : Verdict::fail,
                 {{"collisions", collisions},
                  {"zero_collisions", zero_hits},
                  {"pairs_tested", pairs},
                  {"min_pair_gap", min_gap},
                  {"min_abs_psi", min_abs},
                  {"max_abs_psi", max_abs},
                  {"inverse_failures", failures}},
                 ""};
    if (op.m == 1) e.evidence["monotone"] = monotone ? 1.0 : 0.0;
    if (!ok) e.detail = zero_hits > 0 ? "Psi vanishes at nonzero samples" : "Psi is not injective on the samples";
    CheckReport rep;
    rep.entries.push_back(e);
    return rep;
}

CheckReport check_phi_sharp(const PhiOperator& op, const PhiCheckOptions& opt) {
    if (!op.factorization) throw MissingFactorization(op.name + ": no factorization supplied");
    const Factorization& f = *op.factorization;
    const std::vector<double> ts = time_grid(op.T, opt.t_count);
    const std::vector<Vec> zs = ball_samples(op.m, sample_radius(op.range_radius), opt.s_count, opt.seed + 3);
    std::vector<double> worst(ts.size(), 0.0);
    for_each_index(opt.exec, ts.size(), [&](std::size_t k) {
        for (const Vec& z : zs) {
            try {
                const Vec inv = phi_inverse(op, ts[k], z);
                const Vec fac = f.sigma(ts[k], z) * f.tau(z);
                const double v = (inv - fac).norm() / std::max(1.0, inv.norm());
                worst[k] = std::max(worst[k], std::isfinite(v) ? v : kInf);
            } catch (const Error&) {
                worst[k] = kInf;
            }
        }
    });
    const double v = *std::max_element(worst.begin(), worst.end());
    CheckEntry e{"phi_sharp", v <= opt.tol ? Verdict::pass : Verdict::fail, {{"max_violation", v}}, ""};
    if (e.verdict == Verdict::pass) e.detail = "factorization holds; implies phi_star";
    CheckReport rep;
    rep.entries.push_back(e);
    return rep;
}

CheckReport check_legacy_monotone_coercive(const PhiOperator& op, const PhiCheckOptions& opt) {
    const int m = op.m;
    const std::vector<double> ts = time_grid(op.T, std::min(opt.t_count, 16));
    const double rs = sample_radius(op.domain_radius);

    std::vector<std::pair<Vec, Vec>> pairs;
    const double pr = std::min(1.0, 0.5 * op.domain_radius);
    for (int i = 0; i < m; ++i) {
        for (double si : {1.0, -1.0}) {
            Vec a = Vec::Zero(m);
            a[i] = si * pr;
            pairs.emplace_back(a, Vec::Zero(m));
            pairs.emplace_back(a, Vec(-a));
            for (int j = i + 1; j < m; ++j)
                for (double sj : {1.0, -1.0}) {
                    Vec b = a;
                    b[j] = sj * pr;
                    b *= 1.0 / std::sqrt(2.0);
                    pairs.emplace_back(b, Vec::Zero(m));
                    pairs.emplace_back(b, Vec(-b));
                }
        }
    }
    const auto pool = ball_samples(m, rs, 2 * opt.pair_count + 1, opt.seed + 4);
    for (int k = 0; k < opt.pair_count; ++k)
        pairs.emplace_back(pool[static_cast<std::size_t>(2 * k + 1)], pool[static_cast<std::size_t>(2 * k + 2)]);

    struct Best {
        double value = kInf;
        std::size_t pair = 0;
        double t = 0.0;
    };
    std::vector<Best> best(ts.size());
    for_each_index(opt.exec, ts.size(), [&](std::size_t k) {
        for (std::size_t p = 0; p < pairs.size(); ++p) {
            const auto& [a, b] = pairs[p];
            if ((a - b).norm() == 0.0) continue;
            double v;
            try {
                v = (phi_eval(op, ts[k], a) - phi_eval(op, ts[k], b)).dot(a - b);
            } catch (const Error&) {
                continue;
            }
            if (v < best[k].value) best[k] = {v, p, ts[k]};
        }
    });
    Best b1;
    for (const Best& b : best)
        if (b.value < b1.value) b1 = b;

    CheckReport rep;
    CheckEntry h1{"H1", b1.value > 0.0 ? Verdict::pass : Verdict::fail, {{"min_inner_product", b1.value}}, ""};
    if (b1.value <= 0.0) {
        const auto& [a, b] = pairs[b1.pair];
        h1.evidence["witness_t"] = b1.t;
        for (int i = 0; i < m; ++i) {
            h1.evidence["witness_a" + std::to_string(i + 1)] = a[i];
            h1.evidence["witness_b" + std::to_string(i + 1)] = b[i];
        }
        h1.detail = "non-positive pair found";
    }
    rep.entries.push_back(h1);

    CheckEntry h2{"H2", Verdict::fail, {}, ""};
    if (std::isfinite(op.domain_radius)) {
        h2.verdict = Verdict::not_applicable;
        h2.detail = "bounded domain U";
        rep.entries.push_back(h2);
        return rep;
    }
    std::vector<Vec> dirs;
    for (int i = 0; i < m; ++i)
        for (double sg : {1.0, -1.0}) {
            Vec d = Vec::Zero(m);
            d[i] = sg;
            dirs.push_back(d);
        }
    if (m > 1) {
        const auto extra = ball_samples(m, 1.0, 17, opt.seed + 5);
        for (std::size_t i = 1; i < extra.size(); ++i) dirs.push_back(extra[i] / extra[i].norm());
    }
    constexpr int kRungs = 12;
    std::vector<double> alpha(kRungs, kInf);
    bool eval_failed = false;
    for (int k = 0; k < kRungs; ++k) {
        const double r = std::ldexp(1.0, k);
        for (double t : ts)
            for (const Vec& d : dirs) {
                try {
                    alpha[static_cast<std::size_t>(k)] =
                        std::min(alpha[static_cast<std::size_t>(k)], phi_eval(op, t, Vec(r * d)).dot(d));
                } catch (const Error&) {
                    eval_failed = true;
                }
            }
    }
    const bool increasing = alpha[kRungs - 1] > alpha[kRungs - 2] && alpha[kRungs - 2] > alpha[kRungs - 3];
    const bool bounded = std::isfinite(op.range_radius);
    h2.evidence = {{"alpha_r1", alpha[0]}, {"alpha_top", alpha[kRungs - 1]}, {"r_top", std::ldexp(1.0, kRungs - 1)}};
    h2.verdict = increasing && !bounded && !eval_failed ? Verdict::pass : Verdict::fail;
    if (bounded)
        h2.detail = "bounded range: alpha stays below the range radius";
    else if (eval_failed)
        h2.detail = "evaluation failed on the radius ladder";
    else if (!increasing)
        h2.detail = "alpha not increasing at the top rungs";
    rep.entries.push_back(h2);
    return rep;
}

}  // namespace percont::phi
