#include "percont/systems.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <regex>

#include "percont/errors.hpp"

namespace percont {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool looks_like_state_variable(const std::string& name) {
    static const std::regex re("x[0-9]+(_[0-9]+)?");
    return std::regex_match(name, re);
}

// Parses m component expressions; an out-of-scope state variable becomes a
// DimensionMismatch naming the field.
std::vector<expr::Expression> parse_components(const std::vector<std::string>& src, int m,
                                               const std::vector<std::string>& vars, const std::string& field) {
    if (static_cast<int>(src.size()) != m)
        throw DimensionMismatch(field + " has " + std::to_string(src.size()) + " components, expected " +
                                std::to_string(m));
    std::vector<expr::Expression> out;
    for (const std::string& s : src) {
        try {
            out.push_back(expr::Expression::parse(s, vars));
        } catch (const expr::UnknownIdentifier& e) {
            if (looks_like_state_variable(e.name()) || e.name() == "t" || e.name() == "lambda")
                throw DimensionMismatch(field + " may not reference '" + e.name() + "'");
            throw;
        }
    }
    return out;
}

struct Compiled {
    std::vector<expr::Expression> comps;

    // values: [t, args...]
    Vec operator()(const std::vector<double>& values) const {
        Vec out(static_cast<Eigen::Index>(comps.size()));
        for (std::size_t i = 0; i < comps.size(); ++i) out[static_cast<Eigen::Index>(i)] = comps[i].evaluate(values);
        return out;
    }
};

std::vector<double> pack(double t, const Vec& v) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(v.size()) + 1);
    out.push_back(t);
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

void require_size(const Vec& v, Eigen::Index n, const char* what) {
    if (v.size() != n)
        throw DimensionMismatch(std::string(what) + " has dimension " + std::to_string(v.size()) + ", expected " +
                                std::to_string(n));
}

double sample_in(double lo, double hi, std::mt19937_64& rng) {
    lo = std::max(lo, -2.0);
    hi = std::min(hi, 2.0);
    if (!(lo < hi)) return 0.5 * (lo + hi);
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace

BlockDomain BlockDomain::whole(int m) {
    return {std::vector<double>(static_cast<std::size_t>(m), -kInf), std::vector<double>(static_cast<std::size_t>(m), kInf),
            kInf};
}

BlockDomain BlockDomain::ball(int m, double radius) {
    BlockDomain d = whole(m);
    d.ball_radius = radius;
    return d;
}

bool BlockDomain::contains(const Vec& w) const {
    for (Eigen::Index k = 0; k < w.size(); ++k) {
        const auto i = static_cast<std::size_t>(k);
        if (!(w[k] > lo[i] && w[k] < hi[i])) return false;
    }
    return !std::isfinite(ball_radius) || w.norm() < ball_radius;
}

void CyclicSystem::validate() const {
    if (n < 2) throw DimensionMismatch("cyclic system needs n >= 2");
    if (m < 1) throw DimensionMismatch("cyclic system needs m >= 1");
    if (!(T > 0.0)) throw Error("period T must be positive");
    if (static_cast<int>(g.size()) != n - 1)
        throw DimensionMismatch("expected " + std::to_string(n - 1) + " g fields, got " + std::to_string(g.size()));
    if (!h) throw DimensionMismatch("missing h field");
    if (static_cast<int>(domain.size()) != n)
        throw DimensionMismatch("expected " + std::to_string(n) + " domain blocks, got " + std::to_string(domain.size()));
    for (int i = 0; i < n; ++i) {
        const BlockDomain& d = domain[static_cast<std::size_t>(i)];
        if (static_cast<int>(d.lo.size()) != m || static_cast<int>(d.hi.size()) != m)
            throw DimensionMismatch("domain block " + std::to_string(i + 1) + " has wrong dimension");
        for (int k = 0; k < m; ++k)
            if (!(d.lo[static_cast<std::size_t>(k)] < d.hi[static_cast<std::size_t>(k)]))
                throw Error("domain block " + std::to_string(i + 1) + " is empty");
        if (i >= 1 && !d.contains(Vec::Zero(m)))
            throw DomainMissingOrigin("domain block D_" + std::to_string(i + 1) + " must contain 0");
    }
}

bool CyclicSystem::contains(const Vec& x) const {
    for (int i = 0; i < n; ++i)
        if (!domain[static_cast<std::size_t>(i)].contains(block(x, i))) return false;
    return true;
}

void CyclicSystem::require_contains(const Vec& x, double t) const {
    require_size(x, state_dim(), "state");
    for (int i = 0; i < n; ++i)
        if (!domain[static_cast<std::size_t>(i)].contains(block(x, i)))
            throw DomainViolation("state block " + std::to_string(i + 1) + " outside D at t = " + std::to_string(t));
}

std::vector<std::string> block_variables(int i, int m) {
    std::vector<std::string> v;
    if (m == 1) {
        v.push_back("x" + std::to_string(i));
    } else {
        for (int k = 1; k <= m; ++k) v.push_back("x" + std::to_string(i) + "_" + std::to_string(k));
    }
    return v;
}

std::vector<std::string> state_variables(int n, int m) {
    std::vector<std::string> v;
    for (int i = 1; i <= n; ++i) {
        auto b = block_variables(i, m);
        v.insert(v.end(), b.begin(), b.end());
    }
    return v;
}

CyclicSystem build_cyclic(int n, int m, double T, const std::vector<std::vector<std::string>>& g_exprs,
                          const std::vector<std::string>& h_exprs, std::vector<BlockDomain> domain) {
    if (n < 2) throw DimensionMismatch("cyclic system needs n >= 2");
    if (m < 1) throw DimensionMismatch("cyclic system needs m >= 1");
    if (static_cast<int>(g_exprs.size()) != n - 1)
        throw DimensionMismatch("expected " + std::to_string(n - 1) + " g fields, got " + std::to_string(g_exprs.size()));
    CyclicSystem sys;
    sys.n = n;
    sys.m = m;
    sys.T = T;
    for (int i = 0; i < n - 1; ++i) {
        std::vector<std::string> vars{"t"};
        const auto b = block_variables(i + 2, m);
        vars.insert(vars.end(), b.begin(), b.end());
        auto c = std::make_shared<Compiled>(
            Compiled{parse_components(g_exprs[static_cast<std::size_t>(i)], m, vars, "g" + std::to_string(i + 1))});
        sys.g.push_back([c, m](double t, const Vec& w) {
            require_size(w, m, "g argument");
            return (*c)(pack(t, w));
        });
    }
    std::vector<std::string> vars{"t"};
    const auto sv = state_variables(n, m);
    vars.insert(vars.end(), sv.begin(), sv.end());
    auto hc = std::make_shared<Compiled>(Compiled{parse_components(h_exprs, m, vars, "h")});
    sys.h = [hc, n, m](double t, const Vec& x) {
        require_size(x, n * m, "h argument");
        return (*hc)(pack(t, x));
    };
    if (domain.empty())
        for (int i = 0; i < n; ++i) domain.push_back(BlockDomain::whole(m));
    sys.domain = std::move(domain);
    sys.validate();
    return sys;
}

std::vector<std::string> second_order_variables(int m) {
    std::vector<std::string> v{"t"};
    for (int k = 1; k <= m; ++k) v.push_back("x" + std::to_string(k));
    for (int k = 1; k <= m; ++k) v.push_back("y" + std::to_string(k));
    if (m == 1) {
        v.push_back("x");
        v.push_back("y");
    }
    return v;
}

SecondOrderField parse_second_order_field(const std::vector<std::string>& exprs, int m) {
    auto c = std::make_shared<Compiled>(Compiled{parse_components(exprs, m, second_order_variables(m), "f")});
    return [c, m](double t, const Vec& x, const Vec& y) {
        require_size(x, m, "f state argument");
        require_size(y, m, "f derivative argument");
        std::vector<double> vals{t};
        for (int k = 0; k < m; ++k) vals.push_back(x[k]);
        for (int k = 0; k < m; ++k) vals.push_back(y[k]);
        if (m == 1) {
            vals.push_back(x[0]);
            vals.push_back(y[0]);
        }
        return (*c)(vals);
    };
}

CyclicSystem reduce_second_order(const phi::PhiOperator& op, const SecondOrderField& f) {
    const int m = op.m;
    try {
        const Vec probe = f(0.0, Vec::Zero(m), Vec::Zero(m));
        require_size(probe, m, "f value");
    } catch (const DimensionMismatch&) {
        throw;
    } catch (const Error&) {
    }
    CyclicSystem sys;
    sys.n = 2;
    sys.m = m;
    sys.T = op.T;
    sys.g.push_back([op](double t, const Vec& w) { return phi::phi_inverse(op, t, w); });
    sys.h = [op, f, m](double t, const Vec& x) {
        return f(t, x.head(m), phi::phi_inverse(op, t, x.segment(m, m)));
    };
    sys.domain = {BlockDomain::whole(m), std::isfinite(op.range_radius) ? BlockDomain::ball(m, 0.999 * op.range_radius)
                                                                        : BlockDomain::whole(m)};
    sys.validate();
    return sys;
}

CyclicSystem reduce_higher_order(const phi::PhiOperator& op, const StateField& h, int n) {
    if (n < 2) throw DimensionMismatch("higher-order reduction needs n >= 2");
    const int m = op.m;
    CyclicSystem sys;
    sys.n = n;
    sys.m = m;
    sys.T = op.T;
    sys.g.push_back([op](double t, const Vec& w) { return phi::phi_inverse(op, t, w); });
    for (int j = 2; j < n; ++j) sys.g.push_back([](double, const Vec& w) { return w; });
    sys.h = h;
    sys.domain.push_back(BlockDomain::whole(m));
    sys.domain.push_back(std::isfinite(op.range_radius) ? BlockDomain::ball(m, 0.999 * op.range_radius)
                                                        : BlockDomain::whole(m));
    for (int j = 2; j < n; ++j) sys.domain.push_back(BlockDomain::whole(m));
    sys.validate();
    return sys;
}

std::string to_string(HomotopyKind k) { return k == HomotopyKind::scaling ? "scaling" : "deformation"; }

Vec HomotopyFamily::last_block(double t, const Vec& x, double lambda) const {
    if (kind == HomotopyKind::scaling) return lambda * base.h(t, x);
    return h_tilde(t, x, lambda);
}

HomotopyFamily make_homotopy(const CyclicSystem& sys, HomotopyKind kind, DeformField h_tilde, StateField h0,
                             const EndpointCheckOptions& opt) {
    sys.validate();
    HomotopyFamily fam{sys, kind, std::move(h_tilde), std::move(h0)};
    if (kind == HomotopyKind::scaling) return fam;
    if (!fam.h_tilde || !fam.h0) throw Error("deformation homotopy needs both h_tilde and h0");
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> ut(0.0, sys.T);
    double e0 = 0.0, e1 = 0.0;
    for (int s = 0; s < opt.samples; ++s) {
        const double t = ut(rng);
        Vec x(sys.state_dim());
        for (int i = 0; i < sys.n; ++i) {
            const BlockDomain& d = sys.domain[static_cast<std::size_t>(i)];
            for (int k = 0; k < sys.m; ++k)
                x[i * sys.m + k] = sample_in(d.lo[static_cast<std::size_t>(k)], d.hi[static_cast<std::size_t>(k)], rng);
            if (std::isfinite(d.ball_radius)) {
                Vec b = x.segment(i * sys.m, sys.m);
                const double cap = 0.9 * d.ball_radius;
                if (b.norm() >= cap) x.segment(i * sys.m, sys.m) = b * (cap / (b.norm() * 1.0001));
            }
        }
        if (!sys.contains(x)) continue;
        e1 = std::max(e1, (fam.h_tilde(t, x, 1.0) - sys.h(t, x)).lpNorm<Eigen::Infinity>());
        e0 = std::max(e0, (fam.h_tilde(t, x, 0.0) - fam.h0(t, x)).lpNorm<Eigen::Infinity>());
    }
    if (e1 > opt.tol)
        throw EndpointMismatch("h_tilde(., ., 1) differs from h by " + std::to_string(e1));
    if (e0 > opt.tol)
        throw EndpointMismatch("h_tilde(., ., 0) differs from h0 by " + std::to_string(e0));
    return fam;
}

HomotopyFamily make_homotopy_from_exprs(const CyclicSystem& sys, HomotopyKind kind,
                                        const std::vector<std::string>& h_tilde_exprs,
                                        const std::vector<std::string>& h0_exprs, const EndpointCheckOptions& opt) {
    if (kind == HomotopyKind::scaling) return make_homotopy(sys, kind, {}, {}, opt);
    const int n = sys.n, m = sys.m;
    const auto sv = state_variables(n, m);
    std::vector<std::string> tv{"t"};
    tv.insert(tv.end(), sv.begin(), sv.end());
    tv.push_back("lambda");
    auto ht = std::make_shared<Compiled>(Compiled{parse_components(h_tilde_exprs, m, tv, "h_tilde")});
    auto h0 = std::make_shared<Compiled>(Compiled{parse_components(h0_exprs, m, sv, "h0")});
    DeformField fht = [ht, n, m](double t, const Vec& x, double lambda) {
        require_size(x, n * m, "h_tilde argument");
        std::vector<double> vals = pack(t, x);
        vals.push_back(lambda);
        return (*ht)(vals);
    };
    StateField fh0 = [h0, n, m](double, const Vec& x) {
        require_size(x, n * m, "h0 argument");
        std::vector<double> vals(x.data(), x.data() + x.size());
        return (*h0)(vals);
    };
    return make_homotopy(sys, kind, fht, fh0, opt);
}

Vec eval_rhs(const HomotopyFamily& fam, double t, const Vec& x, double lambda) {
    const CyclicSystem& s = fam.base;
    s.require_contains(x, t);
    Vec out(s.state_dim());
    for (int i = 0; i < s.n - 1; ++i) out.segment(i * s.m, s.m) = s.g[static_cast<std::size_t>(i)](t, s.block(x, i + 1));
    out.segment((s.n - 1) * s.m, s.m) = fam.last_block(t, x, lambda);
    return out;
}

}  // namespace percont
