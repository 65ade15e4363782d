#include "percont/averaging.hpp"

#include <cmath>
#include <string>

#include "percont/errors.hpp"

namespace percont {

MeshFunction::MeshFunction(int M_, double T_, int k_)
    : M(M_), T(T_), k(k_), values(static_cast<std::size_t>(M_) * static_cast<std::size_t>(k_), 0.0) {}

MeshFunction MeshFunction::sample(int M, double T, int k, const std::function<Vec(double)>& f) {
    MeshFunction z(M, T, k);
    for (int j = 0; j < M; ++j) z.set_node(j, f(z.t(j)));
    return z;
}

Vec MeshFunction::node(int j) const {
    return Eigen::Map<const Vec>(values.data() + static_cast<std::size_t>(j) * k, k);
}

void MeshFunction::set_node(int j, const Vec& v) {
    if (v.size() != k) throw DimensionMismatch("mesh node has dimension " + std::to_string(v.size()));
    Eigen::Map<Vec>(values.data() + static_cast<std::size_t>(j) * k, k) = v;
}

void MeshFunction::validate() const {
    if (M < 4) throw Error("mesh needs M >= 4");
    if (values.size() != static_cast<std::size_t>(M) * k) throw DimensionMismatch("mesh storage size");
    for (double v : values)
        if (!std::isfinite(v)) throw Error("mesh value not finite");
}

Vec mean_value(const MeshFunction& z) {
    Vec acc = Vec::Zero(z.k);
    for (int j = 0; j < z.M; ++j) acc += z.node(j);
    return acc / z.M;
}

MeshFunction zero_mean_antiderivative(const MeshFunction& z, double tol) {
    const Vec mu = mean_value(z);
    if (mu.lpNorm<Eigen::Infinity>() > tol)
        throw NonZeroMeanInput("input mean " + std::to_string(mu.lpNorm<Eigen::Infinity>()) + " exceeds " +
                               std::to_string(tol));
    MeshFunction x(z.M, z.T, z.k);
    const double h = z.dt();
    for (int j = 0; j + 1 < z.M; ++j)
        for (int c = 0; c < z.k; ++c) x.at(j + 1, c) = x.at(j, c) + 0.5 * h * (z.at(j, c) + z.at(j + 1, c));
    const Vec xm = mean_value(x);
    for (int j = 0; j < z.M; ++j) x.set_node(j, x.node(j) - xm);
    return x;
}

AveragedMap averaged_field(const BlockField& g, double T, const QuadratureRule& q) {
    const auto nodes = q.nodes(T);
    return [g, T, nodes](const Vec& w) {
        Vec acc;
        for (const QuadratureNode& nd : nodes) {
            Vec v;
            try {
                v = g(nd.t, w);
            } catch (const DomainViolation& e) {
                throw DomainViolation(std::string(e.what()) + " (averaging at t = " + std::to_string(nd.t) + ")");
            } catch (const EvalError& e) {
                throw EvalError(std::string(e.what()) + " (averaging at t = " + std::to_string(nd.t) + ")");
            }
            if (acc.size() == 0) acc = Vec::Zero(v.size());
            acc += nd.weight * v;
        }
        return Vec(acc / T);
    };
}

AveragedMap g_sharp(const CyclicSystem& sys, int i, const QuadratureRule& q) {
    if (i < 1 || i >= sys.n) throw DimensionMismatch("g index " + std::to_string(i) + " out of range");
    const BlockDomain dom = sys.domain[static_cast<std::size_t>(i)];
    AveragedMap avg = averaged_field(sys.g[static_cast<std::size_t>(i - 1)], sys.T, q);
    return [avg, dom, i](const Vec& w) {
        if (!dom.contains(w)) throw DomainViolation("argument of g" + std::to_string(i) + "^# outside D");
        return avg(w);
    };
}

AveragedMap h_sharp(const CyclicSystem& sys, const QuadratureRule& q) {
    AveragedMap avg = averaged_field(sys.h, sys.T, q);
    return [avg, sys](const Vec& s) {
        sys.require_contains(s, 0.0);
        return avg(s);
    };
}

AveragedMap h_hat(const CyclicSystem& sys, const QuadratureRule& q) {
    AveragedMap hs = h_sharp(sys, q);
    const int nm = sys.state_dim(), m = sys.m;
    return [hs, nm, m](const Vec& w) {
        if (w.size() != m) throw DimensionMismatch("h_hat argument has dimension " + std::to_string(w.size()));
        Vec x = Vec::Zero(nm);
        x.head(m) = w;
        return hs(x);
    };
}

AveragedMap h0_hat(const HomotopyFamily& fam) {
    if (fam.kind != HomotopyKind::deformation) throw Error("h0_hat needs a deformation family");
    const CyclicSystem sys = fam.base;
    const StateField h0 = fam.h0;
    return [sys, h0](const Vec& w) {
        Vec x = Vec::Zero(sys.state_dim());
        x.head(sys.m) = w;
        sys.require_contains(x, 0.0);
        return h0(0.0, x);
    };
}

AveragedMap ell_map(const CyclicSystem& sys, const QuadratureRule& q) {
    std::vector<AveragedMap> gs;
    for (int i = 1; i < sys.n; ++i) gs.push_back(g_sharp(sys, i, q));
    AveragedMap hs = h_sharp(sys, q);
    const int n = sys.n, m = sys.m;
    return [gs, hs, n, m](const Vec& s) {
        if (s.size() != n * m) throw DimensionMismatch("ell argument has dimension " + std::to_string(s.size()));
        Vec out(n * m);
        for (int i = 0; i < n - 1; ++i) out.segment(i * m, m) = -gs[static_cast<std::size_t>(i)](s.segment((i + 1) * m, m));
        out.segment((n - 1) * m, m) = -hs(s);
        return out;
    };
}

MeshFunction nemytskii(const HomotopyFamily& fam, const MeshFunction& x, double lambda, Exec exec) {
    if (x.k != fam.base.state_dim()) throw DimensionMismatch("mesh dimension does not match the system");
    MeshFunction out(x.M, x.T, x.k);
    for_each_index(exec, static_cast<std::size_t>(x.M), [&](std::size_t j) {
        const int jj = static_cast<int>(j);
        out.set_node(jj, eval_rhs(fam, x.t(jj), x.node(jj), lambda));
    });
    return out;
}

MeshFunction mawhin_operator(const HomotopyFamily& fam, const MeshFunction& x, double lambda, Exec exec) {
    const MeshFunction N = nemytskii(fam, x, lambda, exec);
    const Vec Px = mean_value(x);
    const Vec QN = mean_value(N);
    MeshFunction centred = N;
    for (int j = 0; j < N.M; ++j) centred.set_node(j, N.node(j) - QN);
    MeshFunction K = zero_mean_antiderivative(centred, 1e-9 * std::max(1.0, QN.lpNorm<Eigen::Infinity>()));
    for (int j = 0; j < K.M; ++j) K.set_node(j, K.node(j) + Px + QN);
    return K;
}

MeshFunction mawhin_operator(const CyclicSystem& sys, const MeshFunction& x, Exec exec) {
    return mawhin_operator(make_homotopy(sys, HomotopyKind::scaling), x, 1.0, exec);
}

}  // namespace percont
