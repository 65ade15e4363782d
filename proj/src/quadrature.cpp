#include "percont/quadrature.hpp"

#include "percont/errors.hpp"

namespace percont {

std::string to_string(QuadratureKind k) {
    return k == QuadratureKind::composite_simpson ? "composite_simpson" : "composite_gauss4";
}

QuadratureKind quadrature_kind_from_string(const std::string& s) {
    if (s == "composite_simpson") return QuadratureKind::composite_simpson;
    if (s == "composite_gauss4") return QuadratureKind::composite_gauss4;
    throw Error("unknown quadrature kind '" + s + "' (valid: composite_simpson, composite_gauss4)");
}

void QuadratureRule::validate() const {
    if (panels < 2) throw Error("quadrature: panels must be >= 2");
    if (kind == QuadratureKind::composite_simpson && panels % 2 != 0)
        throw Error("quadrature: Simpson needs an even panel count");
}

std::vector<QuadratureNode> QuadratureRule::nodes(double period) const {
    validate();
    const double h = period / panels;
    std::vector<QuadratureNode> out;
    if (kind == QuadratureKind::composite_simpson) {
        out.reserve(static_cast<std::size_t>(panels) + 1);
        for (int j = 0; j <= panels; ++j) {
            double w = (j == 0 || j == panels) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
            out.push_back({j * h, w * h / 3.0});
        }
        return out;
    }
    static constexpr double x[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                     0.8611363115940526};
    static constexpr double w[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                     0.3478548451374538};
    out.reserve(static_cast<std::size_t>(panels) * 4);
    for (int j = 0; j < panels; ++j) {
        const double c = (j + 0.5) * h;
        for (int q = 0; q < 4; ++q) out.push_back({c + 0.5 * h * x[q], 0.5 * h * w[q]});
    }
    return out;
}

std::vector<double> time_average(const QuadratureRule& rule, double period, std::size_t k, const TimeSample& f) {
    std::vector<double> acc(k, 0.0), buf(k, 0.0);
    for (const QuadratureNode& q : rule.nodes(period)) {
        f(q.t, buf);
        for (std::size_t c = 0; c < k; ++c) acc[c] += q.weight * buf[c];
    }
    for (double& a : acc) a /= period;
    return acc;
}

}  // namespace percont
