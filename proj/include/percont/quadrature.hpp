#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace percont {

enum class QuadratureKind { composite_simpson, composite_gauss4 };

std::string to_string(QuadratureKind k);
QuadratureKind quadrature_kind_from_string(const std::string& s);

struct QuadratureNode {
    double t;
    double weight;
};

/// Composite rule on [0, T]; Simpson needs an even panel count.
struct QuadratureRule {
    QuadratureKind kind = QuadratureKind::composite_simpson;
    int panels = 256;

    void validate() const;
    /// Nodes in increasing t; weights sum to T.
    std::vector<QuadratureNode> nodes(double period) const;
};

using TimeSample = std::function<void(double t, std::span<double> out)>;

/// (1/T) * integral over [0, T] of a k-vector valued function.
std::vector<double> time_average(const QuadratureRule& rule, double period, std::size_t k, const TimeSample& f);

}  // namespace percont
