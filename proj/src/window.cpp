#include "percont/window.hpp"

#include <string>

#include "percont/errors.hpp"

namespace percont {

void Window::validate(int n, int m) const {
    if (static_cast<int>(rho.size()) != n)
        throw ConfigError("window.rho", "expected " + std::to_string(n) + " bounds, got " + std::to_string(rho.size()));
    for (std::size_t i = 0; i < rho.size(); ++i)
        if (!(rho[i] > 0.0)) throw ConfigError("window.rho[" + std::to_string(i) + "]", "must be positive");
    if (static_cast<int>(omega1_lo.size()) != m || static_cast<int>(omega1_hi.size()) != m)
        throw ConfigError("window.omega1", "expected " + std::to_string(m) + " bounds per side");
    for (int k = 0; k < m; ++k) {
        const auto i = static_cast<std::size_t>(k);
        const std::string key = "window.omega1[" + std::to_string(k) + "]";
        if (!(omega1_lo[i] < omega1_hi[i])) throw ConfigError(key, "lower bound must be below upper bound");
        if (omega1_lo[i] < -rho[0] || omega1_hi[i] > rho[0]) throw ConfigError(key, "must lie within rho[0]");
    }
    if (derivative_bound && !(*derivative_bound > 0.0))
        throw ConfigError("window.derivative_bound", "must be positive");
}

degree::Region Window::omega1() const { return degree::Region::box(omega1_lo, omega1_hi); }

degree::Box Window::omega1_box() const { return {omega1_lo, omega1_hi}; }

degree::Box Window::block_box(int i, int m) const {
    const double r = rho[static_cast<std::size_t>(i)];
    return {std::vector<double>(static_cast<std::size_t>(m), -r), std::vector<double>(static_cast<std::size_t>(m), r)};
}

}  // namespace percont
