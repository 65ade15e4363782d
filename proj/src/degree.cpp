#include "percont/degree.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

namespace percont::degree {

namespace {

constexpr double kQuarterTurn = std::numbers::pi / 2.0;

void validate_box(const Box& b) {
    if (b.lo.size() != b.hi.size() || b.lo.empty()) throw Error("region: box bounds must be nonempty and of equal length");
    for (std::size_t k = 0; k < b.lo.size(); ++k)
        if (!(b.lo[k] < b.hi[k]) || !std::isfinite(b.lo[k]) || !std::isfinite(b.hi[k]))
            throw Error("region: box axis " + std::to_string(k) + " needs finite lo < hi");
}

double signed_area(const std::vector<std::array<double, 2>>& v) {
    double a = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto& p = v[i];
        const auto& q = v[(i + 1) % v.size()];
        a += p[0] * q[1] - q[0] * p[1];
    }
    return 0.5 * a;
}

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

double angle_between(const Vec& a, const Vec& b) {
    const double cross = a[0] * b[1] - a[1] * b[0];
    const double dot = a[0] * b[0] + a[1] * b[1];
    return std::atan2(cross, dot);
}

struct SegmentSum {
    double angle = 0.0;
    double min_norm = std::numeric_limits<double>::infinity();
    bool exhausted = false;
    bool zero_hit = false;
};

SegmentSum wind_segment(const Map& f, const Vec& pa, const Vec& pb, const Vec& fa, const Vec& fb,
                        const WindingOptions& opts) {
    struct Piece {
        Vec pa, pb, fa, fb;
        int depth;
    };
    SegmentSum out;
    std::vector<Piece> stack;
    stack.push_back({pa, pb, fa, fb, 0});
    while (!stack.empty()) {
        Piece s = std::move(stack.back());
        stack.pop_back();
        const double d = angle_between(s.fa, s.fb);
        if (std::fabs(d) < kQuarterTurn) {
            out.angle += d;
            continue;
        }
        if (s.depth >= opts.max_refine) {
            out.exhausted = true;
            out.angle += d;
            continue;
        }
        Vec pm = 0.5 * (s.pa + s.pb);
        Vec fm = f(pm);
        const double nm = fm.norm();
        out.min_norm = std::min(out.min_norm, nm);
        if (nm <= opts.zero_tol) {
            out.zero_hit = true;
            return out;
        }
        stack.push_back({pm, s.pb, fm, s.fb, s.depth + 1});
        stack.push_back({std::move(s.pa), pm, std::move(s.fa), fm, s.depth + 1});
    }
    return out;
}

struct NewtonOutcome {
    bool converged = false;
    Vec x;
    double residual = 0.0;
};

NewtonOutcome damped_newton(const Map& f, Vec x, const Box& box, const SignSumOptions& opts) {
    NewtonOutcome out;
    Vec fx;
    try {
        fx = f(x);
    } catch (const Error&) {
        return out;
    }
    double norm = fx.lpNorm<Eigen::Infinity>();
    const int d = static_cast<int>(x.size());
    Vec span(d);
    for (int k = 0; k < d; ++k) span[k] = box.hi[k] - box.lo[k];

    for (int it = 0; it <= opts.max_newton_iter; ++it) {
        if (!std::isfinite(norm)) return out;
        if (norm <= opts.newton_tol) {
            out.converged = true;
            out.x = std::move(x);
            out.residual = norm;
            return out;
        }
        if (it == opts.max_newton_iter) break;
        Eigen::MatrixXd J;
        try {
            J = fd_jacobian(f, x);
        } catch (const Error&) {
            return out;
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
        if (!lu.isInvertible()) return out;
        const Vec step = lu.solve(-fx);
        if (!step.allFinite()) return out;
        double alpha = 1.0;
        bool accepted = false;
        for (int h = 0; h < 30; ++h, alpha *= 0.5) {
            Vec trial = x + alpha * step;
            try {
                Vec ft = f(trial);
                const double nt = ft.lpNorm<Eigen::Infinity>();
                if (std::isfinite(nt) && nt < (1.0 - 1e-4 * alpha) * norm) {
                    x = std::move(trial);
                    fx = std::move(ft);
                    norm = nt;
                    accepted = true;
                    break;
                }
            } catch (const Error&) {
            }
        }
        if (!accepted) return out;
        for (int k = 0; k < d; ++k)
            if (x[k] < box.lo[k] - span[k] || x[k] > box.hi[k] + span[k]) return out;
    }
    return out;
}

int auto_starts(int d) {
    switch (d) {
        case 1: return 64;
        case 2: return 32;
        case 3: return 10;
        case 4: return 5;
        case 5: return 4;
        default: return 3;
    }
}

int auto_boundary_samples(int d) {
    if (d <= 1) return 2;
    const double k = std::pow(20000.0 / (2.0 * d), 1.0 / (d - 1));
    return std::clamp(static_cast<int>(k), 3, 64);
}

struct SignCount {
    int value = 0;
    bool degenerate = false;
};

SignCount count_signs(const Map& f, const Box& box, const SignSumOptions& opts) {
    SignCount out;
    for (const Vec& z : find_zeros(f, box, opts)) {
        const Eigen::MatrixXd J = fd_jacobian(f, z);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
        const auto& sv = svd.singularValues();
        const double smax = sv(0);
        const double rcond = smax > 0.0 ? sv(sv.size() - 1) / smax : 0.0;
        if (rcond < opts.singular_rcond) {
            out.degenerate = true;
            return out;
        }
        out.value += sign_of(J.determinant());
    }
    return out;
}

}  // namespace

bool Box::contains_open(const Vec& x) const {
    for (std::size_t k = 0; k < lo.size(); ++k)
        if (!(x[static_cast<Eigen::Index>(k)] > lo[k] && x[static_cast<Eigen::Index>(k)] < hi[k])) return false;
    return true;
}

Region Region::interval(double a, double b) {
    if (!(a < b)) throw Error("region: interval needs a < b");
    return Region(Interval{a, b});
}

Region Region::box(std::vector<double> lo, std::vector<double> hi) {
    Box b{std::move(lo), std::move(hi)};
    validate_box(b);
    return Region(std::move(b));
}

Region Region::polygon(std::vector<std::array<double, 2>> vertices) {
    if (vertices.size() < 3) throw Error("region: polygon needs at least 3 vertices");
    if (!(signed_area(vertices) > 0.0)) throw Error("region: polygon must be positively oriented");
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        const auto& a = vertices[i];
        const auto& b = vertices[(i + 1) % vertices.size()];
        const auto& c = vertices[(i + 2) % vertices.size()];
        const double cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
        if (cross < 0.0) throw Error("region: polygon must be convex");
    }
    return Region(Polygon{std::move(vertices)});
}

int Region::dimension() const {
    if (std::holds_alternative<Interval>(shape_)) return 1;
    if (const auto* b = std::get_if<Box>(&shape_)) return b->dimension();
    return 2;
}

Box Region::as_box() const {
    if (const auto* i = std::get_if<Interval>(&shape_)) return Box{{i->a}, {i->b}};
    if (const auto* b = std::get_if<Box>(&shape_)) return *b;
    throw Error("region: polygon has no box view");
}

std::vector<std::array<double, 2>> Region::boundary_loop() const {
    if (const auto* p = std::get_if<Polygon>(&shape_)) return p->vertices;
    const Box b = as_box();
    if (b.dimension() != 2) throw Error("region: boundary loop needs a planar region");
    return {{b.lo[0], b.lo[1]}, {b.hi[0], b.lo[1]}, {b.hi[0], b.hi[1]}, {b.lo[0], b.hi[1]}};
}

std::string to_string(Method m) {
    switch (m) {
        case Method::sign_1d: return "sign_1d";
        case Method::winding_2d: return "winding_2d";
        case Method::sign_sum: return "sign_sum";
    }
    return "?";
}

Map lift(const ScalarMap& f) {
    return [f](const Vec& x) {
        Vec out(1);
        out[0] = f(x[0]);
        return out;
    };
}

Eigen::MatrixXd fd_jacobian(const Map& f, const Vec& x, double rel_step) {
    const Eigen::Index d = x.size();
    Eigen::MatrixXd J;
    Vec xp = x;
    for (Eigen::Index k = 0; k < d; ++k) {
        const double h = rel_step * std::max(1.0, std::fabs(x[k]));
        xp[k] = x[k] + h;
        const Vec fp = f(xp);
        xp[k] = x[k] - h;
        const Vec fm = f(xp);
        xp[k] = x[k];
        if (k == 0) J.resize(fp.size(), d);
        J.col(k) = (fp - fm) / (2.0 * h);
    }
    return J;
}

DegreeResult degree_1d(const ScalarMap& f, const Region& interval, double zero_tol) {
    const Box b = interval.as_box();
    if (b.dimension() != 1) throw Error("degree_1d: region must be one-dimensional");
    const double fa = f(b.lo[0]);
    const double fb = f(b.hi[0]);
    const double min_norm = std::min(std::fabs(fa), std::fabs(fb));
    if (min_norm <= zero_tol)
        throw ZeroOnBoundary("degree_1d: |f| = " + std::to_string(min_norm) + " at an endpoint");
    DegreeResult r;
    r.value = (sign_of(fb) - sign_of(fa)) / 2;
    r.method = Method::sign_1d;
    r.boundary_min_norm = min_norm;
    r.certified = min_norm >= kCertifyFactor * zero_tol;
    return r;
}

DegreeResult degree_winding_2d(const Map& f, const Region& region, const WindingOptions& opts) {
    if (region.dimension() != 2) throw Error("degree_winding_2d: region must be two-dimensional");
    const auto loop = region.boundary_loop();
    const std::size_t per_edge = static_cast<std::size_t>(std::max(1, opts.init_samples));
    const std::size_t count = loop.size() * per_edge;

    std::vector<Vec> points(count, Vec(2));
    for (std::size_t e = 0; e < loop.size(); ++e) {
        const auto& a = loop[e];
        const auto& b = loop[(e + 1) % loop.size()];
        for (std::size_t k = 0; k < per_edge; ++k) {
            const double s = static_cast<double>(k) / static_cast<double>(per_edge);
            points[e * per_edge + k] << a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1]);
        }
    }

    std::vector<Vec> values(count);
    for_each_index(opts.exec, count, [&](std::size_t i) { values[i] = f(points[i]); });

    double min_norm = std::numeric_limits<double>::infinity();
    for (const Vec& v : values) min_norm = std::min(min_norm, v.norm());
    if (min_norm <= opts.zero_tol)
        throw ZeroOnBoundary("degree_winding_2d: boundary sample with |f| = " + std::to_string(min_norm));

    std::vector<SegmentSum> pieces(count);
    for_each_index(opts.exec, count, [&](std::size_t i) {
        const std::size_t j = (i + 1) % count;
        pieces[i] = wind_segment(f, points[i], points[j], values[i], values[j], opts);
    });

    double total = 0.0;
    for (const SegmentSum& s : pieces) {
        min_norm = std::min(min_norm, s.min_norm);
        if (s.zero_hit)
            throw ZeroOnBoundary("degree_winding_2d: refined boundary sample with |f| <= zero_tol");
        if (s.exhausted)
            throw RefinementExhausted("degree_winding_2d: angle increment >= pi/2 after max_refine bisections");
        total += s.angle;
    }

    DegreeResult r;
    r.value = static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
    r.method = Method::winding_2d;
    r.boundary_min_norm = min_norm;
    r.certified = min_norm >= kCertifyFactor * opts.zero_tol;
    return r;
}

double sampled_boundary_min_norm(const Map& f, const Box& box, int samples_per_axis, Exec exec) {
    const int d = box.dimension();
    if (d == 1) return std::min(f(Vec::Constant(1, box.lo[0])).norm(), f(Vec::Constant(1, box.hi[0])).norm());
    const int k = std::max(2, samples_per_axis);
    std::size_t per_face = 1;
    for (int a = 0; a < d - 1; ++a) per_face *= static_cast<std::size_t>(k);
    const std::size_t total = per_face * static_cast<std::size_t>(2 * d);

    std::vector<double> norms(total);
    for_each_index(exec, total, [&](std::size_t idx) {
        const std::size_t face = idx / per_face;
        std::size_t rem = idx % per_face;
        const int axis = static_cast<int>(face / 2);
        Vec x(d);
        for (int a = 0; a < d; ++a) {
            if (a == axis) {
                x[a] = (face % 2 == 0) ? box.lo[a] : box.hi[a];
                continue;
            }
            const std::size_t i = rem % static_cast<std::size_t>(k);
            rem /= static_cast<std::size_t>(k);
            x[a] = box.lo[a] + (box.hi[a] - box.lo[a]) * static_cast<double>(i) / (k - 1);
        }
        norms[idx] = f(x).norm();
    });
    return *std::min_element(norms.begin(), norms.end());
}

std::vector<Vec> find_zeros(const Map& f, const Box& box, const SignSumOptions& opts) {
    validate_box(box);
    const int d = box.dimension();
    const int per_axis = opts.starts_per_axis > 0 ? opts.starts_per_axis : auto_starts(d);
    std::size_t total = 1;
    for (int a = 0; a < d; ++a) total *= static_cast<std::size_t>(per_axis);

    std::vector<std::optional<Vec>> found(total);
    for_each_index(opts.exec, total, [&](std::size_t idx) {
        Vec x(d);
        std::size_t rem = idx;
        for (int a = 0; a < d; ++a) {
            const std::size_t i = rem % static_cast<std::size_t>(per_axis);
            rem /= static_cast<std::size_t>(per_axis);
            x[a] = box.lo[a] + (box.hi[a] - box.lo[a]) * (static_cast<double>(i) + 0.5) / per_axis;
        }
        NewtonOutcome r = damped_newton(f, std::move(x), box, opts);
        if (r.converged && box.contains_open(r.x)) found[idx] = std::move(r.x);
    });

    std::vector<Vec> clusters;
    for (auto& z : found) {
        if (!z) continue;
        const bool dup = std::any_of(clusters.begin(), clusters.end(), [&](const Vec& c) {
            return (c - *z).lpNorm<Eigen::Infinity>() <= opts.cluster_radius;
        });
        if (!dup) clusters.push_back(std::move(*z));
    }
    std::sort(clusters.begin(), clusters.end(), [](const Vec& a, const Vec& b) {
        return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
    });
    return clusters;
}

DegreeResult degree_sign_sum(const Map& f, const Region& region, const SignSumOptions& opts) {
    const Box box = region.as_box();
    validate_box(box);
    const int d = box.dimension();
    const int bsamples = opts.boundary_samples_per_axis > 0 ? opts.boundary_samples_per_axis : auto_boundary_samples(d);
    const double bmin = sampled_boundary_min_norm(f, box, bsamples, opts.exec);
    if (bmin <= opts.zero_tol)
        throw ZeroOnBoundary("degree_sign_sum: sampled boundary |f| = " + std::to_string(bmin));

    DegreeResult r;
    r.method = Method::sign_sum;
    r.certified = false;
    r.boundary_min_norm = bmin;

    SignCount c = count_signs(f, box, opts);
    if (!c.degenerate) {
        r.value = c.value;
        return r;
    }
    // Degree is locally constant in the target value: count preimages of a
    // small shifted target instead of the degenerate zero.
    const double magnitudes[] = {1e-2, 3e-3, 1e-3};
    for (int attempt = 0; attempt < 3; ++attempt) {
        Vec y(d);
        for (int k = 0; k < d; ++k) y[k] = std::fmod(0.6180339887498949 * (k + 1 + 7 * attempt), 1.0) - 0.3;
        y *= magnitudes[attempt] * bmin / y.norm();
        Map shifted = [&f, y](const Vec& x) { return Vec(f(x) - y); };
        c = count_signs(shifted, box, opts);
        if (!c.degenerate) {
            r.value = c.value;
            return r;
        }
    }
    throw SingularJacobian("degree_sign_sum: degenerate zero persists under regular-value shifts");
}

DegreeResult brouwer_degree(const Map& f, const Region& region, const DegreeOptions& opts) {
    const int d = region.dimension();
    if (d == 1) {
        return degree_1d([&f](double x) { return f(Vec::Constant(1, x))[0]; }, region, opts.zero_tol);
    }
    if (d == 2) {
        WindingOptions w = opts.winding;
        w.zero_tol = opts.zero_tol;
        return degree_winding_2d(f, region, w);
    }
    SignSumOptions s = opts.sign_sum;
    s.zero_tol = opts.zero_tol;
    return degree_sign_sum(f, region, s);
}

}  // namespace percont::degree
