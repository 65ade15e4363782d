#include "percont/report.hpp"

#include <charconv>
#include <cmath>

namespace percont::report {

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

Json to_json(const CheckEntry& e) {
    Json ev = Json::object();
    for (const auto& [k, v] : e.evidence) ev[k] = number(v);
    return {{"name", e.name},
            {"verdict", to_string(e.verdict)},
            {"mandatory", e.mandatory},
            {"detail", e.detail},
            {"evidence", ev}};
}

Json to_json(const CheckReport& r) {
    Json a = Json::array();
    for (const CheckEntry& e : r.entries) a.push_back(to_json(e));
    return a;
}

namespace {

Json numbers(const std::vector<double>& v) {
    Json a = Json::array();
    for (double x : v) a.push_back(number(x));
    return a;
}

Json point_json(const TracePoint& p) {
    return {{"lambda", number(p.lambda)},
            {"step", number(p.step)},
            {"residual_norm", number(p.residual_norm)},
            {"norms", numbers(p.norms)}};
}

}  // namespace

Json to_json(const ContinuationTrace& tr, bool points) {
    Json j{{"mode", to_string(tr.mode)},
           {"status", to_string(tr.status)},
           {"lambda_star", number(tr.lambda_star)},
           {"max_lambda", number(tr.max_lambda())},
           {"accepted_points", tr.points.size()},
           {"used_fallback", tr.used_fallback},
           {"detail", tr.detail},
           {"norm_names", tr.norm_names}};
    if (tr.status == TraceStatus::boundary_exit) {
        j["exit_bound"] = tr.exit_bound;
        j["exit_margin"] = number(tr.exit_margin);
    }
    j["event_point"] = tr.event_point ? point_json(*tr.event_point) : Json(nullptr);
    if (tr.event_point && tr.event_point->values.size() <= 16) {
        Json v = Json::array();
        for (Eigen::Index i = 0; i < tr.event_point->values.size(); ++i) v.push_back(number(tr.event_point->values[i]));
        j["event_point"]["values"] = v;
    }
    if (points) {
        Json a = Json::array();
        for (const TracePoint& p : tr.points) a.push_back(point_json(p));
        j["points"] = a;
    }
    return j;
}

Json to_json(const verify::ProductFormula& pf) {
    return {{"direct", pf.direct},
            {"eta_product", pf.eta_product},
            {"theorem_product", pf.theorem_product},
            {"certified", pf.certified},
            {"deg_hhat", pf.deg_hhat},
            {"deg_g", pf.deg_g},
            {"deg_eta", pf.deg_eta},
            {"direct_method", degree::to_string(pf.direct_result.method)}};
}

Json to_json(const PeriodicSolution& s, int n, int m, std::size_t max_values) {
    Json j{{"lambda", number(s.lambda)},
           {"M", s.M},
           {"residual_norm", number(s.residual_norm)},
           {"block_sup_norms", numbers(block_sup_norms(s.values, s.M, n, m))}};
    if (static_cast<std::size_t>(s.values.size()) <= max_values) {
        Json v = Json::array();
        for (Eigen::Index i = 0; i < s.values.size(); ++i) v.push_back(number(s.values[i]));
        j["values"] = v;
    }
    return j;
}

Json to_json(const verify::SecondOrderSolution& s) {
    double sx = 0.0, sdx = 0.0;
    for (double v : s.x.values) sx = std::max(sx, std::abs(v));
    for (double v : s.dx.values) sdx = std::max(sdx, std::abs(v));
    return {{"residual", number(s.residual)}, {"sup_x", number(sx)}, {"sup_dx", number(sdx)}};
}

void write_trace_csv(std::ostream& out, const std::vector<ContinuationTrace>& traces) {
    std::vector<std::string> names = traces.empty() ? std::vector<std::string>{} : traces.front().norm_names;
    out << "trace,step,lambda";
    for (const auto& n : names) out << ',' << n;
    out << ",residual_norm,status\n";
    auto row = [&](std::size_t t, std::size_t step, const TracePoint& p, const std::string& status) {
        out << t << ',' << step << ',' << format_double(p.lambda);
        for (std::size_t k = 0; k < names.size(); ++k)
            out << ',' << (k < p.norms.size() ? format_double(p.norms[k]) : std::string("nan"));
        out << ',' << format_double(p.residual_norm) << ',' << status << '\n';
    };
    for (std::size_t t = 0; t < traces.size(); ++t) {
        const ContinuationTrace& tr = traces[t];
        const std::string final_status = to_string(tr.status);
        for (std::size_t s = 0; s < tr.points.size(); ++s) {
            const bool last = s + 1 == tr.points.size() && !tr.event_point;
            row(t, s, tr.points[s], last ? final_status : "accepted");
        }
        if (tr.event_point) row(t, tr.points.size(), *tr.event_point, final_status);
    }
}

}  // namespace percont::report
