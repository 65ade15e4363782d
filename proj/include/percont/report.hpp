#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "percont/check.hpp"
#include "percont/continuation.hpp"
#include "percont/verify.hpp"

namespace percont::report {

using Json = nlohmann::ordered_json;

/// Non-finite values become null.
Json number(double v);

Json to_json(const CheckEntry& e);
/// Array of entries in report order.
Json to_json(const CheckReport& r);
/// Summary of a trace; `points` adds every accepted point with its norms.
Json to_json(const ContinuationTrace& tr, bool points = false);
Json to_json(const verify::ProductFormula& pf);
/// Solution summary: lambda, residual, per-block sup norms, and node values
/// when the mesh has at most `max_values` entries.
Json to_json(const PeriodicSolution& s, int n, int m, std::size_t max_values = 4096);
Json to_json(const verify::SecondOrderSolution& s);

/// Columns: trace, step, lambda, one per norm name, residual_norm, status.
/// Accepted points carry status "accepted"; the final row of each trace
/// carries the trace status.
void write_trace_csv(std::ostream& out, const std::vector<ContinuationTrace>& traces);

/// Shortest round-trip decimal text of a double.
std::string format_double(double v);

}  // namespace percont::report
