#include "percont/check.hpp"

#include <algorithm>

#include "percont/errors.hpp"

namespace percont {

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        case Verdict::heuristic_pass: return "heuristic-pass";
        case Verdict::not_applicable: return "not-applicable";
    }
    return "?";
}

bool CheckReport::pass() const {
    return std::all_of(entries.begin(), entries.end(),
                       [](const CheckEntry& e) { return !e.mandatory || passes(e.verdict); });
}

const CheckEntry* CheckReport::find(const std::string& name) const {
    for (const auto& e : entries)
        if (e.name == name) return &e;
    return nullptr;
}

const CheckEntry& CheckReport::at(const std::string& name) const {
    if (const auto* e = find(name)) return *e;
    throw Error("report has no entry '" + name + "'");
}

void CheckReport::append(const CheckReport& other) {
    entries.insert(entries.end(), other.entries.begin(), other.entries.end());
}

}  // namespace percont
