#pragma once

#include <map>
#include <string>
#include <vector>

namespace percont {

enum class Verdict { pass, fail, heuristic_pass, not_applicable };

std::string to_string(Verdict v);

inline bool passes(Verdict v) { return v == Verdict::pass || v == Verdict::heuristic_pass; }

/// One machine-checked hypothesis with its numeric evidence.
struct CheckEntry {
    std::string name;
    Verdict verdict = Verdict::fail;
    std::map<std::string, double> evidence;
    std::string detail;
    bool mandatory = true;
};

struct CheckReport {
    std::vector<CheckEntry> entries;

    /// True iff every mandatory entry passes (heuristic passes count).
    bool pass() const;
    const CheckEntry* find(const std::string& name) const;
    const CheckEntry& at(const std::string& name) const;
    void append(const CheckReport& other);
};

}  // namespace percont
