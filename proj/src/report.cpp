#include "orderiso/report.hpp"

#include <algorithm>
#include <cmath>

namespace orderiso {

void VerificationReport::add_upper(const std::string& name, double measured, double limit, std::string detail) {
    const bool ok = measured <= limit;
    checks_.push_back({name, measured, limit, limit - measured, ok, std::move(detail)});
}

void VerificationReport::add_lower(const std::string& name, double measured, double limit, std::string detail) {
    const bool ok = measured >= limit;
    checks_.push_back({name, measured, limit, measured - limit, ok, std::move(detail)});
}

void VerificationReport::add_flag(const std::string& name, bool ok, std::string detail) {
    checks_.push_back({name, ok ? 1.0 : 0.0, 1.0, ok ? 0.0 : -1.0, ok, std::move(detail)});
}

void VerificationReport::merge(const VerificationReport& other, const std::string& prefix) {
    for (Check c : other.checks_) {
        c.name = prefix + c.name;
        checks_.push_back(std::move(c));
    }
}

bool VerificationReport::passed() const {
    return std::all_of(checks_.begin(), checks_.end(), [](const Check& c) { return c.passed; });
}

const Check* VerificationReport::find(const std::string& name) const {
    for (const Check& c : checks_)
        if (c.name == name) return &c;
    return nullptr;
}

}  // namespace orderiso
