#pragma once

#include <string>
#include <vector>

namespace orderiso {

struct Check {
    std::string name;
    double measured;
    double limit;
    double margin;  // positive means slack
    bool passed;
    std::string detail;
};

class VerificationReport {
public:
    void add(Check c) { checks_.push_back(std::move(c)); }
    // passes when measured <= limit
    void add_upper(const std::string& name, double measured, double limit, std::string detail = {});
    // passes when measured >= limit
    void add_lower(const std::string& name, double measured, double limit, std::string detail = {});
    void add_flag(const std::string& name, bool ok, std::string detail = {});
    void merge(const VerificationReport& other, const std::string& prefix = {});

    bool passed() const;
    const std::vector<Check>& checks() const { return checks_; }
    const Check* find(const std::string& name) const;

private:
    std::vector<Check> checks_;
};

}  // namespace orderiso
