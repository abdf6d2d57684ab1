#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "orderiso/numkernel.hpp"

namespace orderiso::densesets {

// reduced fraction with positive denominator
struct Rational {
    std::int64_t num;
    std::int64_t den;

    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
};

Rational make_rational(std::int64_t num, std::int64_t den);
int compare(const Rational& x, const Rational& y);
bool operator==(const Rational& x, const Rational& y);

// i-th term (i >= 1) of the Calkin-Wilf sequence 1, 1/2, 2, 1/3, 3/2, ...
Rational calkin_wilf(std::uint64_t i);
// n-th (n >= 1) signed Calkin-Wilf value: 0, q_1, -q_1, q_2, -q_2, ...
Rational signed_calkin_wilf(std::uint64_t n);
// n-th (n >= 1) dyadic value, breadth first by level
Rational dyadic(std::uint64_t n);

enum class Kind { signed_calkin_wilf, dyadic, affine, explicit_list };

std::string to_string(Kind k);
Kind kind_from_string(const std::string& s);

struct EnumerationSpec {
    Kind kind = Kind::dyadic;
    std::shared_ptr<const EnumerationSpec> base;  // affine only
    double scale = 1.0;
    double shift = 0.0;
    std::vector<double> values;  // explicit list only

    static EnumerationSpec signed_calkin_wilf();
    static EnumerationSpec dyadic();
    static EnumerationSpec affine(EnumerationSpec base, double scale, double shift);
    static EnumerationSpec explicit_list(std::vector<double> values);
};

struct ElementRef {
    std::size_t index;
    double value;
};

class Enumeration {
public:
    explicit Enumeration(EnumerationSpec spec);

    const EnumerationSpec& spec() const { return spec_; }
    bool dense() const;
    // number of elements, or nullopt when infinite
    std::optional<std::size_t> size() const;

    double nth(std::size_t n) const;
    ElementRef ref(std::size_t n) const { return {n, nth(n)}; }
    // exact comparison of the n-th and m-th elements: -1, 0, 1
    int compare(std::size_t n, std::size_t m) const;

    ElementRef first_unused() const;
    void mark_used(std::size_t n);
    bool is_used(std::size_t n) const { return used_.count(n) != 0; }
    const std::set<std::size_t>& used() const { return used_; }

    // smallest index whose value lies in the open interval and is not excluded
    ElementRef find_in_interval(const Interval& iv, const std::vector<double>& exclude, std::size_t cap) const;

    // sorted value table over indices 1..cap; find_in_interval answers from it when it covers the cap
    void build_index(std::size_t cap);
    bool has_index(std::size_t cap) const;

private:
    EnumerationSpec spec_;
    std::set<std::size_t> used_;
    std::vector<std::pair<double, std::uint32_t>> index_;
};

}  // namespace orderiso::densesets
