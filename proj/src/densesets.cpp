#include "orderiso/densesets.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "orderiso/errors.hpp"

namespace orderiso::densesets {

Rational make_rational(std::int64_t num, std::int64_t den) {
    if (den == 0) throw std::invalid_argument("zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const std::int64_t g = std::gcd(num, den);
    return {num / g, den / g};
}

int compare(const Rational& x, const Rational& y) {
    const __int128 l = static_cast<__int128>(x.num) * y.den;
    const __int128 r = static_cast<__int128>(y.num) * x.den;
    return (l > r) - (l < r);
}

bool operator==(const Rational& x, const Rational& y) { return x.num == y.num && x.den == y.den; }

Rational calkin_wilf(std::uint64_t i) {
    if (i == 0) throw std::invalid_argument("Calkin-Wilf index starts at 1");
    std::int64_t a = 1, b = 1;
    const int top = std::bit_width(i) - 1;
    for (int bit = top - 1; bit >= 0; --bit) {
        if ((i >> bit) & 1u)
            a += b;
        else
            b += a;
    }
    return {a, b};
}

Rational signed_calkin_wilf(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("enumeration index starts at 1");
    if (n == 1) return {0, 1};
    const Rational q = calkin_wilf(n / 2);
    return n % 2 == 0 ? q : Rational{-q.num, q.den};
}

// Level 0 is {0, 1, -1}. Level m >= 1 adds every k/2^m with |k/2^m| <= m+1 not seen before:
// the odd numerators below m, then the grid points in (m, m+1], ordered by |x| with the
// positive sign first.
Rational dyadic(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("enumeration index starts at 1");
    if (n == 1) return {0, 1};
    if (n <= 3) return {n == 2 ? 1 : -1, 1};
    std::uint64_t before = 3;  // elements in levels < m
    for (int m = 1; m < 60; ++m) {
        const std::uint64_t pow = std::uint64_t{1} << m;
        const std::uint64_t odd_count = static_cast<std::uint64_t>(m) * (pow / 2);
        const std::uint64_t level_size = 2 * (odd_count + pow);
        if (n - before <= level_size) {
            const std::uint64_t o = n - before - 1;
            const std::uint64_t i = o / 2;
            const std::int64_t k = i < odd_count ? static_cast<std::int64_t>(2 * i + 1)
                                                 : static_cast<std::int64_t>(m * pow + (i - odd_count) + 1);
            return make_rational(o % 2 == 0 ? k : -k, static_cast<std::int64_t>(pow));
        }
        before += level_size;
    }
    throw std::out_of_range("dyadic index too large");
}

std::string to_string(Kind k) {
    switch (k) {
        case Kind::signed_calkin_wilf: return "signed-calkin-wilf";
        case Kind::dyadic: return "dyadic";
        case Kind::affine: return "affine";
        case Kind::explicit_list: return "explicit";
    }
    return "unknown";
}

Kind kind_from_string(const std::string& s) {
    if (s == "signed-calkin-wilf") return Kind::signed_calkin_wilf;
    if (s == "dyadic") return Kind::dyadic;
    if (s == "affine") return Kind::affine;
    if (s == "explicit") return Kind::explicit_list;
    throw std::invalid_argument("unknown enumeration kind: " + s);
}

EnumerationSpec EnumerationSpec::signed_calkin_wilf() { return EnumerationSpec{Kind::signed_calkin_wilf, {}, 1.0, 0.0, {}}; }

EnumerationSpec EnumerationSpec::dyadic() { return EnumerationSpec{Kind::dyadic, {}, 1.0, 0.0, {}}; }

EnumerationSpec EnumerationSpec::affine(EnumerationSpec base, double scale, double shift) {
    if (scale == 0.0 || !std::isfinite(scale) || !std::isfinite(shift))
        throw std::invalid_argument("affine image needs a finite nonzero scale and finite shift");
    return EnumerationSpec{Kind::affine, std::make_shared<const EnumerationSpec>(std::move(base)), scale, shift, {}};
}

EnumerationSpec EnumerationSpec::explicit_list(std::vector<double> values) {
    std::vector<double> sorted(values);
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw std::invalid_argument("explicit list contains repeated values");
    for (double v : values)
        if (!std::isfinite(v)) throw std::invalid_argument("explicit list contains a non-finite value");
    return EnumerationSpec{Kind::explicit_list, {}, 1.0, 0.0, std::move(values)};
}

namespace {

double spec_nth(const EnumerationSpec& s, std::size_t n) {
    if (n == 0) throw std::invalid_argument("enumeration index starts at 1");
    switch (s.kind) {
        case Kind::signed_calkin_wilf: return signed_calkin_wilf(n).to_double();
        case Kind::dyadic: return dyadic(n).to_double();
        case Kind::affine: return s.scale * spec_nth(*s.base, n) + s.shift;
        case Kind::explicit_list:
            if (n > s.values.size()) throw Exhausted("index beyond explicit list");
            return s.values[n - 1];
    }
    throw std::logic_error("bad enumeration kind");
}

int spec_compare(const EnumerationSpec& s, std::size_t n, std::size_t m) {
    switch (s.kind) {
        case Kind::signed_calkin_wilf: return compare(signed_calkin_wilf(n), signed_calkin_wilf(m));
        case Kind::dyadic: return compare(dyadic(n), dyadic(m));
        case Kind::affine: {
            const int c = spec_compare(*s.base, n, m);
            return s.scale > 0.0 ? c : -c;
        }
        case Kind::explicit_list: {
            const double x = spec_nth(s, n), y = spec_nth(s, m);
            return (x > y) - (x < y);
        }
    }
    throw std::logic_error("bad enumeration kind");
}

}  // namespace

Enumeration::Enumeration(EnumerationSpec spec) : spec_(std::move(spec)) {
    if (spec_.kind == Kind::affine && !spec_.base) throw std::invalid_argument("affine image without a base");
}

bool Enumeration::dense() const {
    const EnumerationSpec* s = &spec_;
    while (s->kind == Kind::affine) s = s->base.get();
    return s->kind != Kind::explicit_list;
}

std::optional<std::size_t> Enumeration::size() const {
    const EnumerationSpec* s = &spec_;
    while (s->kind == Kind::affine) s = s->base.get();
    if (s->kind == Kind::explicit_list) return s->values.size();
    return std::nullopt;
}

double Enumeration::nth(std::size_t n) const { return spec_nth(spec_, n); }

int Enumeration::compare(std::size_t n, std::size_t m) const { return spec_compare(spec_, n, m); }

ElementRef Enumeration::first_unused() const {
    std::size_t n = 1;
    for (std::size_t u : used_) {
        if (u != n) break;
        ++n;
    }
    const auto sz = size();
    if (sz && n > *sz) throw Exhausted("enumeration exhausted: every listed element is used");
    return ref(n);
}

void Enumeration::mark_used(std::size_t n) {
    if (n == 0) throw std::invalid_argument("enumeration index starts at 1");
    used_.insert(n);
}

ElementRef Enumeration::find_in_interval(const Interval& iv, const std::vector<double>& exclude,
                                         std::size_t cap) const {
    if (!(iv.a < iv.b)) throw std::invalid_argument("degenerate search interval");
    auto excluded = [&](double v) { return std::find(exclude.begin(), exclude.end(), v) != exclude.end(); };
    auto admissible = [&](double v) { return iv.a < v && v < iv.b && !excluded(v); };
    std::size_t limit = cap;
    if (const auto sz = size()) limit = std::min(limit, *sz);

    if (!index_.empty() && index_.size() >= limit) {
        auto lo = std::upper_bound(index_.begin(), index_.end(), iv.a,
                                   [](double x, const auto& e) { return x < e.first; });
        std::size_t best = 0;
        for (auto it = lo; it != index_.end() && it->first < iv.b; ++it) {
            if (it->second > limit || !admissible(it->first)) continue;
            if (best == 0 || it->second < best) best = it->second;
        }
        if (best != 0) return ref(best);
    } else {
        for (std::size_t n = 1; n <= limit; ++n) {
            const double v = nth(n);
            if (admissible(v)) return {n, v};
        }
    }
    throw CapExceeded("no admissible element within the first " + std::to_string(limit) + " indices");
}

bool Enumeration::has_index(std::size_t cap) const {
    if (const auto sz = size()) cap = std::min(cap, *sz);
    return !index_.empty() && index_.size() >= cap;
}

void Enumeration::build_index(std::size_t cap) {
    if (const auto sz = size()) cap = std::min(cap, *sz);
    if (cap > 0xffffffffu) throw std::invalid_argument("index cap too large");
    index_.clear();
    index_.reserve(cap);
    for (std::size_t n = 1; n <= cap; ++n) index_.emplace_back(nth(n), static_cast<std::uint32_t>(n));
    std::sort(index_.begin(), index_.end());
}

}  // namespace orderiso::densesets
