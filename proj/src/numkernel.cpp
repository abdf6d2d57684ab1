#include "orderiso/numkernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace orderiso {

namespace {

constexpr double neg_inf = -std::numeric_limits<double>::infinity();

cplx scale_by_exp(cplx m, double log_scale) {
    if (m == cplx(0.0, 0.0)) return m;
    return m * std::exp(log_scale);
}

double safe_log_abs(cplx m) {
    const double a = std::abs(m);
    return a == 0.0 ? neg_inf : std::log(a);
}

}  // namespace

void validate(const Disk& d) {
    if (!(d.radius > 0.0) || !std::isfinite(d.radius) || !std::isfinite(d.center.real()) ||
        !std::isfinite(d.center.imag()))
        throw std::invalid_argument("disk needs a finite center and positive radius");
}

void validate(const Interval& iv) {
    if (!(iv.a < iv.b) || !std::isfinite(iv.a) || !std::isfinite(iv.b))
        throw std::invalid_argument("interval needs finite endpoints a < b");
}

std::vector<cplx> boundary_samples(const Disk& d, int m) {
    validate(d);
    if (m < 2) throw std::invalid_argument("sample count must be at least 2");
    std::vector<cplx> out(m);
    for (int k = 0; k < m; ++k) {
        const double t = 2.0 * std::numbers::pi * k / m;
        out[k] = d.center + d.radius * cplx(std::cos(t), std::sin(t));
    }
    return out;
}

std::vector<double> grid_samples(const Interval& iv, int m) {
    validate(iv);
    if (m < 2) throw std::invalid_argument("sample count must be at least 2");
    std::vector<double> out(m);
    const double h = (iv.b - iv.a) / (m - 1);
    for (int k = 0; k < m; ++k) out[k] = iv.a + h * k;
    out.back() = iv.b;
    return out;
}

ValueDeriv ScaledValueDeriv::unscaled() const {
    return {scale_by_exp(value, log_scale), scale_by_exp(deriv, log_scale)};
}

double ScaledValueDeriv::log_abs_value() const { return safe_log_abs(value) + log_scale; }
double ScaledValueDeriv::log_abs_deriv() const { return safe_log_abs(deriv) + log_scale; }

double carrier_image(const RealPoly& carrier, double x) { return poly_eval(carrier, cplx(x, 0.0)).real(); }

GaussTerm::GaussTerm(std::vector<double> roots) : roots_(std::move(roots)), images_(roots_), warp_(Warp::identity) {}

GaussTerm::GaussTerm(std::vector<double> roots, const RealPoly& carrier)
    : roots_(std::move(roots)), warp_(Warp::phi) {
    images_.reserve(roots_.size());
    for (double a : roots_) images_.push_back(carrier_image(carrier, a));
}

ScaledValueDeriv term_eval_scaled(const GaussTerm& t, cplx z, const RealPoly* carrier) {
    if (t.warp() == Warp::phi) {
        if (carrier == nullptr) throw std::invalid_argument("warped term evaluated without a carrier");
        const ValueDeriv c = poly_eval_deriv(*carrier, z);
        return term_eval_scaled_at(t, c.value, c.deriv);
    }
    return term_eval_scaled_at(t, z, 1.0);
}

ScaledValueDeriv term_eval_scaled_at(const GaussTerm& t, cplx w, cplx wp) {
    cplx p = 1.0, d = 0.0;
    double log_scale = 0.0;
    for (double wk : t.root_images()) {
        const cplx f = w - wk;
        d = d * f + p;
        p = p * f;
        const double s = std::max(std::abs(p), std::abs(d));
        if (s > 1e150 || (s < 1e-150 && s > 0.0)) {
            p /= s;
            d /= s;
            log_scale += std::log(s);
        }
    }
    const cplx w2 = w * w;
    const cplx phase = std::polar(1.0, -w2.imag());
    log_scale -= w2.real();
    return {p * phase, (d - 2.0 * w * p) * phase * wp, log_scale};
}

ValueDeriv term_eval(const GaussTerm& t, cplx z, const RealPoly* carrier) {
    return term_eval_scaled(t, z, carrier).unscaled();
}

std::string to_string(SupMethod m) {
    switch (m) {
        case SupMethod::boundary_sample: return "boundary-sample";
        case SupMethod::window_plus_tail: return "window-plus-tail";
        case SupMethod::radial_sample: return "radial-sample";
        case SupMethod::window_sample: return "window-sample";
    }
    return "unknown";
}

double SupBound::raw() const { return std::exp(log_raw); }
double SupBound::value() const { return raw() * safety; }
double SupBound::log_value() const { return log_raw + std::log(safety); }

namespace {

void check_safety(double safety) {
    if (!(safety >= 1.0) || !std::isfinite(safety)) throw std::invalid_argument("safety margin must be >= 1");
}

void accumulate_log(double& best, double v) {
    if (std::isnan(v) || v == std::numeric_limits<double>::infinity())
        throw std::domain_error("non-finite sample in sup estimate");
    best = std::max(best, v);
}

}  // namespace

SupBound sup_on_disk(const std::function<cplx(cplx)>& f, const Disk& d, int m, double safety) {
    return sup_on_disk_log([&](cplx z) { return safe_log_abs(f(z)); }, d, m, safety);
}

SupBound sup_on_disk_log(const std::function<double(cplx)>& log_abs_f, const Disk& d, int m, double safety) {
    check_safety(safety);
    if (m < 64) throw std::invalid_argument("disk sup needs at least 64 boundary samples");
    double best = neg_inf;
    for (cplx z : boundary_samples(d, m)) accumulate_log(best, log_abs_f(z));
    return {best, SupMethod::boundary_sample, safety};
}

double required_half_width(const RealTail& tail) {
    return tail.max_root_abs + std::sqrt(static_cast<double>(tail.degree) + 1.0);
}

SupBound sup_on_real(const std::function<double(double)>& f, const RealTail& tail, int m, double safety) {
    return sup_on_real_log(
        [&](double x) {
            const double v = f(x);
            if (!std::isfinite(v)) return std::numeric_limits<double>::quiet_NaN();
            return v == 0.0 ? neg_inf : std::log(std::abs(v));
        },
        tail, m, safety);
}

SupBound sup_on_real_log(const std::function<double(double)>& log_abs_f, const RealTail& tail, int m,
                         double safety) {
    check_safety(safety);
    if (tail.degree < 0) throw std::invalid_argument("tail degree must be nonnegative");
    if (!(tail.half_width >= required_half_width(tail)))
        throw std::invalid_argument("real window half-width below max|root| + sqrt(degree + 1)");
    double best = neg_inf;
    for (double x : grid_samples({-tail.half_width, tail.half_width}, m)) accumulate_log(best, log_abs_f(x));
    return {best, SupMethod::window_plus_tail, safety};
}

SupBound sup_on_window_log(const std::function<double(double)>& log_abs_f, const Interval& window, int m,
                           double safety) {
    check_safety(safety);
    validate(window);
    double best = neg_inf;
    for (double x : grid_samples(window, m)) accumulate_log(best, log_abs_f(x));
    return {best, SupMethod::window_sample, safety};
}

SupBound sup_of_logs(const std::vector<double>& logs, SupMethod method, double safety) {
    check_safety(safety);
    if (logs.empty()) throw std::invalid_argument("sup over an empty sample set");
    double best = neg_inf;
    for (double v : logs) accumulate_log(best, v);
    return {best, method, safety};
}

SupBound growth_cap(const std::vector<double>& roots, int m, double safety) {
    check_safety(safety);
    if (roots.empty()) throw std::invalid_argument("growth cap needs at least one root");
    if (m < 16) throw std::invalid_argument("growth cap needs at least 16 radial samples");
    constexpr int angles = 64;
    double amax = 0.0;
    for (double a : roots) amax = std::max(amax, std::abs(a));
    const double deg = static_cast<double>(roots.size());

    auto log_g = [&](cplx z) {
        const double x = z.real(), y2 = z.imag() * z.imag();
        double prod = 1.0;
        int exponent = 0;
        for (double a : roots) {
            prod *= (x - a) * (x - a) + y2;
            if (prod > 1e200 || prod < 1e-200) {
                if (prod == 0.0) return neg_inf;
                int e = 0;
                prod = std::frexp(prod, &e);
                exponent += e;
            }
        }
        return 0.5 * (std::log(prod) + exponent * std::numbers::ln2) - std::abs(z);
    };
    auto interior_max = [&](double rmax) {
        double best = neg_inf;
        for (int i = 0; i < m; ++i) {
            const double r = rmax * i / (m - 1);
            for (int k = 0; k < angles; ++k) {
                const double t = std::numbers::pi * k / (angles - 1);
                best = std::max(best, log_g(std::polar(r, t)));
            }
        }
        return best;
    };

    double rmax = std::max(4.0, 2.0 * deg + 2.0 * amax + 10.0);
    double best = interior_max(rmax);
    // beyond rmax the envelope deg*log(amax + R) - R is decreasing and below the sampled maximum
    while (rmax < deg - amax || deg * std::log(amax + rmax) - rmax >= best) {
        rmax *= 2.0;
        best = interior_max(rmax);
    }
    return {best, SupMethod::radial_sample, safety};
}

}  // namespace orderiso
