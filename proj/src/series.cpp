#include "orderiso/series.hpp"

#include <cmath>
#include <stdexcept>

namespace orderiso {

cplx scaled_product(double lambda, cplx m, double log_scale) {
    if (lambda == 0.0 || m == cplx(0.0, 0.0)) return 0.0;
    if (std::abs(log_scale) < 600.0) return lambda * (m * std::exp(log_scale));
    const double mag = std::exp(std::log(std::abs(lambda)) + log_scale);
    return m * std::copysign(mag, lambda);
}

EntireSeries::EntireSeries(RealPoly carrier, RealPoly modulator)
    : carrier_(std::move(carrier)), modulator_(std::move(modulator)) {}

double EntireSeries::image(double alpha) const { return carrier_ ? carrier_image(*carrier_, alpha) : alpha; }

void EntireSeries::push(double lambda, double alpha) {
    if (!std::isfinite(lambda) || !std::isfinite(alpha)) throw std::invalid_argument("non-finite series data");
    lambdas_.push_back(lambda);
    alphas_.push_back(alpha);
    images_.push_back(image(alpha));
}

void EntireSeries::set_lambda(std::size_t j, double lambda) {
    if (j == 0 || j > lambdas_.size()) throw std::out_of_range("series index out of range");
    lambdas_[j - 1] = lambda;
}

GaussTerm EntireSeries::term(std::size_t j) const {
    if (j < 2 || j > alphas_.size() + 1) throw std::out_of_range("term index out of range");
    std::vector<double> roots(alphas_.begin(), alphas_.begin() + static_cast<std::ptrdiff_t>(j - 1));
    return carrier_ ? GaussTerm(std::move(roots), *carrier_) : GaussTerm(std::move(roots));
}

ValueDeriv EntireSeries::base_eval(cplx z) const {
    if (carrier_) return poly_eval_deriv(*carrier_, z);
    return {z, 1.0};
}

ValueDeriv EntireSeries::modulator_eval(cplx z) const {
    if (modulator_) return poly_eval_deriv(*modulator_, z);
    return {1.0, 0.0};
}

ScaledValueDeriv EntireSeries::term_eval(std::size_t j, cplx z) const {
    if (j == 1) return {1.0, 0.0, 0.0};
    return term_eval_scaled(term(j), z, carrier());
}

ValueDeriv EntireSeries::eval(cplx z, std::optional<std::size_t> n) const {
    const std::size_t count = n.value_or(lambdas_.size());
    if (count > lambdas_.size()) throw std::out_of_range("partial sum beyond committed terms");
    const ValueDeriv b = base_eval(z);
    if (count == 0) return b;

    const ValueDeriv w = base_eval(z);
    const cplx wv = carrier_ ? w.value : z;
    const cplx wp = carrier_ ? w.deriv : cplx(1.0);
    const cplx w2 = wv * wv;
    const cplx phase = std::polar(1.0, -w2.imag());

    cplx s = lambdas_[0], sp = 0.0;
    cplx p = 1.0, d = 0.0;
    double log_scale = -w2.real();
    for (std::size_t j = 2; j <= count; ++j) {
        const cplx f = wv - images_[j - 2];
        d = d * f + p;
        p = p * f;
        const double mag = std::max(std::abs(p), std::abs(d));
        if (mag > 1e150 || (mag < 1e-150 && mag > 0.0)) {
            p /= mag;
            d /= mag;
            log_scale += std::log(mag);
        }
        s += scaled_product(lambdas_[j - 1], p * phase, log_scale);
        sp += scaled_product(lambdas_[j - 1], (d - 2.0 * wv * p) * phase * wp, log_scale);
    }
    if (!modulator_) return {b.value + s, b.deriv + sp};
    const ValueDeriv m = poly_eval_deriv(*modulator_, z);
    return {b.value + m.value * s, b.deriv + m.deriv * s + m.value * sp};
}

}  // namespace orderiso
