#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "orderiso/numkernel.hpp"

namespace orderiso {

// f(z) = base(z) + modulator(z) * sum_j lambda_j h_j(z), with h_1 = 1 and h_j the Gaussian
// term whose roots are alpha_1..alpha_{j-1}. Plain series: base = z, modulator = 1,
// identity warp. Warped series: base = Phi, modulator = H, terms warped through Phi.
class EntireSeries {
public:
    EntireSeries() = default;
    EntireSeries(RealPoly carrier, RealPoly modulator);

    bool warped() const { return carrier_.has_value(); }
    const RealPoly* carrier() const { return carrier_ ? &*carrier_ : nullptr; }
    const RealPoly* modulator() const { return modulator_ ? &*modulator_ : nullptr; }

    std::size_t size() const { return lambdas_.size(); }
    const std::vector<double>& lambdas() const { return lambdas_; }
    const std::vector<double>& alphas() const { return alphas_; }

    // appends lambda_{n+1} (coefficient of the term with roots alpha_1..alpha_n) and alpha_{n+1}
    void push(double lambda, double alpha);
    void set_lambda(std::size_t j, double lambda);

    // term j >= 2 as a standalone Gaussian product
    GaussTerm term(std::size_t j) const;

    ValueDeriv base_eval(cplx z) const;
    ValueDeriv modulator_eval(cplx z) const;
    // h_j (j >= 1) in scaled form
    ScaledValueDeriv term_eval(std::size_t j, cplx z) const;

    // partial sum f_n using the first n terms; n = size() by default
    ValueDeriv eval(cplx z, std::optional<std::size_t> n = std::nullopt) const;
    ValueDeriv eval(double x, std::optional<std::size_t> n = std::nullopt) const { return eval(cplx(x, 0.0), n); }

private:
    double image(double alpha) const;

    std::optional<RealPoly> carrier_;
    std::optional<RealPoly> modulator_;
    std::vector<double> lambdas_;
    std::vector<double> alphas_;
    std::vector<double> images_;
};

// lambda * m * exp(log_scale) without forming exp(log_scale) when it would overflow
cplx scaled_product(double lambda, cplx m, double log_scale);

}  // namespace orderiso
