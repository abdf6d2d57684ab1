#include <cmath>

#include "doctest.h"
#include "orderiso/errors.hpp"
#include "orderiso/franklin.hpp"

using namespace orderiso;
using namespace orderiso::franklin;
using densesets::EnumerationSpec;

namespace {

EngineOptions fast_options() {
    EngineOptions o;
    o.find_cap = 1 << 16;
    return o;
}

// b_2 = 1/3 forces a dyadic alpha_2 deep in the enumeration
EngineOptions nonzero_options() {
    EngineOptions o;
    o.find_cap = 1 << 20;
    return o;
}

}  // namespace

TEST_CASE("default budget schedule") {
    const BudgetSchedule b;
    for (std::size_t n = 1; n <= 30; ++n) CHECK(b.epsilon(n) == doctest::Approx(std::pow(4.0, -double(n + 1))).epsilon(1e-14));
    CHECK(b.total() == doctest::Approx(1.0 / 12.0));
    CHECK(b.satisfies_patch_rule());
    for (std::size_t n = 1; n <= 20; ++n) {
        double tail = 0.0;
        for (std::size_t k = n + 1; k < n + 200; ++k) tail += 2.0 * b.epsilon(k);
        CHECK(tail < b.epsilon(n));
        CHECK(b.tail_sum(n) == doctest::Approx(tail / 2.0).epsilon(1e-12));
    }
    CHECK_THROWS_AS(BudgetSchedule(0.25, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(BudgetSchedule(2.0, 0.5), std::invalid_argument);
    CHECK(!BudgetSchedule(0.1, 0.5).satisfies_patch_rule());
}

TEST_CASE("f_eval on empty and first-step states") {
    ConstructionState s(densesets::Enumeration(EnumerationSpec::dyadic()),
                        densesets::Enumeration(EnumerationSpec::affine(EnumerationSpec::dyadic(), 1.0, 1.0)));
    CHECK(f_eval(s, cplx(2.0, -1.0)).value == cplx(2.0, -1.0));
    CHECK(f_eval(s, cplx(2.0, -1.0)).deriv == cplx(1.0));
    step_initial(s, fast_options());
    CHECK(s.series.lambdas()[0] == 1.0);
    for (double x : {-3.0, 0.0, 0.25, 7.5}) CHECK(f_eval(s, x).value.real() == x + 1.0);
}

TEST_CASE("eta_cap at n = 2 with alpha = [0]") {
    ConstructionState s(densesets::Enumeration(EnumerationSpec::dyadic()),
                        densesets::Enumeration(EnumerationSpec::dyadic()));
    const EngineOptions o = fast_options();
    step_initial(s, o);
    const EtaCap e = eta_cap(s, 2, o);
    const CapRecord* disk = nullptr;
    for (const auto& c : e.caps)
        if (c.name == "disk") disk = &c;
    REQUIRE(disk != nullptr);
    const double factor = std::exp(disk->log_eta());
    const double expect = (1.0 / 64.0) / (2.0 * std::exp(4.0) * default_safety);
    CHECK(factor == doctest::Approx(expect).epsilon(1e-4));
    CHECK(e.eta() > 0.0);
    CHECK(e.eta() <= factor);
    for (const auto& c : e.caps) CHECK(e.log_eta <= c.log_eta());
}

TEST_CASE("solve_preimage examples") {
    EntireSeries id;
    CHECK(solve_preimage(id, 3.0) == 3.0);
    EntireSeries plus1;
    plus1.push(1.0, 0.0);
    CHECK(solve_preimage(plus1, 0.0) == doctest::Approx(-1.0).epsilon(1e-12));
    EntireSeries plus_half;
    plus_half.push(0.5, 0.0);
    CHECK(solve_preimage(plus_half, 2.0) == doctest::Approx(1.5).epsilon(1e-12));
    EntireSeries general;
    general.push(0.3, 0.0);
    general.push(0.01, 0.5);
    const double x = solve_preimage(general, 1.7);
    CHECK(std::abs(general.eval(x).value.real() - 1.7) <= 1.7e-12);
}

TEST_CASE("identity run keeps every lambda zero") {
    const EngineOptions o = fast_options();
    const ConstructionState s = run(EnumerationSpec::dyadic(), EnumerationSpec::dyadic(), 20, o);
    REQUIRE(s.step() == 20);
    for (double l : s.series.lambdas()) CHECK(l == 0.0);
    for (std::size_t j = 0; j < 20; ++j) CHECK(s.alphas()[j] == s.betas[j]);
    for (const StepTrace& t : s.trace) CHECK(t.exact_hit);
    const VerificationReport r = verify(s, o);
    CHECK(r.passed());
    CHECK(r.find("derivative_floor")->measured == 1.0);
}

TEST_CASE("shift run reproduces x + 1") {
    const EngineOptions o = fast_options();
    const auto B = EnumerationSpec::affine(EnumerationSpec::dyadic(), 1.0, 1.0);
    const ConstructionState s = run(EnumerationSpec::dyadic(), B, 20, o);
    CHECK(s.series.lambdas()[0] == 1.0);
    for (std::size_t j = 1; j < 20; ++j) CHECK(s.series.lambdas()[j] == 0.0);
    // induction oracle: each even step pairs beta with beta - 1
    for (std::size_t j = 0; j < 20; ++j) CHECK(s.betas[j] == s.alphas()[j] + 1.0);
    double worst = 0.0;
    for (double x : grid_samples({-5.0, 5.0}, 10000)) worst = std::max(worst, std::abs(f_eval(s, x).value.real() - (x + 1.0)));
    CHECK(worst <= 1e-12);
    CHECK(verify(s, o).passed());
}

TEST_CASE("a run with nonzero lambdas") {
    const EngineOptions o = fast_options();
    const auto B = EnumerationSpec::affine(EnumerationSpec::dyadic(), 1.0 / 3.0, 0.0);
    const ConstructionState s = run(EnumerationSpec::dyadic(), B, 2, nonzero_options());
    REQUIRE(s.step() == 2);
    bool nonzero = false;
    for (std::size_t j = 1; j < 2; ++j) nonzero = nonzero || s.series.lambdas()[j] != 0.0;
    CHECK(nonzero);
    for (std::size_t n = 2; n <= 2; ++n) {
        const StepTrace& t = s.trace[n - 1];
        REQUIRE(t.log_eta.has_value());
        if (t.lambda != 0.0) CHECK(std::log(std::abs(t.lambda)) < *t.log_eta);
    }
    const VerificationReport r = verify(s, nonzero_options());
    for (const Check& c : r.checks()) CHECK_MESSAGE(c.passed, c.name << " measured " << c.measured);
}

TEST_CASE("tampered lambda fails the margin check") {
    const EngineOptions o = fast_options();
    ConstructionState s = run(EnumerationSpec::dyadic(), EnumerationSpec::dyadic(), 6, o);
    CHECK(verify(s, o).passed());
    const double eta2 = std::exp(*s.trace[1].log_eta);
    s.series.set_lambda(2, 2.0 * eta2);
    const VerificationReport r = verify(s, o);
    CHECK(!r.find("step_margins")->passed);
    CHECK(!r.passed());
}

TEST_CASE("committed states interpolate and telescope exactly") {
    const EngineOptions o = fast_options();
    const auto B = EnumerationSpec::affine(EnumerationSpec::dyadic(), 1.0 / 3.0, 0.0);
    const ConstructionState s = run(EnumerationSpec::dyadic(), B, 2, nonzero_options());
    for (std::size_t j = 1; j <= s.step(); ++j) {
        const double a = s.alphas()[j - 1];
        for (std::size_t k = j + 1; k <= s.step(); ++k) CHECK(s.series.term_eval(k, a).value == cplx(0.0));
        CHECK(std::abs(s.series.eval(a).value.real() - s.betas[j - 1]) <= 1e-9);
    }
}

TEST_CASE("explicit list exhaustion propagates") {
    EngineOptions o = fast_options();
    CHECK_THROWS_AS(run(EnumerationSpec::explicit_list({0.0, 1.0, 2.0}), EnumerationSpec::explicit_list({0.0, 1.0, 2.0}), 10, o),
                    Exhausted);
}

TEST_CASE("verify reports realness and symmetry") {
    const EngineOptions o = fast_options();
    const auto B = EnumerationSpec::affine(EnumerationSpec::dyadic(), 1.0 / 3.0, 0.0);
    const ConstructionState s = run(EnumerationSpec::dyadic(), B, 2, nonzero_options());
    const VerificationReport r = verify(s, nonzero_options());
    CHECK(r.find("realness")->passed);
    CHECK(r.find("conjugate_symmetry")->passed);
    CHECK(r.find("order_isomorphism")->measured == 0.0);
}
