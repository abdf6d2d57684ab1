#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "orderiso/approxkit.hpp"
#include "orderiso/franklin.hpp"

namespace orderiso::birkhoff {

// r_n = 2^n, E_n^+ centered at 1.5 * 2^n i with radius 2^{n-2}
approx::SpecialChaplet default_chaplet(std::size_t K);

struct TargetCycle {
    std::vector<RealPoly> targets;

    // target index of disc n >= 1, cyclic
    std::size_t target_for(std::size_t n) const;
    const RealPoly& polynomial(std::size_t n) const { return targets.at(target_for(n)); }
};

// targets 1, z and -1 + z^2 / 2
TargetCycle default_cycle();
// nonempty; with K >= 2 |targets| discs every target is assigned to at least two of them
void validate(const TargetCycle& c, std::size_t K);

struct PatchOptions {
    approx::PatchLayout layout;
    approx::KeOptions ke;
    int grid = 10000;        // window grid for derivative and range checks
    int check_samples = 1024;  // per disc boundary for the error checks
    bool strict = true;      // throw StageFailure instead of returning a failed artifact
};

struct PhiArtifact {
    RealPoly poly;
    approx::SpecialChaplet chaplet;
    TargetCycle cycle;
    Interval window{};
    double derivative_floor = 0.0;   // min Phi' on the window grid
    std::vector<double> disc_errors;  // max |Phi - phi| over E_n^+ and E_n^- boundary samples
    bool real_coefficients = false;
    approx::PatchResult patch;
    bool ok = false;
    std::string failure;

    VerificationReport report() const;
};

// the data Phi approximates on E_n^+: p_{cycle(n)}(z - a_n^+)
cplx disc_target(const approx::SpecialChaplet& e, const TargetCycle& c, std::size_t n, cplx z);

// eps = real_eps < 1/2 on the window and disc_scale / n on E_n
PhiArtifact build_phi(const approx::SpecialChaplet& e, const TargetCycle& c, const Interval& window,
                      const franklin::BudgetSchedule& budgets, const PatchOptions& opts = {},
                      double real_eps = 0.49, double disc_scale = 0.99);

// Tolerance samples for H. Each |h_j| is replaced by the root-free envelope
// e^{-Re w^2} (|w| + 2 r_{K+1})^{j-1}, w = Phi(z); on E_n the minimum runs over j <= min(n, jmax),
// at real x over j <= min(floor|x| + 1, jmax); the result is halved.
approx::EpsilonSamples design_epsilon_H(const approx::SpecialChaplet& e, const RealPoly& phi, std::size_t jmax,
                                        const Interval& window, const approx::PatchLayout& layout = {});

struct HArtifact {
    RealPoly poly;
    approx::EpsilonSamples eps;
    double min_value = 0.0;         // min H on the window grid
    double max_value = 0.0;         // max H on the window grid
    double real_ratio = 0.0;        // max |H - 1| / eps over the real samples
    double real_deriv_ratio = 0.0;  // max |H'| / eps over the real samples
    double disc_ratio = 0.0;        // max |H| / eps over both halves of the chaplet samples
    bool real_coefficients = false;
    approx::PatchResult patch;
    bool ok = false;
    std::string failure;

    VerificationReport report() const;
};

HArtifact build_H(const approx::SpecialChaplet& e, const approx::EpsilonSamples& eps, const Interval& window,
                  const franklin::BudgetSchedule& budgets, const PatchOptions& opts = {});

struct Theorem2Options {
    franklin::EngineOptions engine;
    Interval window{-128.0, 128.0};  // real window of the f' margin
    int window_samples = default_real_samples;
    int chaplet_samples = 256;
};

// caps for term n: |H h_n| on |z| <= min(n, r_1) against eps_n, |z H h_n| on the chaplet against 2^{-n},
// and (|H' h_n| + |H h_n'|) / Phi' on the window grid against 2^{-n}
franklin::CapModel theorem2_caps(const RealPoly& phi, const RealPoly& H, const approx::SpecialChaplet& e,
                                 const Theorem2Options& opts);

franklin::ConstructionState run_theorem2(const densesets::EnumerationSpec& A, const densesets::EnumerationSpec& B,
                                         const RealPoly& phi, const RealPoly& H, const approx::SpecialChaplet& e,
                                         std::size_t N, const Theorem2Options& opts = {});

// max over chaplet boundary samples of |f - Phi| |z|, per disc n (both halves)
std::vector<double> carrier_deviation(const franklin::ConstructionState& s, const approx::SpecialChaplet& e,
                                      int samples = 256);

VerificationReport verify_theorem2(const franklin::ConstructionState& s, const approx::SpecialChaplet& e,
                                   const Interval& window, int grid = 10000, double interpolation_tol = 1e-9);

struct Witness {
    std::size_t target = 0;
    std::size_t disc = 0;  // 0 when none met the tolerance
    double error = 0.0;    // measured error at `disc`, or the best error found
    double tolerance = 0.0;
    bool passed = false;
};

// searches the discs assigned to the target for one where sup_{|z| <= rho_n} |f(z + a_n^+) - p(z)|
// stays within tol(n); samples are the boundary circle plus an interior spiral
Witness universality_witness(const std::function<cplx(cplx)>& f, const approx::SpecialChaplet& e,
                             const TargetCycle& c, std::size_t target, const std::function<double(std::size_t)>& tol,
                             int samples = 512);

}  // namespace orderiso::birkhoff
