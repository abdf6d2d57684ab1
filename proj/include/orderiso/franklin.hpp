#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "orderiso/densesets.hpp"
#include "orderiso/report.hpp"
#include "orderiso/series.hpp"

namespace orderiso::franklin {

// epsilon_n = base * ratio^n for n >= 1
class BudgetSchedule {
public:
    BudgetSchedule(double base = 0.25, double ratio = 0.25);

    double base() const { return base_; }
    double ratio() const { return ratio_; }
    double epsilon(std::size_t n) const;
    double log_epsilon(std::size_t n) const;
    double partial_sum(std::size_t n) const;
    double total() const;
    // sum_{k > n} epsilon_k
    double tail_sum(std::size_t n) const;
    // sum_{k > n} 2 epsilon_k < epsilon_n for every n
    bool satisfies_patch_rule() const { return ratio_ < 1.0 / 3.0; }

private:
    double base_;
    double ratio_;
};

enum class StepKind { even, odd };

std::string to_string(StepKind k);

// eta_i = exp(log_budget) / sup
struct CapRecord {
    std::string name;
    SupBound sup;
    double log_budget;

    double log_eta() const { return log_budget - sup.log_value(); }
};

double log_eta(const std::vector<CapRecord>& caps);

struct StepTrace {
    std::size_t step = 0;
    StepKind kind = StepKind::odd;
    std::size_t alpha_index = 0;
    std::size_t beta_index = 0;
    double alpha = 0.0;
    double beta = 0.0;
    double lambda = 0.0;
    std::optional<double> log_eta;  // absent for step 1
    std::vector<CapRecord> caps;
    std::optional<double> preimage;  // x_n of an even step
    double residual = 0.0;           // |f(x_n) - beta| of the root solve (even steps)
    double commit_residual = 0.0;    // |f_n(alpha_n) - beta_n| after committing
    bool exact_hit = false;
    int halvings = 0;
};

struct ConstructionState {
    densesets::Enumeration A;
    densesets::Enumeration B;
    EntireSeries series;
    std::vector<std::size_t> alpha_indices;
    std::vector<std::size_t> beta_indices;
    std::vector<double> betas;
    std::optional<densesets::ElementRef> pending_beta;
    std::vector<StepTrace> trace;

    ConstructionState(densesets::Enumeration a, densesets::Enumeration b, EntireSeries s = {})
        : A(std::move(a)), B(std::move(b)), series(std::move(s)) {}

    std::size_t step() const { return series.size(); }
    const std::vector<double>& alphas() const { return series.alphas(); }
};

enum class OddFactor { modulator, carrier_literal };

struct EngineOptions {
    BudgetSchedule budgets;
    bool prefer_exact_hits = true;
    std::size_t find_cap = std::size_t{1} << 20;
    int max_halvings = 200;
    int interval_samples = 33;
    int disk_samples = default_disk_samples;
    int real_samples = default_real_samples;
    int growth_samples = default_growth_samples;
    double safety = default_safety;
    OddFactor odd_factor = OddFactor::modulator;
};

// per-step caps on |lambda_n| for the term with index n >= 2
using CapModel = std::function<std::vector<CapRecord>(const ConstructionState&, std::size_t n)>;

CapModel theorem1_caps(const EngineOptions& opts);

ValueDeriv f_eval(const ConstructionState& s, cplx z);

struct EtaCap {
    double log_eta;
    std::vector<CapRecord> caps;

    double eta() const;
};

EtaCap eta_cap(const ConstructionState& s, std::size_t n, const EngineOptions& opts);

double solve_preimage(const EntireSeries& f, double target);

// initial step: alpha_1 = a_1, beta_1 = b_1, lambda_1 from the base and modulator, then beta_2 selected
void step_initial(ConstructionState& s, const EngineOptions& opts);
void step_even(ConstructionState& s, const CapModel& caps, const EngineOptions& opts);
void step_odd(ConstructionState& s, const CapModel& caps, const EngineOptions& opts);
// runs steps until n lambdas are committed
void advance(ConstructionState& s, std::size_t n, const CapModel& caps, const EngineOptions& opts);

ConstructionState run(const densesets::EnumerationSpec& A, const densesets::EnumerationSpec& B, std::size_t N,
                      const EngineOptions& opts = {});

struct VerifyOptions {
    Interval window{-5.0, 5.0};
    int grid = 10000;
    int growth_samples = 1000;
    double interpolation_tol = 1e-9;
    bool growth_check = true;
    // f' on the window grid must reach this floor; defaults to 1 - sum_{j<=N} epsilon_j
    std::optional<double> derivative_floor;
};

// deterministic spiral of points in |z| <= radius
std::vector<cplx> spiral_samples(int count, double radius);

VerificationReport verify(const ConstructionState& s, const EngineOptions& opts, const VerifyOptions& vopts = {});

// the generic checks shared with the warped construction
void check_interpolation(const ConstructionState& s, double tol, VerificationReport& r);
void check_order_isomorphism(const ConstructionState& s, VerificationReport& r);
void check_exhaustiveness(const ConstructionState& s, VerificationReport& r);
void check_step_margins(const ConstructionState& s, VerificationReport& r);
void check_symmetry(const ConstructionState& s, const std::vector<cplx>& samples, const Interval& window, int grid,
                    VerificationReport& r);
double min_derivative(const EntireSeries& f, const Interval& window, int grid);

}  // namespace orderiso::franklin
