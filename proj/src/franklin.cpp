#include "orderiso/franklin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "orderiso/errors.hpp"

namespace orderiso::franklin {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

double log_abs(double x) { return x == 0.0 ? -inf : std::log(std::abs(x)); }

// (numerator) / (factor * m * exp(log_scale)) for real data
double scaled_quotient(double numerator, double factor_times_m, double log_scale) {
    if (numerator == 0.0) return 0.0;
    if (factor_times_m == 0.0) return std::numeric_limits<double>::quiet_NaN();
    if (std::abs(log_scale) < 600.0) return numerator / (factor_times_m * std::exp(log_scale));
    const double mag = std::exp(std::log(std::abs(numerator)) - std::log(std::abs(factor_times_m)) - log_scale);
    return std::signbit(numerator) != std::signbit(factor_times_m) ? -mag : mag;
}

struct StepContext {
    const ConstructionState& s;
    GaussTerm term;

    // value of the factor multiplying lambda * h_n(x)
    double factor(double x, bool literal) const {
        if (literal && s.series.carrier()) return s.series.base_eval(x).value.real();
        return s.series.modulator_eval(x).value.real();
    }

    // lambda such that f_{n-1}(x) + factor(x) lambda h_n(x) = target
    double lambda_at(double x, double target, bool literal = false) const {
        const double fx = s.series.eval(x).value.real();
        const ScaledValueDeriv h = term_eval_scaled(term, x, s.series.carrier());
        return scaled_quotient(target - fx, factor(x, literal) * h.value.real(), h.log_scale);
    }
};

std::vector<double> excluded_betas(const ConstructionState& s) {
    std::vector<double> out(s.betas);
    if (s.pending_beta) out.push_back(s.pending_beta->value);
    return out;
}

// short linear scan first; the sorted index is built only when a search goes deeper
densesets::ElementRef find(densesets::Enumeration& e, const Interval& iv, const std::vector<double>& exclude,
                           std::size_t cap) {
    constexpr std::size_t quick = 4096;
    if (cap <= quick || e.has_index(cap)) return e.find_in_interval(iv, exclude, cap);
    try {
        return e.find_in_interval(iv, exclude, quick);
    } catch (const CapExceeded&) {
    }
    e.build_index(cap);
    return e.find_in_interval(iv, exclude, cap);
}

void commit(ConstructionState& s, const densesets::ElementRef& a, const densesets::ElementRef& b, double lambda,
            StepTrace t) {
    s.series.push(lambda, a.value);
    s.A.mark_used(a.index);
    s.B.mark_used(b.index);
    s.alpha_indices.push_back(a.index);
    s.beta_indices.push_back(b.index);
    s.betas.push_back(b.value);
    t.alpha_index = a.index;
    t.beta_index = b.index;
    t.alpha = a.value;
    t.beta = b.value;
    t.lambda = lambda;
    t.commit_residual = std::abs(s.series.eval(a.value).value.real() - b.value);
    s.trace.push_back(std::move(t));
}

void select_next_beta(ConstructionState& s) {
    const densesets::ElementRef b = s.B.first_unused();
    s.B.mark_used(b.index);
    s.pending_beta = b;
}

}  // namespace

BudgetSchedule::BudgetSchedule(double base, double ratio) : base_(base), ratio_(ratio) {
    if (!(base > 0.0) || !std::isfinite(base)) throw std::invalid_argument("budget base must be positive");
    if (!(ratio > 0.0 && ratio < 1.0)) throw std::invalid_argument("budget ratio must lie in (0, 1)");
    if (!(total() < 1.0)) throw std::invalid_argument("budget sum must be below 1");
}

double BudgetSchedule::epsilon(std::size_t n) const { return std::exp(log_epsilon(n)); }

double BudgetSchedule::log_epsilon(std::size_t n) const {
    if (n == 0) throw std::invalid_argument("budget index starts at 1");
    return std::log(base_) + static_cast<double>(n) * std::log(ratio_);
}

double BudgetSchedule::partial_sum(std::size_t n) const {
    return base_ * ratio_ * (1.0 - std::pow(ratio_, static_cast<double>(n))) / (1.0 - ratio_);
}

double BudgetSchedule::total() const { return base_ * ratio_ / (1.0 - ratio_); }

double BudgetSchedule::tail_sum(std::size_t n) const {
    return base_ * std::pow(ratio_, static_cast<double>(n + 1)) / (1.0 - ratio_);
}

std::string to_string(StepKind k) { return k == StepKind::even ? "even" : "odd"; }

double log_eta(const std::vector<CapRecord>& caps) {
    if (caps.empty()) throw std::logic_error("eta requested without caps");
    double best = inf;
    for (const CapRecord& c : caps) {
        if (c.sup.log_raw == -inf) throw std::logic_error("zero sup bound for a nonzero term");
        best = std::min(best, c.log_eta());
    }
    return best;
}

double EtaCap::eta() const { return std::exp(log_eta); }

CapModel theorem1_caps(const EngineOptions& opts) {
    return [opts](const ConstructionState& s, std::size_t n) {
        const GaussTerm t = s.series.term(n);
        const double log_eps = opts.budgets.log_epsilon(n);
        std::vector<CapRecord> caps;

        const SupBound disk = sup_on_disk_log(
            [&](cplx z) { return term_eval_scaled(t, z).log_abs_value(); }, Disk{0.0, static_cast<double>(n)},
            opts.disk_samples, opts.safety);
        caps.push_back({"disk", disk, log_eps});

        double amax = 0.0;
        for (double a : t.roots()) amax = std::max(amax, std::abs(a));
        RealTail tail{0.0, static_cast<int>(t.roots().size()) + 1, amax};
        tail.half_width = required_half_width(tail) + 1.0;
        const SupBound real = sup_on_real_log(
            [&](double x) { return term_eval_scaled(t, x).log_abs_deriv(); }, tail, opts.real_samples, opts.safety);
        caps.push_back({"real", real, log_eps});

        const SupBound growth = growth_cap(t.roots(), opts.growth_samples, opts.safety);
        caps.push_back({"growth", growth, -static_cast<double>(n) * std::numbers::ln2});
        return caps;
    };
}

ValueDeriv f_eval(const ConstructionState& s, cplx z) { return s.series.eval(z); }

EtaCap eta_cap(const ConstructionState& s, std::size_t n, const EngineOptions& opts) {
    std::vector<CapRecord> caps = theorem1_caps(opts)(s, n);
    const double le = log_eta(caps);
    return {le, std::move(caps)};
}

double solve_preimage(const EntireSeries& f, double target) {
    if (!std::isfinite(target)) throw std::invalid_argument("non-finite preimage target");
    auto g = [&](double x) { return f.eval(x).value.real() - target; };
    const double tol = 1e-12 * std::max(1.0, std::abs(target));
    const double x0 = target;
    const double g0 = g(x0);
    if (std::abs(g0) <= tol) return x0;

    double lo = x0, hi = x0;
    double half = 1.0;
    while (true) {
        lo = x0 - half;
        hi = x0 + half;
        if (g(lo) <= 0.0 && g(hi) >= 0.0) break;
        half *= 2.0;
        if (half > std::ldexp(1.0, 60)) throw ConstructionError("preimage bracket exceeded 2^60 half-width");
    }
    double best = x0, best_g = std::abs(g0);
    for (int it = 0; it < 2000; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double gm = g(mid);
        if (std::abs(gm) < best_g) {
            best = mid;
            best_g = std::abs(gm);
        }
        if (best_g <= tol) break;
        if (gm < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    for (double x : {lo, hi}) {
        const double gx = std::abs(g(x));
        if (gx < best_g) {
            best = x;
            best_g = gx;
        }
    }
    return best;
}

void step_initial(ConstructionState& s, const EngineOptions&) {
    if (s.step() != 0) throw std::logic_error("initial step on a nonempty state");
    const densesets::ElementRef a = s.A.ref(1);
    const densesets::ElementRef b = s.B.ref(1);
    const double base = s.series.base_eval(a.value).value.real();
    const double mod = s.series.modulator_eval(a.value).value.real();
    if (mod == 0.0) throw ConstructionError("modulator vanishes at alpha_1");
    StepTrace t;
    t.step = 1;
    t.kind = StepKind::odd;
    const double lambda = s.series.warped() ? (b.value - base) / mod : b.value - a.value;
    t.exact_hit = lambda == 0.0;
    commit(s, a, b, lambda, std::move(t));
}

void step_even(ConstructionState& s, const CapModel& caps, const EngineOptions& opts) {
    const std::size_t n = s.step() + 1;
    if (n % 2 != 0) throw std::logic_error("even step requested at odd index");
    if (!s.pending_beta) throw std::logic_error("even step without a selected beta");
    const densesets::ElementRef beta = *s.pending_beta;

    StepContext ctx{s, s.series.term(n)};
    StepTrace t;
    t.step = n;
    t.kind = StepKind::even;
    const double x = solve_preimage(s.series, beta.value);
    t.preimage = x;
    t.residual = std::abs(s.series.eval(x).value.real() - beta.value);
    if (term_eval_scaled(ctx.term, x, s.series.carrier()).value == cplx(0.0, 0.0))
        throw ConstructionError("term vanishes at the preimage point: state corrupt");

    t.caps = caps(s, n);
    const double le = log_eta(t.caps);
    t.log_eta = le;
    const std::vector<double>& used_alphas = s.series.alphas();

    auto finish = [&](const densesets::ElementRef& a, double lambda) {
        s.pending_beta.reset();
        commit(s, a, beta, lambda, std::move(t));
    };

    if (opts.prefer_exact_hits) {
        const double delta = 1e-9 * std::max(1.0, std::abs(x));
        try {
            const densesets::ElementRef a = find(s.A, {x - delta, x + delta}, used_alphas, opts.find_cap);
            if (ctx.lambda_at(a.value, beta.value) == 0.0) {
                t.exact_hit = true;
                finish(a, 0.0);
                return;
            }
        } catch (const CapExceeded&) {
        }
    }

    double half = 1.0;
    for (int k = 0; k <= opts.max_halvings; ++k, half *= 0.5) {
        t.halvings = k;
        const Interval I{x - half, x + half};
        if (!(I.a < x && x < I.b))
            throw ConstructionError("even-step interval fell below binary64 resolution at step " + std::to_string(n));
        bool small = true;
        for (double p : grid_samples(I, opts.interval_samples)) {
            const double l = ctx.lambda_at(p, beta.value);
            if (!std::isfinite(l) || !(log_abs(l) < le)) {
                small = false;
                break;
            }
        }
        if (!small) continue;
        const densesets::ElementRef a = find(s.A, I, used_alphas, opts.find_cap);
        const double lambda = ctx.lambda_at(a.value, beta.value);
        if (std::isfinite(lambda) && log_abs(lambda) < le) {
            t.exact_hit = lambda == 0.0;
            finish(a, lambda);
            return;
        }
    }
    throw CapExceeded("even-step interval halving limit reached at step " + std::to_string(n));
}

void step_odd(ConstructionState& s, const CapModel& caps, const EngineOptions& opts) {
    const std::size_t n = s.step() + 1;
    if (n % 2 != 1 || n < 3) throw std::logic_error("odd step requested at even index");
    const bool literal = opts.odd_factor == OddFactor::carrier_literal;
    const densesets::ElementRef a = s.A.first_unused();

    StepContext ctx{s, s.series.term(n)};
    StepTrace t;
    t.step = n;
    t.kind = StepKind::odd;
    const ScaledValueDeriv h = term_eval_scaled(ctx.term, a.value, s.series.carrier());
    if (h.value == cplx(0.0, 0.0)) throw ConstructionError("term vanishes at a fresh alpha: state corrupt");
    const double v0 = s.series.eval(a.value).value.real();
    const double slope = ctx.factor(a.value, literal) * h.value.real();
    if (slope == 0.0) throw ConstructionError("odd-step linear map is constant at step " + std::to_string(n));

    t.caps = caps(s, n);
    const double le = log_eta(t.caps);
    t.log_eta = le;
    const std::vector<double> used_betas = excluded_betas(s);

    auto finish = [&](const densesets::ElementRef& b, double lambda) {
        commit(s, a, b, lambda, std::move(t));
        select_next_beta(s);
    };

    if (opts.prefer_exact_hits) {
        const double delta = 1e-9 * std::max(1.0, std::abs(v0));
        try {
            const densesets::ElementRef b = find(s.B, {v0 - delta, v0 + delta}, used_betas, opts.find_cap);
            if (b.value == v0) {
                t.exact_hit = true;
                finish(b, 0.0);
                return;
            }
        } catch (const CapExceeded&) {
        }
    }

    // |beta - v0| < eta |slope| keeps |lambda| < eta; the factor 0.999 absorbs rounding in lambda
    const double width = 0.999 * std::exp(le + std::log(std::abs(slope)) + h.log_scale);
    const Interval J{v0 - width, v0 + width};
    if (!(J.a < v0 && v0 < J.b))
        throw ConstructionError("odd-step target interval fell below binary64 resolution at step " + std::to_string(n) +
                                " (log half-width " + std::to_string(le + std::log(std::abs(slope)) + h.log_scale) + ")");
    const densesets::ElementRef b = find(s.B, J, used_betas, opts.find_cap);
    const double lambda = scaled_quotient(b.value - v0, slope, h.log_scale);
    if (!(log_abs(lambda) < le)) throw ConstructionError("odd-step lambda exceeds its cap at step " + std::to_string(n));
    t.exact_hit = lambda == 0.0;
    finish(b, lambda);
}

void advance(ConstructionState& s, std::size_t n, const CapModel& caps, const EngineOptions& opts) {
    if (s.step() == 0 && n >= 1) {
        step_initial(s, opts);
        if (n >= 2) select_next_beta(s);
    }
    while (s.step() < n) {
        if ((s.step() + 1) % 2 == 0)
            step_even(s, caps, opts);
        else
            step_odd(s, caps, opts);
    }
}

ConstructionState run(const densesets::EnumerationSpec& A, const densesets::EnumerationSpec& B, std::size_t N,
                      const EngineOptions& opts) {
    if (N < 1) throw std::invalid_argument("at least one step required");
    ConstructionState s{densesets::Enumeration(A), densesets::Enumeration(B)};
    advance(s, N, theorem1_caps(opts), opts);
    return s;
}

std::vector<cplx> spiral_samples(int count, double radius) {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    std::vector<cplx> out(count);
    for (int k = 0; k < count; ++k) out[k] = std::polar(radius * std::sqrt((k + 0.5) / count), golden * k);
    return out;
}

void check_interpolation(const ConstructionState& s, double tol, VerificationReport& r) {
    double worst = 0.0, worst_ulps = 0.0;
    const auto& al = s.series.alphas();
    for (std::size_t j = 0; j < al.size(); ++j) {
        const double fn = s.series.eval(al[j]).value.real();
        worst = std::max(worst, std::abs(fn - s.betas[j]));
        const double fj = s.series.eval(al[j], j + 1).value.real();
        const double ulp = std::nextafter(std::abs(fj), inf) - std::abs(fj);
        worst_ulps = std::max(worst_ulps, std::abs(fn - fj) / ulp);
    }
    r.add_upper("interpolation", worst, tol, "max_j |f(alpha_j) - beta_j|");
    r.add_upper("interpolation_telescoping", worst_ulps, 2.0, "max_j |f_N(alpha_j) - f_j(alpha_j)| in ulps");
}

void check_order_isomorphism(const ConstructionState& s, VerificationReport& r) {
    std::size_t violations = 0;
    const std::size_t m = std::min(s.alpha_indices.size(), s.beta_indices.size());
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) {
            const int ca = s.A.compare(s.alpha_indices[i], s.alpha_indices[j]);
            const int cb = s.B.compare(s.beta_indices[i], s.beta_indices[j]);
            if (ca == 0 || ca != cb) ++violations;
        }
    r.add_upper("order_isomorphism", static_cast<double>(violations), 0.0, "discordant or repeated pairs (exact)");
}

void check_exhaustiveness(const ConstructionState& s, VerificationReport& r) {
    const std::size_t half = s.step() / 2;
    std::size_t missing = 0;
    for (std::size_t i = 1; i <= half; ++i) {
        if (std::find(s.alpha_indices.begin(), s.alpha_indices.end(), i) == s.alpha_indices.end()) ++missing;
        if (std::find(s.beta_indices.begin(), s.beta_indices.end(), i) == s.beta_indices.end()) ++missing;
    }
    r.add_upper("exhaustiveness", static_cast<double>(missing), 0.0,
                "unpaired among the first " + std::to_string(half) + " of each enumeration");
}

void check_step_margins(const ConstructionState& s, VerificationReport& r) {
    double worst = inf;
    std::string where = "no capped steps";
    bool complete = true;
    for (std::size_t n = 2; n <= s.step(); ++n) {
        const StepTrace* t = n - 1 < s.trace.size() ? &s.trace[n - 1] : nullptr;
        if (t == nullptr || t->caps.empty()) {
            complete = false;
            continue;
        }
        const double ll = log_abs(s.series.lambdas()[n - 1]);
        for (const CapRecord& c : t->caps) {
            const double margin = c.log_eta() - ll;
            if (margin < worst) {
                worst = margin;
                where = "step " + std::to_string(n) + " cap " + c.name;
            }
        }
    }
    r.add({"step_margins", worst, 0.0, worst, complete && worst > 0.0,
           "min over steps and caps of log(eta_cap) - log|lambda_n|; " + where});
}

void check_symmetry(const ConstructionState& s, const std::vector<cplx>& samples, const Interval& window, int grid,
                    VerificationReport& r) {
    double worst = 0.0;
    for (cplx z : samples) {
        const cplx a = s.series.eval(std::conj(z)).value;
        const cplx b = std::conj(s.series.eval(z).value);
        const double scale = std::max(1.0, std::abs(b));
        worst = std::max(worst, std::abs(a - b) / (scale * std::numeric_limits<double>::epsilon()));
    }
    double imag = 0.0;
    for (double x : grid_samples(window, grid)) imag = std::max(imag, std::abs(s.series.eval(x).value.imag()));
    r.add_upper("conjugate_symmetry", worst, 4.0, "max |f(conj z) - conj f(z)| in units of eps*max(1,|f|)");
    r.add_upper("realness", imag, 0.0, "max |Im f(x)| on the window grid");
}

double min_derivative(const EntireSeries& f, const Interval& window, int grid) {
    double best = inf;
    for (double x : grid_samples(window, grid)) best = std::min(best, f.eval(x).deriv.real());
    return best;
}

VerificationReport verify(const ConstructionState& s, const EngineOptions& opts, const VerifyOptions& vopts) {
    VerificationReport r;
    check_interpolation(s, vopts.interpolation_tol, r);
    check_order_isomorphism(s, r);
    check_exhaustiveness(s, r);

    const double floor = vopts.derivative_floor.value_or(1.0 - opts.budgets.partial_sum(s.step()) - 1e-9);
    r.add_lower("derivative_floor", min_derivative(s.series, vopts.window, vopts.grid), floor,
                "min f' on the window grid");
    check_step_margins(s, r);

    const std::vector<cplx> samples = spiral_samples(vopts.growth_samples, 3.0);
    if (vopts.growth_check) {
        const double l1 = s.step() ? std::abs(s.series.lambdas()[0]) : 0.0;
        double worst = inf;
        for (cplx z : samples) {
            const double az = std::abs(z);
            const double bound = az + l1 + std::exp(az * az * az);
            worst = std::min(worst, std::log(bound) - std::log(std::abs(s.series.eval(z).value)));
        }
        r.add({"growth", worst, 0.0, worst, worst > 0.0, "min log(|z| + |lambda_1| + e^{|z|^3}) - log|f(z)|, |z| <= 3"});
    }
    check_symmetry(s, samples, vopts.window, std::min(vopts.grid, 2001), r);
    return r;
}

}  // namespace orderiso::franklin
