#include "orderiso/birkhoff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <stdexcept>

#include "orderiso/errors.hpp"

namespace orderiso::birkhoff {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

double log_abs(cplx z) { return z == cplx(0.0) ? -inf : std::log(std::abs(z)); }

// coefficients are real by type; this confirms the evaluation path keeps conjugate symmetry exact
bool conjugate_exact(const RealPoly& p, double radius) {
    for (double c : p.coeffs())
        if (!std::isfinite(c)) return false;
    for (cplx z : franklin::spiral_samples(64, radius))
        if (poly_eval(p, std::conj(z)) != std::conj(poly_eval(p, z))) return false;
    return true;
}

std::string describe(const std::string& what, double measured, double limit) {
    return what + " " + std::to_string(measured) + " (limit " + std::to_string(limit) + ")";
}

approx::PatchInput patch_input(const approx::SpecialChaplet& e, const Interval& window) {
    approx::PatchInput in;
    in.chaplet = e;
    in.window = window;
    return in;
}

}  // namespace

approx::SpecialChaplet default_chaplet(std::size_t K) {
    if (K < 1) throw std::invalid_argument("chaplet needs at least one disc pair");
    if (K > 60) throw std::invalid_argument("chaplet radii overflow the dyadic layout");
    approx::SpecialChaplet e;
    for (std::size_t n = 1; n <= K + 1; ++n) e.radii.push_back(std::ldexp(1.0, static_cast<int>(n)));
    for (std::size_t n = 1; n <= K; ++n) {
        const double r = std::ldexp(1.0, static_cast<int>(n));
        e.upper.push_back({cplx(0.0, 1.5 * r), r / 4.0});
    }
    approx::validate(e);
    return e;
}

std::size_t TargetCycle::target_for(std::size_t n) const {
    if (targets.empty()) throw std::invalid_argument("empty target cycle");
    if (n < 1) throw std::invalid_argument("disc index starts at 1");
    return (n - 1) % targets.size();
}

TargetCycle default_cycle() { return {{RealPoly({1.0}), RealPoly({0.0, 1.0}), RealPoly({-1.0, 0.0, 0.5})}}; }

void validate(const TargetCycle& c, std::size_t K) {
    if (c.targets.empty()) throw std::invalid_argument("empty target cycle");
    if (K < 2 * c.targets.size()) return;
    std::vector<std::size_t> count(c.targets.size(), 0);
    for (std::size_t n = 1; n <= K; ++n) ++count[c.target_for(n)];
    for (std::size_t k : count)
        if (k < 2) throw std::invalid_argument("target assigned to fewer than two discs");
}

cplx disc_target(const approx::SpecialChaplet& e, const TargetCycle& c, std::size_t n, cplx z) {
    return poly_eval(c.polynomial(n), z - e.upper_disc(n).center);
}

VerificationReport PhiArtifact::report() const {
    VerificationReport r;
    r.add_flag("phi_patch", patch.ok, patch.failure);
    r.add({"phi_derivative", derivative_floor, 0.0, derivative_floor, derivative_floor > 0.0, "min Phi' on the window grid"});
    for (std::size_t n = 1; n <= disc_errors.size(); ++n) {
        const double lim = 1.0 / static_cast<double>(n);
        r.add({"phi_disc_" + std::to_string(n), disc_errors[n - 1], lim, lim - disc_errors[n - 1], disc_errors[n - 1] < lim,
               "max |Phi - phi| on E_n samples"});
    }
    r.add_flag("phi_real_coefficients", real_coefficients);
    return r;
}

PhiArtifact build_phi(const approx::SpecialChaplet& e, const TargetCycle& c, const Interval& window,
                      const franklin::BudgetSchedule& budgets, const PatchOptions& opts, double real_eps,
                      double disc_scale) {
    approx::validate(e);
    validate(c, e.count());
    if (!(real_eps > 0.0 && real_eps < 0.5)) throw std::invalid_argument("real tolerance must lie in (0, 1/2)");
    if (!(disc_scale > 0.0 && disc_scale < 1.0)) throw std::invalid_argument("disc tolerance scale must lie in (0, 1)");

    approx::PatchInput in = patch_input(e, window);
    for (std::size_t n = 1; n <= e.count(); ++n)
        in.disc_targets.push_back([e, c, n](cplx z) { return disc_target(e, c, n, z); });
    in.real_target = [](double x) { return approx::RealSample{x, x, 1.0}; };
    in.eps = approx::constant_epsilon(e, window, opts.layout, real_eps,
                                      [disc_scale](std::size_t n) { return disc_scale / static_cast<double>(n); });

    PhiArtifact a;
    a.chaplet = e;
    a.cycle = c;
    a.window = window;
    a.patch = approx::re_patch(in, budgets, opts.layout, opts.ke);
    a.poly = a.patch.g();

    a.derivative_floor = inf;
    for (double x : grid_samples(window, opts.grid))
        a.derivative_floor = std::min(a.derivative_floor, poly_eval_deriv(a.poly, cplx(x, 0.0)).deriv.real());
    for (std::size_t n = 1; n <= e.count(); ++n) {
        double worst = 0.0;
        for (cplx z : boundary_samples(e.upper_disc(n), opts.check_samples)) {
            const cplx target = disc_target(e, c, n, z);
            worst = std::max(worst, std::abs(poly_eval(a.poly, z) - target));
            worst = std::max(worst, std::abs(poly_eval(a.poly, std::conj(z)) - std::conj(target)));
        }
        a.disc_errors.push_back(worst);
    }
    a.real_coefficients = conjugate_exact(a.poly, e.r(e.count() + 1));

    a.ok = a.patch.ok && a.derivative_floor > 0.0 && a.real_coefficients;
    if (!a.patch.ok) a.failure = a.patch.failure;
    if (a.patch.ok && !(a.derivative_floor > 0.0)) a.failure = describe("Phi' floor", a.derivative_floor, 0.0);
    for (std::size_t n = 1; n <= e.count() && a.ok; ++n)
        if (!(a.disc_errors[n - 1] < 1.0 / static_cast<double>(n))) {
            a.ok = false;
            a.failure = describe("disc " + std::to_string(n) + " error", a.disc_errors[n - 1], 1.0 / static_cast<double>(n));
        }
    if (!a.ok && opts.strict) throw approx::StageFailure("carrier construction failed: " + a.failure, a.patch);
    return a;
}

approx::EpsilonSamples design_epsilon_H(const approx::SpecialChaplet& e, const RealPoly& phi, std::size_t jmax,
                                        const Interval& window, const approx::PatchLayout& layout) {
    approx::validate(e);
    if (jmax < 1) throw std::invalid_argument("jmax must be at least 1");
    const double reach = 2.0 * e.r(e.count() + 1);
    const double log_half = std::log(0.5);

    // largest |h_j| bound over 1 <= j <= jcount; h_1 = 1 exactly
    auto log_envelope = [&](cplx w, std::size_t jcount) {
        if (jcount < 2) return 0.0;
        const double lw = -(w * w).real() + static_cast<double>(jcount - 1) * std::log(std::abs(w) + reach);
        return std::max(0.0, lw);
    };
    auto finish = [](double log_eps, const char* where) {
        const double v = std::exp(log_eps);
        if (!(v > 0.0) || !std::isfinite(v))
            throw ConstructionError(std::string("tolerance envelope underflows on ") + where);
        return v;
    };

    approx::EpsilonSamples out;
    out.real_x = grid_samples(window, layout.window_samples);
    for (double x : out.real_x) {
        const ValueDeriv p = poly_eval_deriv(phi, cplx(x, 0.0));
        const double dphi = p.deriv.real();
        if (!(dphi > 0.0)) throw ConstructionError("carrier derivative not positive at x = " + std::to_string(x));
        const auto jcount = std::min<std::size_t>(static_cast<std::size_t>(std::floor(std::abs(x))) + 1, jmax);
        const double le = log_half + std::min(0.0, std::log(dphi) - log_envelope(p.value, jcount));
        out.real_eps.push_back(finish(le, "the real window"));
    }
    for (std::size_t n = 1; n <= e.count(); ++n) {
        out.disc_points.push_back(boundary_samples(e.upper_disc(n), layout.disc_samples));
        std::vector<double> eps;
        for (cplx z : out.disc_points.back()) {
            const cplx w = poly_eval(phi, z);
            const double le = log_half + std::min(0.0, -(log_envelope(w, std::min(n, jmax)) + std::log(std::abs(z))));
            eps.push_back(finish(le, "the chaplet"));
        }
        out.disc_eps.push_back(std::move(eps));
    }
    return out;
}

VerificationReport HArtifact::report() const {
    VerificationReport r;
    r.add_flag("h_patch", patch.ok, patch.failure);
    r.add({"h_positive", min_value, 0.0, min_value, min_value > 0.0, "min H on the window grid"});
    r.add({"h_below_two", max_value, 2.0, 2.0 - max_value, max_value < 2.0, "max H on the window grid"});
    r.add({"h_real", real_ratio, 1.0, 1.0 - real_ratio, real_ratio < 1.0, "max |H - 1| / eps on real samples"});
    r.add({"h_real_derivative", real_deriv_ratio, 1.0, 1.0 - real_deriv_ratio, real_deriv_ratio < 1.0,
           "max |H'| / eps on real samples"});
    r.add({"h_chaplet", disc_ratio, 1.0, 1.0 - disc_ratio, disc_ratio < 1.0, "max |H| / eps on chaplet samples"});
    r.add_flag("h_real_coefficients", real_coefficients);
    return r;
}

HArtifact build_H(const approx::SpecialChaplet& e, const approx::EpsilonSamples& eps, const Interval& window,
                  const franklin::BudgetSchedule& budgets, const PatchOptions& opts) {
    approx::validate(e);
    for (double v : eps.real_eps)
        if (!(v > 0.0)) throw std::invalid_argument("tolerance must be positive on the window");
    for (const auto& d : eps.disc_eps)
        for (double v : d)
            if (!(v > 0.0)) throw std::invalid_argument("tolerance must be positive on the chaplet");

    approx::PatchInput in = patch_input(e, window);
    for (std::size_t n = 1; n <= e.count(); ++n) in.disc_targets.push_back([](cplx) { return cplx(0.0); });
    in.real_target = [](double x) { return approx::RealSample{x, 1.0, 0.0}; };
    in.eps = eps;

    HArtifact a;
    a.eps = eps;
    a.patch = approx::re_patch(in, budgets, opts.layout, opts.ke);
    a.poly = a.patch.g();

    a.min_value = inf;
    a.max_value = -inf;
    for (double x : grid_samples(window, opts.grid)) {
        const double v = poly_eval(a.poly, cplx(x, 0.0)).real();
        a.min_value = std::min(a.min_value, v);
        a.max_value = std::max(a.max_value, v);
    }
    for (std::size_t i = 0; i < eps.real_x.size(); ++i) {
        const ValueDeriv v = poly_eval_deriv(a.poly, cplx(eps.real_x[i], 0.0));
        a.real_ratio = std::max(a.real_ratio, std::abs(v.value.real() - 1.0) / eps.real_eps[i]);
        a.real_deriv_ratio = std::max(a.real_deriv_ratio, std::abs(v.deriv.real()) / eps.real_eps[i]);
    }
    for (std::size_t n = 0; n < eps.disc_points.size(); ++n)
        for (std::size_t i = 0; i < eps.disc_points[n].size(); ++i) {
            const cplx z = eps.disc_points[n][i];
            const double m = std::max(std::abs(poly_eval(a.poly, z)), std::abs(poly_eval(a.poly, std::conj(z))));
            a.disc_ratio = std::max(a.disc_ratio, m / eps.disc_eps[n][i]);
        }
    a.real_coefficients = conjugate_exact(a.poly, e.r(e.count() + 1));

    a.ok = a.patch.ok && a.real_coefficients;
    a.failure = a.patch.failure;
    const std::pair<bool, std::string> checks[] = {
        {a.min_value > 0.0, describe("min H", a.min_value, 0.0)},
        {a.max_value < 2.0, describe("max H", a.max_value, 2.0)},
        {a.real_ratio < 1.0, describe("|H - 1| / eps", a.real_ratio, 1.0)},
        {a.real_deriv_ratio < 1.0, describe("|H'| / eps", a.real_deriv_ratio, 1.0)},
        {a.disc_ratio < 1.0, describe("|H| / eps on the chaplet", a.disc_ratio, 1.0)},
    };
    for (const auto& [pass, what] : checks)
        if (!pass && a.ok) {
            a.ok = false;
            a.failure = what;
        }
    if (!a.ok && opts.strict) throw approx::StageFailure("damper construction failed: " + a.failure, a.patch);
    return a;
}

namespace {

// carrier and damper values at the fixed sample sets, shared by every step's caps
struct CapCache {
    std::vector<cplx> w, dw, hv, dh;  // window grid: Phi, Phi', H, H'
    std::vector<cplx> cz, cw, cdw, ch;  // chaplet samples (upper halves): z, Phi, Phi', H
};

std::shared_ptr<const CapCache> make_cache(const RealPoly& phi, const RealPoly& H, const approx::SpecialChaplet& e,
                                           const Theorem2Options& opts) {
    auto c = std::make_shared<CapCache>();
    for (double x : grid_samples(opts.window, opts.window_samples)) {
        const ValueDeriv p = poly_eval_deriv(phi, cplx(x, 0.0));
        if (!(p.deriv.real() > 0.0)) throw ConstructionError("carrier derivative not positive at x = " + std::to_string(x));
        const ValueDeriv h = poly_eval_deriv(H, cplx(x, 0.0));
        c->w.push_back(p.value);
        c->dw.push_back(p.deriv);
        c->hv.push_back(h.value);
        c->dh.push_back(h.deriv);
    }
    for (std::size_t n = 1; n <= e.count(); ++n)
        for (cplx z : boundary_samples(e.upper_disc(n), opts.chaplet_samples)) {
            const ValueDeriv p = poly_eval_deriv(phi, z);
            c->cz.push_back(z);
            c->cw.push_back(p.value);
            c->cdw.push_back(p.deriv);
            c->ch.push_back(poly_eval(H, z));
        }
    return c;
}

}  // namespace

franklin::CapModel theorem2_caps(const RealPoly& phi, const RealPoly& H, const approx::SpecialChaplet& e,
                                 const Theorem2Options& opts) {
    approx::validate(e);
    const std::shared_ptr<const CapCache> cache = make_cache(phi, H, e, opts);
    // Phi is controlled only on D_1, the chaplet and the window, so the compact exhaustion stops at r_1
    const double r1 = e.r(1);
    return [phi, H, cache, opts, r1](const franklin::ConstructionState& s, std::size_t n) {
        const GaussTerm t = s.series.term(n);
        const franklin::EngineOptions& eo = opts.engine;
        const double log_two_n = -static_cast<double>(n) * std::numbers::ln2;
        std::vector<franklin::CapRecord> caps;

        const SupBound disk = sup_on_disk_log(
            [&](cplx z) {
                const ValueDeriv p = poly_eval_deriv(phi, z);
                return log_abs(poly_eval(H, z)) + term_eval_scaled_at(t, p.value, p.deriv).log_abs_value();
            },
            Disk{0.0, std::min(static_cast<double>(n), r1)}, eo.disk_samples, eo.safety);
        caps.push_back({"disk", disk, eo.budgets.log_epsilon(n)});

        std::vector<double> logs;
        logs.reserve(cache->cz.size());
        for (std::size_t i = 0; i < cache->cz.size(); ++i)
            logs.push_back(log_abs(cache->cz[i]) + log_abs(cache->ch[i]) +
                           term_eval_scaled_at(t, cache->cw[i], cache->cdw[i]).log_abs_value());
        caps.push_back({"chaplet", sup_of_logs(logs, SupMethod::boundary_sample, eo.safety), log_two_n});

        logs.clear();
        for (std::size_t i = 0; i < cache->w.size(); ++i) {
            const ScaledValueDeriv h = term_eval_scaled_at(t, cache->w[i], cache->dw[i]);
            const double m = std::abs(cache->dh[i]) * std::abs(h.value) + std::abs(cache->hv[i]) * std::abs(h.deriv);
            logs.push_back((m == 0.0 ? -inf : std::log(m)) + h.log_scale - std::log(cache->dw[i].real()));
        }
        caps.push_back({"fprime", sup_of_logs(logs, SupMethod::window_sample, eo.safety), log_two_n});
        return caps;
    };
}

franklin::ConstructionState run_theorem2(const densesets::EnumerationSpec& A, const densesets::EnumerationSpec& B,
                                         const RealPoly& phi, const RealPoly& H, const approx::SpecialChaplet& e,
                                         std::size_t N, const Theorem2Options& opts) {
    if (N < 1) throw std::invalid_argument("at least one step required");
    franklin::ConstructionState s{densesets::Enumeration(A), densesets::Enumeration(B), EntireSeries(phi, H)};
    franklin::advance(s, N, theorem2_caps(phi, H, e, opts), opts.engine);
    return s;
}

std::vector<double> carrier_deviation(const franklin::ConstructionState& s, const approx::SpecialChaplet& e,
                                      int samples) {
    if (!s.series.warped()) throw std::invalid_argument("carrier deviation needs a warped series");
    std::vector<double> out;
    for (std::size_t n = 1; n <= e.count(); ++n) {
        double worst = 0.0;
        for (cplx z : boundary_samples(e.upper_disc(n), samples))
            for (cplx w : {z, std::conj(z)})
                worst = std::max(worst, std::abs(s.series.eval(w).value - s.series.base_eval(w).value) * std::abs(w));
        out.push_back(worst);
    }
    return out;
}

VerificationReport verify_theorem2(const franklin::ConstructionState& s, const approx::SpecialChaplet& e,
                                   const Interval& window, int grid, double interpolation_tol) {
    VerificationReport r;
    franklin::check_interpolation(s, interpolation_tol, r);
    franklin::check_order_isomorphism(s, r);
    franklin::check_exhaustiveness(s, r);
    franklin::check_step_margins(s, r);
    const double floor = franklin::min_derivative(s.series, window, grid);
    r.add({"derivative_positive", floor, 0.0, floor, floor > 0.0, "min f' on the window grid"});
    const std::vector<double> dev = carrier_deviation(s, e);
    const double worst = *std::max_element(dev.begin(), dev.end());
    r.add_upper("carrier_fidelity", worst, 1.0, "max |f - Phi| |z| on chaplet samples");
    franklin::check_symmetry(s, franklin::spiral_samples(1000, 3.0), window, std::min(grid, 2001), r);
    return r;
}

Witness universality_witness(const std::function<cplx(cplx)>& f, const approx::SpecialChaplet& e,
                             const TargetCycle& c, std::size_t target, const std::function<double(std::size_t)>& tol,
                             int samples) {
    if (target >= c.targets.size()) throw std::invalid_argument("target not in the cycle");
    Witness best;
    best.target = target;
    best.error = inf;
    bool assigned = false;
    for (std::size_t n = 1; n <= e.count(); ++n) {
        if (c.target_for(n) != target) continue;
        assigned = true;
        const Disk d = e.upper_disc(n);
        std::vector<cplx> pts = boundary_samples({0.0, d.radius}, samples);
        const std::vector<cplx> inner = franklin::spiral_samples(samples, d.radius);
        pts.insert(pts.end(), inner.begin(), inner.end());
        double err = 0.0;
        for (cplx z : pts) err = std::max(err, std::abs(f(z + d.center) - poly_eval(c.targets[target], z)));
        const double t = tol(n);
        if (err <= t) return {target, n, err, t, true};
        if (err < best.error) {
            best.error = err;
            best.tolerance = t;
        }
    }
    if (!assigned) throw std::invalid_argument("no disc assigned to the target");
    return best;
}

}  // namespace orderiso::birkhoff
