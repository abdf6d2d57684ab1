#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "orderiso/approxkit.hpp"
#include "orderiso/birkhoff.hpp"
#include "orderiso/cli.hpp"
#include "orderiso/errors.hpp"

using namespace orderiso;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool passed = false;
    std::string detail;
};

class Clock {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string failed_checks(const VerificationReport& r) {
    std::string out;
    for (const Check& c : r.checks())
        if (!c.passed) out += (out.empty() ? "" : ", ") + c.name + "=" + fmt("%.3g", c.measured);
    return out.empty() ? "all checks pass" : "failing " + out;
}

cli::RunConfig theorem1_config(densesets::EnumerationSpec A, densesets::EnumerationSpec B, std::size_t N) {
    cli::RunConfig c;
    c.A = std::move(A);
    c.B = std::move(B);
    c.N = N;
    c.window = 5.0;
    c.grid = 10000;
    c.growth_samples = 1000;
    return c;
}

densesets::EnumerationSpec dyadic_plus(double shift) {
    return densesets::EnumerationSpec::affine(densesets::EnumerationSpec::dyadic(), 1.0, shift);
}

cli::RunConfig generic_config() {
    return theorem1_config(densesets::EnumerationSpec::signed_calkin_wilf(), dyadic_plus(std::sqrt(2.0)), 40);
}

cli::RunConfig theorem2_config() {
    cli::RunConfig c = generic_config();
    c.mode = cli::Mode::theorem2;
    c.N = 20;
    c.window = 128.0;
    c.theorem2 = cli::Theorem2Config{};
    c.theorem2->jmax = c.N;
    return c;
}

const Interval real_window{-128.0, 128.0};
const franklin::BudgetSchedule patch_budgets(2.0, 0.3);

Outcome identity() {
    const cli::RunConfig c = theorem1_config(densesets::EnumerationSpec::dyadic(), densesets::EnumerationSpec::dyadic(), 40);
    const Clock clock;
    const cli::RunResult r = cli::execute(c);
    const double t = clock.seconds();
    if (!r.error.empty()) return {false, r.error};
    std::size_t nonzero = 0;
    for (double l : r.state->series.lambdas()) nonzero += l != 0.0;
    double dev = 0.0;
    for (double x : grid_samples({-5.0, 5.0}, 10000)) dev = std::max(dev, std::abs(r.state->series.eval(x).value.real() - x));
    const bool ok = r.state->step() == 40 && nonzero == 0 && dev == 0.0 && r.report.passed() && t < 1.0;
    return {ok, std::to_string(nonzero) + " nonzero lambdas, max |f(x) - x| " + fmt("%.3g", dev) + ", " +
                    failed_checks(r.report) + ", " + fmt("%.3f s", t)};
}

Outcome shift() {
    const cli::RunConfig c = theorem1_config(densesets::EnumerationSpec::dyadic(), dyadic_plus(1.0), 40);
    const Clock clock;
    const cli::RunResult r = cli::execute(c);
    const double t = clock.seconds();
    if (!r.error.empty()) return {false, r.error};
    double dev = 0.0;
    for (double x : grid_samples({-5.0, 5.0}, 10000))
        dev = std::max(dev, std::abs(r.state->series.eval(x).value.real() - (x + 1.0)));
    const bool ok = r.state->step() == 40 && dev <= 1e-12 && r.report.passed() && t < 2.0;
    return {ok, "max |f(x) - (x + 1)| " + fmt("%.3g", dev) + ", " + failed_checks(r.report) + ", " + fmt("%.3f s", t)};
}

Outcome generic() {
    const cli::RunConfig c = generic_config();
    const Clock clock;
    const cli::RunResult r = cli::execute(c);
    const double t = clock.seconds();
    const std::size_t steps = r.state ? r.state->step() : 0;
    std::string detail = std::to_string(steps) + "/40 steps";
    bool ok = r.error.empty() && steps == 40 && t < 30.0;
    if (!r.error.empty()) detail += " (" + r.error + ")";
    if (steps > 0) {
        const franklin::ConstructionState& s = *r.state;
        const double floor = franklin::min_derivative(s.series, {-5.0, 5.0}, 10000);
        std::size_t missing = 0;
        for (std::size_t i = 1; i <= 20; ++i) {
            missing += std::find(s.alpha_indices.begin(), s.alpha_indices.end(), i) == s.alpha_indices.end();
            missing += std::find(s.beta_indices.begin(), s.beta_indices.end(), i) == s.beta_indices.end();
        }
        const auto passed = [&](const char* name) { return r.report.find(name) && r.report.find(name)->passed; };
        const bool parts[] = {passed("interpolation"), passed("order_isomorphism"), missing == 0,
                              floor >= 11.0 / 12.0 - 1e-9, passed("step_margins"), passed("growth")};
        const char* names = "abcdef";
        std::string red;
        for (int k = 0; k < 6; ++k)
            if (!parts[k]) red += names[k];
        ok = ok && red.empty();
        detail += ", unconsumed among first 20: " + std::to_string(missing) + ", min f' " + fmt("%.6f", floor) +
                  (red.empty() ? "" : ", failing parts " + red);
    }
    return {ok, detail + ", " + fmt("%.2f s", t)};
}

Outcome approx_oracles() {
    using namespace approx;
    auto circle = [](int m, const std::function<cplx(cplx)>& f) {
        std::vector<Sample> out;
        for (cplx z : boundary_samples({0.0, 1.0}, m)) out.push_back({z, f(z)});
        return out;
    };

    const Fit cube = mergelyan_fit(circle(64, [](cplx z) { return z * z * z; }), 5, false);
    double cube_err = 0.0;
    for (std::size_t k = 0; k < 6; ++k) {
        const cplx c = k < cube.poly.coeffs().size() ? cube.poly.coeffs()[k] : cplx(0.0);
        cube_err = std::max(cube_err, std::abs(c - cplx(k == 3 ? 1.0 : 0.0)));
    }

    const Fit ex = mergelyan_fit(circle(64, [](cplx z) { return std::exp(z); }), 12, false);
    double exp_err = 0.0;
    for (cplx z : boundary_samples({0.0, 1.0}, 1024)) exp_err = std::max(exp_err, std::abs(poly_eval(ex.poly, z) - std::exp(z)));

    std::mt19937_64 rng(20240613);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double walsh_err = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<cplx> coeffs(6);
        for (cplx& v : coeffs) v = {u(rng), u(rng)};
        const int m = 1 + trial % 8;
        ConstraintSet cs;
        for (int j = 0; j < m; ++j)
            cs.push_back({std::polar(0.8, 2.0 * M_PI * j / m + 0.1 * u(rng)),
                          j % 2 ? ConstraintKind::derivative : ConstraintKind::value, {u(rng), u(rng)}});
        const WalshResult w = walsh_correct(ComplexPoly(coeffs), cs, 12);
        for (const Constraint& k : cs) {
            const ValueDeriv vd = poly_eval_deriv(w.poly, k.point);
            walsh_err = std::max(walsh_err, std::abs((k.kind == ConstraintKind::value ? vd.value : vd.deriv) - k.target));
        }
    }

    const RealPoly f({0.5, -1.0, 0.0, 2.0, 0.25});
    const KeResult ke = ke_approx([&](cplx z) { return poly_eval_deriv(f, z); }, [&](cplx z) { return poly_eval(f, z); },
                                  CompactSpec{{Disk{0.0, 2.0}}, true},
                                  CompactSpec{{Disk{cplx(0.0, 4.0), 1.0}, Disk{cplx(0.0, -4.0), 1.0}}, true}, {}, 1e-10);
    const double ke_err = std::max(ke.value_residual, ke.deriv_residual);

    const bool ok = cube_err <= 1e-12 && exp_err <= 1e-9 && walsh_err <= 1e-10 && ke.ok && ke_err <= 1e-10;
    return {ok, "z^3 coefficients " + fmt("%.2g", cube_err) + ", e^z " + fmt("%.2g", exp_err) + " (1/13! " +
                    fmt("%.2g", 1.0 / 6227020800.0) + "), constraint correction " + fmt("%.2g", walsh_err) + ", polynomial reproduction " + fmt("%.2g", ke_err)};
}

Outcome patch_chain() {
    using namespace approx;
    const Clock clock;
    const SpecialChaplet e = birkhoff::default_chaplet(6);
    const PatchLayout layout;

    PatchInput zero;
    zero.chaplet = e;
    zero.window = real_window;
    for (std::size_t n = 0; n < e.count(); ++n) zero.disc_targets.push_back([](cplx) { return cplx(0.0); });
    zero.real_target = [](double x) { return RealSample{x, 0.0, 0.0}; };
    zero.eps = constant_epsilon(e, zero.window, layout, 0.5, [](std::size_t) { return 0.5; });
    const PatchResult z = re_patch(zero, patch_budgets, layout);
    bool zero_ok = z.ok && z.phi.is_zero() && z.stages.size() == 6;
    for (const RealPoly& p : z.stages) zero_ok = zero_ok && p.is_zero();

    PatchInput gen = zero;
    gen.real_target = [](double x) { return RealSample{x, x, 1.0}; };
    gen.eps = constant_epsilon(e, gen.window, layout, 1.0, [](std::size_t) { return 1.0; });
    const PatchResult g = re_patch(gen, patch_budgets, layout);
    const double t = clock.seconds();

    std::size_t stage_fail = 0, tele_fail = 0;
    std::string first;
    for (const StageReport& s : g.reports)
        if (!(std::max(s.value_residual, s.deriv_residual) < s.tolerance)) {
            if (!stage_fail++) first = "stage " + std::to_string(s.n) + " residual " + fmt("%.3g", std::max(s.value_residual, s.deriv_residual)) +
                                       " against " + fmt("%.3g", s.tolerance);
        }
    for (const TelescopeReport& r : g.telescoping) tele_fail += !r.passed;
    const bool ok = zero_ok && g.ok && stage_fail == 0 && tele_fail == 0 && t < 60.0;
    return {ok, std::string("zero case ") + (zero_ok ? "exact" : "not exact") + ", generic stages failing " +
                    std::to_string(stage_fail) + "/" + std::to_string(g.reports.size()) + (first.empty() ? "" : " (" + first + ")") +
                    ", telescoping failing " + std::to_string(tele_fail) + ", " + fmt("%.2f s", t)};
}

// shared between the carrier and damper criteria
const birkhoff::PhiArtifact& default_phi() {
    static const birkhoff::PhiArtifact a = [] {
        birkhoff::PatchOptions o;
        o.strict = false;
        return birkhoff::build_phi(birkhoff::default_chaplet(6), birkhoff::default_cycle(), real_window, patch_budgets, o);
    }();
    return a;
}

Outcome carrier() {
    const birkhoff::PhiArtifact& a = default_phi();
    std::string errs;
    bool discs = true;
    for (std::size_t n = 1; n <= a.disc_errors.size(); ++n) {
        discs = discs && a.disc_errors[n - 1] < 1.0 / static_cast<double>(n);
        errs += (n > 1 ? " " : "") + fmt("%.3g", a.disc_errors[n - 1]);
    }
    const bool ok = discs && a.derivative_floor > 0.0 && a.real_coefficients;
    return {ok, "disc errors [" + errs + "] against 1/n, min Phi' " + fmt("%.4g", a.derivative_floor) +
                    ", real coefficients " + (a.real_coefficients ? "exact" : "broken") +
                    (a.patch.failure.empty() ? "" : ", patch: " + a.patch.failure)};
}

Outcome damper() {
    birkhoff::PatchOptions o;
    o.strict = false;
    const approx::SpecialChaplet e = birkhoff::default_chaplet(6);
    approx::EpsilonSamples eps;
    try {
        eps = birkhoff::design_epsilon_H(e, default_phi().poly, 20, real_window);
    } catch (const ConstructionError& err) {
        return {false, std::string("tolerance design on the criterion 6 carrier: ") + err.what()};
    }
    const birkhoff::HArtifact H = birkhoff::build_H(e, eps, real_window, patch_budgets, o);
    const bool ok = H.min_value > 0.0 && H.max_value < 2.0 && H.real_ratio < 1.0 && H.disc_ratio < 1.0 &&
                    H.real_deriv_ratio < 1.0;
    return {ok, "H range [" + fmt("%.4g", H.min_value) + ", " + fmt("%.4g", H.max_value) + "], |H-1|/eps " +
                    fmt("%.3g", H.real_ratio) + ", |H'|/eps " + fmt("%.3g", H.real_deriv_ratio) + ", chaplet |H|/eps " +
                    fmt("%.3g", H.disc_ratio)};
}

Outcome theorem2_run() {
    const Clock clock;
    const cli::RunResult r = cli::execute(theorem2_config());
    const double t = clock.seconds();
    const std::size_t steps = r.state ? r.state->step() : 0;
    std::string detail = std::to_string(steps) + "/20 steps";
    if (!r.error.empty()) detail += " (" + r.error + ")";
    bool ok = r.error.empty() && steps == 20 && t < 120.0;
    for (const char* name : {"order_isomorphism", "derivative_positive", "carrier_fidelity"}) {
        const Check* c = r.report.find(name);
        if (c) detail += std::string(", ") + name + " " + fmt("%.3g", c->measured);
        ok = ok && c && c->passed;
    }
    for (const birkhoff::Witness& w : r.witnesses) {
        detail += ", target " + std::to_string(w.target) + " error " + fmt("%.3g", w.error) + "/" + fmt("%.3g", w.tolerance);
        ok = ok && w.passed;
    }
    ok = ok && r.witnesses.size() == 3;
    return {ok, detail + ", " + fmt("%.2f s", t)};
}

std::string read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome determinism() {
    const fs::path root = fs::temp_directory_path() / "orderiso_acceptance";
    fs::remove_all(root);
    const std::pair<const char*, cli::RunConfig> runs[] = {
        {"identity", theorem1_config(densesets::EnumerationSpec::dyadic(), densesets::EnumerationSpec::dyadic(), 40)},
        {"shift", theorem1_config(densesets::EnumerationSpec::dyadic(), dyadic_plus(1.0), 40)},
        {"generic", generic_config()},
        {"theorem2", theorem2_config()},
    };
    std::size_t compared = 0, differing = 0;
    std::string which;
    for (const auto& [name, c] : runs) {
        std::ostringstream log;
        const fs::path a = root / (std::string(name) + "_a"), b = root / (std::string(name) + "_b");
        cli::cmd_run(c, a.string(), log);
        cli::cmd_run(c, b.string(), log);
        for (const std::string& file : {c.trace_out, c.samples_out}) {
            const bool in_a = fs::exists(a / file), in_b = fs::exists(b / file);
            if (!in_a && !in_b) continue;
            ++compared;
            if (in_a != in_b || read_bytes(a / file) != read_bytes(b / file)) {
                ++differing;
                which += std::string(" ") + name + "/" + file;
            }
        }
    }
    return {differing == 0 && compared > 0,
            std::to_string(compared) + " files compared, " + std::to_string(differing) + " differing" + which};
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"identity oracle", identity},
        {"shift oracle", shift},
        {"theorem 1 generic run", generic},
        {"approximation oracles", approx_oracles},
        {"patch chain", patch_chain},
        {"carrier artifact", carrier},
        {"damper artifact", damper},
        {"theorem 2 run", theorem2_run},
        {"determinism", determinism},
    };
    int failures = 0;
    int index = 0;
    for (const auto& [title, run] : criteria) {
        ++index;
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.passed;
        std::printf("%s criterion %d (%s): %s\n", o.passed ? "PASS" : "FAIL", index, title, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %d criteria pass\n", index - failures, index);
    return failures == 0 ? 0 : 1;
}
