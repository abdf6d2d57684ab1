#include "orderiso/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "orderiso/errors.hpp"

namespace orderiso::cli {

namespace {

namespace fs = std::filesystem;

// typed access to a json object that rejects keys nobody asked for
class Fields {
public:
    Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j.is_object()) fail("must be an object");
    }

    bool has(const std::string& k) {
        seen_.insert(k);
        return j_.contains(k);
    }

    const json& raw(const std::string& k) {
        if (!has(k)) fail("missing field '" + k + "'");
        return j_.at(k);
    }

    double real(const std::string& k, std::optional<double> fallback = std::nullopt) {
        if (!has(k)) return fallback ? *fallback : (fail("missing field '" + k + "'"), 0.0);
        const json& v = j_.at(k);
        if (!v.is_number()) fail("field '" + k + "' must be a number");
        return v.get<double>();
    }

    std::int64_t integer(const std::string& k, std::int64_t fallback) {
        if (!has(k)) return fallback;
        const json& v = j_.at(k);
        if (!v.is_number_integer()) fail("field '" + k + "' must be an integer");
        return v.get<std::int64_t>();
    }

    bool flag(const std::string& k, bool fallback) {
        if (!has(k)) return fallback;
        const json& v = j_.at(k);
        if (!v.is_boolean()) fail("field '" + k + "' must be a boolean");
        return v.get<bool>();
    }

    std::string text(const std::string& k, const std::string& fallback) {
        if (!has(k)) return fallback;
        const json& v = j_.at(k);
        if (!v.is_string()) fail("field '" + k + "' must be a string");
        return v.get<std::string>();
    }

    std::vector<double> reals(const json& v, const std::string& what) {
        if (!v.is_array()) fail(what + " must be an array of numbers");
        std::vector<double> out;
        for (const json& x : v) {
            if (!x.is_number()) fail(what + " must be an array of numbers");
            out.push_back(x.get<double>());
        }
        return out;
    }

    void done() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) fail("unknown field '" + it.key() + "'");
    }

    [[noreturn]] void fail(const std::string& msg) const { throw SchemaError(where_ + ": " + msg); }

private:
    const json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

std::size_t positive_count(Fields& f, const std::string& k, std::int64_t fallback) {
    const std::int64_t v = f.integer(k, fallback);
    if (v < 1) f.fail("field '" + k + "' must be positive");
    return static_cast<std::size_t>(v);
}

densesets::EnumerationSpec parse_set(const json& j, const std::string& where) {
    Fields f(j, where);
    const std::string kind = f.text("kind", "");
    densesets::EnumerationSpec out;
    try {
        switch (densesets::kind_from_string(kind)) {
            case densesets::Kind::signed_calkin_wilf: out = densesets::EnumerationSpec::signed_calkin_wilf(); break;
            case densesets::Kind::dyadic: out = densesets::EnumerationSpec::dyadic(); break;
            case densesets::Kind::affine:
                out = densesets::EnumerationSpec::affine(parse_set(f.raw("base"), where + ".base"), f.real("scale", 1.0),
                                                         f.real("shift", 0.0));
                break;
            case densesets::Kind::explicit_list:
                out = densesets::EnumerationSpec::explicit_list(f.reals(f.raw("values"), where + ".values"));
                break;
        }
    } catch (const std::invalid_argument& e) {
        f.fail(e.what());
    }
    f.done();
    return out;
}

json set_json(const densesets::EnumerationSpec& s) {
    json j{{"kind", densesets::to_string(s.kind)}};
    if (s.kind == densesets::Kind::affine) {
        j["base"] = set_json(*s.base);
        j["scale"] = s.scale;
        j["shift"] = s.shift;
    }
    if (s.kind == densesets::Kind::explicit_list) j["values"] = s.values;
    return j;
}

Mode mode_from_string(const std::string& s) {
    if (s == "theorem1") return Mode::theorem1;
    if (s == "theorem2") return Mode::theorem2;
    if (s == "verify-only") return Mode::verify_only;
    throw SchemaError("config: unknown mode '" + s + "'");
}

std::string to_string(franklin::OddFactor f) {
    return f == franklin::OddFactor::modulator ? "modulator" : "carrier-literal";
}

Theorem2Config parse_theorem2(const json& j, std::size_t N) {
    Fields f(j, "config.theorem2");
    Theorem2Config t;
    if (f.has("chaplet")) {
        Fields c(f.raw("chaplet"), "config.theorem2.chaplet");
        if (c.has("radii")) {
            t.chaplet.radii = c.reals(c.raw("radii"), "config.theorem2.chaplet.radii");
            const json& d = c.raw("discs");
            if (!d.is_array()) c.fail("discs must be an array");
            for (const json& x : d) {
                const std::vector<double> v = c.reals(x, "config.theorem2.chaplet.discs entry");
                if (v.size() != 3) c.fail("each disc is [re, im, radius]");
                t.chaplet.discs.push_back({v[0], v[1], v[2]});
            }
            t.chaplet.K = t.chaplet.discs.size();
        } else {
            t.chaplet.K = positive_count(c, "K", 6);
        }
        c.done();
    }
    if (f.has("cycle")) {
        const json& c = f.raw("cycle");
        if (!c.is_array()) f.fail("cycle must be an array of coefficient lists");
        t.cycle.clear();
        for (const json& p : c) t.cycle.push_back(f.reals(p, "config.theorem2.cycle entry"));
    }
    if (f.has("patch_budgets")) {
        Fields b(f.raw("patch_budgets"), "config.theorem2.patch_budgets");
        t.patch_base = b.real("base", t.patch_base);
        t.patch_ratio = b.real("ratio", t.patch_ratio);
        b.done();
    }
    t.jmax = positive_count(f, "jmax", static_cast<std::int64_t>(N));
    t.real_eps = f.real("real_eps", t.real_eps);
    t.disc_scale = f.real("disc_scale", t.disc_scale);
    const std::string odd = f.text("odd_factor", "modulator");
    if (odd == "carrier-literal")
        t.odd_factor = franklin::OddFactor::carrier_literal;
    else if (odd != "modulator")
        f.fail("odd_factor must be 'modulator' or 'carrier-literal'");
    t.chaplet_samples = static_cast<int>(positive_count(f, "chaplet_samples", t.chaplet_samples));
    f.done();

    if (!(t.real_eps > 0.0 && t.real_eps < 0.5)) f.fail("real_eps must lie in (0, 1/2)");
    if (!(t.disc_scale > 0.0 && t.disc_scale < 1.0)) f.fail("disc_scale must lie in (0, 1)");
    if (!(t.patch_ratio > 0.0 && t.patch_ratio < 1.0) || !(t.patch_base > 0.0))
        f.fail("patch budgets need base > 0 and ratio in (0, 1)");
    return t;
}

json theorem2_json(const Theorem2Config& t) {
    json chaplet;
    if (t.chaplet.radii.empty()) {
        chaplet = {{"K", t.chaplet.K}};
    } else {
        chaplet["radii"] = t.chaplet.radii;
        chaplet["discs"] = json::array();
        for (const auto& d : t.chaplet.discs) chaplet["discs"].push_back({d[0], d[1], d[2]});
    }
    return {{"chaplet", chaplet},
            {"cycle", t.cycle},
            {"patch_budgets", {{"base", t.patch_base}, {"ratio", t.patch_ratio}}},
            {"jmax", t.jmax},
            {"real_eps", t.real_eps},
            {"disc_scale", t.disc_scale},
            {"odd_factor", to_string(t.odd_factor)},
            {"chaplet_samples", t.chaplet_samples}};
}

Interval window_of(const RunConfig& c) { return {-c.window, c.window}; }

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + p.string());
}

SupMethod sup_method_from_string(const std::string& s) {
    for (SupMethod m : {SupMethod::boundary_sample, SupMethod::window_plus_tail, SupMethod::radial_sample,
                        SupMethod::window_sample})
        if (to_string(m) == s) return m;
    throw SchemaError("trace: unknown sup method '" + s + "'");
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

json check_json(const Check& c) {
    return {{"name", c.name},     {"measured", number(c.measured)}, {"limit", number(c.limit)},
            {"margin", number(c.margin)}, {"passed", c.passed},    {"detail", c.detail}};
}

void theorem1(const RunConfig& c, RunResult& r) {
    const franklin::EngineOptions opts = engine_options(c);
    r.state.emplace(densesets::Enumeration(c.A), densesets::Enumeration(c.B));
    try {
        franklin::advance(*r.state, c.N, franklin::theorem1_caps(opts), opts);
    } catch (const ConstructionError& e) {
        r.error = e.what();
    }
    if (r.state->step() == 0) return;
    franklin::VerifyOptions v;
    v.window = window_of(c);
    v.grid = c.grid;
    v.growth_samples = c.growth_samples;
    r.report.merge(franklin::verify(*r.state, opts, v));
}

void theorem2(const RunConfig& c, RunResult& r) {
    const Theorem2Config& t = *c.theorem2;
    const approx::SpecialChaplet e = make_chaplet(t);
    const birkhoff::TargetCycle cycle = make_cycle(t);
    const Interval w = window_of(c);
    const franklin::BudgetSchedule patch_budgets(t.patch_base, t.patch_ratio);
    birkhoff::PatchOptions po;
    po.strict = false;
    po.grid = c.grid;

    r.phi = birkhoff::build_phi(e, cycle, w, patch_budgets, po, t.real_eps, t.disc_scale);
    r.report.merge(r.phi->report(), "phi.");
    if (!r.phi->ok) {
        r.error = "carrier construction failed: " + r.phi->failure;
        return;
    }
    r.H = birkhoff::build_H(e, birkhoff::design_epsilon_H(e, r.phi->poly, t.jmax, w), w, patch_budgets, po);
    r.report.merge(r.H->report(), "h.");
    if (!r.H->ok) {
        r.error = "damper construction failed: " + r.H->failure;
        return;
    }
    r.carriers = Carriers{r.phi->poly, r.H->poly};

    birkhoff::Theorem2Options o;
    o.engine = engine_options(c);
    o.window = w;
    o.chaplet_samples = t.chaplet_samples;
    r.state.emplace(densesets::Enumeration(c.A), densesets::Enumeration(c.B), EntireSeries(r.phi->poly, r.H->poly));
    try {
        franklin::advance(*r.state, c.N, birkhoff::theorem2_caps(r.phi->poly, r.H->poly, e, o), o.engine);
    } catch (const ConstructionError& err) {
        r.error = err.what();
    }
    if (r.state->step() == 0) return;
    r.report.merge(birkhoff::verify_theorem2(*r.state, e, w, c.grid));

    const std::vector<double> dev = birkhoff::carrier_deviation(*r.state, e);
    const EntireSeries& f = r.state->series;
    for (std::size_t k = 0; k < cycle.targets.size(); ++k) {
        const birkhoff::Witness wit = birkhoff::universality_witness(
            [&f](cplx z) { return f.eval(z).value; }, e, cycle, k,
            [&dev](std::size_t n) { return 1.0 / static_cast<double>(n) + dev[n - 1]; });
        r.witnesses.push_back(wit);
        r.report.add({"witness_" + std::to_string(k), wit.error, wit.tolerance, wit.tolerance - wit.error, wit.passed,
                      "disc " + std::to_string(wit.disc) + ": sup |f(z + a_n) - p(z)| against 1/n + carrier deviation"});
    }
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot read " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

}  // namespace

std::string to_string(Mode m) {
    switch (m) {
        case Mode::theorem1: return "theorem1";
        case Mode::theorem2: return "theorem2";
        case Mode::verify_only: return "verify-only";
    }
    return "unknown";
}

RunConfig parse_config(const json& j, bool seedless) {
    Fields f(j, "config");
    RunConfig c;
    c.mode = mode_from_string(f.text("mode", "theorem1"));
    if (c.mode == Mode::verify_only) {
        c.trace_in = f.text("trace", "");
        if (c.trace_in.empty()) f.fail("verify-only mode needs a 'trace' path");
    } else {
        c.A = parse_set(f.raw("A"), "config.A");
        c.B = parse_set(f.raw("B"), "config.B");
    }
    c.N = positive_count(f, "N", static_cast<std::int64_t>(c.N));
    if (f.has("budgets")) {
        Fields b(f.raw("budgets"), "config.budgets");
        c.budget_base = b.real("base", c.budget_base);
        c.budget_ratio = b.real("ratio", c.budget_ratio);
        b.done();
    }
    c.window = f.real("window", c.window);
    c.grid = static_cast<int>(positive_count(f, "grid", c.grid));
    c.growth_samples = static_cast<int>(positive_count(f, "growth_samples", c.growth_samples));
    c.export_samples = static_cast<int>(positive_count(f, "export_samples", c.export_samples));
    c.prefer_exact_hits = f.flag("prefer_exact_hits", c.prefer_exact_hits);
    c.find_cap = positive_count(f, "find_cap", static_cast<std::int64_t>(c.find_cap));
    if (f.has("theorem2")) c.theorem2 = parse_theorem2(f.raw("theorem2"), c.N);
    if (f.has("outputs")) {
        Fields o(f.raw("outputs"), "config.outputs");
        c.trace_out = o.text("trace", c.trace_out);
        c.samples_out = o.text("samples", c.samples_out);
        c.report_out = o.text("report", c.report_out);
        o.done();
        for (const std::string* p : {&c.trace_out, &c.samples_out, &c.report_out})
            if (p->empty() || fs::path(*p).has_parent_path()) f.fail("output names must be plain file names");
    }
    c.record_timing = f.flag("record_timing", false);
    f.done();

    if (seedless && c.record_timing) f.fail("record_timing is nondeterministic and rejected under --seedless");
    if (!(c.window > 0.0) || !std::isfinite(c.window)) f.fail("window must be a positive half-width");
    if (c.grid < 2) f.fail("grid needs at least two points");
    try {
        franklin::BudgetSchedule(c.budget_base, c.budget_ratio);
    } catch (const std::invalid_argument& e) {
        f.fail(std::string("budgets: ") + e.what());
    }
    if (c.mode == Mode::theorem2) {
        if (!c.theorem2) f.fail("theorem2 mode needs a 'theorem2' section with chaplet and cycle");
        try {
            const approx::SpecialChaplet e = make_chaplet(*c.theorem2);
            const birkhoff::TargetCycle cycle = make_cycle(*c.theorem2);
            birkhoff::validate(cycle, e.count());
            if (e.count() < cycle.targets.size()) f.fail("every target needs a disc");
            if (c.window < e.r(e.count() + 1)) f.fail("window must cover [-r_{K+1}, r_{K+1}]");
        } catch (const std::invalid_argument& e) {
            f.fail(e.what());
        }
    } else if (c.theorem2) {
        f.fail("a 'theorem2' section needs theorem2 mode");
    }
    return c;
}

RunConfig load_config(const std::string& path, bool seedless) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot read config " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw SchemaError("config " + path + " is not valid JSON: " + e.what());
    }
    return parse_config(j, seedless);
}

json config_json(const RunConfig& c) {
    json j{{"mode", to_string(c.mode)},
           {"N", c.N},
           {"budgets", {{"base", c.budget_base}, {"ratio", c.budget_ratio}}},
           {"window", c.window},
           {"grid", c.grid},
           {"growth_samples", c.growth_samples},
           {"export_samples", c.export_samples},
           {"prefer_exact_hits", c.prefer_exact_hits},
           {"find_cap", c.find_cap},
           {"outputs", {{"trace", c.trace_out}, {"samples", c.samples_out}, {"report", c.report_out}}},
           {"record_timing", c.record_timing}};
    if (c.mode == Mode::verify_only) {
        j["trace"] = c.trace_in;
    } else {
        j["A"] = set_json(c.A);
        j["B"] = set_json(c.B);
    }
    if (c.theorem2) j["theorem2"] = theorem2_json(*c.theorem2);
    return j;
}

std::string config_hash(const RunConfig& c) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : config_json(c).dump()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return hex64(h);
}

franklin::EngineOptions engine_options(const RunConfig& c) {
    franklin::EngineOptions o;
    o.budgets = franklin::BudgetSchedule(c.budget_base, c.budget_ratio);
    o.prefer_exact_hits = c.prefer_exact_hits;
    o.find_cap = c.find_cap;
    if (c.theorem2) o.odd_factor = c.theorem2->odd_factor;
    return o;
}

approx::SpecialChaplet make_chaplet(const Theorem2Config& t) {
    if (t.chaplet.radii.empty()) return birkhoff::default_chaplet(t.chaplet.K);
    approx::SpecialChaplet e;
    e.radii = t.chaplet.radii;
    for (const auto& d : t.chaplet.discs) e.upper.push_back({cplx(d[0], d[1]), d[2]});
    approx::validate(e);
    return e;
}

birkhoff::TargetCycle make_cycle(const Theorem2Config& t) {
    birkhoff::TargetCycle c;
    for (const auto& p : t.cycle) c.targets.emplace_back(p);
    return c;
}

json number(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

double to_double(const json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    throw SchemaError("expected a number, got " + j.dump());
}

json poly_json(const RealPoly& p) {
    json j{{"coeffs", p.coeffs()}, {"scale", p.scale()}};
    if (p.basis()) j["recurrence"] = p.basis()->h;
    return j;
}

RealPoly poly_from_json(const json& j) {
    try {
        const auto coeffs = j.at("coeffs").get<std::vector<double>>();
        const double scale = j.at("scale").get<double>();
        if (!j.contains("recurrence")) return RealPoly(coeffs, scale);
        auto b = std::make_shared<RecurrenceBasis>();
        b->scale = scale;
        b->h = j.at("recurrence").get<std::vector<std::vector<double>>>();
        return RealPoly(coeffs, BasisPtr(std::move(b)));
    } catch (const json::exception& e) {
        throw SchemaError(std::string("malformed polynomial record: ") + e.what());
    }
}

json step_json(const franklin::StepTrace& t) {
    json caps = json::array();
    for (const franklin::CapRecord& c : t.caps)
        caps.push_back({{"name", c.name},
                        {"log_raw", number(c.sup.log_raw)},
                        {"method", to_string(c.sup.method)},
                        {"safety", number(c.sup.safety)},
                        {"log_budget", number(c.log_budget)}});
    json j{{"record", "step"},
           {"step", t.step},
           {"kind", franklin::to_string(t.kind)},
           {"alpha_index", t.alpha_index},
           {"beta_index", t.beta_index},
           {"alpha", number(t.alpha)},
           {"beta", number(t.beta)},
           {"lambda", number(t.lambda)},
           {"log_eta", t.log_eta ? number(*t.log_eta) : json(nullptr)},
           {"caps", caps},
           {"preimage", t.preimage ? number(*t.preimage) : json(nullptr)},
           {"residual", number(t.residual)},
           {"commit_residual", number(t.commit_residual)},
           {"exact_hit", t.exact_hit},
           {"halvings", t.halvings}};
    return j;
}

franklin::StepTrace step_from_json(const json& j) {
    try {
        franklin::StepTrace t;
        t.step = j.at("step").get<std::size_t>();
        const std::string kind = j.at("kind").get<std::string>();
        if (kind != "even" && kind != "odd") throw SchemaError("trace: unknown step kind '" + kind + "'");
        t.kind = kind == "even" ? franklin::StepKind::even : franklin::StepKind::odd;
        t.alpha_index = j.at("alpha_index").get<std::size_t>();
        t.beta_index = j.at("beta_index").get<std::size_t>();
        t.alpha = to_double(j.at("alpha"));
        t.beta = to_double(j.at("beta"));
        t.lambda = to_double(j.at("lambda"));
        if (!j.at("log_eta").is_null()) t.log_eta = to_double(j.at("log_eta"));
        for (const json& c : j.at("caps"))
            t.caps.push_back({c.at("name").get<std::string>(),
                              SupBound{to_double(c.at("log_raw")), sup_method_from_string(c.at("method").get<std::string>()),
                                       to_double(c.at("safety"))},
                              to_double(c.at("log_budget"))});
        if (!j.at("preimage").is_null()) t.preimage = to_double(j.at("preimage"));
        t.residual = to_double(j.at("residual"));
        t.commit_residual = to_double(j.at("commit_residual"));
        t.exact_hit = j.at("exact_hit").get<bool>();
        t.halvings = j.at("halvings").get<int>();
        return t;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("malformed step record: ") + e.what());
    }
}

int RunResult::status() const {
    if (!error.empty()) return exit_construction;
    return report.passed() ? exit_pass : exit_verification;
}

RunResult execute(const RunConfig& c) {
    if (c.mode == Mode::verify_only) throw std::invalid_argument("verify-only configs replay a trace");
    const auto t0 = std::chrono::steady_clock::now();
    RunResult r;
    if (c.mode == Mode::theorem1)
        theorem1(c, r);
    else
        theorem2(c, r);
    r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

std::vector<std::string> trace_lines(const RunConfig& c, const RunResult& r) {
    std::vector<std::string> out;
    out.push_back(json{{"record", "header"},
                       {"format", "orderiso-trace"},
                       {"version", 1},
                       {"config_hash", config_hash(c)},
                       {"config", config_json(c)}}
                      .dump());
    if (r.carriers) out.push_back(json{{"record", "carriers"}, {"phi", poly_json(r.carriers->phi)}, {"H", poly_json(r.carriers->H)}}.dump());
    if (r.state)
        for (const franklin::StepTrace& t : r.state->trace) out.push_back(step_json(t).dump());
    json end{{"record", "end"},
             {"steps", r.state ? r.state->step() : 0},
             {"status", r.error.empty() ? "complete" : "construction-error"}};
    if (!r.error.empty()) end["error"] = r.error;
    out.push_back(end.dump());
    return out;
}

json report_json(const RunConfig& c, const RunResult& r) {
    json checks = json::array();
    for (const Check& k : r.report.checks()) checks.push_back(check_json(k));
    const int status = r.status();
    json j{{"config_hash", config_hash(c)},
           {"mode", to_string(c.mode)},
           {"steps", r.state ? r.state->step() : 0},
           {"status", status == exit_pass ? "pass" : status == exit_verification ? "fail" : "construction-error"},
           {"checks", checks}};
    if (!r.error.empty()) j["error"] = r.error;
    if (!r.witnesses.empty()) {
        json w = json::array();
        for (const birkhoff::Witness& x : r.witnesses)
            w.push_back({{"target", x.target},
                         {"disc", x.disc},
                         {"error", number(x.error)},
                         {"tolerance", number(x.tolerance)},
                         {"passed", x.passed},
                         {"note", "finite witness over the chaplet discs, not a universality proof"}});
        j["witnesses"] = w;
    }
    if (r.phi) j["phi"] = {{"degree", r.phi->poly.degree()}, {"derivative_floor", number(r.phi->derivative_floor)}};
    if (r.H) j["H"] = {{"degree", r.H->poly.degree()}, {"min", number(r.H->min_value)}, {"max", number(r.H->max_value)}};
    if (c.record_timing) j["runtime_ms"] = r.runtime_ms;
    return j;
}

std::string samples_csv(const EntireSeries& f, const Interval& window, int m) {
    if (m < 1) throw std::invalid_argument("sample count must be positive");
    std::string out = "x,f,f_prime\n";
    const std::vector<double> xs = m == 1 ? std::vector<double>{0.5 * (window.a + window.b)} : grid_samples(window, m);
    char buf[96];
    for (double x : xs) {
        const ValueDeriv v = f.eval(x);
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", x, v.value.real(), v.deriv.real());
        out += buf;
    }
    return out;
}

ParsedTrace read_trace(const std::string& path, bool seedless) {
    const std::vector<std::string> lines = read_lines(path);
    if (lines.empty()) throw SchemaError("trace " + path + " is empty");
    std::vector<json> records;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        try {
            records.push_back(json::parse(lines[i]));
        } catch (const json::parse_error&) {
            throw SchemaError("trace line " + std::to_string(i + 1) + " is not valid JSON");
        }
        if (!records.back().is_object() || !records.back().contains("record"))
            throw SchemaError("trace line " + std::to_string(i + 1) + " has no record type");
    }

    const json& head = records.front();
    if (head.value("record", "") != "header" || head.value("format", "") != "orderiso-trace" || head.value("version", 0) != 1)
        throw SchemaError("trace does not start with an orderiso-trace header");
    ParsedTrace t;
    t.config = parse_config(head.at("config"), seedless);
    if (head.value("config_hash", "") != config_hash(t.config)) throw SchemaError("trace header hash does not match its config");

    std::size_t i = 1;
    if (i < records.size() && records[i].at("record") == "carriers") {
        t.carriers = Carriers{poly_from_json(records[i].at("phi")), poly_from_json(records[i].at("H"))};
        ++i;
    }
    for (; i < records.size() && records[i].at("record") == "step"; ++i) {
        t.steps.push_back(step_from_json(records[i]));
        if (t.steps.back().step != t.steps.size()) throw SchemaError("trace steps out of order");
    }
    if (i + 1 != records.size() || records[i].at("record") != "end") throw SchemaError("trace is truncated or has trailing records");
    const json& end = records[i];
    t.status = end.value("status", "");
    t.error = end.value("error", "");
    if (end.value("steps", std::size_t{0}) != t.steps.size()) throw SchemaError("trace end record disagrees with its step count");
    if (t.status != "complete" && t.status != "construction-error") throw SchemaError("trace end record has an unknown status");
    if (t.config.mode == Mode::theorem2 && t.status == "complete" && !t.carriers)
        throw SchemaError("theorem2 trace lacks its carrier record");
    return t;
}

franklin::ConstructionState assemble_state(const ParsedTrace& t) {
    EntireSeries series = t.carriers ? EntireSeries(t.carriers->phi, t.carriers->H) : EntireSeries{};
    franklin::ConstructionState s{densesets::Enumeration(t.config.A), densesets::Enumeration(t.config.B), std::move(series)};
    for (const franklin::StepTrace& st : t.steps) {
        s.series.push(st.lambda, st.alpha);
        s.A.mark_used(st.alpha_index);
        s.B.mark_used(st.beta_index);
        s.alpha_indices.push_back(st.alpha_index);
        s.beta_indices.push_back(st.beta_index);
        s.betas.push_back(st.beta);
        s.trace.push_back(st);
    }
    return s;
}

int cmd_run(const RunConfig& c, const std::string& out_dir, std::ostream& log) {
    if (c.mode == Mode::verify_only) return cmd_verify(c.trace_in, false, log);
    const fs::path dir(out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + out_dir);

    const RunResult r = execute(c);
    std::string trace;
    for (const std::string& line : trace_lines(c, r)) trace += line + "\n";
    write_file(dir / c.trace_out, trace);
    if (r.state && r.state->step() > 0)
        write_file(dir / c.samples_out, samples_csv(r.state->series, window_of(c), c.export_samples));
    write_file(dir / c.report_out, report_json(c, r).dump(2) + "\n");

    for (const Check& k : r.report.checks())
        if (!k.passed) log << "FAIL " << k.name << ": measured " << k.measured << ", limit " << k.limit << "\n";
    if (!r.error.empty()) log << "construction error: " << r.error << "\n";
    log << to_string(c.mode) << ": " << (r.state ? r.state->step() : 0) << " steps, status " << r.status() << "\n";
    return r.status();
}

int cmd_verify(const std::string& trace_path, bool seedless, std::ostream& log) {
    const ParsedTrace t = read_trace(trace_path, seedless);
    const RunConfig& c = t.config;
    VerificationReport report;
    if (!t.steps.empty()) {
        const franklin::ConstructionState s = assemble_state(t);
        if (c.mode == Mode::theorem1) {
            franklin::VerifyOptions v;
            v.window = window_of(c);
            v.grid = c.grid;
            v.growth_samples = c.growth_samples;
            report.merge(franklin::verify(s, engine_options(c), v));
        } else {
            report.merge(birkhoff::verify_theorem2(s, make_chaplet(*c.theorem2), window_of(c), c.grid));
        }
    }

    // a fresh rebuild must reproduce the trace line for line
    std::vector<std::string> recorded = read_lines(trace_path);
    const std::vector<std::string> rebuilt = trace_lines(c, execute(c));
    std::size_t mismatch = 0;
    for (std::size_t i = 0; i < std::max(recorded.size(), rebuilt.size()); ++i)
        if (i >= recorded.size() || i >= rebuilt.size() || recorded[i] != rebuilt[i]) ++mismatch;
    report.add_upper("trace_reproduced", static_cast<double>(mismatch), 0.0, "trace lines differing from a fresh rebuild");

    for (const Check& k : report.checks())
        if (!k.passed) log << "FAIL " << k.name << ": measured " << k.measured << ", limit " << k.limit << "\n";
    if (!report.passed()) return exit_verification;
    if (t.status != "complete") {
        log << "trace records a construction error: " << t.error << "\n";
        return exit_construction;
    }
    log << "verified " << t.steps.size() << " steps\n";
    return exit_pass;
}

void export_samples(const EntireSeries& f, const Interval& window, int m, const std::string& path) {
    write_file(path, samples_csv(f, window, m));
}

int cmd_export_samples(const std::string& trace_path, std::optional<double> window, int m, const std::string& path,
                       std::ostream& log) {
    const ParsedTrace t = read_trace(trace_path);
    if (t.steps.empty()) throw SchemaError("trace has no committed steps to sample");
    const double w = window.value_or(t.config.window);
    if (!(w > 0.0)) throw SchemaError("window must be a positive half-width");
    export_samples(assemble_state(t).series, {-w, w}, m, path);
    log << "wrote " << m << " samples to " << path << "\n";
    return exit_pass;
}

int main_entry(int argc, char** argv) {
    CLI::App app{"order isomorphisms by entire functions"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".", trace_name, trace_path, export_path;
    bool seedless = false;
    int count = 1001;
    std::optional<double> window;

    CLI::App* run = app.add_subcommand("run", "run a construction from a config");
    run->add_option("--config", config_path, "config JSON")->required();
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--trace", trace_name, "trace file name inside the output directory");
    run->add_flag("--seedless", seedless, "reject nondeterministic options");

    CLI::App* verify = app.add_subcommand("verify", "replay and check a trace");
    verify->add_option("--trace", trace_path, "trace file")->required();
    verify->add_flag("--seedless", seedless, "reject nondeterministic options");

    CLI::App* exp = app.add_subcommand("export-samples", "write x,f,f_prime rows from a trace");
    exp->add_option("--trace", trace_path, "trace file")->required();
    exp->add_option("--out", export_path, "CSV file")->required();
    exp->add_option("--count", count, "row count")->check(CLI::PositiveNumber);
    exp->add_option("--window", window, "half-width of the window");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_pass : exit_schema;
    }

    try {
        if (*run) {
            RunConfig c = load_config(config_path, seedless);
            if (!trace_name.empty()) {
                if (fs::path(trace_name).has_parent_path()) throw SchemaError("--trace takes a plain file name");
                c.trace_out = trace_name;
            }
            return cmd_run(c, out_dir, std::cout);
        }
        if (*verify) return cmd_verify(trace_path, seedless, std::cout);
        return cmd_export_samples(trace_path, window, count, export_path, std::cout);
    } catch (const SchemaError& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return exit_schema;
    } catch (const ConstructionError& e) {
        std::cerr << "construction error: " << e.what() << "\n";
        return exit_construction;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_schema;
    }
}

}  // namespace orderiso::cli
