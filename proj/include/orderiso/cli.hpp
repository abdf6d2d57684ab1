#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "orderiso/birkhoff.hpp"
#include "orderiso/franklin.hpp"

namespace orderiso::cli {

using json = nlohmann::json;

enum class Mode { theorem1, theorem2, verify_only };

std::string to_string(Mode m);

// exit statuses of every command
inline constexpr int exit_pass = 0;
inline constexpr int exit_verification = 1;
inline constexpr int exit_schema = 2;
inline constexpr int exit_construction = 3;

struct ChapletConfig {
    std::size_t K = 6;                    // used when radii is empty: the dyadic default layout
    std::vector<double> radii;            // r_1 < ... < r_{K+1}
    std::vector<std::array<double, 3>> discs;  // E_n^+ as (re, im, radius)
};

struct Theorem2Config {
    ChapletConfig chaplet;
    std::vector<std::vector<double>> cycle{{1.0}, {0.0, 1.0}, {-1.0, 0.0, 0.5}};
    double patch_base = 2.0;
    double patch_ratio = 0.3;
    std::size_t jmax = 0;  // 0 means N
    double real_eps = 0.49;
    double disc_scale = 0.99;
    franklin::OddFactor odd_factor = franklin::OddFactor::modulator;
    int chaplet_samples = 256;
};

struct RunConfig {
    Mode mode = Mode::theorem1;
    densesets::EnumerationSpec A;
    densesets::EnumerationSpec B;
    std::size_t N = 20;
    double budget_base = 0.25;
    double budget_ratio = 0.25;
    double window = 5.0;  // half-width of the real window
    int grid = 10000;
    int growth_samples = 1000;
    int export_samples = 1001;
    bool prefer_exact_hits = true;
    std::size_t find_cap = std::size_t{1} << 20;
    std::optional<Theorem2Config> theorem2;
    std::string trace_out = "trace.jsonl";
    std::string samples_out = "samples.csv";
    std::string report_out = "report.json";
    std::string trace_in;  // verify-only
    bool record_timing = false;  // wall-clock fields in the report; nondeterministic
};

// throws SchemaError on unknown keys, wrong types or violated invariants
RunConfig parse_config(const json& j, bool seedless = false);
RunConfig load_config(const std::string& path, bool seedless = false);
// canonical form; parse_config(config_json(c)) == c
json config_json(const RunConfig& c);
// FNV-1a 64 of the canonical config dump, 16 hex digits
std::string config_hash(const RunConfig& c);

franklin::EngineOptions engine_options(const RunConfig& c);
approx::SpecialChaplet make_chaplet(const Theorem2Config& t);
birkhoff::TargetCycle make_cycle(const Theorem2Config& t);

// lossless json for doubles, including the non-finite ones
json number(double v);
double to_double(const json& j);

json poly_json(const RealPoly& p);
RealPoly poly_from_json(const json& j);

json step_json(const franklin::StepTrace& t);
franklin::StepTrace step_from_json(const json& j);

struct Carriers {
    RealPoly phi;
    RealPoly H;
};

struct RunResult {
    std::optional<franklin::ConstructionState> state;
    std::optional<Carriers> carriers;
    std::optional<birkhoff::PhiArtifact> phi;
    std::optional<birkhoff::HArtifact> H;
    VerificationReport report;
    std::vector<birkhoff::Witness> witnesses;
    std::string error;  // construction failure, empty on success
    double runtime_ms = 0.0;

    int status() const;
};

// the construction and its verification, no file output
RunResult execute(const RunConfig& c);

std::vector<std::string> trace_lines(const RunConfig& c, const RunResult& r);
json report_json(const RunConfig& c, const RunResult& r);
// header "x,f,f_prime", m rows on the window, %.17g
std::string samples_csv(const EntireSeries& f, const Interval& window, int m);

struct ParsedTrace {
    RunConfig config;
    std::optional<Carriers> carriers;
    std::vector<franklin::StepTrace> steps;
    std::string status;  // "complete" or "construction-error"
    std::string error;
};

// throws SchemaError on malformed, truncated or hash-inconsistent traces
ParsedTrace read_trace(const std::string& path, bool seedless = false);
// the committed state recorded in a trace
franklin::ConstructionState assemble_state(const ParsedTrace& t);

int cmd_run(const RunConfig& c, const std::string& out_dir, std::ostream& log);
int cmd_verify(const std::string& trace_path, bool seedless, std::ostream& log);
void export_samples(const EntireSeries& f, const Interval& window, int m, const std::string& path);
int cmd_export_samples(const std::string& trace_path, std::optional<double> window, int m, const std::string& path,
                       std::ostream& log);

int main_entry(int argc, char** argv);

}  // namespace orderiso::cli
