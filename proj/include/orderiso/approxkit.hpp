#pragma once

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "orderiso/errors.hpp"
#include "orderiso/franklin.hpp"
#include "orderiso/numkernel.hpp"

namespace orderiso::approx {

using Piece = std::variant<Disk, Interval>;

struct CompactSpec {
    std::vector<Piece> pieces;
    bool symmetric = false;
};

// pieces pairwise without overlap (contact at boundary points allowed); a symmetric spec is closed under conjugation
void validate(const CompactSpec& q);

enum class ConstraintKind { value, derivative };

struct Constraint {
    cplx point;
    ConstraintKind kind;
    cplx target;
};

using ConstraintSet = std::vector<Constraint>;

struct Sample {
    cplx point;
    cplx value;
};

struct Fit {
    ComplexPoly poly;  // real coefficients when fitted symmetrically
    double residual;   // max |p - value| over the samples
};

// Ordinary least squares in the basis (z / s)^k, s = max |z| over the samples. With the
// symmetric flag the coefficients are solved as reals, which on conjugation-closed data is
// the symmetrized complex solution.
Fit mergelyan_fit(const std::vector<Sample>& samples, int degree, bool symmetric);

struct WalshResult {
    ComplexPoly poly;
    double correction_sup;  // max |correction| on |z| = reference radius
    double reference_radius;
    double residual;        // max constraint violation after correction
};

// p + c where c is the minimum-coefficient-norm polynomial of degree <= d in p's scaled basis
// with L_j(c) = target_j - L_j(p)
WalshResult walsh_correct(const ComplexPoly& p, const ConstraintSet& c, int degree);
// real points and targets keep the coefficients real
RealPoly walsh_correct_real(const RealPoly& p, const ConstraintSet& c, int degree, double* correction_sup = nullptr);

using ValueDerivFn = std::function<ValueDeriv(cplx)>;
using ValueFn = std::function<cplx(cplx)>;

inline const std::vector<int> default_degrees{8, 16, 32, 64, 128, 200};

struct KeOptions {
    int samples_per_piece = 256;
    int audit_factor = 4;  // residuals are also measured on layouts this many times denser
    std::vector<int> degrees = default_degrees;
};

struct KeResult {
    RealPoly poly;
    int degree = 0;
    double value_residual = 0.0;  // max |p - f| on Q samples, audit layout included
    double deriv_residual = 0.0;  // max |p' - f'| on K samples, audit layout included
    double pin_residual = 0.0;
    double eps = 0.0;
    bool ok = false;
};

// Real-coefficient p with |p - f| and |p' - f'| below eps on K and |p - f| below eps on E, for a
// conjugation-symmetric Q = K u E with K starlike about 0. One least-squares fit carries value rows
// on Q and derivative rows on K; p(0) = f(0) and the pins (real points in K) then hold exactly.
KeResult ke_approx(const ValueDerivFn& fK, const ValueFn& fE, const CompactSpec& K, const CompactSpec& E,
                   const ConstraintSet& pins, double eps, const KeOptions& opts = {});

struct RealSample {
    double x;
    double value;
    double deriv;
};

struct HoischenResult {
    RealPoly poly;
    int degree = 0;
    double value_residual_ratio = 0.0;  // max |g - f| / eps over samples
    double deriv_residual_ratio = 0.0;  // max |g' - f'| / eps over samples
    double pin_residual = 0.0;
};

// Values and derivatives of f fitted jointly on the window, each row weighted by 1 / eps_at(x),
// at escalating degree until both residuals fall below eps_at pointwise; values and derivatives
// are then pinned exactly at the given points.
HoischenResult hoischen_window(const std::function<RealSample(double)>& f, const Interval& window,
                               const std::function<double(double)>& eps_at, const std::vector<double>& pins,
                               int samples = 2049, const std::vector<int>& degrees = default_degrees);

struct SpecialChaplet {
    std::vector<double> radii;  // r_1 < ... < r_{K+1}
    std::vector<Disk> upper;    // E_n^+, n = 1..K

    std::size_t count() const { return upper.size(); }
    Disk lower(std::size_t n) const;  // E_n^-, 1-based
    Disk upper_disc(std::size_t n) const { return upper.at(n - 1); }
    double r(std::size_t n) const { return radii.at(n - 1); }
};

void validate(const SpecialChaplet& e);

// tolerance samples: on the real window layout and on each upper disc boundary layout
struct EpsilonSamples {
    std::vector<double> real_x;
    std::vector<double> real_eps;
    std::vector<std::vector<cplx>> disc_points;
    std::vector<std::vector<double>> disc_eps;
};

struct PatchLayout {
    int disc_samples = 256;
    int segment_samples = 256;
    int window_samples = 2049;
};

// tolerance samples laid out for a chaplet and window, every entry `value`
EpsilonSamples constant_epsilon(const SpecialChaplet& e, const Interval& window, const PatchLayout& layout,
                                double real_value, const std::function<double(std::size_t)>& disc_value);

// stage tolerances eps_1..eps_{K+1}
struct PatchSchedule {
    std::vector<double> eps;

    double at(std::size_t n) const { return eps.at(n - 1); }
};

// eps_1 = min(budget eps_1, 0.99 min over Q_1), eps_{n+1} = min(ratio eps_n, 0.99 min over Q_{n+1})
PatchSchedule make_schedule(const SpecialChaplet& e, const EpsilonSamples& eps, const franklin::BudgetSchedule& b);
void validate(const PatchSchedule& s);

struct StageReport {
    std::size_t n = 0;
    int degree = 0;
    double tolerance = 0.0;
    double value_residual = 0.0;
    double deriv_residual = 0.0;
    double pin_residual = 0.0;
    bool passed = false;
};

struct TelescopeReport {
    std::size_t m = 0;
    double measured = 0.0;  // max |p_K - p_m| on the inner disk samples
    double bound = 0.0;     // sum_{j=m}^{K-1} eps_{j+1}
    bool passed = false;
};

struct PatchResult {
    RealPoly phi;  // bounded-window Hoischen function p_0
    HoischenResult hoischen;
    std::vector<RealPoly> stages;  // p_1..p_K
    std::vector<StageReport> reports;
    std::vector<TelescopeReport> telescoping;
    PatchSchedule schedule;
    bool ok = false;
    std::string failure;

    const RealPoly& g() const { return stages.empty() ? phi : stages.back(); }
};

struct PatchInput {
    SpecialChaplet chaplet;
    std::vector<ValueFn> disc_targets;  // f on E_n^+; E_n^- carries conj f(conj z)
    std::function<RealSample(double)> real_target;
    Interval window;
    std::vector<double> pins;
    EpsilonSamples eps;
};

PatchResult re_patch(const PatchInput& in, const franklin::BudgetSchedule& budgets, const PatchLayout& layout = {},
                     const KeOptions& ke = {});

class StageFailure : public ConstructionError {
public:
    StageFailure(const std::string& what, PatchResult r) : ConstructionError(what), result(std::move(r)) {}
    PatchResult result;
};

}  // namespace orderiso::approx
