#pragma once

#include <functional>
#include <string>
#include <vector>

#include "orderiso/poly.hpp"

namespace orderiso {

struct Disk {
    cplx center;
    double radius;
};

struct Interval {
    double a;
    double b;
};

void validate(const Disk& d);
void validate(const Interval& iv);

// m equally spaced points on the boundary circle, starting at angle 0
std::vector<cplx> boundary_samples(const Disk& d, int m);
// m equally spaced points on [a, b], endpoints included
std::vector<double> grid_samples(const Interval& iv, int m);

// A complex number held as mantissa * exp(log_scale); keeps Gaussian factors
// representable far outside the range of binary64.
struct ScaledValueDeriv {
    cplx value;
    cplx deriv;
    double log_scale;

    ValueDeriv unscaled() const;
    double log_abs_value() const;
    double log_abs_deriv() const;
};

enum class Warp { identity, phi };

// e^{-w^2} prod_k (w - w(alpha_k)) with w = z or w = Phi(z).
class GaussTerm {
public:
    explicit GaussTerm(std::vector<double> roots);
    GaussTerm(std::vector<double> roots, const RealPoly& carrier);

    const std::vector<double>& roots() const { return roots_; }
    const std::vector<double>& root_images() const { return images_; }
    Warp warp() const { return warp_; }

private:
    std::vector<double> roots_;
    std::vector<double> images_;
    Warp warp_;
};

// image of a real point under the carrier, computed along the complex evaluation path
double carrier_image(const RealPoly& carrier, double x);

ScaledValueDeriv term_eval_scaled(const GaussTerm& t, cplx z, const RealPoly* carrier = nullptr);
// the term at a point whose warped argument w and dw/dz are already known
ScaledValueDeriv term_eval_scaled_at(const GaussTerm& t, cplx w, cplx w_prime);
ValueDeriv term_eval(const GaussTerm& t, cplx z, const RealPoly* carrier = nullptr);

enum class SupMethod { boundary_sample, window_plus_tail, radial_sample, window_sample };

std::string to_string(SupMethod m);

struct SupBound {
    double log_raw;  // log of the raw sampled maximum; -inf when every sample is 0
    SupMethod method;
    double safety;

    double raw() const;
    double value() const;
    double log_value() const;
};

inline constexpr double default_safety = 1.25;
inline constexpr int default_disk_samples = 4096;
inline constexpr int default_real_samples = 8192;
inline constexpr int default_growth_samples = 1024;

SupBound sup_on_disk(const std::function<cplx(cplx)>& f, const Disk& d, int m = default_disk_samples,
                     double safety = default_safety);
SupBound sup_on_disk_log(const std::function<double(cplx)>& log_abs_f, const Disk& d,
                         int m = default_disk_samples, double safety = default_safety);

// f = (polynomial of degree `degree`) * Gaussian on the real line
struct RealTail {
    double half_width;
    int degree;
    double max_root_abs;
};

double required_half_width(const RealTail& tail);

SupBound sup_on_real(const std::function<double(double)>& f, const RealTail& tail, int m = default_real_samples,
                     double safety = default_safety);
SupBound sup_on_real_log(const std::function<double(double)>& log_abs_f, const RealTail& tail,
                         int m = default_real_samples, double safety = default_safety);

// finite-window grid maximum with no tail argument (bounded-window claims)
SupBound sup_on_window_log(const std::function<double(double)>& log_abs_f, const Interval& window,
                           int m = default_real_samples, double safety = default_safety);
// maximum of precomputed log-magnitudes
SupBound sup_of_logs(const std::vector<double>& logs, SupMethod method, double safety = default_safety);

// sup over z of prod |z - alpha_k| * e^{-|z|}
SupBound growth_cap(const std::vector<double>& roots, int m = default_growth_samples,
                    double safety = default_safety);

}  // namespace orderiso
