#include "orderiso/approxkit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace orderiso::approx {

namespace {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

constexpr double constraint_tol = 1e-10;

// Minimal-norm least squares. Equilibration rescales columns to unit norm first, so the
// minimized norm is then that of the rescaled unknowns.
template <class Mat, class Vec>
Vec solve_ls(const Mat& A, const Vec& b, bool equilibrate) {
    VectorXd norms = VectorXd::Ones(A.cols());
    if (equilibrate) {
        norms = A.colwise().norm();
        for (Eigen::Index k = 0; k < norms.size(); ++k)
            if (norms[k] == 0.0) norms[k] = 1.0;
    }
    const Mat As = A * norms.cwiseInverse().asDiagonal();
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(As);
    Vec y = cod.solve(b);
    // one step of iterative refinement
    const Vec r = b - As * y;
    y += cod.solve(r);
    for (Eigen::Index k = 0; k < y.size(); ++k) y[k] /= norms[k];
    return y;
}

double piece_extent(const Piece& p) {
    if (const Disk* d = std::get_if<Disk>(&p)) return std::abs(d->center) + d->radius;
    const Interval& iv = std::get<Interval>(p);
    return std::max(std::abs(iv.a), std::abs(iv.b));
}

double dist_point_interval(cplx z, const Interval& iv) {
    const double x = std::clamp(z.real(), iv.a, iv.b);
    return std::abs(z - cplx(x, 0.0));
}

// strict: no common point; otherwise contact at boundary points is allowed
bool disjoint(const Piece& p, const Piece& q, bool strict) {
    auto sep = [strict](double gap, double reach) { return strict ? gap > reach : gap >= reach; };
    const Disk* dp = std::get_if<Disk>(&p);
    const Disk* dq = std::get_if<Disk>(&q);
    if (dp && dq) return sep(std::abs(dp->center - dq->center), dp->radius + dq->radius);
    if (dp) return sep(dist_point_interval(dp->center, std::get<Interval>(q)), dp->radius);
    if (dq) return sep(dist_point_interval(dq->center, std::get<Interval>(p)), dq->radius);
    const Interval& a = std::get<Interval>(p);
    const Interval& b = std::get<Interval>(q);
    return sep(b.a, a.b) || sep(a.a, b.b);
}

bool mirrored(const Piece& p, const Piece& q) {
    const Disk* dp = std::get_if<Disk>(&p);
    const Disk* dq = std::get_if<Disk>(&q);
    if (dp && dq) return dp->center == std::conj(dq->center) && dp->radius == dq->radius;
    if (!dp && !dq) {
        const Interval& a = std::get<Interval>(p);
        const Interval& b = std::get<Interval>(q);
        return a.a == b.a && a.b == b.b;
    }
    return false;
}

// sample points of a piece; disks are sampled on their boundary
std::vector<cplx> piece_samples(const Piece& p, int m) {
    if (const Disk* d = std::get_if<Disk>(&p)) return boundary_samples(*d, m);
    std::vector<cplx> out;
    for (double x : grid_samples(std::get<Interval>(p), m)) out.emplace_back(x, 0.0);
    return out;
}

// points needed to fit a real-coefficient polynomial: the closed upper half of each layout
std::vector<cplx> upper_half(const std::vector<cplx>& pts) {
    std::vector<cplx> out;
    for (cplx z : pts)
        if (z.imag() >= 0.0) out.push_back(z);
    return out;
}

bool in_piece(cplx z, const Piece& p, double slack) {
    if (const Disk* d = std::get_if<Disk>(&p)) return std::abs(z - d->center) <= d->radius * (1.0 + slack);
    const Interval& iv = std::get<Interval>(p);
    const double w = (iv.b - iv.a) * slack;
    return z.imag() == 0.0 && z.real() >= iv.a - w && z.real() <= iv.b + w;
}

double spec_extent(const CompactSpec& q) {
    double s = 0.0;
    for (const Piece& p : q.pieces) s = std::max(s, piece_extent(p));
    return s;
}

void check_constraints(const ConstraintSet& c) {
    for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t j = i + 1; j < c.size(); ++j)
            if (c[i].kind == c[j].kind && c[i].point == c[j].point)
                throw std::invalid_argument("singular constraint system: coincident constraint points");
}

cplx apply(const ComplexPoly& p, const Constraint& c) {
    const ValueDeriv vd = poly_eval_deriv(p, c.point);
    return c.kind == ConstraintKind::value ? vd.value : vd.deriv;
}

cplx apply(const RealPoly& p, const Constraint& c) {
    const ValueDeriv vd = poly_eval_deriv(p, c.point);
    return c.kind == ConstraintKind::value ? vd.value : vd.deriv;
}

// row of L_j applied to basis functions 0..d
template <class Row>
void constraint_row(const Constraint& c, const RecurrenceBasis* b, double s, int d, Row&& row) {
    std::vector<cplx> val, der;
    basis_eval(b, s, c.point, d, val, der);
    const std::vector<cplx>& use = c.kind == ConstraintKind::value ? val : der;
    for (int k = 0; k <= d; ++k) row(k, use[k]);
}

template <class T>
Poly<T> same_basis(std::vector<T> coeffs, const Poly<T>& like) {
    if (like.basis()) return Poly<T>(std::move(coeffs), like.basis());
    return Poly<T>(std::move(coeffs), like.scale());
}

// Arnoldi orthogonalization of the powers of u = z / scale on a conjugation-closed point set.
// The recurrence coefficients are real up to rounding there; only their real parts are kept.
BasisPtr arnoldi_basis(const std::vector<cplx>& pts, double scale, int degree) {
    const Eigen::Index n = static_cast<Eigen::Index>(pts.size());
    if (n <= degree) throw std::invalid_argument("rank deficient fit: fewer points than basis functions");
    auto basis = std::make_shared<RecurrenceBasis>();
    basis->scale = scale;
    VectorXcd u(n);
    for (Eigen::Index i = 0; i < n; ++i) u[i] = pts[i] / scale;
    std::vector<VectorXcd> q{VectorXcd::Ones(n)};
    const double root_n = std::sqrt(static_cast<double>(n));
    for (int k = 0; k < degree; ++k) {
        VectorXcd v = u.cwiseProduct(q[k]);
        std::vector<double> col(static_cast<std::size_t>(k) + 2, 0.0);
        for (int pass = 0; pass < 2; ++pass)
            for (int j = 0; j <= k; ++j) {
                const double c = q[j].dot(v).real() / static_cast<double>(n);
                col[j] += c;
                v -= c * q[j];
            }
        col[k + 1] = v.norm() / root_n;
        if (!(col[k + 1] > 0.0)) throw std::invalid_argument("rank deficient fit: basis degenerates on the samples");
        q.push_back(v / col[k + 1]);
        basis->h.push_back(std::move(col));
    }
    return basis;
}

double constraint_violation(const ComplexPoly& p, const ConstraintSet& c) {
    double worst = 0.0;
    for (const Constraint& k : c)
        worst = std::max(worst, std::abs(apply(p, k) - k.target) / std::max(1.0, std::abs(k.target)));
    return worst;
}

double constraint_violation(const RealPoly& p, const ConstraintSet& c) {
    double worst = 0.0;
    for (const Constraint& k : c)
        worst = std::max(worst, std::abs(apply(p, k) - k.target) / std::max(1.0, std::abs(k.target)));
    return worst;
}

ComplexPoly to_complex(const RealPoly& p) {
    return ComplexPoly(std::vector<cplx>(p.coeffs().begin(), p.coeffs().end()), p.scale());
}

double linear_interp(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    if (xs.empty()) throw std::invalid_argument("empty tolerance samples");
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - xs.begin());
    const double t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    return ys[i - 1] + t * (ys[i] - ys[i - 1]);
}

}  // namespace

void validate(const CompactSpec& q) {
    for (const Piece& p : q.pieces) {
        if (const Disk* d = std::get_if<Disk>(&p))
            orderiso::validate(*d);
        else
            orderiso::validate(std::get<Interval>(p));
    }
    for (std::size_t i = 0; i < q.pieces.size(); ++i)
        for (std::size_t j = i + 1; j < q.pieces.size(); ++j)
            if (!disjoint(q.pieces[i], q.pieces[j], false)) throw std::invalid_argument("compact pieces overlap");
    if (!q.symmetric) return;
    for (const Piece& p : q.pieces) {
        Piece mirror = p;
        if (Disk* d = std::get_if<Disk>(&mirror)) d->center = std::conj(d->center);
        const bool found = std::any_of(q.pieces.begin(), q.pieces.end(), [&](const Piece& r) { return mirrored(mirror, r); });
        if (!found) throw std::invalid_argument("symmetric compact is not closed under conjugation");
    }
}

Fit mergelyan_fit(const std::vector<Sample>& samples, int degree, bool symmetric) {
    if (degree < 0) throw std::invalid_argument("negative degree");
    std::vector<cplx> distinct;
    for (const Sample& s : samples)
        if (std::find(distinct.begin(), distinct.end(), s.point) == distinct.end()) distinct.push_back(s.point);
    if (static_cast<int>(distinct.size()) < degree + 1)
        throw std::invalid_argument("rank deficient fit: fewer distinct points than coefficients");
    double scale = 0.0;
    for (const Sample& s : samples) scale = std::max(scale, std::abs(s.point));
    if (scale == 0.0) scale = 1.0;

    const Eigen::Index n = static_cast<Eigen::Index>(samples.size());
    ComplexPoly poly;
    if (symmetric) {
        MatrixXd A(2 * n, degree + 1);
        VectorXd b(2 * n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const cplx u = samples[i].point / scale;
            cplx pw = 1.0;
            for (int k = 0; k <= degree; ++k, pw *= u) {
                A(2 * i, k) = pw.real();
                A(2 * i + 1, k) = pw.imag();
            }
            b[2 * i] = samples[i].value.real();
            b[2 * i + 1] = samples[i].value.imag();
        }
        const VectorXd c = solve_ls(A, b, true);
        std::vector<cplx> coeffs(c.data(), c.data() + c.size());
        poly = to_complex(poly_symmetrize(ComplexPoly(std::move(coeffs), scale)));
    } else {
        MatrixXcd A(n, degree + 1);
        VectorXcd b(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const cplx u = samples[i].point / scale;
            cplx pw = 1.0;
            for (int k = 0; k <= degree; ++k, pw *= u) A(i, k) = pw;
            b[i] = samples[i].value;
        }
        const VectorXcd c = solve_ls(A, b, true);
        poly = ComplexPoly(std::vector<cplx>(c.data(), c.data() + c.size()), scale);
    }
    double residual = 0.0;
    for (const Sample& s : samples) residual = std::max(residual, std::abs(poly_eval(poly, s.point) - s.value));
    return {std::move(poly), residual};
}

WalshResult walsh_correct(const ComplexPoly& p, const ConstraintSet& c, int degree) {
    check_constraints(c);
    if (degree < 0 || static_cast<int>(c.size()) > degree + 1)
        throw std::invalid_argument("correction degree too small for the constraint count");
    const double s = p.scale();
    WalshResult out{p, 0.0, s, 0.0};
    if (c.empty()) return out;
    const Eigen::Index m = static_cast<Eigen::Index>(c.size());
    MatrixXcd A(m, degree + 1);
    VectorXcd r(m);
    for (Eigen::Index j = 0; j < m; ++j) {
        constraint_row(c[j], p.basis().get(), s, degree, [&](int k, cplx v) { A(j, k) = v; });
        r[j] = c[j].target - apply(p, c[j]);
    }
    const VectorXcd a = solve_ls(A, r, false);
    const ComplexPoly corr = same_basis(std::vector<cplx>(a.data(), a.data() + a.size()), p);
    std::vector<cplx> sum(std::max(p.coeffs().size(), corr.coeffs().size()), 0.0);
    for (std::size_t k = 0; k < p.coeffs().size(); ++k) sum[k] += p.coeffs()[k];
    for (std::size_t k = 0; k < corr.coeffs().size(); ++k) sum[k] += corr.coeffs()[k];
    out.poly = same_basis(std::move(sum), p);
    for (cplx z : boundary_samples({0.0, s}, 256)) out.correction_sup = std::max(out.correction_sup, std::abs(poly_eval(corr, z)));
    out.residual = constraint_violation(out.poly, c);
    if (out.residual > constraint_tol) throw std::runtime_error("constraint system numerically singular");
    return out;
}

RealPoly walsh_correct_real(const RealPoly& p, const ConstraintSet& c, int degree, double* correction_sup) {
    check_constraints(c);
    for (const Constraint& k : c)
        if (k.point.imag() != 0.0 || k.target.imag() != 0.0)
            throw std::invalid_argument("real correction needs real points and targets");
    if (degree < 0 || static_cast<int>(c.size()) > degree + 1)
        throw std::invalid_argument("correction degree too small for the constraint count");
    if (correction_sup) *correction_sup = 0.0;
    if (c.empty()) return p;
    const double s = p.scale();
    const Eigen::Index m = static_cast<Eigen::Index>(c.size());
    MatrixXd A(m, degree + 1);
    VectorXd r(m);
    for (Eigen::Index j = 0; j < m; ++j) {
        constraint_row(c[j], p.basis().get(), s, degree, [&](int k, cplx v) { A(j, k) = v.real(); });
        r[j] = c[j].target.real() - apply(p, c[j]).real();
    }
    const VectorXd a = solve_ls(A, r, false);
    const RealPoly corr = same_basis(std::vector<double>(a.data(), a.data() + a.size()), p);
    const RealPoly out = p + corr;
    if (correction_sup)
        for (cplx z : boundary_samples({0.0, s}, 256)) *correction_sup = std::max(*correction_sup, std::abs(poly_eval(corr, z)));
    if (constraint_violation(out, c) > constraint_tol) throw std::runtime_error("constraint system numerically singular");
    return out;
}

KeResult ke_approx(const ValueDerivFn& fK, const ValueFn& fE, const CompactSpec& K, const CompactSpec& E,
                   const ConstraintSet& pins, double eps, const KeOptions& opts) {
    if (!(eps > 0.0)) throw std::invalid_argument("tolerance must be positive");
    if (!K.symmetric || !E.symmetric) throw std::invalid_argument("real-coefficient approximation needs symmetric compacts");
    validate(K);
    validate(E);
    for (const Piece& p : K.pieces)
        for (const Piece& q : E.pieces)
            if (!disjoint(p, q, true)) throw std::invalid_argument("E must be disjoint from K");
    if (!std::any_of(K.pieces.begin(), K.pieces.end(), [](const Piece& p) { return in_piece(0.0, p, 0.0); }))
        throw std::invalid_argument("K must contain the origin");
    for (const Constraint& c : pins)
        if (!std::any_of(K.pieces.begin(), K.pieces.end(), [&](const Piece& p) { return in_piece(c.point, p, 1e-12); }))
            throw std::invalid_argument("pin outside K");
    if (opts.degrees.empty()) throw std::invalid_argument("empty degree schedule");

    CompactSpec Q = K;
    Q.pieces.insert(Q.pieces.end(), E.pieces.begin(), E.pieces.end());
    const double s = std::max(spec_extent(Q), 1e-300);

    // p(0) = f(0) is enforced exactly alongside the caller's pins
    ConstraintSet all_pins = pins;
    const bool origin_pinned = std::any_of(pins.begin(), pins.end(), [](const Constraint& c) {
        return c.kind == ConstraintKind::value && c.point == cplx(0.0);
    });
    if (!origin_pinned) all_pins.push_back({0.0, ConstraintKind::value, fK(0.0).value.real()});

    struct Row {
        cplx z;
        cplx target;
        bool deriv;
    };
    std::vector<Row> rows;
    std::vector<cplx> all_points;
    for (const Piece& p : K.pieces) {
        const std::vector<cplx> pts = piece_samples(p, opts.samples_per_piece);
        all_points.insert(all_points.end(), pts.begin(), pts.end());
        for (cplx z : upper_half(pts)) {
            const ValueDeriv f = fK(z);
            rows.push_back({z, f.value, false});
            rows.push_back({z, f.deriv, true});
        }
    }
    for (const Piece& p : E.pieces) {
        const std::vector<cplx> pts = piece_samples(p, opts.samples_per_piece);
        all_points.insert(all_points.end(), pts.begin(), pts.end());
        for (cplx z : upper_half(pts)) rows.push_back({z, fE(z), false});
    }
    const int dmax = *std::max_element(opts.degrees.begin(), opts.degrees.end());
    const BasisPtr basis = arnoldi_basis(all_points, s, dmax);

    // basis values at the fitting points, computed once at the top degree
    std::vector<std::vector<cplx>> row_vals(rows.size());
    {
        std::vector<cplx> val, der;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (i > 0 && rows[i].z == rows[i - 1].z) {
                row_vals[i] = der;
                continue;
            }
            basis_eval(basis.get(), s, rows[i].z, dmax, val, der);
            row_vals[i] = rows[i].deriv ? der : val;
        }
    }

    // residuals on the fitting layout and on a denser audit layout, both full circles
    struct Probe {
        cplx z;
        cplx value;
        cplx deriv;
        bool on_k;
    };
    std::vector<Probe> probes;
    for (int mult : {1, opts.audit_factor}) {
        for (const Piece& p : K.pieces)
            for (cplx z : piece_samples(p, opts.samples_per_piece * mult)) {
                const ValueDeriv f = fK(z);
                probes.push_back({z, f.value, f.deriv, true});
            }
        for (const Piece& p : E.pieces)
            for (cplx z : piece_samples(p, opts.samples_per_piece * mult)) probes.push_back({z, fE(z), 0.0, false});
    }

    KeResult best;
    best.eps = eps;
    best.value_residual = best.deriv_residual = best.pin_residual = std::numeric_limits<double>::infinity();
    double best_score = std::numeric_limits<double>::infinity();
    for (int d : opts.degrees) {
        if (static_cast<int>(all_pins.size()) > d + 1) continue;
        Eigen::Index nrows = 0;
        for (const Row& r : rows) nrows += r.z.imag() == 0.0 ? 1 : 2;
        MatrixXd A(nrows, d + 1);
        VectorXd b(nrows);
        Eigen::Index i = 0;
        for (std::size_t ri = 0; ri < rows.size(); ++ri) {
            const Row& r = rows[ri];
            const std::vector<cplx>& v = row_vals[ri];
            for (int k = 0; k <= d; ++k) A(i, k) = v[k].real();
            b[i] = r.target.real();
            ++i;
            if (r.z.imag() != 0.0) {
                for (int k = 0; k <= d; ++k) A(i, k) = v[k].imag();
                b[i] = r.target.imag();
                ++i;
            }
        }
        const VectorXd c = solve_ls(A, b, false);
        RealPoly p(std::vector<double>(c.data(), c.data() + c.size()), basis);
        try {
            p = walsh_correct_real(p, all_pins, d);
        } catch (const std::runtime_error&) {
            continue;
        }

        KeResult res;
        res.degree = d;
        res.eps = eps;
        for (const Probe& pr : probes) {
            const ValueDeriv v = poly_eval_deriv(p, pr.z);
            res.value_residual = std::max(res.value_residual, std::abs(v.value - pr.value));
            if (pr.on_k) res.deriv_residual = std::max(res.deriv_residual, std::abs(v.deriv - pr.deriv));
        }
        res.pin_residual = constraint_violation(p, all_pins);
        res.poly = std::move(p);
        res.ok = res.value_residual < eps && res.deriv_residual < eps && res.pin_residual <= constraint_tol;
        const double score = std::max(res.value_residual, res.deriv_residual);
        if (res.ok) return res;
        if (!(score >= best_score)) {
            best_score = score;
            best = std::move(res);
        }
    }
    return best;
}

HoischenResult hoischen_window(const std::function<RealSample(double)>& f, const Interval& window,
                               const std::function<double(double)>& eps_at, const std::vector<double>& pins,
                               int samples, const std::vector<int>& degrees) {
    orderiso::validate(window);
    for (double x : pins)
        if (x < window.a || x > window.b) throw std::invalid_argument("pin outside the window");
    if (degrees.empty()) throw std::invalid_argument("empty degree schedule");
    const std::vector<double> xs = grid_samples(window, samples);
    std::vector<RealSample> data;
    std::vector<double> eps;
    for (double x : xs) {
        data.push_back(f(x));
        eps.push_back(eps_at(x));
        if (!(eps.back() > 0.0)) throw std::invalid_argument("tolerance must be positive on the window");
    }
    ConstraintSet constraints;
    for (double x : pins) {
        const RealSample v = f(x);
        constraints.push_back({x, ConstraintKind::value, v.value});
        constraints.push_back({x, ConstraintKind::derivative, v.deriv});
    }
    check_constraints(constraints);
    const double s = std::max(std::abs(window.a), std::abs(window.b));
    const Eigen::Index n = static_cast<Eigen::Index>(xs.size());
    const int dmax = std::min(*std::max_element(degrees.begin(), degrees.end()), samples - 1);
    const BasisPtr basis = arnoldi_basis(std::vector<cplx>(xs.begin(), xs.end()), s, dmax);
    std::vector<std::vector<cplx>> vals(xs.size()), ders(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) basis_eval(basis.get(), s, xs[i], dmax, vals[i], ders[i]);

    for (int d : degrees) {
        if (d > dmax || static_cast<int>(constraints.size()) > d + 1) continue;
        // value and derivative rows, each weighted by the local tolerance
        MatrixXd A(2 * n, d + 1);
        VectorXd b(2 * n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double w = 1.0 / eps[i];
            for (int k = 0; k <= d; ++k) {
                A(2 * i, k) = vals[i][k].real() * w;
                A(2 * i + 1, k) = ders[i][k].real() * w;
            }
            b[2 * i] = data[i].value * w;
            b[2 * i + 1] = data[i].deriv * w;
        }
        const VectorXd c = solve_ls(A, b, false);
        RealPoly g(std::vector<double>(c.data(), c.data() + c.size()), basis);
        try {
            g = walsh_correct_real(g, constraints, d);
        } catch (const std::runtime_error&) {
            continue;
        }
        HoischenResult r;
        r.degree = d;
        for (Eigen::Index i = 0; i < n; ++i) {
            const ValueDeriv v = poly_eval_deriv(g, cplx(xs[i], 0.0));
            r.value_residual_ratio = std::max(r.value_residual_ratio, std::abs(v.value.real() - data[i].value) / eps[i]);
            r.deriv_residual_ratio = std::max(r.deriv_residual_ratio, std::abs(v.deriv.real() - data[i].deriv) / eps[i]);
        }
        r.pin_residual = constraint_violation(g, constraints);
        r.poly = std::move(g);
        if (r.value_residual_ratio < 1.0 && r.deriv_residual_ratio < 1.0) return r;
    }
    throw ConstructionError("window approximation needs degree above the escalation cap");
}

Disk SpecialChaplet::lower(std::size_t n) const {
    const Disk& d = upper.at(n - 1);
    return {std::conj(d.center), d.radius};
}

void validate(const SpecialChaplet& e) {
    if (e.upper.empty()) throw std::invalid_argument("chaplet needs at least one disc pair");
    if (e.radii.size() != e.upper.size() + 1) throw std::invalid_argument("chaplet needs K + 1 separating radii");
    for (std::size_t i = 0; i < e.radii.size(); ++i) {
        if (!(e.radii[i] > 0.0)) throw std::invalid_argument("separating radii must be positive");
        if (i > 0 && !(e.radii[i] > e.radii[i - 1])) throw std::invalid_argument("separating radii must increase");
    }
    for (std::size_t n = 1; n <= e.count(); ++n) {
        const Disk& d = e.upper_disc(n);
        orderiso::validate(d);
        if (!(d.center.imag() > d.radius)) throw std::invalid_argument("chaplet disc meets the real axis");
        const double c = std::abs(d.center);
        if (!(c - d.radius > e.r(n) && c + d.radius < e.r(n + 1)))
            throw std::invalid_argument("chaplet disc leaves its annulus");
        if (n > 1 && !(d.radius > e.upper_disc(n - 1).radius))
            throw std::invalid_argument("chaplet disc radii must increase");
    }
}

EpsilonSamples constant_epsilon(const SpecialChaplet& e, const Interval& window, const PatchLayout& layout,
                                double real_value, const std::function<double(std::size_t)>& disc_value) {
    EpsilonSamples out;
    out.real_x = grid_samples(window, layout.window_samples);
    out.real_eps.assign(out.real_x.size(), real_value);
    for (std::size_t n = 1; n <= e.count(); ++n) {
        out.disc_points.push_back(boundary_samples(e.upper_disc(n), layout.disc_samples));
        out.disc_eps.emplace_back(out.disc_points.back().size(), disc_value(n));
    }
    return out;
}

PatchSchedule make_schedule(const SpecialChaplet& e, const EpsilonSamples& eps, const franklin::BudgetSchedule& b) {
    const std::size_t K = e.count();
    if (eps.disc_eps.size() != K) throw std::invalid_argument("tolerance samples missing for some discs");
    auto min_on_q = [&](std::size_t n) {
        double m = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < eps.real_x.size(); ++i)
            if (std::abs(eps.real_x[i]) <= e.r(n + 1)) m = std::min(m, eps.real_eps[i]);
        for (double v : eps.disc_eps[n - 1]) m = std::min(m, v);
        return m;
    };
    PatchSchedule s;
    s.eps.push_back(std::min(b.epsilon(1), 0.99 * min_on_q(1)));
    for (std::size_t n = 2; n <= K; ++n) s.eps.push_back(std::min(b.ratio() * s.eps.back(), 0.99 * min_on_q(n)));
    s.eps.push_back(b.ratio() * s.eps.back());
    validate(s);
    return s;
}

void validate(const PatchSchedule& s) {
    for (double v : s.eps)
        if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("stage tolerances must be positive");
    // the finite list continues geometrically with the last ratio
    for (std::size_t n = 0; n + 1 < s.eps.size(); ++n) {
        double tail = 0.0;
        for (std::size_t k = n + 1; k < s.eps.size(); ++k) tail += 2.0 * s.eps[k];
        const double last_ratio = s.eps.size() >= 2 ? s.eps.back() / s.eps[s.eps.size() - 2] : 0.0;
        if (last_ratio >= 1.0) throw std::invalid_argument("stage tolerances must decrease");
        tail += 2.0 * s.eps.back() * last_ratio / (1.0 - last_ratio);
        if (!(tail < s.eps[n])) throw std::invalid_argument("stage tolerances violate sum_{k>n} 2 eps_k < eps_n");
    }
}

PatchResult re_patch(const PatchInput& in, const franklin::BudgetSchedule& budgets, const PatchLayout& layout,
                     const KeOptions& ke) {
    const SpecialChaplet& E = in.chaplet;
    validate(E);
    const std::size_t K = E.count();
    if (in.disc_targets.size() != K) throw std::invalid_argument("one disc target per chaplet pair required");
    if (!(in.window.a <= -E.r(K + 1) && in.window.b >= E.r(K + 1)))
        throw std::invalid_argument("window must cover [-r_{K+1}, r_{K+1}]");
    if (in.eps.real_x != grid_samples(in.window, layout.window_samples))
        throw std::invalid_argument("real tolerance samples must sit on the window layout");

    PatchResult out;
    out.schedule = make_schedule(E, in.eps, budgets);
    out.hoischen = hoischen_window(
        in.real_target, in.window,
        [&](double x) { return 0.5 * linear_interp(in.eps.real_x, in.eps.real_eps, x); }, in.pins,
        layout.window_samples, ke.degrees);
    out.phi = out.hoischen.poly;
    out.ok = true;

    KeOptions stage_opts = ke;
    stage_opts.samples_per_piece = layout.disc_samples;
    const RealPoly& phi = out.phi;
    for (std::size_t n = 1; n <= K; ++n) {
        const RealPoly prev = n == 1 ? phi : out.stages.back();
        const double rn = E.r(n), rn1 = E.r(n + 1);
        CompactSpec Kn{{Disk{0.0, rn}, Interval{rn, rn1}, Interval{-rn1, -rn}}, true};
        CompactSpec En{{E.upper_disc(n), E.lower(n)}, true};
        const ValueFn& target = in.disc_targets[n - 1];
        auto fK = [&](cplx z) {
            if (std::abs(z) <= rn * (1.0 + 1e-12)) return poly_eval_deriv(prev, z);
            return poly_eval_deriv(phi, z);
        };
        auto fE = [&](cplx z) { return z.imag() > 0.0 ? target(z) : std::conj(target(std::conj(z))); };
        ConstraintSet pins;
        auto add_pin = [&](double x) {
            for (const Constraint& c : pins)
                if (c.point == cplx(x, 0.0)) return;
            const ValueDeriv v = poly_eval_deriv(phi, cplx(x, 0.0));
            pins.push_back({x, ConstraintKind::value, v.value.real()});
            pins.push_back({x, ConstraintKind::derivative, v.deriv.real()});
        };
        for (double x : in.pins)
            if (std::abs(x) <= rn1) add_pin(x);
        add_pin(rn1);
        add_pin(-rn1);

        const double tol = out.schedule.at(n + 1);
        const KeResult r = ke_approx(fK, fE, Kn, En, pins, tol, stage_opts);
        out.stages.push_back(r.poly);
        StageReport rep;
        rep.n = n;
        rep.degree = r.degree;
        rep.tolerance = tol;
        rep.value_residual = r.value_residual;
        rep.deriv_residual = r.deriv_residual;
        rep.pin_residual = r.pin_residual;
        rep.passed = r.ok;
        out.reports.push_back(rep);
        if (!r.ok && out.ok) {
            out.ok = false;
            out.failure = "stage " + std::to_string(n) + " residual " + std::to_string(std::max(r.value_residual, r.deriv_residual)) +
                          " not below tolerance " + std::to_string(tol) + " at degree cap";
        }
    }

    const std::vector<cplx> inner = boundary_samples({0.0, E.r(1)}, layout.disc_samples);
    for (std::size_t m = 1; m < K; ++m) {
        TelescopeReport t;
        t.m = m;
        for (cplx z : inner) t.measured = std::max(t.measured, std::abs(poly_eval(out.stages.back(), z) - poly_eval(out.stages[m - 1], z)));
        for (std::size_t j = m; j < K; ++j) t.bound += out.schedule.at(j + 1);
        t.passed = t.measured <= t.bound;
        out.telescoping.push_back(t);
        if (!t.passed && out.ok) {
            out.ok = false;
            out.failure = "telescoping bound violated at m = " + std::to_string(m);
        }
    }
    return out;
}

}  // namespace orderiso::approx
