#include "orderiso/poly.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace orderiso {

namespace {

bool is_zero_coeff(double c) { return c == 0.0; }
bool is_zero_coeff(cplx c) { return c == cplx(0.0, 0.0); }

template <class T>
cplx horner(const std::vector<T>& c, cplx u) {
    cplx acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * u + cplx(*it);
    return acc;
}

template <class T>
ValueDeriv horner_deriv(const std::vector<T>& c, double scale, cplx z) {
    const cplx u = z / scale;
    cplx v = 0.0, d = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) {
        d = d * u + v;
        v = v * u + cplx(*it);
    }
    return {v, d / scale};
}

template <class T>
ValueDeriv recurrence_eval(const std::vector<T>& c, const RecurrenceBasis& b, cplx z) {
    std::vector<cplx> val, der;
    basis_eval(&b, b.scale, z, static_cast<int>(c.size()) - 1, val, der);
    cplx v = 0.0, d = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) {
        v += cplx(c[k]) * val[k];
        d += cplx(c[k]) * der[k];
    }
    return {v, d};
}

template <class T>
void require_monomial(const Poly<T>& p) {
    if (!p.monomial_basis()) throw std::logic_error("operation needs a monomial-basis polynomial");
}

template <class T>
Poly<T> derivative_impl(const Poly<T>& p) {
    require_monomial(p);
    const auto& c = p.coeffs();
    if (c.size() <= 1) return Poly<T>({}, p.scale());
    std::vector<T> out(c.size() - 1);
    for (std::size_t k = 1; k < c.size(); ++k) out[k - 1] = c[k] * (static_cast<double>(k) / p.scale());
    return Poly<T>(std::move(out), p.scale());
}

template <class T>
Poly<T> antiderivative_impl(const Poly<T>& p) {
    require_monomial(p);
    const auto& c = p.coeffs();
    if (c.empty()) return Poly<T>({}, p.scale());
    std::vector<T> out(c.size() + 1, T(0.0));
    for (std::size_t k = 0; k < c.size(); ++k) out[k + 1] = c[k] * (p.scale() / static_cast<double>(k + 1));
    return Poly<T>(std::move(out), p.scale());
}

}  // namespace

template <class T>
Poly<T>::Poly(std::vector<T> coeffs, double scale) : coeffs_(std::move(coeffs)), scale_(scale) {
    if (!(scale > 0.0) || !std::isfinite(scale)) throw std::invalid_argument("polynomial scale must be positive and finite");
    while (!coeffs_.empty() && is_zero_coeff(coeffs_.back())) coeffs_.pop_back();
}

template <class T>
Poly<T>::Poly(std::vector<T> coeffs, BasisPtr basis) : Poly(std::move(coeffs), basis ? basis->scale : 1.0) {
    if (basis && degree() > basis->max_degree()) throw std::invalid_argument("more coefficients than basis functions");
    basis_ = std::move(basis);
}

template <class T>
T Poly<T>::monomial(int k) const {
    require_monomial(*this);
    if (k < 0 || k > degree()) return T(0.0);
    return coeffs_[k] / std::pow(scale_, k);
}

template class Poly<double>;
template class Poly<cplx>;

void basis_eval(const RecurrenceBasis* b, double scale, cplx z, int n, std::vector<cplx>& val, std::vector<cplx>& der) {
    if (n < 0) {
        val.clear();
        der.clear();
        return;
    }
    if (b && n > b->max_degree()) throw std::invalid_argument("basis degree exceeded");
    if (b) scale = b->scale;
    const cplx u = z / scale;
    val.assign(static_cast<std::size_t>(n) + 1, 0.0);
    der.assign(static_cast<std::size_t>(n) + 1, 0.0);
    val[0] = 1.0;
    for (int k = 0; k < n; ++k) {
        cplx v = u * val[k];
        cplx d = val[k] / scale + u * der[k];
        if (b) {
            const std::vector<double>& col = b->h[k];
            for (int j = 0; j <= k; ++j) {
                v -= col[j] * val[j];
                d -= col[j] * der[j];
            }
            v /= col[k + 1];
            d /= col[k + 1];
        }
        val[k + 1] = v;
        der[k + 1] = d;
    }
}

cplx poly_eval(const RealPoly& p, cplx z) {
    if (p.basis()) return recurrence_eval(p.coeffs(), *p.basis(), z).value;
    return horner(p.coeffs(), z / p.scale());
}

cplx poly_eval(const ComplexPoly& p, cplx z) {
    if (p.basis()) return recurrence_eval(p.coeffs(), *p.basis(), z).value;
    return horner(p.coeffs(), z / p.scale());
}

double poly_eval(const RealPoly& p, double x) {
    if (p.basis()) return recurrence_eval(p.coeffs(), *p.basis(), cplx(x, 0.0)).value.real();
    const double u = x / p.scale();
    double acc = 0.0;
    for (auto it = p.coeffs().rbegin(); it != p.coeffs().rend(); ++it) acc = acc * u + *it;
    return acc;
}

ValueDeriv poly_eval_deriv(const RealPoly& p, cplx z) {
    if (p.basis()) return recurrence_eval(p.coeffs(), *p.basis(), z);
    return horner_deriv(p.coeffs(), p.scale(), z);
}

ValueDeriv poly_eval_deriv(const ComplexPoly& p, cplx z) {
    if (p.basis()) return recurrence_eval(p.coeffs(), *p.basis(), z);
    return horner_deriv(p.coeffs(), p.scale(), z);
}

RealPoly poly_symmetrize(const ComplexPoly& p) {
    std::vector<double> out;
    out.reserve(p.coeffs().size());
    for (const cplx& c : p.coeffs()) out.push_back(c.real());
    if (p.basis()) return RealPoly(std::move(out), p.basis());
    return RealPoly(std::move(out), p.scale());
}

RealPoly derivative(const RealPoly& p) { return derivative_impl(p); }
ComplexPoly derivative(const ComplexPoly& p) { return derivative_impl(p); }
RealPoly antiderivative(const RealPoly& p) { return antiderivative_impl(p); }
ComplexPoly antiderivative(const ComplexPoly& p) { return antiderivative_impl(p); }

RealPoly rescale(const RealPoly& p, double new_scale) {
    require_monomial(p);
    if (new_scale == p.scale()) return p;
    const double ratio = new_scale / p.scale();
    std::vector<double> out(p.coeffs());
    double f = 1.0;
    for (double& c : out) {
        c *= f;
        f *= ratio;
    }
    return RealPoly(std::move(out), new_scale);
}

RealPoly operator+(const RealPoly& a, const RealPoly& b) {
    if (a.is_zero() && a.monomial_basis()) return b;
    if (b.is_zero() && b.monomial_basis()) return a;
    if (a.basis() || b.basis()) {
        if (a.basis() != b.basis()) throw std::invalid_argument("polynomials in different bases");
        std::vector<double> out(std::max(a.coeffs().size(), b.coeffs().size()), 0.0);
        for (std::size_t k = 0; k < a.coeffs().size(); ++k) out[k] += a.coeffs()[k];
        for (std::size_t k = 0; k < b.coeffs().size(); ++k) out[k] += b.coeffs()[k];
        return RealPoly(std::move(out), a.basis());
    }
    const RealPoly bb = rescale(b, a.scale());
    std::vector<double> out(std::max(a.coeffs().size(), bb.coeffs().size()), 0.0);
    for (std::size_t k = 0; k < a.coeffs().size(); ++k) out[k] += a.coeffs()[k];
    for (std::size_t k = 0; k < bb.coeffs().size(); ++k) out[k] += bb.coeffs()[k];
    return RealPoly(std::move(out), a.scale());
}

RealPoly operator*(double s, const RealPoly& p) {
    std::vector<double> out(p.coeffs());
    for (double& c : out) c *= s;
    if (p.basis()) return RealPoly(std::move(out), p.basis());
    return RealPoly(std::move(out), p.scale());
}

RealPoly operator-(const RealPoly& a, const RealPoly& b) { return a + (-1.0) * b; }

}  // namespace orderiso
