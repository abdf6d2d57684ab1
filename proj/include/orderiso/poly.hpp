#pragma once

#include <complex>
#include <memory>
#include <vector>

namespace orderiso {

using cplx = std::complex<double>;

struct ValueDeriv {
    cplx value;
    cplx deriv;
};

// Polynomials q_0..q_n in u = z / scale given by the recurrence
//   u q_k = sum_{j <= k + 1} h[k][j] q_j,  q_0 = 1,  h[k][k + 1] != 0.
// Real recurrence coefficients make every q_k a real-coefficient polynomial.
struct RecurrenceBasis {
    double scale = 1.0;
    std::vector<std::vector<double>> h;

    int max_degree() const { return static_cast<int>(h.size()); }
};

using BasisPtr = std::shared_ptr<const RecurrenceBasis>;

// values and z-derivatives of basis functions 0..n at z; the scaled monomials (z / scale)^k
// when b is null
void basis_eval(const RecurrenceBasis* b, double scale, cplx z, int n, std::vector<cplx>& val, std::vector<cplx>& der);

// p(z) = sum_k c_k b_k(z), where b_k is (z / scale)^k or, with a recurrence basis, q_k.
// Trailing zero coefficients are trimmed, so the zero polynomial has an empty coefficient list.
template <class T>
class Poly {
public:
    Poly() = default;
    explicit Poly(std::vector<T> coeffs, double scale = 1.0);
    Poly(std::vector<T> coeffs, BasisPtr basis);

    const std::vector<T>& coeffs() const { return coeffs_; }
    double scale() const { return scale_; }
    const BasisPtr& basis() const { return basis_; }
    bool monomial_basis() const { return !basis_; }
    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    bool is_zero() const { return coeffs_.empty(); }

    // coefficient of z^k in the unscaled monomial basis; monomial basis only
    T monomial(int k) const;

private:
    std::vector<T> coeffs_;
    double scale_ = 1.0;
    BasisPtr basis_;
};

using RealPoly = Poly<double>;
using ComplexPoly = Poly<cplx>;

cplx poly_eval(const RealPoly& p, cplx z);
cplx poly_eval(const ComplexPoly& p, cplx z);
double poly_eval(const RealPoly& p, double x);
ValueDeriv poly_eval_deriv(const RealPoly& p, cplx z);
ValueDeriv poly_eval_deriv(const ComplexPoly& p, cplx z);

RealPoly poly_symmetrize(const ComplexPoly& p);
// derivative, antiderivative and rescale need the monomial basis; + and - need a shared basis
RealPoly derivative(const RealPoly& p);
ComplexPoly derivative(const ComplexPoly& p);
// antiderivative vanishing at 0
RealPoly antiderivative(const RealPoly& p);
ComplexPoly antiderivative(const ComplexPoly& p);

RealPoly operator+(const RealPoly& a, const RealPoly& b);
RealPoly operator-(const RealPoly& a, const RealPoly& b);
RealPoly operator*(double s, const RealPoly& p);
// rewrites p in the basis (z / new_scale)^k
RealPoly rescale(const RealPoly& p, double new_scale);

}  // namespace orderiso
