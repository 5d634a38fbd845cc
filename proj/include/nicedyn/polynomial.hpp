#pragma once

#include <complex>
#include <span>
#include <vector>

namespace nicedyn {

using cplx = std::complex<double>;

/// Dense complex polynomial, coefficients in ascending degree.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<cplx> coeffs);

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }
  const std::vector<cplx>& coeffs() const { return c_; }
  cplx leading() const { return c_.empty() ? cplx{} : c_.back(); }
  cplx coeff(int k) const {
    return (k >= 0 && k < static_cast<int>(c_.size())) ? c_[k] : cplx{};
  }

  cplx operator()(cplx z) const;
  /// p(z) and p'(z) in one Horner pass.
  void eval_with_derivative(cplx z, cplx& p, cplx& dp) const;

  Polynomial derivative() const;
  /// z^deg p(1/z) for a given nominal degree (>= degree()).
  Polynomial reversed(int nominal_degree) const;
  /// Largest coefficient magnitude, used as a scale for tolerances.
  double scale() const;

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(cplx s, const Polynomial& a);

 private:
  void trim();
  std::vector<cplx> c_;
};

/// All complex roots (with multiplicity) of p. Eigenvalues of the companion
/// matrix, each polished by Newton iteration on p to relative tol 1e-12.
std::vector<cplx> polynomial_roots(const Polynomial& p);

/// Newton refinement of a single root estimate.
cplx polish_root(const Polynomial& p, cplx z, int max_iter = 50);

}  // namespace nicedyn
