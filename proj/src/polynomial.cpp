#include "nicedyn/polynomial.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

#include "nicedyn/error.hpp"

namespace nicedyn {

Polynomial::Polynomial(std::vector<cplx> coeffs) : c_(std::move(coeffs)) { trim(); }

void Polynomial::trim() {
  while (!c_.empty() && c_.back() == cplx{}) c_.pop_back();
}

cplx Polynomial::operator()(cplx z) const {
  cplx p{};
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) p = p * z + *it;
  return p;
}

void Polynomial::eval_with_derivative(cplx z, cplx& p, cplx& dp) const {
  p = cplx{};
  dp = cplx{};
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) {
    dp = dp * z + p;
    p = p * z + *it;
  }
}

Polynomial Polynomial::derivative() const {
  if (c_.size() <= 1) return Polynomial{};
  std::vector<cplx> d(c_.size() - 1);
  for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = static_cast<double>(k) * c_[k];
  return Polynomial(std::move(d));
}

Polynomial Polynomial::reversed(int nominal_degree) const {
  std::vector<cplx> r(static_cast<std::size_t>(nominal_degree + 1));
  for (int k = 0; k <= degree(); ++k) r[nominal_degree - k] = c_[k];
  return Polynomial(std::move(r));
}

double Polynomial::scale() const {
  double s = 0.0;
  for (auto& c : c_) s = std::max(s, std::abs(c));
  return s;
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
  std::vector<cplx> r(std::max(a.c_.size(), b.c_.size()));
  for (std::size_t k = 0; k < r.size(); ++k) r[k] = a.coeff(int(k)) + b.coeff(int(k));
  return Polynomial(std::move(r));
}

Polynomial operator-(const Polynomial& a, const Polynomial& b) {
  std::vector<cplx> r(std::max(a.c_.size(), b.c_.size()));
  for (std::size_t k = 0; k < r.size(); ++k) r[k] = a.coeff(int(k)) - b.coeff(int(k));
  return Polynomial(std::move(r));
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.is_zero() || b.is_zero()) return Polynomial{};
  std::vector<cplx> r(a.c_.size() + b.c_.size() - 1);
  for (std::size_t i = 0; i < a.c_.size(); ++i)
    for (std::size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
  return Polynomial(std::move(r));
}

Polynomial operator*(cplx s, const Polynomial& a) {
  std::vector<cplx> r = a.c_;
  for (auto& c : r) c *= s;
  return Polynomial(std::move(r));
}

cplx polish_root(const Polynomial& p, cplx z, int max_iter) {
  const double tol = 1e-12;
  for (int it = 0; it < max_iter; ++it) {
    cplx v, dv;
    p.eval_with_derivative(z, v, dv);
    if (dv == cplx{}) break;
    cplx step = v / dv;
    z -= step;
    if (std::abs(step) <= tol * std::max(1.0, std::abs(z))) break;
  }
  return z;
}

std::vector<cplx> polynomial_roots(const Polynomial& p) {
  const int n = p.degree();
  if (n < 1) return {};
  if (n == 1) return {-p.coeff(0) / p.coeff(1)};
  Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(n, n);
  const cplx lead = p.leading();
  for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) companion(i, n - 1) = -p.coeff(i) / lead;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, false);
  if (solver.info() != Eigen::Success)
    throw Error("root-finding non-convergence", "companion eigen-solver failed");
  std::vector<cplx> roots(n);
  for (int i = 0; i < n; ++i) roots[i] = polish_root(p, solver.eigenvalues()[i]);
  return roots;
}

}  // namespace nicedyn
