#include "switchstab/polynomial.hpp"

#include <algorithm>
#include <stdexcept>

namespace switchstab {

namespace {

double ipow(double x, unsigned e) {
  double r = 1.0;
  while (e) {
    if (e & 1u) r *= x;
    x *= x;
    e >>= 1u;
  }
  return r;
}

}  // namespace

Polynomial::Polynomial(std::size_t n, std::vector<Monomial> terms) : n_(n), terms_(std::move(terms)) {
  for (const auto& t : terms_)
    if (t.exponents.size() != n_)
      throw std::invalid_argument("polynomial: monomial exponent vector has wrong length");
}

bool Polynomial::has_constant_term() const {
  return std::any_of(terms_.begin(), terms_.end(), [](const Monomial& m) {
    return m.coeff != 0.0 &&
           std::all_of(m.exponents.begin(), m.exponents.end(), [](unsigned e) { return e == 0; });
  });
}

unsigned Polynomial::degree() const {
  unsigned d = 0;
  for (const auto& t : terms_) {
    unsigned s = 0;
    for (unsigned e : t.exponents) s += e;
    d = std::max(d, s);
  }
  return d;
}

double Polynomial::evaluate(std::span<const double> x) const {
  double total = 0.0;
  for (const auto& t : terms_) {
    double v = t.coeff;
    for (std::size_t k = 0; k < n_; ++k)
      if (t.exponents[k]) v *= ipow(x[k], t.exponents[k]);
    total += v;
  }
  return total;
}

void Polynomial::accumulate_gradient(std::span<const double> x, std::span<double> grad) const {
  for (const auto& t : terms_) {
    for (std::size_t d = 0; d < n_; ++d) {
      const unsigned ed = t.exponents[d];
      if (ed == 0) continue;
      double v = t.coeff * ed;
      for (std::size_t k = 0; k < n_; ++k) {
        const unsigned e = k == d ? ed - 1 : t.exponents[k];
        if (e) v *= ipow(x[k], e);
      }
      grad[d] += v;
    }
  }
}

}  // namespace switchstab
