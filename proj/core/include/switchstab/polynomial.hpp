#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace switchstab {

struct Monomial {
  std::vector<unsigned> exponents;
  double coeff = 0.0;
};

/// Real polynomial in n variables as a list of monomials.
class Polynomial {
 public:
  Polynomial() = default;
  /// Throws std::invalid_argument if any exponent vector has length ≠ n.
  Polynomial(std::size_t n, std::vector<Monomial> terms);

  std::size_t dimension() const { return n_; }
  const std::vector<Monomial>& terms() const { return terms_; }

  /// True if some monomial has all exponents zero and nonzero coefficient.
  bool has_constant_term() const;
  unsigned degree() const;

  double evaluate(std::span<const double> x) const;
  /// grad += ∇p(x)
  void accumulate_gradient(std::span<const double> x, std::span<double> grad) const;

 private:
  std::size_t n_ = 0;
  std::vector<Monomial> terms_;
};

}  // namespace switchstab
