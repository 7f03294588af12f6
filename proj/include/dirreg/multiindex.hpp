#pragma once

#include "dirreg/rational.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dirreg {

// Exponent vector alpha in Z_+^n. Ordering is plain lexicographic on the
// exponent tuples, which matches the alpha < beta relation used for matrix
// row layout everywhere in this library.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> exponents) : exp_(std::move(exponents)) {
    if (exp_.empty()) throw std::invalid_argument("MultiIndex needs dimension >= 1");
    for (int e : exp_)
      if (e < 0) throw std::invalid_argument("MultiIndex exponents must be nonnegative");
  }

  int dimension() const { return static_cast<int>(exp_.size()); }
  int degree() const { return std::accumulate(exp_.begin(), exp_.end(), 0); }
  int operator[](int i) const { return exp_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& exponents() const { return exp_; }

  friend bool operator==(const MultiIndex& a, const MultiIndex& b) { return a.exp_ == b.exp_; }
  friend bool operator!=(const MultiIndex& a, const MultiIndex& b) { return !(a == b); }
  friend bool operator<(const MultiIndex& a, const MultiIndex& b) {
    return std::lexicographical_compare(a.exp_.begin(), a.exp_.end(), b.exp_.begin(), b.exp_.end());
  }

  std::string to_string() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < exp_.size(); ++i) {
      if (i) os << ',';
      os << exp_[i];
    }
    return os.str();
  }

 private:
  std::vector<int> exp_;
};

// All multi-indices of total degree k in n variables, ascending
// lexicographic, with count k_n = C(k+n-1, k).
struct IndexBasis {
  int n = 0;
  int k = 0;
  std::vector<MultiIndex> indices;

  int count() const { return static_cast<int>(indices.size()); }

  // Lexicographic position of alpha; throws if alpha is not in the basis.
  int position(const MultiIndex& alpha) const {
    auto it = std::lower_bound(indices.begin(), indices.end(), alpha);
    if (it == indices.end() || !(*it == alpha))
      throw std::invalid_argument("multi-index " + alpha.to_string() + " not of degree " + std::to_string(k));
    return static_cast<int>(it - indices.begin());
  }
};

inline std::uint64_t binomial(int top, int bottom) {
  if (bottom < 0 || bottom > top) return 0;
  bottom = std::min(bottom, top - bottom);
  std::uint64_t r = 1;
  for (int i = 1; i <= bottom; ++i) {
    r = r * static_cast<std::uint64_t>(top - bottom + i) / static_cast<std::uint64_t>(i);
  }
  return r;
}

inline IndexBasis enumerate_degree_k(int n, int k) {
  if (n < 1 || k < 1) throw std::invalid_argument("enumerate_degree_k requires n >= 1 and k >= 1");
  IndexBasis basis;
  basis.n = n;
  basis.k = k;
  std::vector<int> cur(static_cast<std::size_t>(n), 0);
  // Walk positions left to right; the leftmost coordinate is the most
  // significant, so increasing it last yields ascending lexicographic order.
  auto rec = [&](auto&& self, int pos, int remaining) -> void {
    if (pos == n - 1) {
      cur[static_cast<std::size_t>(pos)] = remaining;
      basis.indices.emplace_back(cur);
      return;
    }
    for (int e = 0; e <= remaining; ++e) {
      cur[static_cast<std::size_t>(pos)] = e;
      self(self, pos + 1, remaining - e);
    }
  };
  rec(rec, 0, k);
  return basis;
}

// k! / (alpha_1! ... alpha_n!), the coefficient attached to xi^alpha when the
// first-order directional identity is iterated k times.
inline std::uint64_t multinomial_coefficient(int k, const MultiIndex& alpha) {
  if (alpha.degree() != k)
    throw std::invalid_argument("multinomial_coefficient: |alpha| = " + std::to_string(alpha.degree()) +
                                " does not match k = " + std::to_string(k));
  std::uint64_t r = 1;
  int consumed = 0;
  for (int i = 0; i < alpha.dimension(); ++i) {
    consumed += alpha[i];
    r *= binomial(consumed, alpha[i]);
  }
  return r;
}

// prod_i xi_i^{alpha_i}, with 0^0 = 1.
template <class Scalar>
Scalar monomial_eval(const VectorX<Scalar>& xi, const MultiIndex& alpha) {
  if (xi.size() != alpha.dimension())
    throw std::invalid_argument("monomial_eval: dimension mismatch");
  Scalar r = scalar_from_int<Scalar>(1);
  for (int i = 0; i < alpha.dimension(); ++i)
    for (int e = 0; e < alpha[i]; ++e) r *= xi(i);
  return r;
}

} // namespace dirreg
