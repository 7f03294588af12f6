#pragma once

#include "dirreg/multiindex.hpp"
#include "dirreg/rational.hpp"

#include <cctype>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace dirreg {

class PolynomialParseError : public std::runtime_error {
 public:
  PolynomialParseError(std::string message, std::size_t offset)
      : std::runtime_error(message + " (at offset " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Vector-valued polynomial map f = (f_1, ..., f_m) on R^n, each component a
// sparse exponent -> coefficient table. Evaluation, symbolic partials, and
// directional derivatives are all exact for rational coefficients.
template <class Scalar>
struct PolynomialMap {
  int n = 0;
  int m = 0;
  std::vector<std::map<MultiIndex, Scalar>> comps;

  static PolynomialMap zero(int n, int m) {
    PolynomialMap f;
    f.n = n;
    f.m = m;
    f.comps.resize(static_cast<std::size_t>(m));
    return f;
  }

  void add_term(int j, const MultiIndex& alpha, const Scalar& c) {
    if (alpha.dimension() != n) throw std::invalid_argument("PolynomialMap: exponent dimension mismatch");
    auto& slot = comps[static_cast<std::size_t>(j)][alpha];
    slot += c;
    if (slot == Scalar(0)) comps[static_cast<std::size_t>(j)].erase(alpha);
  }

  VectorX<Scalar> eval(const VectorX<Scalar>& x) const {
    if (x.size() != n) throw std::invalid_argument("PolynomialMap: point dimension mismatch");
    VectorX<Scalar> out = VectorX<Scalar>::Zero(m);
    for (int j = 0; j < m; ++j)
      for (const auto& [alpha, c] : comps[static_cast<std::size_t>(j)]) out(j) += c * monomial_eval<Scalar>(x, alpha);
    return out;
  }

  int total_degree() const {
    int d = 0;
    for (const auto& comp : comps)
      for (const auto& [alpha, c] : comp) d = std::max(d, alpha.degree());
    return d;
  }

  // d/dx_i applied once.
  PolynomialMap partial_single(int i) const {
    PolynomialMap out = zero(n, m);
    for (int j = 0; j < m; ++j) {
      for (const auto& [alpha, c] : comps[static_cast<std::size_t>(j)]) {
        if (alpha[i] == 0) continue;
        std::vector<int> e = alpha.exponents();
        e[static_cast<std::size_t>(i)] -= 1;
        out.add_term(j, MultiIndex(e), c * scalar_from_int<Scalar>(alpha[i]));
      }
    }
    return out;
  }

  PolynomialMap partial(const MultiIndex& alpha) const {
    PolynomialMap out = *this;
    for (int i = 0; i < alpha.dimension(); ++i)
      for (int rep = 0; rep < alpha[i]; ++rep) out = out.partial_single(i);
    return out;
  }

  // Exact k-th directional derivative d^k/dt^k <f(x + t xi), eta> at t = 0,
  // computed by expanding each monomial binomially in t and reading the t^k
  // coefficient. Independent of the moment-matrix machinery.
  Scalar directional(const VectorX<Scalar>& x, const VectorX<Scalar>& xi, const VectorX<Scalar>& eta,
                     int k) const {
    if (x.size() != n || xi.size() != n || eta.size() != m)
      throw std::invalid_argument("PolynomialMap::directional: dimension mismatch");
    if (k < 0) throw std::invalid_argument("PolynomialMap::directional: k must be >= 0");
    Scalar tk_coeff = scalar_from_int<Scalar>(0);
    std::vector<Scalar> poly(static_cast<std::size_t>(k) + 1);
    std::vector<Scalar> fact(static_cast<std::size_t>(k) + 1);
    for (int j = 0; j < m; ++j) {
      if (eta(j) == Scalar(0)) continue;
      for (const auto& [alpha, c] : comps[static_cast<std::size_t>(j)]) {
        // poly(t) = prod_i (x_i + t xi_i)^{alpha_i}, truncated at degree k.
        std::fill(poly.begin(), poly.end(), scalar_from_int<Scalar>(0));
        poly[0] = scalar_from_int<Scalar>(1);
        for (int i = 0; i < n; ++i) {
          for (int rep = 0; rep < alpha[i]; ++rep) {
            for (int d = k; d >= 0; --d) {
              Scalar v = poly[static_cast<std::size_t>(d)] * x(i);
              if (d > 0) v += poly[static_cast<std::size_t>(d - 1)] * xi(i);
              poly[static_cast<std::size_t>(d)] = v;
            }
          }
        }
        tk_coeff += c * eta(j) * poly[static_cast<std::size_t>(k)];
      }
    }
    Scalar kfact = scalar_from_int<Scalar>(1);
    for (int i = 2; i <= k; ++i) kfact *= scalar_from_int<Scalar>(i);
    return kfact * tk_coeff;
  }
};

namespace detail {

// Grammar (whitespace ignored):
//   map    := poly (';' poly)*
//   poly   := ['+'|'-'] term (('+'|'-') term)*
//   term   := factor ('*'? factor)*
//   factor := coefficient | variable ['^' integer]
//   coefficient := integer ['/' integer]
//   variable := 'x' integer   (1-based)
class PolyParser {
 public:
  PolyParser(const std::string& text, int n) : text_(text), n_(n) {}

  std::vector<std::map<MultiIndex, Rational>> parse_components() {
    std::vector<std::map<MultiIndex, Rational>> comps;
    comps.push_back(parse_poly());
    while (peek() == ';') {
      ++pos_;
      comps.push_back(parse_poly());
    }
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return comps;
  }

 private:
  std::map<MultiIndex, Rational> parse_poly() {
    std::map<MultiIndex, Rational> poly;
    int sign = 1;
    skip_ws();
    if (peek() == '+' || peek() == '-') {
      if (peek() == '-') sign = -1;
      ++pos_;
    }
    for (;;) {
      auto [alpha, coeff] = parse_term();
      coeff *= sign;
      auto& slot = poly[alpha];
      slot += coeff;
      if (slot == 0) poly.erase(alpha);
      skip_ws();
      if (peek() == '+' || peek() == '-') {
        sign = peek() == '-' ? -1 : 1;
        ++pos_;
      } else {
        break;
      }
    }
    return poly;
  }

  std::pair<MultiIndex, Rational> parse_term() {
    Rational coeff = 1;
    std::vector<int> exps(static_cast<std::size_t>(n_), 0);
    bool saw_factor = false;
    for (;;) {
      skip_ws();
      char c = peek();
      if (c == 'x') {
        std::size_t at = pos_;
        ++pos_;
        int var = parse_int("variable index");
        if (var < 1 || var > n_) fail("variable x" + std::to_string(var) + " out of range 1..x" + std::to_string(n_), at);
        int e = 1;
        skip_ws();
        if (peek() == '^') {
          ++pos_;
          skip_ws();
          e = parse_int("exponent");
          if (e < 0) fail("negative exponent");
        }
        exps[static_cast<std::size_t>(var - 1)] += e;
        saw_factor = true;
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        long num = parse_int("coefficient");
        Rational q(num);
        skip_ws();
        if (peek() == '/') {
          ++pos_;
          skip_ws();
          std::size_t at = pos_;
          long den = parse_int("denominator");
          if (den == 0) fail("zero denominator", at);
          q = Rational(num, den);
          q.canonicalize();
        }
        coeff *= q;
        saw_factor = true;
      } else {
        break;
      }
      skip_ws();
      if (peek() == '*') ++pos_;
    }
    if (!saw_factor) fail("expected a term");
    return {MultiIndex(std::move(exps)), coeff};
  }

  long parse_int(const char* what) {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ == start) fail(std::string("expected ") + what);
    return std::stol(text_.substr(start, pos_ - start));
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  [[noreturn]] void fail(const std::string& msg) const { throw PolynomialParseError(msg, pos_); }
  [[noreturn]] void fail(const std::string& msg, std::size_t at) const { throw PolynomialParseError(msg, at); }

  const std::string& text_;
  int n_;
  std::size_t pos_ = 0;
};

} // namespace detail

// Parses ';'-separated components over variables x1..xn with rational
// coefficients, e.g. "x1*x2; 3/2 x1^2 - x2".
inline PolynomialMap<Rational> parse_polynomial_map(const std::string& text, int n, int m) {
  detail::PolyParser parser(text, n);
  auto comps = parser.parse_components();
  if (static_cast<int>(comps.size()) != m)
    throw std::invalid_argument("polynomial map has " + std::to_string(comps.size()) + " components, expected " +
                                std::to_string(m));
  PolynomialMap<Rational> f = PolynomialMap<Rational>::zero(n, m);
  for (int j = 0; j < m; ++j)
    for (auto& [alpha, c] : comps[static_cast<std::size_t>(j)]) f.add_term(j, alpha, c);
  return f;
}

inline PolynomialMap<double> to_double_map(const PolynomialMap<Rational>& f) {
  PolynomialMap<double> g = PolynomialMap<double>::zero(f.n, f.m);
  for (int j = 0; j < f.m; ++j)
    for (const auto& [alpha, c] : f.comps[static_cast<std::size_t>(j)]) g.add_term(j, alpha, to_double(c));
  return g;
}

} // namespace dirreg
