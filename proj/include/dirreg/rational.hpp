#pragma once

#include <Eigen/Core>
#include <gmpxx.h>

#include <cmath>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace Eigen {

// mpq_class as an Eigen scalar. epsilon() = 0 makes rank/pivot thresholds
// exact zero tests.
template <>
struct NumTraits<mpq_class> : GenericNumTraits<mpq_class> {
  typedef mpq_class Real;
  typedef mpq_class NonInteger;
  typedef mpq_class Nested;
  static inline Real epsilon() { return 0; }
  static inline Real dummy_precision() { return 0; }
  static inline int digits10() { return 0; }
  enum {
    IsInteger = 0,
    IsSigned = 1,
    IsComplex = 0,
    RequireInitialization = 1,
    ReadCost = 6,
    AddCost = 150,
    MulCost = 100
  };
};

} // namespace Eigen

namespace dirreg {

// Exact scalar for "rational" mode. Arithmetic keeps values in lowest terms
// with positive denominator (gmpxx class invariant).
using Rational = mpq_class;

template <class Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <class Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <class Scalar>
inline constexpr bool is_rational_v = std::is_same_v<Scalar, Rational>;

inline Rational rat_abs(const Rational& x) { return x < 0 ? Rational(-x) : x; }
inline double rat_abs(double x) { return std::abs(x); }

inline double to_double(const Rational& x) { return x.get_d(); }
inline double to_double(double x) { return x; }

template <class Scalar>
inline Scalar scalar_from_int(long v) {
  if constexpr (is_rational_v<Scalar>)
    return Rational(v);
  else
    return static_cast<double>(v);
}

// Parses "p", "-p" or "p/q" (q > 0 after canonicalization; q == 0 rejected).
inline Rational parse_rational(const std::string& text) {
  auto fail = [&] { throw std::invalid_argument("invalid rational literal '" + text + "'"); };
  if (text.empty()) fail();
  std::size_t pos = text[0] == '-' ? 1 : 0;
  if (pos == text.size()) fail();
  bool slash_seen = false;
  for (std::size_t i = pos; i < text.size(); ++i) {
    char c = text[i];
    if (c == '/') {
      if (slash_seen || i == pos || i + 1 == text.size()) fail();
      slash_seen = true;
    } else if (c < '0' || c > '9') {
      fail();
    }
  }
  mpq_class q;
  if (q.set_str(text, 10) != 0) fail();
  if (q.get_den() == 0) throw std::invalid_argument("zero denominator in '" + text + "'");
  q.canonicalize();
  return q;
}

// Lossless text form: "p" when the denominator is 1, else "p/q".
inline std::string to_fraction_string(const Rational& x) { return x.get_str(); }

} // namespace dirreg
