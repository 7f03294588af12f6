#pragma once

#include "dirreg/exactlin.hpp"
#include "dirreg/multiindex.hpp"
#include "dirreg/rational.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dirreg {

template <class Scalar>
struct DirectionPair {
  VectorX<Scalar> xi;  // in R^n
  VectorX<Scalar> eta; // in R^m
  int id = 0;          // ordinal position in Lambda
};

template <class Scalar>
struct DirectionSet {
  int n = 0;
  int m = 0;
  int k = 0;
  std::vector<DirectionPair<Scalar>> pairs;

  int size() const { return static_cast<int>(pairs.size()); }

  void validate() const {
    if (n < 1 || m < 1 || k < 1) throw std::invalid_argument("DirectionSet: n, m, k must be >= 1");
    for (int p = 0; p < size(); ++p) {
      const auto& pr = pairs[static_cast<std::size_t>(p)];
      if (pr.xi.size() != n || pr.eta.size() != m)
        throw std::invalid_argument("DirectionSet: pair " + std::to_string(p) + " has inconsistent dimensions");
      if (pr.id != p) throw std::invalid_argument("DirectionSet: ids must be 0..|pairs|-1 in order");
    }
  }
};

template <class Scalar>
DirectionSet<Scalar> make_direction_set(int n, int m, int k,
                                        std::vector<std::pair<VectorX<Scalar>, VectorX<Scalar>>> raw) {
  DirectionSet<Scalar> set;
  set.n = n;
  set.m = m;
  set.k = k;
  set.pairs.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i)
    set.pairs.push_back({std::move(raw[i].first), std::move(raw[i].second), static_cast<int>(i)});
  set.validate();
  return set;
}

// Square matrix of the rank-k determining test: row (alpha, j) in
// (ascending-lex alpha, then j) order, column p over the m*k_n chosen
// points, entry (k!/alpha!) * xi^(p)^alpha * eta_j^(p).
template <class Scalar>
struct MomentMatrix {
  IndexBasis basis;
  int m = 0;
  std::vector<DirectionPair<Scalar>> points;
  MatrixX<Scalar> entries;

  int dim() const { return static_cast<int>(entries.rows()); }
  int row_index(int alpha_pos, int j) const { return alpha_pos * m + j; }
};

// Unnormalized monomial evaluations: entry (row (alpha, j), column p) =
// xi^(p)^alpha * eta_j^(p). Shared by the moment matrix (after row scaling)
// and the certificate machinery.
template <class Scalar>
MatrixX<Scalar> form_value_matrix(const IndexBasis& basis, int m,
                                  const std::vector<DirectionPair<Scalar>>& points) {
  const int rows = basis.count() * m;
  MatrixX<Scalar> a(rows, static_cast<Eigen::Index>(points.size()));
  for (std::size_t p = 0; p < points.size(); ++p) {
    const auto& pt = points[p];
    for (int a_pos = 0; a_pos < basis.count(); ++a_pos) {
      Scalar mono = monomial_eval<Scalar>(pt.xi, basis.indices[static_cast<std::size_t>(a_pos)]);
      for (int j = 0; j < m; ++j)
        a(a_pos * m + j, static_cast<Eigen::Index>(p)) = mono * pt.eta(j);
    }
  }
  return a;
}

// Evaluation matrix E with one row per pair of Lambda and one column per
// (alpha, j): E[p, (alpha, j)] = xi^(p)^alpha * eta_j^(p).
template <class Scalar>
MatrixX<Scalar> evaluation_matrix(const DirectionSet<Scalar>& lambda) {
  lambda.validate();
  IndexBasis basis = enumerate_degree_k(lambda.n, lambda.k);
  return form_value_matrix<Scalar>(basis, lambda.m, lambda.pairs).transpose();
}

template <class Scalar>
MomentMatrix<Scalar> build_moment_matrix(std::vector<DirectionPair<Scalar>> points, int n, int m, int k) {
  MomentMatrix<Scalar> mm;
  mm.basis = enumerate_degree_k(n, k);
  mm.m = m;
  const int dim = mm.basis.count() * m;
  if (static_cast<int>(points.size()) != dim)
    throw std::invalid_argument("build_moment_matrix: need exactly " + std::to_string(dim) + " points, got " +
                                std::to_string(points.size()));
  for (const auto& pt : points)
    if (pt.xi.size() != n || pt.eta.size() != m)
      throw std::invalid_argument("build_moment_matrix: point dimensions inconsistent with n, m");
  mm.points = std::move(points);
  mm.entries = form_value_matrix<Scalar>(mm.basis, m, mm.points);
  for (int a_pos = 0; a_pos < mm.basis.count(); ++a_pos) {
    Scalar factor = scalar_from_int<Scalar>(
        static_cast<long>(multinomial_coefficient(k, mm.basis.indices[static_cast<std::size_t>(a_pos)])));
    for (int j = 0; j < m; ++j) mm.entries.row(mm.row_index(a_pos, j)) *= factor;
  }
  return mm;
}

inline constexpr double kDefaultRankTol = 1e-10;

// Rank of a rectangular matrix: exact elimination for rationals; singular
// values above tol * sigma_max for doubles.
template <class Scalar>
int matrix_rank(const MatrixX<Scalar>& a, double tol = kDefaultRankTol) {
  if (a.rows() == 0 || a.cols() == 0) return 0;
  if constexpr (is_rational_v<Scalar>) {
    return exactlin::rank<Scalar>(a);
  } else {
    if (tol <= 0) throw std::invalid_argument("matrix_rank: tol must be positive in float mode");
    Eigen::JacobiSVD<MatrixX<double>> svd(a);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0) return 0;
    double cutoff = tol * sv(0);
    int r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) > cutoff) ++r;
    return r;
  }
}

template <class Scalar>
Scalar determinant(const MatrixX<Scalar>& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("determinant: matrix not square");
  if constexpr (is_rational_v<Scalar>) {
    return exactlin::determinant<Scalar>(a);
  } else {
    return Eigen::FullPivLU<MatrixX<double>>(a).determinant();
  }
}

template <class Scalar>
Scalar determinant(const MomentMatrix<Scalar>& mm) {
  return determinant<Scalar>(mm.entries);
}

struct SignedLogDet {
  int sign = 0;       // -1, 0, +1
  double log_abs = 0; // natural log of |det|; -inf when sign == 0
};

// Overflow-safe determinant report for the float path.
inline SignedLogDet signed_log_determinant(const MatrixX<double>& a) {
  Eigen::PartialPivLU<MatrixX<double>> lu(a.rows() == 0 ? MatrixX<double>::Identity(0, 0) : a);
  SignedLogDet out;
  out.sign = 1;
  out.log_abs = 0;
  const auto& u = lu.matrixLU();
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    double d = u(i, i);
    if (d == 0.0) return {0, -std::numeric_limits<double>::infinity()};
    if (d < 0) out.sign = -out.sign;
    out.log_abs += std::log(std::abs(d));
  }
  out.sign *= lu.permutationP().determinant() < 0 ? -1 : 1;
  return out;
}

inline SignedLogDet signed_log_determinant(const MatrixX<Rational>& a) {
  Rational d = exactlin::determinant<Rational>(a);
  if (d == 0) return {0, -std::numeric_limits<double>::infinity()};
  signed long exp_num = 0, exp_den = 0;
  double mant_num = mpz_get_d_2exp(&exp_num, d.get_num().get_mpz_t());
  double mant_den = mpz_get_d_2exp(&exp_den, d.get_den().get_mpz_t());
  double log_abs = std::log(std::abs(mant_num)) - std::log(std::abs(mant_den)) +
                   (static_cast<double>(exp_num) - static_cast<double>(exp_den)) * std::log(2.0);
  return {d > 0 ? 1 : -1, log_abs};
}

// Solves the reconstruction orientation M^T u = d (columns of M are points,
// rows are (alpha, j); see reconstruct_partials). Exact in rational mode;
// LU with one refinement sweep and a residual guard in float mode.
template <class Scalar>
VectorX<Scalar> solve(const MomentMatrix<Scalar>& mm, const VectorX<Scalar>& d) {
  if (d.size() != mm.entries.rows()) throw std::invalid_argument("solve: right-hand side has wrong length");
  MatrixX<Scalar> at = mm.entries.transpose();
  if constexpr (is_rational_v<Scalar>) {
    return exactlin::solve<Scalar>(at, d);
  } else {
    Eigen::FullPivLU<MatrixX<double>> lu(at);
    if (!lu.isInvertible())
      throw SingularMatrixError("solve: numerically singular moment matrix of rank " + std::to_string(lu.rank()),
                                static_cast<int>(lu.rank()));
    VectorX<double> u = lu.solve(d);
    u += lu.solve(d - at * u);
    double rnorm = (at * u - d).norm();
    if (rnorm > 1e-9 * d.norm())
      throw SingularMatrixError("solve: residual " + std::to_string(rnorm) + " exceeds 1e-9 * |d|",
                                static_cast<int>(lu.rank()));
    return u;
  }
}

} // namespace dirreg
