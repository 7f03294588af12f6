#pragma once

#include "dirreg/rational.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace dirreg {

class SingularMatrixError : public std::runtime_error {
 public:
  SingularMatrixError(std::string what, int rank)
      : std::runtime_error(std::move(what)), rank_(rank) {}
  int rank() const { return rank_; }

 private:
  int rank_;
};

// Exact elimination over a field scalar (used with Rational). Pivots are
// chosen first-nonzero in (column, row) order, so every result is a
// deterministic function of the input entries.
namespace exactlin {

template <class Scalar>
struct Echelon {
  MatrixX<Scalar> reduced;     // reduced row echelon form
  std::vector<int> pivot_cols; // one per pivot row, ascending
  int rank = 0;
};

template <class Scalar>
Echelon<Scalar> rref(MatrixX<Scalar> a) {
  Echelon<Scalar> out;
  const Eigen::Index rows = a.rows(), cols = a.cols();
  Eigen::Index pr = 0;
  for (Eigen::Index c = 0; c < cols && pr < rows; ++c) {
    Eigen::Index piv = -1;
    for (Eigen::Index r = pr; r < rows; ++r) {
      if (a(r, c) != Scalar(0)) {
        piv = r;
        break;
      }
    }
    if (piv < 0) continue;
    if (piv != pr) a.row(piv).swap(a.row(pr));
    a.row(pr) /= a(pr, c);
    for (Eigen::Index r = 0; r < rows; ++r) {
      if (r != pr && a(r, c) != Scalar(0)) a.row(r) -= a(r, c) * a.row(pr);
    }
    out.pivot_cols.push_back(static_cast<int>(c));
    ++pr;
  }
  out.rank = static_cast<int>(pr);
  out.reduced = std::move(a);
  return out;
}

template <class Scalar>
int rank(const MatrixX<Scalar>& a) {
  return rref(a).rank;
}

template <class Scalar>
Scalar determinant(MatrixX<Scalar> a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("determinant: matrix not square");
  const Eigen::Index n = a.rows();
  Scalar det = Scalar(1);
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::Index piv = -1;
    for (Eigen::Index r = c; r < n; ++r) {
      if (a(r, c) != Scalar(0)) {
        piv = r;
        break;
      }
    }
    if (piv < 0) return Scalar(0);
    if (piv != c) {
      a.row(piv).swap(a.row(c));
      det = -det;
    }
    det *= a(c, c);
    for (Eigen::Index r = c + 1; r < n; ++r) {
      if (a(r, c) != Scalar(0)) a.row(r) -= (a(r, c) / a(c, c)) * a.row(c);
    }
  }
  return det;
}

// Basis of {x : a x = 0}; one column per free variable, free variable set
// to 1 and pivot variables back-filled from the reduced form.
template <class Scalar>
MatrixX<Scalar> kernel(const MatrixX<Scalar>& a) {
  Echelon<Scalar> ech = rref<Scalar>(a);
  const Eigen::Index cols = a.cols();
  std::vector<bool> is_pivot(static_cast<std::size_t>(cols), false);
  for (int c : ech.pivot_cols) is_pivot[static_cast<std::size_t>(c)] = true;
  const Eigen::Index nullity = cols - ech.rank;
  MatrixX<Scalar> basis = MatrixX<Scalar>::Zero(cols, nullity);
  Eigen::Index bi = 0;
  for (Eigen::Index free_c = 0; free_c < cols; ++free_c) {
    if (is_pivot[static_cast<std::size_t>(free_c)]) continue;
    basis(free_c, bi) = Scalar(1);
    for (int pr = 0; pr < ech.rank; ++pr) {
      basis(ech.pivot_cols[static_cast<std::size_t>(pr)], bi) = -ech.reduced(pr, free_c);
    }
    ++bi;
  }
  return basis;
}

template <class Scalar>
VectorX<Scalar> solve(const MatrixX<Scalar>& a, const VectorX<Scalar>& b) {
  if (a.rows() != a.cols() || a.rows() != b.size())
    throw std::invalid_argument("solve: dimension mismatch");
  const Eigen::Index n = a.rows();
  MatrixX<Scalar> aug(n, n + 1);
  aug.leftCols(n) = a;
  aug.col(n) = b;
  Echelon<Scalar> ech = rref<Scalar>(aug);
  int rank_a = 0;
  for (int c : ech.pivot_cols)
    if (c < n) ++rank_a;
  if (rank_a < n) throw SingularMatrixError("solve: singular matrix of rank " + std::to_string(rank_a), rank_a);
  return ech.reduced.col(n).head(n);
}

template <class Scalar>
MatrixX<Scalar> inverse(const MatrixX<Scalar>& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("inverse: matrix not square");
  const Eigen::Index n = a.rows();
  MatrixX<Scalar> aug(n, 2 * n);
  aug.leftCols(n) = a;
  aug.rightCols(n) = MatrixX<Scalar>::Identity(n, n);
  Echelon<Scalar> ech = rref<Scalar>(aug);
  int rank_a = 0;
  for (int c : ech.pivot_cols)
    if (c < n) ++rank_a;
  if (rank_a < n) throw SingularMatrixError("inverse: singular matrix of rank " + std::to_string(rank_a), rank_a);
  return ech.reduced.rightCols(n);
}

} // namespace exactlin
} // namespace dirreg
