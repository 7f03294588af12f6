#pragma once

#include "dirreg/momentmatrix.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cassert>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace dirreg {

// Nonzero form Phi(xi, eta) = sum_{j, |alpha|=k} phi_{alpha j} xi^alpha eta_j,
// linear in eta and homogeneous of degree k in xi. Coefficients are stored in
// the (ascending-lex alpha, then j) row layout shared with MomentMatrix.
template <class Scalar>
struct AnnihilatorForm {
  int n = 0;
  int m = 0;
  int k = 0;
  IndexBasis basis;
  VectorX<Scalar> coeffs;

  Scalar coeff(int alpha_pos, int j) const { return coeffs(alpha_pos * m + j); }

  Scalar evaluate(const VectorX<Scalar>& xi, const VectorX<Scalar>& eta) const {
    if (xi.size() != n || eta.size() != m) throw std::invalid_argument("AnnihilatorForm: dimension mismatch");
    Scalar acc = scalar_from_int<Scalar>(0);
    for (int a_pos = 0; a_pos < basis.count(); ++a_pos) {
      Scalar mono = monomial_eval<Scalar>(xi, basis.indices[static_cast<std::size_t>(a_pos)]);
      for (int j = 0; j < m; ++j) acc += coeffs(a_pos * m + j) * mono * eta(j);
    }
    return acc;
  }

  bool is_zero_form() const {
    for (Eigen::Index i = 0; i < coeffs.size(); ++i)
      if (coeffs(i) != Scalar(0)) return false;
    return true;
  }

  double max_abs_coeff() const {
    double mx = 0;
    for (Eigen::Index i = 0; i < coeffs.size(); ++i) mx = std::max(mx, std::abs(to_double(coeffs(i))));
    return mx;
  }

  // Canonical scaling: first nonzero coefficient becomes 1 in rational mode;
  // the largest-magnitude coefficient becomes +1 in float mode.
  void normalize() {
    if (is_zero_form()) return;
    if constexpr (is_rational_v<Scalar>) {
      for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
        if (coeffs(i) != Scalar(0)) {
          coeffs /= coeffs(i);
          return;
        }
      }
    } else {
      Eigen::Index best = 0;
      for (Eigen::Index i = 1; i < coeffs.size(); ++i)
        if (std::abs(coeffs(i)) > std::abs(coeffs(best))) best = i;
      coeffs /= coeffs(best);
    }
  }
};

template <class Scalar>
struct Determining {
  std::vector<int> selection;    // ids into Lambda, one per matrix column
  MomentMatrix<Scalar> matrix;
  Scalar stability_B;
  int swaps = 0;                 // augmentation-loop swaps (greedy path only)
};

template <class Scalar>
struct NotDetermining {
  AnnihilatorForm<Scalar> certificate;
  // max over Lambda of |Phi| / (|Phi|_coeff * max(1,|xi|)^k * max(1,|eta|));
  // exactly 0 in rational mode.
  double max_scaled_residual = 0.0;
};

template <class Scalar>
using DeterminingVerdict = std::variant<Determining<Scalar>, NotDetermining<Scalar>>;

template <class Scalar>
bool is_determining_branch(const DeterminingVerdict<Scalar>& v) {
  return std::holds_alternative<Determining<Scalar>>(v);
}

// Stability constant of the reconstruction inequality:
// B = max_{(alpha,j)} sum_p |Delta^{-T}[(alpha,j), p]|, the max column
// abs-sum of Delta^{-1}.
template <class Scalar>
Scalar stability_constant(const MomentMatrix<Scalar>& mm) {
  MatrixX<Scalar> inv;
  if constexpr (is_rational_v<Scalar>) {
    inv = exactlin::inverse<Scalar>(mm.entries);
  } else {
    Eigen::FullPivLU<MatrixX<double>> lu(mm.entries);
    if (!lu.isInvertible())
      throw SingularMatrixError("stability_constant: singular matrix of rank " + std::to_string(lu.rank()),
                                static_cast<int>(lu.rank()));
    inv = lu.inverse();
  }
  Scalar best = scalar_from_int<Scalar>(0);
  for (Eigen::Index c = 0; c < inv.cols(); ++c) {
    Scalar s = scalar_from_int<Scalar>(0);
    for (Eigen::Index r = 0; r < inv.rows(); ++r) s += rat_abs(inv(r, c));
    if (s > best) best = s;
  }
  return best;
}

namespace detail {

template <class Scalar>
double scaled_certificate_residual(const AnnihilatorForm<Scalar>& phi, const DirectionSet<Scalar>& lambda) {
  double norm = phi.max_abs_coeff();
  if (norm == 0) return 0;
  double worst = 0;
  for (const auto& pr : lambda.pairs) {
    double xin = 0, etan = 0;
    for (Eigen::Index i = 0; i < pr.xi.size(); ++i) xin += to_double(pr.xi(i)) * to_double(pr.xi(i));
    for (Eigen::Index i = 0; i < pr.eta.size(); ++i) etan += to_double(pr.eta(i)) * to_double(pr.eta(i));
    xin = std::sqrt(xin);
    etan = std::sqrt(etan);
    double scale = norm * std::pow(std::max(1.0, xin), lambda.k) * std::max(1.0, etan);
    worst = std::max(worst, std::abs(to_double(phi.evaluate(pr.xi, pr.eta))) / scale);
  }
  return worst;
}

// First kernel vector of the evaluation matrix, i.e. a form vanishing on all
// of Lambda. Exact in rational mode, smallest right singular vector in float.
template <class Scalar>
AnnihilatorForm<Scalar> kernel_certificate(const DirectionSet<Scalar>& lambda) {
  AnnihilatorForm<Scalar> phi;
  phi.n = lambda.n;
  phi.m = lambda.m;
  phi.k = lambda.k;
  phi.basis = enumerate_degree_k(lambda.n, lambda.k);
  MatrixX<Scalar> e = evaluation_matrix<Scalar>(lambda);
  if constexpr (is_rational_v<Scalar>) {
    MatrixX<Scalar> ker = exactlin::kernel<Scalar>(e);
    if (ker.cols() == 0) throw std::logic_error("kernel_certificate called on a determining set");
    phi.coeffs = ker.col(0);
  } else {
    Eigen::JacobiSVD<MatrixX<double>> svd(e, Eigen::ComputeFullV);
    phi.coeffs = svd.matrixV().col(svd.matrixV().cols() - 1);
  }
  phi.normalize();
  return phi;
}

// Greedily selects, in ascending id order, pairs whose evaluation rows are
// independent of those already chosen.
template <class Scalar>
std::vector<int> first_independent_selection(const DirectionSet<Scalar>& lambda, int target, double tol) {
  const IndexBasis basis = enumerate_degree_k(lambda.n, lambda.k);
  MatrixX<Scalar> a = form_value_matrix<Scalar>(basis, lambda.m, lambda.pairs);
  std::vector<int> chosen;
  MatrixX<Scalar> sub(a.rows(), 0);
  int rank_so_far = 0;
  for (int id = 0; id < lambda.size() && static_cast<int>(chosen.size()) < target; ++id) {
    MatrixX<Scalar> trial(a.rows(), sub.cols() + 1);
    trial.leftCols(sub.cols()) = sub;
    trial.col(sub.cols()) = a.col(id);
    int r = matrix_rank<Scalar>(trial, tol);
    if (r > rank_so_far) {
      rank_so_far = r;
      sub = std::move(trial);
      chosen.push_back(id);
    }
  }
  return chosen;
}

template <class Scalar>
Determining<Scalar> make_determining(const DirectionSet<Scalar>& lambda, std::vector<int> selection, int swaps) {
  std::vector<DirectionPair<Scalar>> pts;
  pts.reserve(selection.size());
  for (int id : selection) pts.push_back(lambda.pairs[static_cast<std::size_t>(id)]);
  MomentMatrix<Scalar> mm = build_moment_matrix<Scalar>(std::move(pts), lambda.n, lambda.m, lambda.k);
  Scalar b = stability_constant<Scalar>(mm);
  return Determining<Scalar>{std::move(selection), std::move(mm), std::move(b), swaps};
}

} // namespace detail

// Theorem-1 decision via the evaluation-matrix rank test: Lambda is
// determining iff E has full column rank m*k_n. The Determining branch
// carries a lowest-id full-rank selection; the NotDetermining branch a
// kernel certificate.
template <class Scalar>
DeterminingVerdict<Scalar> is_determining(const DirectionSet<Scalar>& lambda, double tol = kDefaultRankTol) {
  lambda.validate();
  if (lambda.size() == 0) throw std::invalid_argument("is_determining: empty Lambda");
  const int dim = static_cast<int>(enumerate_degree_k(lambda.n, lambda.k).count()) * lambda.m;
  MatrixX<Scalar> e = evaluation_matrix<Scalar>(lambda);
  if (matrix_rank<Scalar>(e, tol) == dim) {
    std::vector<int> sel = detail::first_independent_selection<Scalar>(lambda, dim, tol);
    assert(static_cast<int>(sel.size()) == dim);
    return detail::make_determining<Scalar>(lambda, std::move(sel), 0);
  }
  NotDetermining<Scalar> nd{detail::kernel_certificate<Scalar>(lambda), 0.0};
  nd.max_scaled_residual = detail::scaled_certificate_residual<Scalar>(nd.certificate, lambda);
  return nd;
}

namespace detail {

struct PivotStructure {
  std::vector<int> rows; // original row indices, in pivot order
  std::vector<int> cols; // original col indices, in pivot order
};

// Gaussian elimination recording original pivot positions: columns are
// scanned in ordinal order, and within a column the first remaining row (in
// row-lex order) with a nonzero entry is taken. det A[rows, cols] != 0.
template <class Scalar>
PivotStructure greedy_pivots(MatrixX<Scalar> a, double float_tol) {
  PivotStructure ps;
  std::vector<bool> row_used(static_cast<std::size_t>(a.rows()), false);
  double zero_cut = 0;
  if constexpr (!is_rational_v<Scalar>) {
    double mx = a.rows() * a.cols() == 0 ? 0 : a.cwiseAbs().maxCoeff();
    zero_cut = float_tol * mx;
  }
  auto nonzero = [&](const Scalar& x) {
    if constexpr (is_rational_v<Scalar>)
      return x != Scalar(0);
    else
      return std::abs(x) > zero_cut;
  };
  for (Eigen::Index c = 0; c < a.cols(); ++c) {
    Eigen::Index piv = -1;
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      if (!row_used[static_cast<std::size_t>(r)] && nonzero(a(r, c))) {
        piv = r;
        break;
      }
    }
    if (piv < 0) continue;
    ps.rows.push_back(static_cast<int>(piv));
    ps.cols.push_back(static_cast<int>(c));
    row_used[static_cast<std::size_t>(piv)] = true;
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      if (!row_used[static_cast<std::size_t>(r)] && a(r, c) != Scalar(0))
        a.row(r) -= (a(r, c) / a(piv, c)) * a.row(piv);
    }
  }
  return ps;
}

// Cofactor expansion of the bordered minor along its variable column: the
// (l+1)x(l+1) submatrix on rows R u {r'} and columns C u {c'} with column c'
// replaced by the form monomials. The r' coefficient is +-det A[R, C] != 0.
template <class Scalar>
AnnihilatorForm<Scalar> bordered_minor_form(const MatrixX<Scalar>& a, const IndexBasis& basis, int m,
                                            const std::vector<int>& core_rows, const std::vector<int>& core_cols,
                                            int border_row, int border_col) {
  std::vector<int> rows = core_rows;
  rows.push_back(border_row);
  std::sort(rows.begin(), rows.end());
  std::vector<int> cols = core_cols;
  std::sort(cols.begin(), cols.end());

  AnnihilatorForm<Scalar> phi;
  phi.n = basis.n;
  phi.m = m;
  phi.k = basis.k;
  phi.basis = basis;
  phi.coeffs = VectorX<Scalar>::Zero(static_cast<Eigen::Index>(basis.count()) * m);

  const int l = static_cast<int>(cols.size());
  const int var_col_pos = l; // variable column sits after the sorted core columns
  for (int i = 0; i <= l; ++i) {
    MatrixX<Scalar> minor(l, l);
    int mr = 0;
    for (int r = 0; r <= l; ++r) {
      if (r == i) continue;
      for (int c = 0; c < l; ++c) minor(mr, c) = a(rows[static_cast<std::size_t>(r)], cols[static_cast<std::size_t>(c)]);
      ++mr;
    }
    Scalar cof = determinant<Scalar>(minor);
    if ((i + var_col_pos) % 2 != 0) cof = -cof;
    phi.coeffs(rows[static_cast<std::size_t>(i)]) += cof;
  }
  (void)border_col;
  return phi;
}

} // namespace detail

// The augmentation loop of the (i) => (ii) proof: keep a working set of
// m*k_n points, and while its matrix is rank deficient build the bordered
// annihilator Phi, scan Lambda for a pair where Phi does not vanish, and
// swap that pair in (the rank strictly increases each swap). Terminates
// with a nonsingular selection or with Phi vanishing on all of Lambda.
// Working sets shorter than m*k_n are padded cyclically; duplicated columns
// keep the matrix singular, so undersized Lambda always exits with a
// certificate.
template <class Scalar>
DeterminingVerdict<Scalar> greedy_select(const DirectionSet<Scalar>& lambda, double tol = kDefaultRankTol) {
  lambda.validate();
  if (lambda.size() == 0) throw std::invalid_argument("greedy_select: empty Lambda");
  const IndexBasis basis = enumerate_degree_k(lambda.n, lambda.k);
  const int dim = basis.count() * lambda.m;

  std::vector<int> working(static_cast<std::size_t>(dim));
  for (int i = 0; i < dim; ++i) working[static_cast<std::size_t>(i)] = i % lambda.size();

  auto working_points = [&] {
    std::vector<DirectionPair<Scalar>> pts;
    pts.reserve(working.size());
    for (int id : working) pts.push_back(lambda.pairs[static_cast<std::size_t>(id)]);
    return pts;
  };

  auto value_is_zero = [&](const Scalar& v, const DirectionPair<Scalar>& pr, double coeff_norm, int k) {
    if constexpr (is_rational_v<Scalar>) {
      (void)pr;
      (void)coeff_norm;
      (void)k;
      return v == Scalar(0);
    } else {
      double xin = pr.xi.norm(), etan = pr.eta.norm();
      double scale = coeff_norm * std::pow(std::max(1.0, xin), k) * std::max(1.0, etan);
      return std::abs(v) <= 1e-8 * scale;
    }
  };

  int swaps = 0;
  for (;;) {
    MatrixX<Scalar> a = form_value_matrix<Scalar>(basis, lambda.m, working_points());
    detail::PivotStructure ps = detail::greedy_pivots<Scalar>(a, tol);
    const int l = static_cast<int>(ps.rows.size());
    if (l == dim) return detail::make_determining<Scalar>(lambda, working, swaps);

    std::vector<bool> row_in(static_cast<std::size_t>(dim), false), col_in(static_cast<std::size_t>(dim), false);
    for (int r : ps.rows) row_in[static_cast<std::size_t>(r)] = true;
    for (int c : ps.cols) col_in[static_cast<std::size_t>(c)] = true;
    int border_row = 0, border_col = 0;
    while (row_in[static_cast<std::size_t>(border_row)]) ++border_row;
    while (col_in[static_cast<std::size_t>(border_col)]) ++border_col;

    AnnihilatorForm<Scalar> phi =
        detail::bordered_minor_form<Scalar>(a, basis, lambda.m, ps.rows, ps.cols, border_row, border_col);
    assert(!phi.is_zero_form());

    double coeff_norm = phi.max_abs_coeff();
    int found = -1;
    for (int id = 0; id < lambda.size(); ++id) {
      const auto& pr = lambda.pairs[static_cast<std::size_t>(id)];
      Scalar v = phi.evaluate(pr.xi, pr.eta);
      if (!value_is_zero(v, pr, coeff_norm, lambda.k)) {
        found = id;
        break;
      }
    }
    if (found < 0) {
      phi.normalize();
      NotDetermining<Scalar> nd{std::move(phi), 0.0};
      nd.max_scaled_residual = detail::scaled_certificate_residual<Scalar>(nd.certificate, lambda);
      return nd;
    }
    working[static_cast<std::size_t>(border_col)] = found;
    ++swaps;
  }
}

// Greedy volume maximization over the row-scaled matrix: each step takes the
// (row, point) pair maximizing the absolute bordered minor, which equals the
// previous minor times the largest Schur-complement entry; ties go to the
// lowest point id, then the lowest row. Selection ids are reported ascending.
template <class Scalar>
DeterminingVerdict<Scalar> select_well_conditioned(const DirectionSet<Scalar>& lambda,
                                                   double tol = kDefaultRankTol) {
  DeterminingVerdict<Scalar> base = is_determining<Scalar>(lambda, tol);
  if (!is_determining_branch(base)) return base;

  const IndexBasis basis = enumerate_degree_k(lambda.n, lambda.k);
  const int dim = basis.count() * lambda.m;
  MatrixX<Scalar> work = form_value_matrix<Scalar>(basis, lambda.m, lambda.pairs);
  for (int a_pos = 0; a_pos < basis.count(); ++a_pos) {
    Scalar factor = scalar_from_int<Scalar>(
        static_cast<long>(multinomial_coefficient(lambda.k, basis.indices[static_cast<std::size_t>(a_pos)])));
    for (int j = 0; j < lambda.m; ++j) work.row(a_pos * lambda.m + j) *= factor;
  }

  std::vector<bool> row_used(static_cast<std::size_t>(dim), false),
      col_used(static_cast<std::size_t>(lambda.size()), false);
  std::vector<int> selection;
  for (int step = 0; step < dim; ++step) {
    int best_r = -1, best_c = -1;
    Scalar best_abs = scalar_from_int<Scalar>(0);
    for (int c = 0; c < lambda.size(); ++c) {
      if (col_used[static_cast<std::size_t>(c)]) continue;
      for (int r = 0; r < dim; ++r) {
        if (row_used[static_cast<std::size_t>(r)]) continue;
        Scalar mag = rat_abs(work(r, c));
        if (mag > best_abs) {
          best_abs = mag;
          best_r = r;
          best_c = c;
        }
      }
    }
    if (best_r < 0 || best_abs == Scalar(0)) {
      // Cannot happen: is_determining certified full column rank. In float
      // mode extreme cancellation could still strand us; fail loudly.
      throw SingularMatrixError("select_well_conditioned: pivot exhausted at step " + std::to_string(step), step);
    }
    selection.push_back(best_c);
    row_used[static_cast<std::size_t>(best_r)] = true;
    col_used[static_cast<std::size_t>(best_c)] = true;
    for (int r = 0; r < dim; ++r) {
      if (row_used[static_cast<std::size_t>(r)]) continue;
      if (work(r, best_c) == Scalar(0)) continue;
      Scalar factor = work(r, best_c) / work(best_r, best_c);
      for (int c = 0; c < lambda.size(); ++c) {
        if (col_used[static_cast<std::size_t>(c)]) continue;
        work(r, c) -= factor * work(best_r, c);
      }
    }
  }
  std::sort(selection.begin(), selection.end());
  return detail::make_determining<Scalar>(lambda, std::move(selection), 0);
}

// Remark-3 shift: multiplies every monomial of phi by xi_1^{k_target - k},
// embedding an order-k form into order k_target.
template <class Scalar>
AnnihilatorForm<Scalar> annihilator_order_shift(const AnnihilatorForm<Scalar>& phi, int k_target) {
  if (k_target < phi.k)
    throw std::invalid_argument("annihilator_order_shift: k_target " + std::to_string(k_target) +
                                " below form order " + std::to_string(phi.k));
  if (k_target == phi.k) return phi;
  const int shift = k_target - phi.k;
  AnnihilatorForm<Scalar> out;
  out.n = phi.n;
  out.m = phi.m;
  out.k = k_target;
  out.basis = enumerate_degree_k(phi.n, k_target);
  out.coeffs = VectorX<Scalar>::Zero(static_cast<Eigen::Index>(out.basis.count()) * phi.m);
  for (int a_pos = 0; a_pos < phi.basis.count(); ++a_pos) {
    std::vector<int> exps = phi.basis.indices[static_cast<std::size_t>(a_pos)].exponents();
    exps[0] += shift;
    int new_pos = out.basis.position(MultiIndex(exps));
    for (int j = 0; j < phi.m; ++j) out.coeffs(new_pos * phi.m + j) = phi.coeffs(a_pos * phi.m + j);
  }
  return out;
}

} // namespace dirreg
