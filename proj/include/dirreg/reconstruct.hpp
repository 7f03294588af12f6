#pragma once

#include "dirreg/determine.hpp"
#include "dirreg/momentmatrix.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace dirreg {

// Black-box map x -> f(x). When exact_directional is set it is used
// verbatim and finite differencing is bypassed (mandatory in rational mode,
// where stepping makes no sense).
template <class Scalar>
struct FunctionOracle {
  int m = 0;
  std::function<VectorX<Scalar>(const VectorX<Scalar>&)> evaluator;
  std::function<Scalar(const VectorX<Scalar>& x, const VectorX<Scalar>& xi, const VectorX<Scalar>& eta, int k)>
      exact_directional;
};

// Symmetric second-order central stencil for the k-th derivative: offsets
// -halfwidth..halfwidth, weights solved exactly from the moment conditions
// sum_i w_i o_i^j = k! delta_{jk}.
struct Stencil {
  int halfwidth = 0;
  std::vector<Rational> weights; // indexed offset + halfwidth
};

inline Stencil central_stencil(int k) {
  if (k < 1) throw std::invalid_argument("central_stencil: k must be >= 1");
  const int m = (k + 1) / 2; // k+1 points for even k, k+2 grid positions for odd k
  const int npts = 2 * m + 1;
  MatrixX<Rational> vand(npts, npts);
  VectorX<Rational> rhs = VectorX<Rational>::Zero(npts);
  for (int j = 0; j < npts; ++j) {
    for (int i = 0; i < npts; ++i) {
      Rational o(i - m);
      Rational pw(1);
      for (int e = 0; e < j; ++e) pw *= o;
      vand(j, i) = pw;
    }
  }
  Rational kfact(1);
  for (int i = 2; i <= k; ++i) kfact *= i;
  rhs(k) = kfact;
  Stencil s;
  s.halfwidth = m;
  VectorX<Rational> w = exactlin::solve<Rational>(vand, rhs);
  s.weights.assign(w.data(), w.data() + w.size());
  return s;
}

// Balances O(h^2) truncation against O(eps / h^k) roundoff.
inline double default_step(int k, const VectorX<double>& x) {
  return std::pow(std::numeric_limits<double>::epsilon(), 1.0 / (k + 2)) * std::max(1.0, x.norm());
}

namespace detail {

struct FdValue {
  double value = 0;
  double roundoff = 0; // eps * sum |w_i g_i| / h^k
};

inline FdValue fd_apply(const FunctionOracle<double>& oracle, const VectorX<double>& x, const VectorX<double>& xi,
                        const VectorX<double>& eta, const Stencil& s, int k, double h) {
  double acc = 0, absacc = 0;
  for (int i = -s.halfwidth; i <= s.halfwidth; ++i) {
    double w = to_double(s.weights[static_cast<std::size_t>(i + s.halfwidth)]);
    if (w == 0) continue;
    double g = oracle.evaluator(x + (i * h) * xi).dot(eta);
    acc += w * g;
    absacc += std::abs(w * g);
  }
  double hk = std::pow(h, k);
  return {acc / hk, std::numeric_limits<double>::epsilon() * absacc / hk};
}

struct FdEstimate {
  double value = 0;
  double error = 0; // Richardson truncation estimate plus roundoff
};

inline FdEstimate fd_directional(const FunctionOracle<double>& oracle, const VectorX<double>& x,
                                 const VectorX<double>& xi, const VectorX<double>& eta, int k, double h) {
  Stencil s = central_stencil(k);
  FdValue fine = fd_apply(oracle, x, xi, eta, s, k, h);
  FdValue coarse = fd_apply(oracle, x, xi, eta, s, k, 2 * h);
  return {fine.value, std::abs(fine.value - coarse.value) / 3.0 + fine.roundoff};
}

} // namespace detail

template <class Scalar>
Scalar directional_derivative(const FunctionOracle<Scalar>& oracle, const VectorX<Scalar>& x,
                              const VectorX<Scalar>& xi, const VectorX<Scalar>& eta, int k, double h) {
  if (oracle.exact_directional) return oracle.exact_directional(x, xi, eta, k);
  if constexpr (is_rational_v<Scalar>) {
    throw std::invalid_argument("directional_derivative: rational mode requires an exact directional oracle");
  } else {
    if (h <= 0) throw std::invalid_argument("directional_derivative: step h must be positive");
    return detail::fd_directional(oracle, x, xi, eta, k, h).value;
  }
}

// All order-k partials at one point, in the (ascending-lex alpha, then j)
// layout; error_bound covers the float path (stability constant times the
// worst per-point stencil estimate).
template <class Scalar>
struct DerivativeTensor {
  int k = 0;
  int m = 0;
  IndexBasis basis;
  VectorX<Scalar> values;
  VectorX<Scalar> point;
  double error_bound = 0;
  bool exact = false;

  Scalar value(const MultiIndex& alpha, int j) const { return values(basis.position(alpha) * m + j); }
};

// Literal Cramer path: u_r = sum_p (-1)^{r+p} minor_{r,p} / det * d_p.
// Retained as an independent cross-check of the elimination solve.
template <class Scalar>
VectorX<Scalar> cramer_reconstruct(const MomentMatrix<Scalar>& mm, const VectorX<Scalar>& d) {
  const Eigen::Index dim = mm.entries.rows();
  Scalar det = determinant<Scalar>(mm.entries);
  if (det == Scalar(0)) throw SingularMatrixError("cramer_reconstruct: singular matrix", matrix_rank<Scalar>(mm.entries));
  VectorX<Scalar> u = VectorX<Scalar>::Zero(dim);
  MatrixX<Scalar> minor(dim - 1, dim - 1);
  for (Eigen::Index r = 0; r < dim; ++r) {
    for (Eigen::Index p = 0; p < dim; ++p) {
      Eigen::Index mr = 0;
      for (Eigen::Index rr = 0; rr < dim; ++rr) {
        if (rr == r) continue;
        Eigen::Index mc = 0;
        for (Eigen::Index pp = 0; pp < dim; ++pp) {
          if (pp == p) continue;
          minor(mr, mc) = mm.entries(rr, pp);
          ++mc;
        }
        ++mr;
      }
      Scalar cof = dim == 1 ? scalar_from_int<Scalar>(1) : determinant<Scalar>(minor);
      if ((r + p) % 2 != 0) cof = -cof;
      u(r) += cof / det * d(p);
    }
  }
  return u;
}

// Inverts the directional system d_p = sum_{(alpha,j)} (k!/alpha!)
// xi^(p)^alpha eta_j^(p) u_{(alpha,j)} over the verdict's selection.
template <class Scalar>
DerivativeTensor<Scalar> reconstruct_partials(const FunctionOracle<Scalar>& oracle, const VectorX<Scalar>& x,
                                              const Determining<Scalar>& verdict, double h = 0) {
  const MomentMatrix<Scalar>& mm = verdict.matrix;
  const int k = mm.basis.k;
  const Eigen::Index dim = mm.entries.rows();

  DerivativeTensor<Scalar> tensor;
  tensor.k = k;
  tensor.m = mm.m;
  tensor.basis = mm.basis;
  tensor.point = x;

  VectorX<Scalar> d(dim);
  double worst_est = 0;
  if (oracle.exact_directional) {
    for (Eigen::Index p = 0; p < dim; ++p) {
      const auto& pt = mm.points[static_cast<std::size_t>(p)];
      d(p) = oracle.exact_directional(x, pt.xi, pt.eta, k);
    }
    tensor.exact = is_rational_v<Scalar>;
  } else {
    if constexpr (is_rational_v<Scalar>) {
      throw std::invalid_argument("reconstruct_partials: rational mode requires an exact directional oracle");
    } else {
      double step = h > 0 ? h : default_step(k, x);
      for (Eigen::Index p = 0; p < dim; ++p) {
        const auto& pt = mm.points[static_cast<std::size_t>(p)];
        detail::FdEstimate est = detail::fd_directional(oracle, x, pt.xi, pt.eta, k, step);
        d(p) = est.value;
        worst_est = std::max(worst_est, est.error);
      }
    }
  }

  tensor.values = solve<Scalar>(mm, d);
  tensor.error_bound = tensor.exact ? 0.0 : to_double(verdict.stability_B) * worst_est;

  if constexpr (is_rational_v<Scalar>) {
    if (dim <= 8) {
      VectorX<Scalar> check = cramer_reconstruct<Scalar>(mm, d);
      for (Eigen::Index i = 0; i < dim; ++i)
        if (check(i) != tensor.values(i)) throw std::logic_error("reconstruct_partials: Cramer cross-check mismatch");
    }
  }
  return tensor;
}

struct StabilityReport {
  double lhs = 0;        // max_{j,|alpha|=k} |partial^alpha f_j(x)|
  double rhs = 0;        // B * sup over Lambda of |D_xi^k <f,eta>(x)|
  bool holds = false;    // lhs <= rhs * (1 + 1e-6)
};

template <class Scalar>
StabilityReport verify_stability(const FunctionOracle<Scalar>& oracle, const VectorX<Scalar>& x,
                                 const Determining<Scalar>& verdict, const DirectionSet<Scalar>& lambda,
                                 double h = 0) {
  DerivativeTensor<Scalar> tensor = reconstruct_partials<Scalar>(oracle, x, verdict, h);
  Scalar lhs = scalar_from_int<Scalar>(0);
  for (Eigen::Index i = 0; i < tensor.values.size(); ++i) lhs = std::max<Scalar>(lhs, rat_abs(tensor.values(i)));

  double step = 0;
  if constexpr (!is_rational_v<Scalar>) step = h > 0 ? h : default_step(lambda.k, x);
  Scalar sup = scalar_from_int<Scalar>(0);
  for (const auto& pr : lambda.pairs) {
    Scalar v = directional_derivative<Scalar>(oracle, x, pr.xi, pr.eta, lambda.k, step);
    sup = std::max<Scalar>(sup, rat_abs(v));
  }
  Scalar rhs = verdict.stability_B * sup;

  StabilityReport rep;
  rep.lhs = to_double(lhs);
  rep.rhs = to_double(rhs);
  if constexpr (is_rational_v<Scalar>) {
    rep.holds = lhs <= rhs * Rational(1000001, 1000000);
  } else {
    rep.holds = rep.lhs <= rep.rhs * (1 + 1e-6);
  }
  return rep;
}

} // namespace dirreg
