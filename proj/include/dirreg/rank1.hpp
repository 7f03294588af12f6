#pragma once

#include "dirreg/momentmatrix.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace dirreg {

struct Determining1 {};

template <class Scalar>
struct Rank1Witness {
  VectorX<Scalar> u; // nonzero, <u,xi><v,eta> = 0 on all of Lambda
  VectorX<Scalar> v; // nonzero
};

template <class Scalar>
using Rank1Verdict = std::variant<Determining1, Rank1Witness<Scalar>>;

template <class Scalar>
bool is_rank1_determining_branch(const Rank1Verdict<Scalar>& v) {
  return std::holds_alternative<Determining1>(v);
}

template <class Scalar>
class Rank1NotDeterminingError : public std::runtime_error {
 public:
  Rank1NotDeterminingError(std::string what, Rank1Witness<Scalar> witness)
      : std::runtime_error(std::move(what)), witness_(std::move(witness)) {}
  const Rank1Witness<Scalar>& witness() const { return witness_; }

 private:
  Rank1Witness<Scalar> witness_;
};

namespace detail {

template <class Scalar>
bool scalar_is_zero(const Scalar& v, double scale) {
  if constexpr (is_rational_v<Scalar>)
    return v == Scalar(0);
  else
    return std::abs(v) <= 1e-10 * std::max(1.0, scale);
}

// First vector of a deterministic kernel basis of the matrix whose rows are
// the given vectors; empty when they span the whole space.
template <class Scalar>
VectorX<Scalar> orthogonal_witness(const std::vector<VectorX<Scalar>>& rows, int dim, double tol) {
  MatrixX<Scalar> a(static_cast<Eigen::Index>(rows.size()), dim);
  for (std::size_t i = 0; i < rows.size(); ++i) a.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  if constexpr (is_rational_v<Scalar>) {
    MatrixX<Scalar> ker = exactlin::kernel<Scalar>(a);
    if (ker.cols() == 0) return VectorX<Scalar>();
    VectorX<Scalar> u = ker.col(0);
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      if (u(i) != Scalar(0)) {
        u /= u(i);
        break;
      }
    }
    return u;
  } else {
    if (rows.empty()) {
      VectorX<double> e = VectorX<double>::Zero(dim);
      e(0) = 1;
      return e;
    }
    Eigen::JacobiSVD<MatrixX<double>> svd(a, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) > tol * sv(0)) ++rank;
    if (rank == dim) return VectorX<double>();
    return svd.matrixV().col(dim - 1);
  }
}

} // namespace detail

// Theorem-2 (i) test. Lambda fails to be rank-1 determining exactly when it
// splits as S u T with the S xi-vectors inside a hyperplane u-perp and the
// remaining eta-vectors inside v-perp. Candidate hyperplane normals come
// from spans of at most n-1 of Lambda's xi vectors (the empty span covers
// zero-xi pairs and the subspace degeneracies); a symmetric pass swaps the
// roles of xi and eta. Deterministic: subsets are scanned by size then by
// pair ids, and the first witness wins.
template <class Scalar>
Rank1Verdict<Scalar> is_rank1_determining(const DirectionSet<Scalar>& lambda, double tol = kDefaultRankTol) {
  lambda.validate();
  if (lambda.size() == 0) throw std::invalid_argument("is_rank1_determining: empty Lambda");
  const int n = lambda.n, m = lambda.m;
  const int count = lambda.size();

  auto xi_of = [&](int id) { return lambda.pairs[static_cast<std::size_t>(id)].xi; };
  auto eta_of = [&](int id) { return lambda.pairs[static_cast<std::size_t>(id)].eta; };

  double xi_scale = 0, eta_scale = 0;
  for (const auto& pr : lambda.pairs) {
    for (Eigen::Index i = 0; i < pr.xi.size(); ++i) xi_scale = std::max(xi_scale, std::abs(to_double(pr.xi(i))));
    for (Eigen::Index i = 0; i < pr.eta.size(); ++i) eta_scale = std::max(eta_scale, std::abs(to_double(pr.eta(i))));
  }

  // One direction of the search: candidate u from xi-subsets, v from the
  // etas left outside u-perp. `swap_roles` runs the mirrored pass.
  auto search = [&](bool swap_roles) -> std::optional<Rank1Witness<Scalar>> {
    const int dim_u = swap_roles ? m : n;
    const int dim_v = swap_roles ? n : m;
    auto first_of = [&](int id) { return swap_roles ? eta_of(id) : xi_of(id); };
    auto second_of = [&](int id) { return swap_roles ? xi_of(id) : eta_of(id); };
    const double first_scale = swap_roles ? eta_scale : xi_scale;

    std::vector<int> subset;
    std::optional<Rank1Witness<Scalar>> found;

    auto try_candidate = [&](const VectorX<Scalar>& u) -> bool {
      if (u.size() == 0) return false;
      std::vector<VectorX<Scalar>> outside;
      for (int id = 0; id < count; ++id) {
        Scalar dot = u.dot(first_of(id));
        if (!detail::scalar_is_zero<Scalar>(dot, first_scale)) outside.push_back(second_of(id));
      }
      VectorX<Scalar> v = detail::orthogonal_witness<Scalar>(outside, dim_v, tol);
      if (v.size() == 0) return false;
      if (swap_roles)
        found = Rank1Witness<Scalar>{v, u};
      else
        found = Rank1Witness<Scalar>{u, v};
      return true;
    };

    auto rec = [&](auto&& self, int start, int remaining) -> bool {
      if (remaining == 0) {
        std::vector<VectorX<Scalar>> span_rows;
        for (int id : subset) span_rows.push_back(first_of(id));
        return try_candidate(detail::orthogonal_witness<Scalar>(span_rows, dim_u, tol));
      }
      for (int id = start; id < count; ++id) {
        subset.push_back(id);
        if (self(self, id + 1, remaining - 1)) return true;
        subset.pop_back();
      }
      return false;
    };

    for (int size = 0; size <= dim_u - 1; ++size) {
      if (rec(rec, 0, size)) return found;
    }
    return std::nullopt;
  };

  if (auto w = search(false)) return *w;
  if (auto w = search(true)) return *w;
  return Determining1{};
}

template <class Scalar>
struct MinimalSubset {
  DirectionSet<Scalar> subset;  // re-indexed ids 0..size-1
  std::vector<int> kept_ids;    // original positions in Lambda
};

template <class Scalar>
DirectionSet<Scalar> subset_direction_set(const DirectionSet<Scalar>& lambda, const std::vector<int>& ids) {
  DirectionSet<Scalar> out;
  out.n = lambda.n;
  out.m = lambda.m;
  out.k = lambda.k;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    DirectionPair<Scalar> pr = lambda.pairs[static_cast<std::size_t>(ids[i])];
    pr.id = static_cast<int>(i);
    out.pairs.push_back(std::move(pr));
  }
  return out;
}

// Greedy pruning, lowest id first; the result is inclusion-minimal (the
// finite-subset reduction of the Noetherian argument, made constructive).
template <class Scalar>
MinimalSubset<Scalar> minimal_determining_subset(const DirectionSet<Scalar>& lambda, double tol = kDefaultRankTol) {
  Rank1Verdict<Scalar> verdict = is_rank1_determining<Scalar>(lambda, tol);
  if (!is_rank1_determining_branch(verdict))
    throw Rank1NotDeterminingError<Scalar>("minimal_determining_subset: Lambda is not rank-1 determining",
                                           std::get<Rank1Witness<Scalar>>(verdict));
  std::vector<int> kept(static_cast<std::size_t>(lambda.size()));
  for (int i = 0; i < lambda.size(); ++i) kept[static_cast<std::size_t>(i)] = i;
  for (int id = 0; id < lambda.size(); ++id) {
    std::vector<int> trial;
    for (int x : kept)
      if (x != id) trial.push_back(x);
    if (trial.empty()) continue;
    if (is_rank1_determining_branch(is_rank1_determining<Scalar>(subset_direction_set(lambda, trial), tol)))
      kept = std::move(trial);
  }
  return {subset_direction_set(lambda, kept), kept};
}

struct EpsilonEstimate {
  double value = 0;   // min over all probed (u, v) of F
  double gap = 0;     // refinement slack; F >= value * (1 - gap) is the working bound
  int l = 0;
  VectorX<double> u_min;
  VectorX<double> v_min;
};

namespace detail {

inline VectorX<double> sphere_point(const std::vector<double>& angles, int dim) {
  VectorX<double> x(dim);
  if (dim == 1) {
    x(0) = angles.empty() || angles[0] < M_PI ? 1.0 : -1.0;
    return x;
  }
  double sin_prod = 1;
  for (int i = 0; i < dim - 1; ++i) {
    x(i) = sin_prod * std::cos(angles[static_cast<std::size_t>(i)]);
    sin_prod *= std::sin(angles[static_cast<std::size_t>(i)]);
  }
  x(dim - 1) = sin_prod;
  return x;
}

inline int angle_count(int dim) { return dim <= 1 ? 1 : dim - 1; }

} // namespace detail

// F(u, v) = sum over Lambda of |<eta,v>| |<xi,u>|^l with the 0^0 = 1
// convention at l = 0.
template <class Scalar>
double rank1_objective(const DirectionSet<Scalar>& lambda, int l, const VectorX<double>& u,
                       const VectorX<double>& v) {
  double acc = 0;
  for (const auto& pr : lambda.pairs) {
    double du = 0, dv = 0;
    for (int i = 0; i < lambda.n; ++i) du += to_double(pr.xi(i)) * u(i);
    for (int j = 0; j < lambda.m; ++j) dv += to_double(pr.eta(j)) * v(j);
    double pw = 1;
    for (int e = 0; e < l; ++e) pw *= std::abs(du);
    acc += std::abs(dv) * pw;
  }
  return acc;
}

// Heuristic-global minimization of F over the product of unit spheres:
// full angular grid seeding, then a deterministic shrinking pattern search
// from the best seeds. value is the minimum over every probed point; gap
// records how far refinement moved past the grid stage (floored at 1e-6).
template <class Scalar>
EpsilonEstimate epsilon_constant(const DirectionSet<Scalar>& lambda, int l, int grid = 16,
                                 double tol = kDefaultRankTol) {
  lambda.validate();
  if (l < 0) throw std::invalid_argument("epsilon_constant: l must be >= 0");
  if (grid < 8) throw std::invalid_argument("epsilon_constant: grid must be >= 8");
  Rank1Verdict<Scalar> verdict = is_rank1_determining<Scalar>(lambda, tol);
  if (!is_rank1_determining_branch(verdict))
    throw Rank1NotDeterminingError<Scalar>("epsilon_constant: epsilon = 0, Lambda is not rank-1 determining",
                                           std::get<Rank1Witness<Scalar>>(verdict));

  const int au = detail::angle_count(lambda.n), av = detail::angle_count(lambda.m);
  const int total_angles = au + av;

  auto eval_at = [&](const std::vector<double>& angles) {
    std::vector<double> ua(angles.begin(), angles.begin() + au), va(angles.begin() + au, angles.end());
    return rank1_objective(lambda, l, detail::sphere_point(ua, lambda.n), detail::sphere_point(va, lambda.m));
  };

  // Grid stage.
  std::vector<std::pair<double, std::vector<double>>> seeds;
  std::vector<double> angles(static_cast<std::size_t>(total_angles), 0.0);
  auto sweep = [&](auto&& self, int pos) -> void {
    if (pos == total_angles) {
      seeds.emplace_back(eval_at(angles), angles);
      return;
    }
    for (int t = 0; t < grid; ++t) {
      angles[static_cast<std::size_t>(pos)] = 2.0 * M_PI * t / grid;
      self(self, pos + 1);
    }
  };
  sweep(sweep, 0);
  std::sort(seeds.begin(), seeds.end(),
            [](const auto& a, const auto& b) { return a.first != b.first ? a.first < b.first : a.second < b.second; });
  double grid_min = seeds.front().first;

  // Pattern-search refinement from the best seeds.
  double best = grid_min;
  std::vector<double> best_angles = seeds.front().second;
  const std::size_t nseeds = std::min<std::size_t>(seeds.size(), 12);
  for (std::size_t si = 0; si < nseeds; ++si) {
    std::vector<double> cur = seeds[si].second;
    double cur_val = seeds[si].first;
    double step = 2.0 * M_PI / grid;
    while (step > 1e-9) {
      bool improved = false;
      for (int a = 0; a < total_angles; ++a) {
        for (double sgn : {1.0, -1.0}) {
          std::vector<double> trial = cur;
          trial[static_cast<std::size_t>(a)] += sgn * step;
          double v = eval_at(trial);
          if (v < cur_val) {
            cur_val = v;
            cur = std::move(trial);
            improved = true;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
    if (cur_val < best) {
      best = cur_val;
      best_angles = cur;
    }
  }

  EpsilonEstimate est;
  est.l = l;
  est.value = best;
  est.gap = std::max(1e-6, (grid_min - best) / std::max(best, std::numeric_limits<double>::min()));
  std::vector<double> ua(best_angles.begin(), best_angles.begin() + au),
      va(best_angles.begin() + au, best_angles.end());
  est.u_min = detail::sphere_point(ua, lambda.n);
  est.v_min = detail::sphere_point(va, lambda.m);
  return est;
}

struct PropagationReport {
  int samples = 0;
  int violations = 0;
  double worst_margin = std::numeric_limits<double>::infinity(); // min of F - threshold
  bool pass = false;
};

// Checks F(u, v) >= eps_hat (1 - gap) |v| |u|^l on the given samples, the
// finite-dimensional core of the Carleman/Beurling propagation argument.
template <class Scalar>
PropagationReport propagation_inequality_check(const DirectionSet<Scalar>& lambda, int l,
                                               const EpsilonEstimate& eps,
                                               const std::vector<std::pair<VectorX<double>, VectorX<double>>>&
                                                   samples) {
  PropagationReport rep;
  rep.samples = static_cast<int>(samples.size());
  rep.pass = true;
  for (const auto& [u, v] : samples) {
    double f = rank1_objective(lambda, l, u, v);
    double norm_term = v.norm();
    for (int e = 0; e < l; ++e) norm_term *= u.norm();
    double threshold = eps.value * (1 - eps.gap) * norm_term;
    double margin = f - threshold;
    rep.worst_margin = std::min(rep.worst_margin, margin);
    if (margin < -1e-12 * std::max(1.0, threshold)) {
      ++rep.violations;
      rep.pass = false;
    }
  }
  return rep;
}

// Carleman/Beurling weight sequence {M_k}. gevrey(nu) is M_k = (k!)^nu;
// factorial is the nu = 1 case (the real-analytic class).
struct WeightSequence {
  enum class Family { Gevrey, Factorial, Custom };
  Family family = Family::Factorial;
  double nu = 1.0;
  std::vector<Rational> custom; // M_0..M_K when family == Custom
  int K = 0;

  static WeightSequence gevrey(double nu, int K) {
    if (nu < 1) throw std::invalid_argument("gevrey: nu must be >= 1");
    WeightSequence w;
    w.family = Family::Gevrey;
    w.nu = nu;
    w.K = K;
    return w;
  }
  static WeightSequence factorial(int K) {
    WeightSequence w;
    w.family = Family::Factorial;
    w.K = K;
    return w;
  }
  static WeightSequence custom_list(std::vector<Rational> values) {
    WeightSequence w;
    w.family = Family::Custom;
    w.K = static_cast<int>(values.size()) - 1;
    w.custom = std::move(values);
    return w;
  }

  double log_value(int k) const {
    switch (family) {
      case Family::Gevrey:
        return nu * std::lgamma(k + 1.0);
      case Family::Factorial:
        return std::lgamma(k + 1.0);
      case Family::Custom:
      default: {
        double v = to_double(custom[static_cast<std::size_t>(k)]);
        return v > 0 ? std::log(v) : -std::numeric_limits<double>::infinity();
      }
    }
  }
};

struct WeightConditionStatus {
  bool pass = true;
  int first_fail = -1;
};

struct WeightReport {
  int K = 0;
  WeightConditionStatus growth;     // M_0 = 1 and M_k >= k!
  WeightConditionStatus increasing; // M_k^{1/k} strictly increasing
  WeightConditionStatus ratio;      // exists C with M_{k+1} <= C^k M_k
  double smallest_C = 0;            // max over 1 <= k < K of (M_{k+1}/M_k)^{1/k}
  bool all_pass = false;
  std::string note;
};

// Checks the three admissibility conditions up to K. Custom rational lists
// are compared exactly (cross-multiplied integer powers); the gevrey and
// factorial families are checked in log space where the margins are large.
inline WeightReport validate_weight_sequence(const WeightSequence& w) {
  if (w.K < 2) throw std::invalid_argument("validate_weight_sequence: K must be >= 2");
  if (w.family == WeightSequence::Family::Custom && static_cast<int>(w.custom.size()) != w.K + 1)
    throw std::invalid_argument("validate_weight_sequence: custom list must have K+1 values");

  WeightReport rep;
  rep.K = w.K;
  const bool exact = w.family == WeightSequence::Family::Custom;

  auto fail = [](WeightConditionStatus& st, int k) {
    if (st.pass) {
      st.pass = false;
      st.first_fail = k;
    }
  };

  // (M_k > k!): M_0 = 1 and M_k >= k!.
  {
    mpz_class kfact(1);
    for (int k = 0; k <= w.K; ++k) {
      if (k > 0) kfact *= k;
      if (exact) {
        const Rational& mk = w.custom[static_cast<std::size_t>(k)];
        if (k == 0 ? mk != 1 : mk < Rational(kfact)) fail(rep.growth, k);
      } else {
        double lhs = w.log_value(k), rhs = std::lgamma(k + 1.0);
        if (k == 0 ? lhs != 0.0 : lhs < rhs) fail(rep.growth, k);
      }
    }
  }

  // (M_k inc): M_k^{1/k} strictly increasing, i.e. M_k^{k+1} < M_{k+1}^k.
  for (int k = 1; k < w.K; ++k) {
    bool ok;
    if (exact) {
      const Rational& a = w.custom[static_cast<std::size_t>(k)];
      const Rational& b = w.custom[static_cast<std::size_t>(k + 1)];
      if (a <= 0 || b <= 0) {
        ok = false;
      } else {
        mpz_class lhs, rhs, t1, t2;
        mpz_pow_ui(lhs.get_mpz_t(), a.get_num().get_mpz_t(), static_cast<unsigned long>(k + 1));
        mpz_pow_ui(t1.get_mpz_t(), b.get_den().get_mpz_t(), static_cast<unsigned long>(k));
        lhs *= t1;
        mpz_pow_ui(rhs.get_mpz_t(), b.get_num().get_mpz_t(), static_cast<unsigned long>(k));
        mpz_pow_ui(t2.get_mpz_t(), a.get_den().get_mpz_t(), static_cast<unsigned long>(k + 1));
        rhs *= t2;
        ok = lhs < rhs;
      }
    } else {
      ok = w.log_value(k) / k < w.log_value(k + 1) / (k + 1);
    }
    if (!ok) fail(rep.increasing, k);
  }

  // (M_k diff): the k = 0 instance M_1 <= C^0 M_0 = M_0 is C-independent and
  // checked on its own; the smallest admissible C comes from k >= 1.
  {
    if (w.log_value(1) > w.log_value(0)) fail(rep.ratio, 0);
    double log_c = 0;
    for (int k = 1; k < w.K; ++k) {
      double lk = w.log_value(k), lk1 = w.log_value(k + 1);
      if (!std::isfinite(lk) || !std::isfinite(lk1)) {
        fail(rep.ratio, k);
        continue;
      }
      log_c = std::max(log_c, (lk1 - lk) / k);
    }
    rep.smallest_C = std::exp(log_c);
  }

  rep.all_pass = rep.growth.pass && rep.increasing.pass && rep.ratio.pass;
  if (w.family == WeightSequence::Family::Factorial ||
      (w.family == WeightSequence::Family::Gevrey && w.nu == 1.0))
    rep.note = "M_k = k! defines the class of real analytic functions";
  else if (w.family == WeightSequence::Family::Gevrey)
    rep.note = "Gevrey weights M_k = (k!)^nu";
  return rep;
}

} // namespace dirreg
