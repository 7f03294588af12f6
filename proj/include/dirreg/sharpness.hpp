#pragma once

#include "dirreg/determine.hpp"
#include "dirreg/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace dirreg {

class CertificateMismatchError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// phi_.(xi) = (phi_1(xi), ..., phi_m(xi)) with each phi_j homogeneous of
// degree exactly k; the polynomial factor of the Theorem-1 counterexample.
template <class Scalar>
struct HomogeneousMap {
  int n = 0;
  int m = 0;
  int k = 0;
  std::vector<std::map<MultiIndex, Scalar>> comps;

  static HomogeneousMap from_annihilator(const AnnihilatorForm<Scalar>& phi) {
    HomogeneousMap h;
    h.n = phi.n;
    h.m = phi.m;
    h.k = phi.k;
    h.comps.resize(static_cast<std::size_t>(phi.m));
    for (int a_pos = 0; a_pos < phi.basis.count(); ++a_pos)
      for (int j = 0; j < phi.m; ++j) {
        Scalar c = phi.coeff(a_pos, j);
        if (c != Scalar(0)) h.comps[static_cast<std::size_t>(j)][phi.basis.indices[static_cast<std::size_t>(a_pos)]] = c;
      }
    h.check();
    return h;
  }

  void check() const {
    bool nonzero = false;
    for (const auto& comp : comps)
      for (const auto& [alpha, c] : comp) {
        if (alpha.degree() != k) throw std::invalid_argument("HomogeneousMap: monomial of degree != k");
        if (c != Scalar(0)) nonzero = true;
      }
    if (!nonzero) throw std::invalid_argument("HomogeneousMap: all coefficients vanish");
  }

  VectorX<Scalar> eval(const VectorX<Scalar>& x) const {
    VectorX<Scalar> out = VectorX<Scalar>::Zero(m);
    for (int j = 0; j < m; ++j)
      for (const auto& [alpha, c] : comps[static_cast<std::size_t>(j)]) out(j) += c * monomial_eval<Scalar>(x, alpha);
    return out;
  }

  // <phi_.(xi), eta>, the form the map was built from.
  Scalar form_value(const VectorX<Scalar>& xi, const VectorX<Scalar>& eta) const {
    Scalar acc = scalar_from_int<Scalar>(0);
    VectorX<Scalar> v = eval(xi);
    for (int j = 0; j < m; ++j) acc += v(j) * eta(j);
    return acc;
  }

  double max_abs_coeff() const {
    double mx = 0;
    for (const auto& comp : comps)
      for (const auto& [alpha, c] : comp) mx = std::max(mx, std::abs(to_double(c)));
    return mx;
  }

  HomogeneousMap<double> to_double_map() const {
    HomogeneousMap<double> out;
    out.n = n;
    out.m = m;
    out.k = k;
    out.comps.resize(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j)
      for (const auto& [alpha, c] : comps[static_cast<std::size_t>(j)])
        out.comps[static_cast<std::size_t>(j)][alpha] = to_double(c);
    return out;
  }
};

inline constexpr double kLogLogDomainRadius = 0.36787944117144233; // 1/e

// f(x) = ln|ln|x|| * phi_.(x) on 0 < |x| < 1/e, f(0) = 0. The factor
// ln|ln|x|| is positive there; evaluation elsewhere is rejected.
inline FunctionOracle<double> build_theorem1_counterexample(const HomogeneousMap<double>& phi) {
  phi.check();
  FunctionOracle<double> oracle;
  oracle.m = phi.m;
  oracle.evaluator = [phi](const VectorX<double>& x) -> VectorX<double> {
    double r = x.norm();
    if (r == 0) return VectorX<double>::Zero(phi.m);
    if (r >= kLogLogDomainRadius)
      throw std::domain_error("theorem1 counterexample: |x| = " + std::to_string(r) + " outside (0, 1/e)");
    return std::log(-std::log(r)) * phi.eval(x);
  };
  return oracle;
}

namespace detail {

// Fixed direction table for radius sweeps: coordinate axes plus a few mixed
// unit vectors, deterministic for a given n.
inline std::vector<VectorX<double>> sample_directions(int n) {
  std::vector<VectorX<double>> dirs;
  for (int i = 0; i < n; ++i) {
    VectorX<double> e = VectorX<double>::Zero(n);
    e(i) = 1;
    dirs.push_back(e);
  }
  if (n > 1) {
    VectorX<double> ones = VectorX<double>::Ones(n);
    dirs.push_back(ones / ones.norm());
    VectorX<double> alt(n), ramp(n);
    for (int i = 0; i < n; ++i) {
      alt(i) = i % 2 == 0 ? 1 : -1;
      ramp(i) = i + 1;
    }
    dirs.push_back(alt / alt.norm());
    dirs.push_back(ramp / ramp.norm());
  }
  return dirs;
}

// Mixed partial d^alpha via a tensor product of per-coordinate central
// stencils, each second-order accurate.
inline double mixed_partial_fd(const std::function<double(const VectorX<double>&)>& f, const VectorX<double>& x,
                               const MultiIndex& alpha, double h) {
  const int n = alpha.dimension();
  std::vector<Stencil> stencils(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    if (alpha[i] > 0) stencils[static_cast<std::size_t>(i)] = central_stencil(alpha[i]);

  double acc = 0;
  VectorX<double> probe = x;
  auto rec = [&](auto&& self, int coord, double weight) -> void {
    if (coord == n) {
      acc += weight * f(probe);
      return;
    }
    const Stencil& s = stencils[static_cast<std::size_t>(coord)];
    if (alpha[coord] == 0) {
      self(self, coord + 1, weight);
      return;
    }
    for (int off = -s.halfwidth; off <= s.halfwidth; ++off) {
      double w = to_double(s.weights[static_cast<std::size_t>(off + s.halfwidth)]);
      if (w == 0) continue;
      double saved = probe(coord);
      probe(coord) = saved + off * h;
      self(self, coord + 1, weight * w);
      probe(coord) = saved;
    }
  };
  rec(rec, 0, 1.0);
  return acc / std::pow(h, alpha.degree());
}

// t-derivative of order p of t -> <f(x + t xi), eta>.
inline double line_derivative_fd(const FunctionOracle<double>& oracle, const VectorX<double>& x,
                                 const VectorX<double>& xi, const VectorX<double>& eta, int p, double h) {
  Stencil s = central_stencil(p);
  double acc = 0;
  for (int off = -s.halfwidth; off <= s.halfwidth; ++off) {
    double w = to_double(s.weights[static_cast<std::size_t>(off + s.halfwidth)]);
    if (w == 0) continue;
    acc += w * oracle.evaluator(x + (off * h) * xi).dot(eta);
  }
  return acc / std::pow(h, p);
}

} // namespace detail

struct BlowupRow {
  double radius = 0;
  double value = 0;          // max over sample directions of |FD partial^alpha f_j|
  double envelope_ratio = 0; // value / (ln|ln r| * alpha! |phi_{alpha j}|)
};

struct BlowupReport {
  MultiIndex alpha;
  int j = 0;
  std::vector<BlowupRow> rows;
  bool strictly_increasing = false; // over the last 5 radii
  bool envelope_ok = false;         // ratio at smallest radius in [0.5, 2]
  bool pass = false;
};

// Samples |partial^alpha f_j| on shrinking spheres for the (alpha, j) with
// the largest alpha! |phi_{alpha j}|; the ln|ln r| factor must show up as
// strict growth hugging the envelope.
inline BlowupReport verify_blowup(const HomogeneousMap<double>& phi, const std::vector<double>& radii) {
  phi.check();
  if (radii.empty()) throw std::invalid_argument("verify_blowup: radii list is empty");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (radii[i] <= 0 || radii[i] >= kLogLogDomainRadius)
      throw std::invalid_argument("verify_blowup: radii must lie in (0, 1/e)");
    if (i > 0 && radii[i] >= radii[i - 1]) throw std::invalid_argument("verify_blowup: radii must decrease");
  }

  BlowupReport rep;
  double best = -1;
  for (int j = 0; j < phi.m; ++j) {
    for (const auto& [alpha, c] : phi.comps[static_cast<std::size_t>(j)]) {
      double weight = static_cast<double>(multinomial_coefficient(phi.k, alpha));
      // alpha! = k! / multinomial(k, alpha)
      double kfact = 1;
      for (int i = 2; i <= phi.k; ++i) kfact *= i;
      double scaled = std::abs(c) * kfact / weight;
      if (scaled > best) {
        best = scaled;
        rep.alpha = alpha;
        rep.j = j;
      }
    }
  }

  FunctionOracle<double> oracle = build_theorem1_counterexample(phi);
  auto component = [&](const VectorX<double>& x) { return oracle.evaluator(x)(rep.j); };
  const auto dirs = detail::sample_directions(phi.n);

  for (double r : radii) {
    double h = 0.02 * r / (phi.k + 2);
    double v = 0;
    for (const auto& dir : dirs) v = std::max(v, std::abs(detail::mixed_partial_fd(component, r * dir, rep.alpha, h)));
    double envelope = std::log(-std::log(r)) * best;
    rep.rows.push_back({r, v, v / envelope});
  }

  const std::size_t tail = std::min<std::size_t>(5, rep.rows.size());
  rep.strictly_increasing = true;
  for (std::size_t i = rep.rows.size() - tail + 1; i < rep.rows.size(); ++i)
    if (rep.rows[i].value <= rep.rows[i - 1].value) rep.strictly_increasing = false;
  double last_ratio = rep.rows.back().envelope_ratio;
  rep.envelope_ok = last_ratio >= 0.5 && last_ratio <= 2.0;
  rep.pass = rep.strictly_increasing && rep.envelope_ok;
  return rep;
}

struct TamenessRow {
  int pair_id = 0;
  int order = 0;            // p <= k
  double value_at_largest = 0;
  double max_value = 0;
  bool bounded = false;
};

struct TamenessReport {
  std::vector<TamenessRow> rows;
  bool pass = false;
};

// Along every certified pair, all directional derivatives up to order k of
// f = ln|ln|x|| phi_.(x) must stay bounded as |x| -> 0. Boundedness is
// operationalized as max over radii <= 10 x the value at the largest radius
// (plus an absolute floor absorbing FD roundoff on identically-zero data).
template <class Scalar>
TamenessReport verify_directional_tameness(const HomogeneousMap<Scalar>& phi, const DirectionSet<Scalar>& lambda,
                                           const std::vector<double>& radii) {
  phi.check();
  lambda.validate();
  if (phi.n != lambda.n || phi.m != lambda.m || phi.k != lambda.k)
    throw std::invalid_argument("verify_directional_tameness: phi and Lambda disagree on n, m, k");
  for (const auto& pr : lambda.pairs) {
    Scalar v = phi.form_value(pr.xi, pr.eta);
    bool zero;
    if constexpr (is_rational_v<Scalar>) {
      zero = v == Scalar(0);
    } else {
      double scale = std::max(1.0, phi.max_abs_coeff()) * std::pow(std::max(1.0, pr.xi.norm()), phi.k) *
                     std::max(1.0, pr.eta.norm());
      zero = std::abs(to_double(v)) <= 1e-8 * scale;
    }
    if (!zero)
      throw CertificateMismatchError("certificate mismatch: form does not vanish on pair " + std::to_string(pr.id));
  }

  HomogeneousMap<double> phi_d = phi.to_double_map();
  FunctionOracle<double> oracle = build_theorem1_counterexample(phi_d);
  const auto dirs = detail::sample_directions(phi.n);
  const double floor = 1e-7 * std::max(1.0, phi_d.max_abs_coeff());

  TamenessReport rep;
  rep.pass = true;
  for (const auto& pr : lambda.pairs) {
    VectorX<double> xi(phi.n), eta(phi.m);
    for (int i = 0; i < phi.n; ++i) xi(i) = to_double(pr.xi(i));
    for (int j = 0; j < phi.m; ++j) eta(j) = to_double(pr.eta(j));
    double xi_norm = std::max(1.0, xi.norm());
    for (int p = 1; p <= phi.k; ++p) {
      int halfwidth = central_stencil(p).halfwidth;
      TamenessRow row;
      row.pair_id = pr.id;
      row.order = p;
      for (std::size_t ri = 0; ri < radii.size(); ++ri) {
        double r = radii[ri];
        double ht = 0.1 * r / (halfwidth * xi_norm);
        double v = 0;
        for (const auto& dir : dirs)
          v = std::max(v, std::abs(detail::line_derivative_fd(oracle, r * dir, xi, eta, p, ht)));
        if (ri == 0) row.value_at_largest = v;
        row.max_value = std::max(row.max_value, v);
      }
      row.bounded = row.max_value <= 10 * row.value_at_largest + floor;
      rep.pass = rep.pass && row.bounded;
      rep.rows.push_back(row);
    }
  }
  return rep;
}

// Scalar profile h for the Theorem-2 counterexample f(z) = h(<u,z>) v.
struct ScalarProfile {
  enum class Kind { Weierstrass, Abs, Custom };
  Kind kind = Kind::Weierstrass;
  double a = 0.5;
  double b = 3.0;
  std::function<double(double)> custom;

  double operator()(double t) const {
    switch (kind) {
      case Kind::Abs:
        return std::abs(t);
      case Kind::Custom:
        return custom(t);
      case Kind::Weierstrass:
      default: {
        double acc = 0, ap = 1, bp = 1;
        for (int i = 0; i <= 40; ++i) {
          acc += ap * std::cos(bp * M_PI * t);
          ap *= a;
          bp *= b;
        }
        return acc;
      }
    }
  }
};

inline ScalarProfile weierstrass_profile(double a, double b) {
  if (!(a > 0 && a < 1) || a * b < 1)
    throw std::invalid_argument("weierstrass_profile: need 0 < a < 1 and ab >= 1");
  ScalarProfile p;
  p.kind = ScalarProfile::Kind::Weierstrass;
  p.a = a;
  p.b = b;
  return p;
}

inline FunctionOracle<double> build_theorem2_counterexample(const VectorX<double>& u, const VectorX<double>& v,
                                                            ScalarProfile profile) {
  if (u.size() == 0 || u.norm() == 0) throw std::invalid_argument("theorem2 counterexample: u must be nonzero");
  if (v.size() == 0 || v.norm() == 0) throw std::invalid_argument("theorem2 counterexample: v must be nonzero");
  FunctionOracle<double> oracle;
  oracle.m = static_cast<int>(v.size());
  oracle.evaluator = [u, v, profile](const VectorX<double>& z) -> VectorX<double> { return profile(u.dot(z)) * v; };
  return oracle;
}

struct QuotientRow {
  double base_point = 0;
  double spread_ratio = 0; // max |quotient| / min |quotient| over the scales
};

struct QuotientReport {
  std::vector<QuotientRow> rows;
  bool pass = false; // every base point has spread ratio > 2
};

// Difference quotients of the profile across decades of step size; a
// differentiable h would make them settle, a Weierstrass profile keeps the
// spread ratio large.
inline QuotientReport quotient_nonconvergence(const ScalarProfile& profile,
                                              const std::vector<double>& scales = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5,
                                                                                   1e-6},
                                              const std::vector<double>& base_points = {0.0, 0.237, -0.611}) {
  QuotientReport rep;
  rep.pass = true;
  for (double t0 : base_points) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0;
    for (double s : scales) {
      double q = std::abs((profile(t0 + s) - profile(t0)) / s);
      lo = std::min(lo, q);
      hi = std::max(hi, q);
    }
    double ratio = lo == 0 ? std::numeric_limits<double>::infinity() : hi / lo;
    rep.rows.push_back({t0, ratio});
    rep.pass = rep.pass && ratio > 2.0;
  }
  return rep;
}

struct VanishingRow {
  int pair_id = 0;
  double max_abs_derivative = 0;
  bool vanishes = false;
};

struct VanishingReport {
  std::vector<VanishingRow> rows;
  bool pass = false;
};

// First directional derivatives of the Theorem-2 map along pairs with
// <u,xi><v,eta> = 0: the line function is constant (or identically zero), so
// central differences cancel to machine zero.
inline VanishingReport verify_directional_vanishing(const VectorX<double>& u, const VectorX<double>& v,
                                                    const ScalarProfile& profile,
                                                    const std::vector<std::pair<VectorX<double>, VectorX<double>>>&
                                                        pairs) {
  FunctionOracle<double> oracle = build_theorem2_counterexample(u, v, profile);
  VanishingReport rep;
  rep.pass = true;
  const std::vector<VectorX<double>> bases = [&] {
    std::vector<VectorX<double>> zs;
    zs.push_back(VectorX<double>::Zero(u.size()));
    VectorX<double> z1(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) z1(i) = 0.3 + 0.1 * static_cast<double>(i);
    zs.push_back(z1);
    return zs;
  }();
  int id = 0;
  for (const auto& [xi, eta] : pairs) {
    if (std::abs(u.dot(xi)) * std::abs(v.dot(eta)) > 1e-12 * std::max(1.0, u.norm() * xi.norm()) *
                                                         std::max(1.0, v.norm() * eta.norm()))
      throw CertificateMismatchError("verify_directional_vanishing: pair " + std::to_string(id) +
                                     " does not satisfy <u,xi><v,eta> = 0");
    VanishingRow row;
    row.pair_id = id++;
    for (const auto& z : bases)
      for (double h : {1e-2, 1e-4, 1e-6})
        row.max_abs_derivative =
            std::max(row.max_abs_derivative, std::abs(detail::line_derivative_fd(oracle, z, xi, eta, 1, h)));
    double scale = std::max(1.0, std::abs(profile(0.0))) * std::max(1.0, v.norm() * eta.norm());
    row.vanishes = row.max_abs_derivative <= 1e-8 * scale;
    rep.pass = rep.pass && row.vanishes;
    rep.rows.push_back(row);
  }
  return rep;
}

// Direction pairs guaranteed to satisfy <u,xi><v,eta> = 0: xi from a basis
// of u-perp with all eta axes, plus all xi axes with eta from v-perp.
inline std::vector<std::pair<VectorX<double>, VectorX<double>>> synth_orthogonal_pairs(const VectorX<double>& u,
                                                                                       const VectorX<double>& v) {
  std::vector<std::pair<VectorX<double>, VectorX<double>>> pairs;
  const Eigen::Index n = u.size(), m = v.size();
  Eigen::JacobiSVD<MatrixX<double>> svd_u(u.transpose(), Eigen::ComputeFullV);
  for (Eigen::Index c = 1; c < n; ++c) {
    VectorX<double> xi = svd_u.matrixV().col(c);
    for (Eigen::Index j = 0; j < m; ++j) {
      VectorX<double> eta = VectorX<double>::Zero(m);
      eta(j) = 1;
      pairs.emplace_back(xi, eta);
    }
  }
  Eigen::JacobiSVD<MatrixX<double>> svd_v(v.transpose(), Eigen::ComputeFullV);
  for (Eigen::Index c = 1; c < m; ++c) {
    VectorX<double> eta = svd_v.matrixV().col(c);
    for (Eigen::Index i = 0; i < n; ++i) {
      VectorX<double> xi = VectorX<double>::Zero(n);
      xi(i) = 1;
      pairs.emplace_back(xi, eta);
    }
  }
  return pairs;
}

} // namespace dirreg
