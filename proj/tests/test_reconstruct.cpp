#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dirreg/determine.hpp"
#include "dirreg/polynomial.hpp"
#include "dirreg/reconstruct.hpp"
#include "support/generators.hpp"

#include <cmath>

using namespace dirreg;

namespace {

FunctionOracle<Rational> exact_poly_oracle(const PolynomialMap<Rational>& f) {
  FunctionOracle<Rational> oracle;
  oracle.m = f.m;
  oracle.evaluator = [f](const VectorX<Rational>& x) { return f.eval(x); };
  oracle.exact_directional = [f](const VectorX<Rational>& x, const VectorX<Rational>& xi,
                                 const VectorX<Rational>& eta, int k) { return f.directional(x, xi, eta, k); };
  return oracle;
}

Determining<Rational> determining_of(const DirectionSet<Rational>& lambda) {
  auto verdict = is_determining<Rational>(lambda);
  REQUIRE(is_determining_branch(verdict));
  return std::get<Determining<Rational>>(verdict);
}

} // namespace

TEST_CASE("central stencils reproduce the classical weights") {
  Stencil s1 = central_stencil(1);
  CHECK(s1.halfwidth == 1);
  CHECK(s1.weights[0] == Rational(-1, 2));
  CHECK(s1.weights[1] == 0);
  CHECK(s1.weights[2] == Rational(1, 2));

  Stencil s2 = central_stencil(2);
  CHECK(s2.weights[0] == 1);
  CHECK(s2.weights[1] == -2);
  CHECK(s2.weights[2] == 1);

  Stencil s4 = central_stencil(4);
  CHECK(s4.weights == std::vector<Rational>{1, -4, 6, -4, 1});
}

TEST_CASE("directional derivative of a constant map is zero") {
  FunctionOracle<double> oracle;
  oracle.m = 2;
  oracle.evaluator = [](const VectorX<double>& x) {
    (void)x;
    VectorX<double> v(2);
    v << 3.0, -1.5;
    return v;
  };
  VectorX<double> x = VectorX<double>::Zero(2), xi(2), eta(2);
  xi << 1, 2;
  eta << 1, 1;
  for (int k = 1; k <= 3; ++k) CHECK(directional_derivative<double>(oracle, x, xi, eta, k, 0.1) == doctest::Approx(0.0));
}

TEST_CASE("stencil is exact on quadratics at a power-of-two step") {
  FunctionOracle<double> oracle;
  oracle.m = 1;
  oracle.evaluator = [](const VectorX<double>& x) {
    VectorX<double> v(1);
    v << x(0) * x(0);
    return v;
  };
  VectorX<double> x(1), xi(1), eta(1);
  x << 1;
  xi << 1;
  eta << 1;
  CHECK(directional_derivative<double>(oracle, x, xi, eta, 2, 0.5) == 2.0);
}

TEST_CASE("directional derivative of sin(x)cos(y) matches the symbolic value") {
  FunctionOracle<double> oracle;
  oracle.m = 1;
  oracle.evaluator = [](const VectorX<double>& x) {
    VectorX<double> v(1);
    v << std::sin(x(0)) * std::cos(x(1));
    return v;
  };
  VectorX<double> x(2), xi(2), eta(1);
  x << 0.3, 0.7;
  xi << 1, 1;
  eta << 1;
  // g(t) = sin(.3+t)cos(.7+t) = (sin(1 + 2t) + sin(-0.4)) / 2, so g''(0) = -2 sin(1)
  double expect = -2.0 * std::sin(1.0);
  CHECK(directional_derivative<double>(oracle, x, xi, eta, 2, 1e-3) == doctest::Approx(expect).epsilon(1e-5));
}

TEST_CASE("exact directional oracle bypasses differencing") {
  FunctionOracle<double> oracle;
  oracle.m = 1;
  oracle.exact_directional = [](const VectorX<double>&, const VectorX<double>&, const VectorX<double>&, int) {
    return 42.0;
  };
  VectorX<double> z = VectorX<double>::Zero(1);
  CHECK(directional_derivative<double>(oracle, z, z, z, 3, 1e-3) == 42.0);
  CHECK_THROWS_AS(directional_derivative<double>(FunctionOracle<double>{1, [](const VectorX<double>& x) { return x; }, nullptr},
                                                 z, z, z, 1, 0.0),
                  std::invalid_argument);
}

TEST_CASE("worked reconstruction: f(x,y) = xy at order 2") {
  auto lambda = make_direction_set<Rational>(
      2, 1, 2,
      {{[] { VectorX<Rational> v(2); v << Rational(1), Rational(0); return v; }(),
        [] { VectorX<Rational> v(1); v << Rational(1); return v; }()},
       {[] { VectorX<Rational> v(2); v << Rational(0), Rational(1); return v; }(),
        [] { VectorX<Rational> v(1); v << Rational(1); return v; }()},
       {[] { VectorX<Rational> v(2); v << Rational(1), Rational(1); return v; }(),
        [] { VectorX<Rational> v(1); v << Rational(1); return v; }()}});
  auto det = determining_of(lambda);

  auto f = parse_polynomial_map("x1 * x2", 2, 1);
  auto oracle = exact_poly_oracle(f);
  VectorX<Rational> x(2);
  x << Rational(5), Rational(-7);

  // directional data: 0 along the axes, 2 along the diagonal
  CHECK(f.directional(x, lambda.pairs[0].xi, lambda.pairs[0].eta, 2) == 0);
  CHECK(f.directional(x, lambda.pairs[1].xi, lambda.pairs[1].eta, 2) == 0);
  CHECK(f.directional(x, lambda.pairs[2].xi, lambda.pairs[2].eta, 2) == 2);

  auto tensor = reconstruct_partials<Rational>(oracle, x, det);
  CHECK(tensor.exact);
  CHECK(tensor.value(MultiIndex({1, 1}), 0) == 1);
  CHECK(tensor.value(MultiIndex({2, 0}), 0) == 0);
  CHECK(tensor.value(MultiIndex({0, 2}), 0) == 0);
}

TEST_CASE("zero directional data reconstructs the zero tensor") {
  testgen::Rng rng(31);
  auto lambda = testgen::random_direction_set(rng, 2, 1, 2, 6);
  auto verdict = is_determining<Rational>(lambda);
  if (!is_determining_branch(verdict)) return;
  const auto& det = std::get<Determining<Rational>>(verdict);
  FunctionOracle<Rational> zero;
  zero.m = 1;
  zero.exact_directional = [](const VectorX<Rational>&, const VectorX<Rational>&, const VectorX<Rational>&, int) {
    return Rational(0);
  };
  auto tensor = reconstruct_partials<Rational>(zero, VectorX<Rational>::Zero(2), det);
  for (Eigen::Index i = 0; i < tensor.values.size(); ++i) CHECK(tensor.values(i) == 0);
}

TEST_CASE("random polynomial maps reconstruct exactly in rational mode") {
  testgen::Rng rng(32);
  int tested = 0;
  for (int trial = 0; trial < 40 && tested < 12; ++trial) {
    int n = 1 + static_cast<int>(rng() % 3);
    int m = 1 + static_cast<int>(rng() % 3);
    int k = 1 + static_cast<int>(rng() % 4);
    int dim = static_cast<int>(binomial(k + n - 1, k)) * m;
    if (dim > 15) continue;
    auto lambda = testgen::random_direction_set(rng, n, m, k, dim + 3);
    auto verdict = is_determining<Rational>(lambda);
    if (!is_determining_branch(verdict)) continue;
    ++tested;
    const auto& det = std::get<Determining<Rational>>(verdict);

    auto f = testgen::random_polynomial_map(rng, n, m, k);
    VectorX<Rational> x = testgen::random_rational_vector(rng, n, 3, 2);
    auto tensor = reconstruct_partials<Rational>(exact_poly_oracle(f), x, det);
    REQUIRE(tensor.exact);
    for (const auto& alpha : det.matrix.basis.indices) {
      VectorX<Rational> expect = f.partial(alpha).eval(x);
      for (int j = 0; j < m; ++j) CHECK(tensor.value(alpha, j) == expect(j));
    }
  }
  CHECK(tested >= 8);
}

TEST_CASE("cramer path equals the elimination path") {
  testgen::Rng rng(33);
  for (int trial = 0; trial < 6; ++trial) {
    auto lambda = testgen::random_direction_set(rng, 2, 2, 1, 4); // dim 4
    MomentMatrix<Rational> mm;
    try {
      mm = build_moment_matrix<Rational>(lambda.pairs, 2, 2, 1);
    } catch (...) {
      continue;
    }
    if (determinant<Rational>(mm) == 0) continue;
    VectorX<Rational> d = testgen::random_rational_vector(rng, 4);
    VectorX<Rational> a = solve<Rational>(mm, d);
    VectorX<Rational> b = cramer_reconstruct<Rational>(mm, d);
    for (int i = 0; i < 4; ++i) CHECK(a(i) == b(i));
  }
}

TEST_CASE("pushing reconstructed partials forward reproduces the data (float)") {
  testgen::Rng rng(34);
  std::vector<DirectionPair<double>> pts;
  for (int p = 0; p < 3; ++p) {
    DirectionPair<double> pr;
    pr.xi = testgen::random_unit_vector(rng, 2) * 1.5;
    pr.eta = VectorX<double>::Ones(1);
    pr.id = p;
    pts.push_back(pr);
  }
  auto mm = build_moment_matrix<double>(pts, 2, 1, 2);
  Determining<double> det{{0, 1, 2}, mm, stability_constant<double>(mm), 0};

  FunctionOracle<double> oracle;
  oracle.m = 1;
  oracle.evaluator = [](const VectorX<double>& x) {
    VectorX<double> v(1);
    v << std::exp(0.3 * x(0)) * std::cos(x(1));
    return v;
  };
  VectorX<double> x(2);
  x << 0.2, -0.4;
  auto tensor = reconstruct_partials<double>(oracle, x, det);
  double h = default_step(2, x);
  for (int p = 0; p < 3; ++p) {
    double d = directional_derivative<double>(oracle, x, pts[static_cast<std::size_t>(p)].xi,
                                              pts[static_cast<std::size_t>(p)].eta, 2, h);
    double back = 0;
    for (int r = 0; r < 3; ++r) back += mm.entries(r, p) * tensor.values(r);
    CHECK(back == doctest::Approx(d).epsilon(1e-9));
  }
  CHECK(tensor.error_bound > 0);
  CHECK(std::isfinite(tensor.error_bound));
}

TEST_CASE("halving h reduces the directional error about fourfold") {
  FunctionOracle<double> oracle;
  oracle.m = 1;
  oracle.evaluator = [](const VectorX<double>& x) {
    VectorX<double> v(1);
    v << std::sin(1.3 * x(0));
    return v;
  };
  VectorX<double> x(1), xi(1), eta(1);
  x << 0.4;
  xi << 1;
  eta << 1;
  // k = 2: g(t) = sin(1.3 (x+t)), g'' = -1.69 sin(1.3 x)
  double truth = -1.69 * std::sin(1.3 * 0.4);
  double h = 1e-2;
  double e1 = std::abs(directional_derivative<double>(oracle, x, xi, eta, 2, h) - truth);
  double e2 = std::abs(directional_derivative<double>(oracle, x, xi, eta, 2, h / 2) - truth);
  double ratio = e1 / e2;
  CHECK(ratio >= 3.0);
  CHECK(ratio <= 5.0);
}

TEST_CASE("verify_stability") {
  auto lambda = make_direction_set<Rational>(
      2, 1, 1,
      {{[] { VectorX<Rational> v(2); v << Rational(1), Rational(0); return v; }(),
        [] { VectorX<Rational> v(1); v << Rational(1); return v; }()},
       {[] { VectorX<Rational> v(2); v << Rational(0), Rational(1); return v; }(),
        [] { VectorX<Rational> v(1); v << Rational(1); return v; }()}});
  auto det = determining_of(lambda);
  REQUIRE(det.stability_B == 1);

  SUBCASE("zero map: 0 <= 0") {
    FunctionOracle<Rational> zero;
    zero.m = 1;
    zero.exact_directional = [](const VectorX<Rational>&, const VectorX<Rational>&, const VectorX<Rational>&, int) {
      return Rational(0);
    };
    auto rep = verify_stability<Rational>(zero, VectorX<Rational>::Zero(2), det, lambda);
    CHECK(rep.lhs == 0.0);
    CHECK(rep.rhs == 0.0);
    CHECK(rep.holds);
  }

  SUBCASE("random polynomial maps over many points") {
    testgen::Rng rng(35);
    for (int trial = 0; trial < 25; ++trial) {
      auto f = testgen::random_polynomial_map(rng, 2, 1, 1);
      auto rep = verify_stability<Rational>(exact_poly_oracle(f), testgen::random_rational_vector(rng, 2), det, lambda);
      CHECK(rep.holds);
      CHECK(rep.lhs <= rep.rhs * (1 + 1e-6) + 1e-12);
    }
  }
}
