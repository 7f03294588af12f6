// Acceptance suite: runs every gate criterion at its stated tolerance and
// prints one PASS/FAIL line per criterion. Exit status is the number of
// failed criteria.

#include "dirreg/determine.hpp"
#include "dirreg/documents.hpp"
#include "dirreg/polynomial.hpp"
#include "dirreg/rank1.hpp"
#include "dirreg/reconstruct.hpp"
#include "dirreg/sharpness.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace dirreg;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    pass = false;
    if (!detail.empty()) detail += "; ";
    detail += why;
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// ---------------------------------------------------------------- criterion 1
Outcome criterion1() {
  Outcome out;
  auto start = std::chrono::steady_clock::now();
  testgen::Rng rng(101);
  int total = 0, determining = 0, not_determining = 0;
  while (total < 500) {
    int n = 1 + static_cast<int>(rng() % 3);
    int m = 1 + static_cast<int>(rng() % 3);
    int k = 1 + static_cast<int>(rng() % 3);
    auto lambda = testgen::mixed_instance(rng, total, n, m, k);
    ++total;
    auto a = is_determining<Rational>(lambda);
    auto b = greedy_select<Rational>(lambda);
    if (is_determining_branch(a) != is_determining_branch(b)) {
      out.fail("branch disagreement on instance " + std::to_string(total));
      break;
    }
    if (is_determining_branch(a)) {
      ++determining;
    } else {
      ++not_determining;
      for (const auto* nd : {&std::get<NotDetermining<Rational>>(a), &std::get<NotDetermining<Rational>>(b)}) {
        if (nd->certificate.is_zero_form()) out.fail("zero certificate on instance " + std::to_string(total));
        for (const auto& pr : lambda.pairs)
          if (nd->certificate.evaluate(pr.xi, pr.eta) != 0)
            out.fail("certificate does not vanish on instance " + std::to_string(total));
      }
      if (!out.pass) break;
    }
  }
  double elapsed = seconds_since(start);
  if (elapsed >= 60.0) out.fail("runtime " + fmt(elapsed) + " s exceeds 60 s");
  if (determining < 50 || not_determining < 50) out.fail("branch mix too skewed to be meaningful");
  out.detail = std::to_string(total) + " instances (" + std::to_string(determining) + " determining, " +
               std::to_string(not_determining) + " not), " + fmt(elapsed) + " s" +
               (out.detail.empty() ? "" : "; " + out.detail);
  return out;
}

// ------------------------------------------------------- criteria 2 and 3
struct SmoothInstance {
  // f_j(x) = sin(<w_j, x> + c_j), with closed-form derivatives
  std::vector<VectorX<double>> w;
  std::vector<double> c;
  int n, m;

  VectorX<double> eval(const VectorX<double>& x) const {
    VectorX<double> v(m);
    for (int j = 0; j < m; ++j) v(j) = std::sin(w[static_cast<std::size_t>(j)].dot(x) + c[static_cast<std::size_t>(j)]);
    return v;
  }
  double partial(const MultiIndex& alpha, int j, const VectorX<double>& x) const {
    double mono = 1;
    for (int i = 0; i < n; ++i)
      for (int e = 0; e < alpha[i]; ++e) mono *= w[static_cast<std::size_t>(j)](i);
    return mono * std::sin(w[static_cast<std::size_t>(j)].dot(x) + c[static_cast<std::size_t>(j)] +
                           alpha.degree() * M_PI / 2.0);
  }
};

void criteria23(Outcome& out2, Outcome& out3) {
  testgen::Rng rng(102);

  // rational: exact reconstruction of degree-k polynomial maps
  int done = 0;
  int b_checked = 0;
  while (done < 200) {
    int n = 1 + static_cast<int>(rng() % 3);
    int m = 1 + static_cast<int>(rng() % 3);
    int k = 1 + static_cast<int>(rng() % 3);
    int dim = static_cast<int>(binomial(k + n - 1, k)) * m;
    auto lambda = testgen::random_direction_set(rng, n, m, k, dim + 3);
    auto verdict = is_determining<Rational>(lambda);
    if (!is_determining_branch(verdict)) continue;
    const auto& det = std::get<Determining<Rational>>(verdict);
    auto f = testgen::random_polynomial_map(rng, n, m, k);
    VectorX<Rational> x = testgen::random_rational_vector(rng, n, 3, 2);

    FunctionOracle<Rational> oracle;
    oracle.m = m;
    oracle.exact_directional = [&f](const VectorX<Rational>& px, const VectorX<Rational>& xi,
                                    const VectorX<Rational>& eta, int kk) { return f.directional(px, xi, eta, kk); };
    DerivativeTensor<Rational> tensor;
    try {
      tensor = reconstruct_partials<Rational>(oracle, x, det);
    } catch (const std::exception& e) {
      out2.fail(std::string("reconstruction threw: ") + e.what());
      break;
    }
    bool exact = tensor.exact;
    for (const auto& alpha : det.matrix.basis.indices) {
      VectorX<Rational> expect = f.partial(alpha).eval(x);
      for (int j = 0; j < m; ++j) exact = exact && tensor.value(alpha, j) == expect(j);
    }
    if (!exact) {
      out2.fail("inexact rational reconstruction at instance " + std::to_string(done));
      break;
    }

    // criterion 3 on the same instance, exact arithmetic
    Rational lhs(0);
    for (Eigen::Index i = 0; i < tensor.values.size(); ++i) lhs = std::max<Rational>(lhs, rat_abs(tensor.values(i)));
    Rational sup(0);
    for (const auto& pt : det.matrix.points)
      sup = std::max<Rational>(sup, rat_abs(f.directional(x, pt.xi, pt.eta, k)));
    if (!(lhs <= det.stability_B * sup * Rational(1000001, 1000000)))
      out3.fail("inequality (B) violated on rational instance " + std::to_string(done));
    ++b_checked;
    ++done;
  }

  // float: finite-difference directionals on smooth non-polynomial maps
  int float_done = 0;
  double worst_rel = 0;
  for (int n = 1; n <= 3; ++n) {
    for (int m = 1; m <= 3; ++m) {
      for (int k = 1; k <= 3; ++k) {
        int dim = static_cast<int>(binomial(k + n - 1, k)) * m;
        std::vector<DirectionPair<double>> pool;
        for (int p = 0; p < 2 * dim + 4; ++p) {
          DirectionPair<double> pr;
          pr.xi = testgen::random_unit_vector(rng, n);
          pr.eta = testgen::random_unit_vector(rng, m);
          pr.id = p;
          pool.push_back(pr);
        }
        DirectionSet<double> lambda{n, m, k, pool};
        auto verdict = select_well_conditioned<double>(lambda);
        if (!is_determining_branch(verdict)) continue;
        const auto& det = std::get<Determining<double>>(verdict);

        SmoothInstance smooth;
        smooth.n = n;
        smooth.m = m;
        for (int j = 0; j < m; ++j) {
          VectorX<double> w(n);
          for (int i = 0; i < n; ++i) w(i) = 0.5 + std::uniform_real_distribution<double>(0, 1)(rng);
          smooth.w.push_back(w);
          smooth.c.push_back(std::uniform_real_distribution<double>(0, 1)(rng));
        }
        FunctionOracle<double> oracle;
        oracle.m = m;
        oracle.evaluator = [&smooth](const VectorX<double>& z) { return smooth.eval(z); };
        VectorX<double> x(n);
        for (int i = 0; i < n; ++i) x(i) = std::uniform_real_distribution<double>(-0.5, 0.5)(rng);

        auto tensor = reconstruct_partials<double>(oracle, x, det); // default h
        double max_err = 0, max_truth = 0;
        for (const auto& alpha : det.matrix.basis.indices)
          for (int j = 0; j < m; ++j) {
            double truth = smooth.partial(alpha, j, x);
            max_err = std::max(max_err, std::abs(tensor.value(alpha, j) - truth));
            max_truth = std::max(max_truth, std::abs(truth));
          }
        double rel = max_err / std::max(max_truth, 1e-12);
        worst_rel = std::max(worst_rel, rel);
        if (rel > 1e-4) out2.fail("float relative error " + fmt(rel) + " at n=" + std::to_string(n) +
                                  " m=" + std::to_string(m) + " k=" + std::to_string(k));

        // criterion 3, float side: reconstructed partials against B * max |d_p|
        double lhs = 0;
        for (Eigen::Index i = 0; i < tensor.values.size(); ++i) lhs = std::max(lhs, std::abs(tensor.values(i)));
        double sup = 0;
        double h = default_step(k, x);
        for (const auto& pt : det.matrix.points)
          sup = std::max(sup, std::abs(directional_derivative<double>(oracle, x, pt.xi, pt.eta, k, h)));
        if (lhs > det.stability_B * sup * (1 + 1e-6)) out3.fail("inequality (B) violated on float instance");
        ++b_checked;
        ++float_done;
      }
    }
  }

  std::string d2 = std::to_string(done) + " rational + " + std::to_string(float_done) +
                   " float instances, worst float rel err " + fmt(worst_rel);
  out2.detail = d2 + (out2.detail.empty() ? "" : "; " + out2.detail);
  std::string d3 = std::to_string(b_checked) + " inequality checks, zero violations";
  out3.detail = d3 + (out3.detail.empty() ? "" : "; " + out3.detail);
}

// ---------------------------------------------------------------- criterion 4
Outcome criterion4() {
  Outcome out;
  testgen::Rng rng(104);

  // (a) NotDetermining with |Lambda| >= m k_n still yields certificates
  int with_cert = 0;
  for (int trial = 0; trial < 200 && with_cert < 40; ++trial) {
    int n = 1 + static_cast<int>(rng() % 3);
    int m = 1 + static_cast<int>(rng() % 3);
    int k = 1 + static_cast<int>(rng() % 3);
    int dim = static_cast<int>(binomial(k + n - 1, k)) * m;
    DirectionSet<Rational> lambda;
    switch (trial % 3) {
      case 0:
        lambda = testgen::xi_subspace_set(rng, n, m, k, dim + 2, std::max(1, n - 1));
        break;
      case 1:
        lambda = testgen::eta_subspace_set(rng, n, m, k, dim + 2, std::max(1, m - 1));
        break;
      default:
        lambda = testgen::annihilated_set(rng, n, m, k, dim + 2);
        break;
    }
    if (lambda.size() < dim) continue;
    auto verdict = greedy_select<Rational>(lambda);
    if (is_determining_branch(verdict)) continue;
    const auto& cert = std::get<NotDetermining<Rational>>(verdict).certificate;
    if (cert.is_zero_form()) out.fail("certificate is the zero form");
    for (const auto& pr : lambda.pairs)
      if (cert.evaluate(pr.xi, pr.eta) != 0) out.fail("certificate fails to vanish");
    ++with_cert;

    // (b) order shift j < k_target <= 4 stays a valid certificate
    for (int k_target = cert.k + 1; k_target <= 4; ++k_target) {
      auto shifted = annihilator_order_shift<Rational>(cert, k_target);
      if (shifted.is_zero_form()) out.fail("shifted certificate vanished");
      if (shifted.k != k_target) out.fail("shifted certificate has wrong order");
      for (const auto& pr : lambda.pairs)
        if (shifted.evaluate(pr.xi, pr.eta) != 0) out.fail("shifted certificate fails to vanish");
    }
    if (!out.pass) break;
  }
  if (with_cert < 40) out.fail("only " + std::to_string(with_cert) + " undersized-rank certificates generated");

  // (c) |Lambda| < m k_n forces NotDetermining on 100 random instances
  int undersized = 0;
  while (undersized < 100) {
    int n = 1 + static_cast<int>(rng() % 3);
    int m = 1 + static_cast<int>(rng() % 3);
    int k = 1 + static_cast<int>(rng() % 3);
    int dim = static_cast<int>(binomial(k + n - 1, k)) * m;
    if (dim < 2) continue;
    auto lambda = testgen::random_direction_set(rng, n, m, k, 1 + static_cast<int>(rng() % (dim - 1)));
    ++undersized;
    if (is_determining_branch(is_determining<Rational>(lambda))) {
      out.fail("undersized instance judged determining");
      break;
    }
  }
  out.detail = std::to_string(with_cert) + " certificates shifted through order 4, " + std::to_string(undersized) +
               " undersized instances" + (out.detail.empty() ? "" : "; " + out.detail);
  return out;
}

// ---------------------------------------------------------------- criterion 5
Outcome criterion5() {
  Outcome out;
  auto start = std::chrono::steady_clock::now();
  testgen::Rng rng(105);
  const std::vector<double> radii = {1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8};
  int done = 0;
  int trial = 0;
  while (done < 20 && trial < 400) {
    ++trial;
    int n = 1 + static_cast<int>(rng() % 3);
    int m = 1 + static_cast<int>(rng() % 2);
    int k = 1 + static_cast<int>(rng() % 3);
    DirectionSet<Rational> lambda;
    if (trial % 2 == 0 && n >= 2)
      lambda = testgen::xi_subspace_set(rng, n, m, k, 5, n - 1);
    else
      lambda = testgen::annihilated_set(rng, n, m, k, 5);
    auto verdict = is_determining<Rational>(lambda);
    if (is_determining_branch(verdict)) continue;
    const auto& cert = std::get<NotDetermining<Rational>>(verdict).certificate;
    HomogeneousMap<Rational> phi;
    try {
      phi = HomogeneousMap<Rational>::from_annihilator(cert);
    } catch (const std::invalid_argument&) {
      continue;
    }
    ++done;
    try {
      auto tame = verify_directional_tameness<Rational>(phi, lambda, radii);
      if (!tame.pass) out.fail("tameness failed at certificate " + std::to_string(done));
      auto blow = verify_blowup(phi.to_double_map(), radii);
      if (!blow.strictly_increasing) out.fail("blowup growth failed at certificate " + std::to_string(done));
      if (!blow.envelope_ok)
        out.fail("envelope ratio " + fmt(blow.rows.back().envelope_ratio) + " at certificate " + std::to_string(done));
    } catch (const std::exception& e) {
      out.fail(std::string("sweep threw: ") + e.what());
    }
    if (!out.pass) break;
  }
  double elapsed = seconds_since(start);
  if (done < 20) out.fail("only generated " + std::to_string(done) + " certificates");
  if (elapsed >= 120.0) out.fail("runtime " + fmt(elapsed) + " s exceeds 120 s");
  out.detail = std::to_string(done) + " certificates swept, " + fmt(elapsed) + " s" +
               (out.detail.empty() ? "" : "; " + out.detail);
  return out;
}

// ---------------------------------------------------------------- criterion 6
Outcome criterion6() {
  Outcome out;
  testgen::Rng rng(106);
  int total = 0, witnesses = 0;
  while (total < 300) {
    int n = 1 + static_cast<int>(rng() % 3);
    int m = 1 + static_cast<int>(rng() % 3);
    int count = 1 + static_cast<int>(rng() % 12);
    DirectionSet<Rational> lambda;
    switch (total % 3) {
      case 0:
        lambda = testgen::random_direction_set(rng, n, m, 1, count);
        break;
      case 1:
        lambda = testgen::xi_subspace_set(rng, n, m, 1, count, std::max(1, n - 1));
        break;
      default:
        lambda = testgen::eta_subspace_set(rng, n, m, 1, count, std::max(1, m - 1));
        break;
    }
    ++total;
    auto verdict = is_rank1_determining<Rational>(lambda);
    bool mine = is_rank1_determining_branch(verdict);
    bool truth = oracle::exhaustive_rank1_determining<Rational>(lambda);
    if (mine != truth) {
      out.fail("oracle mismatch at instance " + std::to_string(total));
      break;
    }
    if (!mine) {
      ++witnesses;
      const auto& w = std::get<Rank1Witness<Rational>>(verdict);
      bool u_nz = false, v_nz = false;
      for (Eigen::Index i = 0; i < w.u.size(); ++i) u_nz = u_nz || w.u(i) != 0;
      for (Eigen::Index i = 0; i < w.v.size(); ++i) v_nz = v_nz || w.v(i) != 0;
      if (!u_nz || !v_nz) out.fail("zero witness component");
      for (const auto& pr : lambda.pairs)
        if (w.u.dot(pr.xi) * w.v.dot(pr.eta) != 0) out.fail("witness fails to annihilate exactly");
      if (!out.pass) break;
    }
  }
  out.detail = std::to_string(total) + " instances, " + std::to_string(witnesses) + " witnesses verified exactly" +
               (out.detail.empty() ? "" : "; " + out.detail);
  return out;
}

// ---------------------------------------------------------------- criterion 7
Outcome criterion7() {
  Outcome out;
  testgen::Rng rng(107);

  // coordinate-pairs instance, n = m = 2, l = 1
  std::vector<std::pair<VectorX<Rational>, VectorX<Rational>>> raw;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      VectorX<Rational> xi = VectorX<Rational>::Zero(2), eta = VectorX<Rational>::Zero(2);
      xi(i) = 1;
      eta(j) = 1;
      raw.emplace_back(xi, eta);
    }
  auto coord = make_direction_set<Rational>(2, 2, 1, std::move(raw));
  auto est = epsilon_constant<Rational>(coord, 1, 32);
  double dense = oracle::dense_grid_epsilon<Rational>(coord, 1, 3000);
  if (est.value < 0.98 || est.value > 1.02) out.fail("epsilon " + fmt(est.value) + " outside [0.98, 1.02]");
  if (std::abs(est.value - dense) > 0.02 * dense)
    out.fail("epsilon " + fmt(est.value) + " disagrees with dense-grid " + fmt(dense));

  // propagation on 10 determining instances x 1e4 unit samples
  int instances = 0, checked_samples = 0;
  while (instances < 10) {
    int n = 2 + static_cast<int>(rng() % 2);
    int m = 2 + static_cast<int>(rng() % 2);
    auto lambda = testgen::random_direction_set(rng, n, m, 1, n * m + 2);
    if (!is_rank1_determining_branch(is_rank1_determining<Rational>(lambda))) continue;
    ++instances;
    int l = static_cast<int>(rng() % 3);
    EpsilonEstimate inst_est;
    try {
      inst_est = epsilon_constant<Rational>(lambda, l, 32);
    } catch (const std::exception& e) {
      out.fail(std::string("epsilon threw: ") + e.what());
      break;
    }
    std::vector<std::pair<VectorX<double>, VectorX<double>>> samples;
    samples.reserve(10000);
    for (int s = 0; s < 10000; ++s)
      samples.emplace_back(testgen::random_unit_vector(rng, n), testgen::random_unit_vector(rng, m));
    auto rep = propagation_inequality_check<Rational>(lambda, l, inst_est, samples);
    checked_samples += rep.samples;
    if (!rep.pass)
      out.fail("propagation violated " + std::to_string(rep.violations) + " times on instance " +
               std::to_string(instances));
    if (!out.pass) break;
  }
  out.detail = "epsilon " + fmt(est.value) + " vs dense " + fmt(dense) + ", " + std::to_string(instances) +
               " instances x 1e4 samples (" + std::to_string(checked_samples) + " total)" +
               (out.detail.empty() ? "" : "; " + out.detail);
  return out;
}

// ---------------------------------------------------------------- criterion 8
Outcome criterion8() {
  Outcome out;
  for (double nu : {1.0, 1.5, 2.0, 3.0}) {
    auto rep = validate_weight_sequence(WeightSequence::gevrey(nu, 50));
    if (!rep.all_pass) out.fail("gevrey(" + fmt(nu) + ") failed a condition");
    if (!std::isfinite(rep.smallest_C) || rep.smallest_C <= 0) out.fail("gevrey(" + fmt(nu) + ") has no finite C");
  }
  auto ones = validate_weight_sequence(WeightSequence::custom_list(std::vector<Rational>(11, Rational(1))));
  if (ones.growth.pass || ones.growth.first_fail != 2) out.fail("all-ones sequence did not fail at k = 2");
  out.detail = "gevrey nu in {1, 1.5, 2, 3} to K = 50; all-ones fails at k = 2" +
               (out.detail.empty() ? "" : "; " + out.detail);
  return out;
}

// ---------------------------------------------------------------- criterion 9
struct Cli {
  fs::path dir;

  std::pair<int, std::string> run(const std::string& args) const {
    static int counter = 0;
    fs::path capture = dir / ("out_" + std::to_string(counter++) + ".txt");
    std::string cmd = std::string(DIRREG_CLI_PATH) + " " + args + " > " + capture.string() + " 2> /dev/null";
    int status = std::system(cmd.c_str());
    std::ifstream in(capture);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, text};
  }

  fs::path write(const std::string& name, const std::string& contents) const {
    fs::path p = dir / name;
    std::ofstream(p) << contents;
    return p;
  }
};

Outcome criterion9() {
  Outcome out;
  Cli cli;
  cli.dir = fs::temp_directory_path() / "dirreg_acceptance";
  fs::remove_all(cli.dir);
  fs::create_directories(cli.dir);

  // round-trip
  json lambda_doc = json::parse(R"({"schema": 1, "n": 2, "m": 1, "k": 1, "mode": "rational",
    "points": [{"xi": [1, "2/3"], "eta": [1]}, {"xi": ["-5/4", 0], "eta": ["7/2"]}]})");
  if (LambdaDocument::parse(lambda_doc).serialize() != lambda_doc) out.fail("lambda round-trip changed the document");

  // worked example 1: coordinate pairs
  fs::path coord = cli.write("coord.json",
                             R"({"schema": 1, "n": 2, "m": 1, "k": 1, "mode": "rational",
    "points": [{"xi": [1, 0], "eta": [1]}, {"xi": [0, 1], "eta": [1]}]})");
  auto [code1, text1] = cli.run("analyze --lambda " + coord.string());
  if (code1 != 0) out.fail("coordinate analyze exit " + std::to_string(code1));
  json rep1 = json::parse(text1, nullptr, false);
  if (rep1.is_discarded() || rep1["verdict"] != "determining" || rep1["stability_B"] != "1")
    out.fail("coordinate analyze payload mismatch");

  // worked example 2: collinear xi
  fs::path coll = cli.write("collinear.json",
                            R"({"schema": 1, "n": 2, "m": 1, "k": 1, "mode": "rational",
    "points": [{"xi": [1, 0], "eta": [1]}, {"xi": [2, 0], "eta": [1]}, {"xi": [3, 0], "eta": [1]}]})");
  auto [code2, text2] = cli.run("analyze --lambda " + coll.string());
  json rep2 = json::parse(text2, nullptr, false);
  if (code2 != 3 || rep2.is_discarded() || rep2["annihilator"] != json({{"0,1|1", "1"}}))
    out.fail("collinear analyze mismatch (exit " + std::to_string(code2) + ")");

  // worked example 3: undersized Lambda
  fs::path small = cli.write("small.json",
                             R"({"schema": 1, "n": 2, "m": 1, "k": 1, "mode": "rational",
    "points": [{"xi": [1, 1], "eta": [1]}]})");
  auto [code3, text3] = cli.run("analyze --lambda " + small.string());
  json rep3 = json::parse(text3, nullptr, false);
  if (code3 != 3 || rep3.is_discarded() || rep3["verdict"] != "not_determining")
    out.fail("undersized analyze mismatch (exit " + std::to_string(code3) + ")");

  // byte-for-byte reproducibility of all three worked examples
  for (const auto& [name, path] : {std::pair<std::string, fs::path>{"coord", coord}, {"collinear", coll}, {"small", small}}) {
    fs::path o = cli.dir / (name + "_rep.json");
    std::string cmd = "analyze --lambda " + path.string() + " --out " + o.string();
    cli.run(cmd);
    std::string first = read_file(o.string());
    cli.run(cmd);
    if (read_file(o.string()) != first) out.fail("report for " + name + " not byte-identical across runs");
  }

  // reconstruct worked instance through the CLI
  fs::path worked = cli.write("worked.json",
                              R"({"schema": 1, "n": 2, "m": 1, "k": 2, "mode": "rational",
    "points": [{"xi": [1, 0], "eta": [1]}, {"xi": [0, 1], "eta": [1]}, {"xi": [1, 1], "eta": [1]}]})");
  auto [code4, text4] = cli.run("reconstruct --lambda " + worked.string() + " --poly \"x1*x2\" --point 5,-7");
  json rep4 = json::parse(text4, nullptr, false);
  if (code4 != 0 || rep4.is_discarded() ||
      rep4["partials"] != json({{"0,2|1", "0"}, {"1,1|1", "1"}, {"2,0|1", "0"}}) || rep4["error_bound"] != "exact")
    out.fail("reconstruct worked example mismatch (exit " + std::to_string(code4) + ")");

  // exit-code contract
  if (cli.run("analyze --bogus").first != 1) out.fail("usage error should exit 1");
  if (cli.run("analyze --lambda " + (cli.dir / "missing.json").string()).first != 2)
    out.fail("missing input should exit 2");
  fs::path repfile = cli.dir / "coord_report.json";
  cli.run("analyze --lambda " + coord.string() + " --out " + repfile.string());
  if (cli.run("counterexample --from-report " + repfile.string()).first != 4)
    out.fail("determining counterexample input should exit 4");
  if (cli.run("weights --family bogus").first != 1) out.fail("unknown family should exit 1");

  out.detail = "round-trip, three worked examples byte-identical, exit codes 0/1/2/3/4" +
               (out.detail.empty() ? "" : "; " + out.detail);
  return out;
}

} // namespace

int main() {
  struct Entry {
    int id;
    std::string name;
    Outcome outcome;
  };
  std::vector<Entry> entries;

  entries.push_back({1, "verdict oracle equivalence", criterion1()});

  Outcome c2, c3;
  criteria23(c2, c3);
  entries.push_back({2, "reconstruction exactness", c2});
  entries.push_back({3, "inequality (B)", c3});
  entries.push_back({4, "Remark 3 properties", criterion4()});
  entries.push_back({5, "sharpness sweeps", criterion5()});
  entries.push_back({6, "rank-1 oracle equivalence", criterion6()});
  entries.push_back({7, "epsilon constant", criterion7()});
  entries.push_back({8, "weight sequences", criterion8()});
  entries.push_back({9, "CLI contract", criterion9()});

  int failures = 0;
  for (const auto& e : entries) {
    if (!e.outcome.pass) ++failures;
    std::printf("%s  criterion %d: %s — %s\n", e.outcome.pass ? "PASS" : "FAIL", e.id, e.name.c_str(),
                e.outcome.detail.c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(entries.size()) - failures, entries.size());
  return failures;
}
