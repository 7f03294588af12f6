// dirreg: decides whether a set of direction pairs determines order-k
// regularity, reconstructs k-th partials from directional data, and runs the
// counterexample / rank-1 / weight-sequence verifiers. See README.md for the
// file formats and exit-code contract.

#include "dirreg/determine.hpp"
#include "dirreg/documents.hpp"
#include "dirreg/polynomial.hpp"
#include "dirreg/rank1.hpp"
#include "dirreg/reconstruct.hpp"
#include "dirreg/sharpness.hpp"
#include "dirreg/version.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using dirreg::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInput = 2;
constexpr int kExitNotDetermining = 3;
constexpr int kExitNoCounterexample = 4;

struct Output {
  std::string out_path; // empty: print to stdout
  std::string command_echo;
  std::string input_digest;

  void emit(json payload) const {
    json report = dirreg::make_report(command_echo, input_digest, std::move(payload));
    std::string text = report.dump(2) + "\n";
    if (out_path.empty())
      std::cout << text;
    else
      dirreg::write_file_atomic(out_path, text);
  }
};

dirreg::ScalarMode resolve_mode(dirreg::ScalarMode document_mode) {
  if (const char* forced = std::getenv("DIRREG_MODE")) return dirreg::parse_mode(forced);
  return document_mode;
}

std::vector<double> parse_radii(const std::string& text) {
  std::vector<double> radii;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      radii.push_back(std::stod(tok));
    } catch (...) {
      throw dirreg::InputError("--radii: bad value \"" + tok + "\"");
    }
  }
  if (radii.empty()) throw dirreg::InputError("--radii: empty list");
  return radii;
}

template <class Scalar>
dirreg::VectorX<Scalar> parse_point_csv(const std::string& text, int n) {
  std::vector<std::string> toks;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) toks.push_back(tok);
  if (static_cast<int>(toks.size()) != n)
    throw dirreg::InputError("--point: expected " + std::to_string(n) + " coordinates, got " +
                             std::to_string(toks.size()));
  dirreg::VectorX<Scalar> x(n);
  for (int i = 0; i < n; ++i) {
    if constexpr (dirreg::is_rational_v<Scalar>) {
      x(i) = dirreg::parse_rational(toks[static_cast<std::size_t>(i)]);
    } else {
      try {
        x(i) = std::stod(toks[static_cast<std::size_t>(i)]);
      } catch (...) {
        throw dirreg::InputError("--point: bad coordinate \"" + toks[static_cast<std::size_t>(i)] + "\"");
      }
    }
  }
  return x;
}

template <class Scalar>
json verdict_payload(const dirreg::DeterminingVerdict<Scalar>& verdict, const dirreg::DirectionSet<Scalar>& lambda) {
  json payload;
  if (dirreg::is_determining_branch(verdict)) {
    const auto& det = std::get<dirreg::Determining<Scalar>>(verdict);
    payload["verdict"] = "determining";
    payload["selection"] = det.selection;
    payload["stability_B"] = dirreg::scalar_to_json<Scalar>(det.stability_B);
    payload["swaps"] = det.swaps;
    if constexpr (dirreg::is_rational_v<Scalar>) {
      payload["determinant"] = dirreg::to_fraction_string(dirreg::determinant<Scalar>(det.matrix));
    } else {
      dirreg::SignedLogDet sld = dirreg::signed_log_determinant(det.matrix.entries);
      payload["determinant"] = {{"sign", sld.sign}, {"log_abs", sld.log_abs}};
    }
  } else {
    const auto& nd = std::get<dirreg::NotDetermining<Scalar>>(verdict);
    payload["verdict"] = "not_determining";
    payload["annihilator"] = dirreg::serialize_annihilator<Scalar>(nd.certificate)["coeffs"];
    if constexpr (!dirreg::is_rational_v<Scalar>) payload["max_scaled_residual"] = nd.max_scaled_residual;
  }
  payload["n"] = lambda.n;
  payload["m"] = lambda.m;
  payload["k"] = lambda.k;
  return payload;
}

template <class Scalar>
int run_analyze(const dirreg::LambdaDocument& doc, const std::string& select, const Output& out) {
  dirreg::DirectionSet<Scalar> lambda = doc.direction_set<Scalar>();
  dirreg::DeterminingVerdict<Scalar> verdict = dirreg::is_determining<Scalar>(lambda);
  if (dirreg::is_determining_branch(verdict) && select == "maxvol")
    verdict = dirreg::select_well_conditioned<Scalar>(lambda);
  else if (dirreg::is_determining_branch(verdict))
    verdict = dirreg::greedy_select<Scalar>(lambda);
  json payload = verdict_payload<Scalar>(verdict, lambda);
  payload["select"] = select;
  payload["mode"] = dirreg::mode_name(dirreg::is_rational_v<Scalar> ? dirreg::ScalarMode::Rational
                                                                    : dirreg::ScalarMode::Float);
  payload["input"] = doc.serialize();
  out.emit(std::move(payload));
  return dirreg::is_determining_branch(verdict) ? kExitOk : kExitNotDetermining;
}

template <class Scalar>
int run_reconstruct(const dirreg::LambdaDocument& doc, const std::string& select, const std::string& data_path,
                    const std::string& poly_expr, const std::string& point_csv, double h, const Output& out) {
  dirreg::DirectionSet<Scalar> lambda = doc.direction_set<Scalar>();
  dirreg::DeterminingVerdict<Scalar> verdict = select == "maxvol" ? dirreg::select_well_conditioned<Scalar>(lambda)
                                                                  : dirreg::greedy_select<Scalar>(lambda);
  if (!dirreg::is_determining_branch(verdict)) {
    json payload = verdict_payload<Scalar>(verdict, lambda);
    payload["error"] = "Lambda is not determining; nothing to reconstruct";
    out.emit(std::move(payload));
    return kExitNotDetermining;
  }
  const auto& det = std::get<dirreg::Determining<Scalar>>(verdict);
  const int dim = det.matrix.dim();

  dirreg::DerivativeTensor<Scalar> tensor;
  if (!data_path.empty()) {
    auto values = dirreg::parse_data_document<Scalar>(dirreg::parse_json_file(data_path));
    dirreg::VectorX<Scalar> d(dim);
    std::vector<int> missing;
    for (int p = 0; p < dim; ++p) {
      int id = det.selection[static_cast<std::size_t>(p)];
      auto it = values.find(id);
      if (it == values.end())
        missing.push_back(id);
      else
        d(p) = it->second;
    }
    if (!missing.empty()) {
      std::ostringstream msg;
      msg << "data file is missing directional values for selection ids:";
      for (int id : missing) msg << ' ' << id;
      throw dirreg::InputError(msg.str());
    }
    tensor.k = lambda.k;
    tensor.m = lambda.m;
    tensor.basis = det.matrix.basis;
    tensor.point = dirreg::VectorX<Scalar>::Zero(lambda.n);
    tensor.values = dirreg::solve<Scalar>(det.matrix, d);
    tensor.exact = dirreg::is_rational_v<Scalar>;
    tensor.error_bound = 0;
  } else {
    dirreg::PolynomialMap<dirreg::Rational> f = dirreg::parse_polynomial_map(poly_expr, lambda.n, lambda.m);
    dirreg::VectorX<Scalar> x = parse_point_csv<Scalar>(point_csv, lambda.n);
    dirreg::FunctionOracle<Scalar> oracle;
    oracle.m = lambda.m;
    if constexpr (dirreg::is_rational_v<Scalar>) {
      oracle.exact_directional = [f](const dirreg::VectorX<dirreg::Rational>& px,
                                     const dirreg::VectorX<dirreg::Rational>& xi,
                                     const dirreg::VectorX<dirreg::Rational>& eta,
                                     int k) { return f.directional(px, xi, eta, k); };
    } else {
      dirreg::PolynomialMap<double> fd = dirreg::to_double_map(f);
      oracle.evaluator = [fd](const dirreg::VectorX<double>& z) { return fd.eval(z); };
      if (h <= 0) {
        oracle.exact_directional = [fd](const dirreg::VectorX<double>& px, const dirreg::VectorX<double>& xi,
                                        const dirreg::VectorX<double>& eta,
                                        int k) { return fd.directional(px, xi, eta, k); };
      }
    }
    tensor = dirreg::reconstruct_partials<Scalar>(oracle, x, det, h);
  }

  json partials = json::object();
  for (int a_pos = 0; a_pos < tensor.basis.count(); ++a_pos)
    for (int j = 0; j < tensor.m; ++j)
      partials[dirreg::coeff_key(tensor.basis.indices[static_cast<std::size_t>(a_pos)], j)] =
          dirreg::scalar_to_json<Scalar>(tensor.values(a_pos * tensor.m + j));

  json payload;
  payload["verdict"] = "determining";
  payload["selection"] = det.selection;
  payload["stability_B"] = dirreg::scalar_to_json<Scalar>(det.stability_B);
  payload["partials"] = partials;
  if (tensor.exact)
    payload["error_bound"] = "exact";
  else
    payload["error_bound"] = tensor.error_bound;
  if (!point_csv.empty()) {
    json pt = json::array();
    for (Eigen::Index i = 0; i < tensor.point.size(); ++i)
      pt.push_back(dirreg::scalar_to_json<Scalar>(tensor.point(i)));
    payload["point"] = pt;
  }
  payload["n"] = lambda.n;
  payload["m"] = lambda.m;
  payload["k"] = lambda.k;
  payload["input"] = doc.serialize();
  out.emit(std::move(payload));
  return kExitOk;
}

json blowup_to_json(const dirreg::BlowupReport& rep) {
  json rows = json::array();
  for (const auto& row : rep.rows)
    rows.push_back({{"radius", row.radius}, {"value", row.value}, {"envelope_ratio", row.envelope_ratio}});
  return {{"alpha", rep.alpha.to_string()},
          {"j", rep.j + 1},
          {"rows", rows},
          {"strictly_increasing", rep.strictly_increasing},
          {"envelope_ok", rep.envelope_ok},
          {"pass", rep.pass}};
}

json tameness_to_json(const dirreg::TamenessReport& rep) {
  json rows = json::array();
  for (const auto& row : rep.rows)
    rows.push_back({{"pair", row.pair_id},
                    {"order", row.order},
                    {"value_at_largest", row.value_at_largest},
                    {"max_value", row.max_value},
                    {"bounded", row.bounded}});
  return {{"rows", rows}, {"pass", rep.pass}};
}

template <class Scalar>
int run_theorem1_counterexample(const dirreg::AnnihilatorForm<Scalar>& phi,
                                const std::optional<dirreg::DirectionSet<Scalar>>& lambda,
                                const std::vector<double>& radii, const Output& out) {
  auto hom = dirreg::HomogeneousMap<Scalar>::from_annihilator(phi);
  json payload;
  payload["kind"] = "theorem1";
  payload["blowup"] = blowup_to_json(dirreg::verify_blowup(hom.to_double_map(), radii));
  if (lambda) payload["tameness"] = tameness_to_json(dirreg::verify_directional_tameness<Scalar>(hom, *lambda, radii));
  out.emit(std::move(payload));
  return kExitOk;
}

int run_theorem2_counterexample(const dirreg::VectorX<double>& u, const dirreg::VectorX<double>& v,
                                const dirreg::ScalarProfile& profile,
                                std::vector<std::pair<dirreg::VectorX<double>, dirreg::VectorX<double>>> pairs,
                                const Output& out) {
  if (pairs.empty()) pairs = dirreg::synth_orthogonal_pairs(u, v);
  json payload;
  payload["kind"] = "theorem2";
  dirreg::QuotientReport q = dirreg::quotient_nonconvergence(profile);
  json qrows = json::array();
  for (const auto& row : q.rows) qrows.push_back({{"base_point", row.base_point}, {"spread_ratio", row.spread_ratio}});
  payload["quotients"] = {{"rows", qrows}, {"pass", q.pass}};
  dirreg::VanishingReport van = dirreg::verify_directional_vanishing(u, v, profile, pairs);
  json vrows = json::array();
  for (const auto& row : van.rows)
    vrows.push_back(
        {{"pair", row.pair_id}, {"max_abs_derivative", row.max_abs_derivative}, {"vanishes", row.vanishes}});
  payload["directional_vanishing"] = {{"rows", vrows}, {"pass", van.pass}};
  out.emit(std::move(payload));
  return kExitOk;
}

int run_counterexample(const std::string& from_report, const std::string& phi_path, const std::string& uv_path,
                       const std::string& lambda_path, const std::vector<double>& radii, const Output& out) {
  std::optional<dirreg::LambdaDocument> lambda_doc;
  if (!lambda_path.empty()) lambda_doc = dirreg::LambdaDocument::parse(dirreg::parse_json_file(lambda_path));

  if (!uv_path.empty()) {
    dirreg::UvDocument uv = dirreg::UvDocument::parse(dirreg::parse_json_file(uv_path));
    std::vector<std::pair<dirreg::VectorX<double>, dirreg::VectorX<double>>> pairs;
    if (lambda_doc) {
      auto set = lambda_doc->direction_set<double>();
      for (const auto& pr : set.pairs) pairs.emplace_back(pr.xi, pr.eta);
    }
    return run_theorem2_counterexample(uv.u, uv.v, uv.profile, std::move(pairs), out);
  }

  if (!phi_path.empty()) {
    json doc = dirreg::parse_json_file(phi_path);
    if (lambda_doc && resolve_mode(lambda_doc->mode) == dirreg::ScalarMode::Float) {
      auto phi = dirreg::parse_phi_document<double>(doc);
      std::optional<dirreg::DirectionSet<double>> lam = lambda_doc->direction_set<double>();
      return run_theorem1_counterexample<double>(phi, lam, radii, out);
    }
    auto phi = dirreg::parse_phi_document<dirreg::Rational>(doc);
    std::optional<dirreg::DirectionSet<dirreg::Rational>> lam;
    if (lambda_doc) lam = lambda_doc->direction_set<dirreg::Rational>();
    return run_theorem1_counterexample<dirreg::Rational>(phi, lam, radii, out);
  }

  // --from-report
  json rep = dirreg::parse_json_file(from_report);
  if (!rep.is_object() || !rep.contains("verdict"))
    throw dirreg::InputError("--from-report: file has no \"verdict\" field");
  std::string verdict = rep["verdict"].get<std::string>();
  if (verdict == "determining" || verdict == "determining1") {
    std::cerr << "no counterexample exists for this Lambda at this k\n";
    return kExitNoCounterexample;
  }
  if (verdict == "not_determining") {
    for (const char* field : {"annihilator", "n", "m", "k", "input"})
      if (!rep.contains(field)) throw dirreg::InputError(std::string("--from-report: missing \"") + field + "\"");
    json phi_doc = {{"schema", 1}, {"n", rep["n"]}, {"m", rep["m"]}, {"k", rep["k"]}, {"coeffs", rep["annihilator"]}};
    dirreg::LambdaDocument doc = dirreg::LambdaDocument::parse(rep["input"]);
    if (resolve_mode(doc.mode) == dirreg::ScalarMode::Float) {
      auto phi = dirreg::parse_phi_document<double>(phi_doc);
      std::optional<dirreg::DirectionSet<double>> lam = doc.direction_set<double>();
      return run_theorem1_counterexample<double>(phi, lam, radii, out);
    }
    auto phi = dirreg::parse_phi_document<dirreg::Rational>(phi_doc);
    std::optional<dirreg::DirectionSet<dirreg::Rational>> lam = doc.direction_set<dirreg::Rational>();
    return run_theorem1_counterexample<dirreg::Rational>(phi, lam, radii, out);
  }
  if (verdict == "not_determining1") {
    for (const char* field : {"witness", "input"})
      if (!rep.contains(field)) throw dirreg::InputError(std::string("--from-report: missing \"") + field + "\"");
    json uv_doc = {{"schema", 1}, {"u", rep["witness"]["u"]}, {"v", rep["witness"]["v"]}};
    dirreg::UvDocument uv = dirreg::UvDocument::parse(uv_doc);
    dirreg::LambdaDocument doc = dirreg::LambdaDocument::parse(rep["input"]);
    std::vector<std::pair<dirreg::VectorX<double>, dirreg::VectorX<double>>> pairs;
    auto set = doc.direction_set<double>();
    for (const auto& pr : set.pairs) pairs.emplace_back(pr.xi, pr.eta);
    return run_theorem2_counterexample(uv.u, uv.v, uv.profile, std::move(pairs), out);
  }
  throw dirreg::InputError("--from-report: unrecognized verdict \"" + verdict + "\"");
}

template <class Scalar>
int run_rank1(const dirreg::LambdaDocument& doc, std::optional<int> epsilon_l, int grid, const Output& out) {
  dirreg::DirectionSet<Scalar> lambda = doc.direction_set<Scalar>();
  dirreg::Rank1Verdict<Scalar> verdict = dirreg::is_rank1_determining<Scalar>(lambda);
  json payload;
  payload["n"] = lambda.n;
  payload["m"] = lambda.m;
  payload["input"] = doc.serialize();
  if (!dirreg::is_rank1_determining_branch(verdict)) {
    const auto& w = std::get<dirreg::Rank1Witness<Scalar>>(verdict);
    payload["verdict"] = "not_determining1";
    json u = json::array(), v = json::array();
    for (Eigen::Index i = 0; i < w.u.size(); ++i) u.push_back(dirreg::scalar_to_json<Scalar>(w.u(i)));
    for (Eigen::Index i = 0; i < w.v.size(); ++i) v.push_back(dirreg::scalar_to_json<Scalar>(w.v(i)));
    payload["witness"] = {{"u", u}, {"v", v}};
    out.emit(std::move(payload));
    return kExitNotDetermining;
  }
  payload["verdict"] = "determining1";
  auto minimal = dirreg::minimal_determining_subset<Scalar>(lambda);
  payload["minimal_subset"] = minimal.kept_ids;
  if (epsilon_l) {
    dirreg::EpsilonEstimate est = dirreg::epsilon_constant<Scalar>(lambda, *epsilon_l, grid);
    json umin = json::array(), vmin = json::array();
    for (Eigen::Index i = 0; i < est.u_min.size(); ++i) umin.push_back(est.u_min(i));
    for (Eigen::Index i = 0; i < est.v_min.size(); ++i) vmin.push_back(est.v_min(i));
    payload["epsilon"] = {{"value", est.value}, {"gap", est.gap}, {"l", est.l}, {"u_min", umin}, {"v_min", vmin}};
  }
  out.emit(std::move(payload));
  return kExitOk;
}

int run_weights(const std::string& family, const std::string& values_path, int K, const Output& out) {
  dirreg::WeightSequence w;
  json family_echo;
  if (!values_path.empty()) {
    json doc = dirreg::parse_json_file(values_path);
    dirreg::detail::check_schema(doc, "weights");
    if (!doc.contains("values") || !doc["values"].is_array() || doc["values"].size() < 3)
      throw dirreg::InputError("weights: \"values\" must be an array with at least 3 entries (M_0..M_K)");
    std::vector<dirreg::Rational> values;
    for (std::size_t i = 0; i < doc["values"].size(); ++i)
      values.push_back(dirreg::detail::json_to_rational(doc["values"][i], "weights: values[" + std::to_string(i) + "]"));
    w = dirreg::WeightSequence::custom_list(std::move(values));
    family_echo = "custom";
  } else {
    if (family == "factorial") {
      w = dirreg::WeightSequence::factorial(K);
      family_echo = "factorial";
    } else if (family.rfind("gevrey", 0) == 0) {
      std::string arg = family.substr(6);
      if (!arg.empty() && (arg.front() == '(' || arg.front() == ':')) {
        if (arg.front() == '(' && arg.back() == ')') arg = arg.substr(1, arg.size() - 2);
        else if (arg.front() == ':') arg = arg.substr(1);
      }
      double nu = 0;
      try {
        nu = std::stod(arg);
      } catch (...) {
        std::cerr << "unknown family \"" << family << "\" (use gevrey(NU) or factorial)\n";
        return kExitUsage;
      }
      w = dirreg::WeightSequence::gevrey(nu, K);
      family_echo = {{"name", "gevrey"}, {"nu", nu}};
    } else {
      std::cerr << "unknown family \"" << family << "\" (use gevrey(NU) or factorial)\n";
      return kExitUsage;
    }
  }
  dirreg::WeightReport rep = dirreg::validate_weight_sequence(w);
  auto cond = [](const dirreg::WeightConditionStatus& st) {
    json c;
    c["pass"] = st.pass;
    if (!st.pass) c["first_fail"] = st.first_fail;
    return c;
  };
  json payload;
  payload["family"] = family_echo;
  payload["K"] = rep.K;
  payload["conditions"] = {{"growth", cond(rep.growth)}, {"increasing", cond(rep.increasing)}, {"ratio", cond(rep.ratio)}};
  payload["smallest_C"] = rep.smallest_C;
  payload["all_pass"] = rep.all_pass;
  if (!rep.note.empty()) payload["note"] = rep.note;
  out.emit(std::move(payload));
  return kExitOk;
}

std::string join_args(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i) s += ' ';
    s += argv[i];
  }
  return s;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"determining sets, derivative reconstruction, and sharpness checks for directional regularity"};
  app.set_help_flag("--help", "print help"); // keep -h free: reconstruct has an --h step option
  app.set_version_flag("--version", std::string(dirreg::kToolName) + " " + dirreg::kToolVersion);
  app.require_subcommand(1);

  std::string lambda_path, out_path, select = "first", data_path, poly_expr, point_csv;
  std::string from_report, phi_path, uv_path, radii_text, family, values_path;
  double step_h = 0;
  int grid = 16, weights_K = 50;
  std::optional<int> epsilon_l;

  CLI::App* analyze = app.add_subcommand("analyze", "decide the determining property and emit certificates");
  analyze->add_option("--lambda", lambda_path, "lambda.json input")->required();
  analyze->add_option("--select", select, "selection strategy: first | maxvol")
      ->check(CLI::IsMember({"first", "maxvol"}));
  analyze->add_option("--out", out_path, "report output path");

  CLI::App* reconstruct = app.add_subcommand("reconstruct", "recover order-k partials from directional data");
  reconstruct->set_help_flag("--help", "print help");
  reconstruct->add_option("--lambda", lambda_path, "lambda.json input")->required();
  auto* data_opt = reconstruct->add_option("--data", data_path, "data.json with id -> directional value");
  auto* poly_opt = reconstruct->add_option("--poly", poly_expr, "polynomial map, components ';'-separated");
  reconstruct->add_option("--point", point_csv, "evaluation point, comma-separated");
  reconstruct->add_option("--h", step_h, "finite-difference step (float mode)");
  reconstruct->add_option("--select", select, "selection strategy: first | maxvol")
      ->check(CLI::IsMember({"first", "maxvol"}));
  reconstruct->add_option("--out", out_path, "report output path");
  data_opt->excludes(poly_opt);
  poly_opt->needs(reconstruct->get_option("--point"));

  CLI::App* counter = app.add_subcommand("counterexample", "run sharpness sweeps from a certificate");
  counter->add_option("--from-report", from_report, "analyze/rank1 report to read the certificate from");
  counter->add_option("--phi", phi_path, "phi.json annihilator coefficients");
  counter->add_option("--uv", uv_path, "uv.json rank-1 witness with profile");
  counter->add_option("--lambda", lambda_path, "lambda.json for tameness/vanishing sweeps");
  counter->add_option("--radii", radii_text, "comma-separated decreasing radii (default 1e-3..1e-8)");
  counter->add_option("--out", out_path, "report output path");

  CLI::App* rank1 = app.add_subcommand("rank1", "rank-1 determining test, minimal subset, epsilon constant");
  rank1->add_option("--lambda", lambda_path, "lambda.json input (k ignored)")->required();
  rank1->add_option("--epsilon-l", epsilon_l, "compute the epsilon constant for this power l");
  rank1->add_option("--grid", grid, "sphere grid resolution (>= 8)");
  rank1->add_option("--out", out_path, "report output path");

  CLI::App* weights = app.add_subcommand("weights", "validate a Carleman/Beurling weight sequence");
  weights->add_option("--family", family, "gevrey(NU) or factorial");
  weights->add_option("--values", values_path, "weights.json with custom M_0..M_K");
  weights->add_option("--K", weights_K, "largest index to materialize");
  weights->add_option("--out", out_path, "report output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  }

  try {
    Output out;
    out.out_path = out_path;
    out.command_echo = join_args(argc, argv);

    if (analyze->parsed() || reconstruct->parsed() || rank1->parsed()) {
      std::string bytes = dirreg::read_file(lambda_path);
      out.input_digest = dirreg::digest_bytes(bytes);
      dirreg::LambdaDocument doc = dirreg::LambdaDocument::parse(dirreg::parse_json_file(lambda_path));
      dirreg::ScalarMode mode = resolve_mode(doc.mode);
      if (analyze->parsed()) {
        return mode == dirreg::ScalarMode::Rational ? run_analyze<dirreg::Rational>(doc, select, out)
                                                    : run_analyze<double>(doc, select, out);
      }
      if (reconstruct->parsed()) {
        if (data_path.empty() && poly_expr.empty())
          throw dirreg::InputError("reconstruct: provide --data FILE or --poly EXPR");
        return mode == dirreg::ScalarMode::Rational
                   ? run_reconstruct<dirreg::Rational>(doc, select, data_path, poly_expr, point_csv, step_h, out)
                   : run_reconstruct<double>(doc, select, data_path, poly_expr, point_csv, step_h, out);
      }
      return mode == dirreg::ScalarMode::Rational ? run_rank1<dirreg::Rational>(doc, epsilon_l, grid, out)
                                                  : run_rank1<double>(doc, epsilon_l, grid, out);
    }

    if (counter->parsed()) {
      int sources = (from_report.empty() ? 0 : 1) + (phi_path.empty() ? 0 : 1) + (uv_path.empty() ? 0 : 1);
      if (sources != 1) {
        std::cerr << "counterexample: provide exactly one of --from-report, --phi, --uv\n";
        return kExitUsage;
      }
      std::string source = !from_report.empty() ? from_report : (!phi_path.empty() ? phi_path : uv_path);
      out.input_digest = dirreg::digest_bytes(dirreg::read_file(source));
      std::vector<double> radii = radii_text.empty()
                                      ? std::vector<double>{1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8}
                                      : parse_radii(radii_text);
      return run_counterexample(from_report, phi_path, uv_path, lambda_path, radii, out);
    }

    // weights
    if (family.empty() && values_path.empty()) {
      std::cerr << "weights: provide --family NAME or --values FILE\n";
      return kExitUsage;
    }
    Output wout = out;
    wout.input_digest = values_path.empty() ? dirreg::digest_bytes(family)
                                            : dirreg::digest_bytes(dirreg::read_file(values_path));
    return run_weights(family, values_path, weights_K, wout);
  } catch (const dirreg::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
}
