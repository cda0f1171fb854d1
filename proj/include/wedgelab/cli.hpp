#pragma once

#include <algorithm>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wedgelab/experiment.hpp"
#include "wedgelab/separability.hpp"
#include "wedgelab/serialization.hpp"
#include "wedgelab/version.hpp"

namespace wedgelab::cli {

namespace detail {

inline void emit(const json& j, const std::string& out_path) {
  const std::string text = j.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    save_text(out_path, text);
  }
}

inline std::pair<int, int> parse_dims(const std::string& dims) {
  const auto comma = dims.find(',');
  require(comma != std::string::npos, "--dims expects 'm,n'");
  try {
    const int m = std::stoi(dims.substr(0, comma));
    const int n = std::stoi(dims.substr(comma + 1));
    require(m >= 1 && n >= 1, "--dims must be positive");
    return {m, n};
  } catch (const ValidationError&) {
    throw;
  } catch (const std::exception&) {
    throw ValidationError("--dims expects 'm,n' with integer entries");
  }
}

/// Dimensions from --dims when given, else from the file's "dims" field.
inline std::pair<int, int> resolve_dims(const std::string& dims, const json& j) {
  if (!dims.empty()) return parse_dims(dims);
  const auto from_file = dims_from_json(j);
  require(from_file.has_value(), "no --dims given and the file carries no dims field");
  return *from_file;
}

inline std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto comma = text.find(',', pos);
    const std::string piece = text.substr(pos, comma == std::string::npos ? comma : comma - pos);
    try {
      out.push_back(std::stoi(piece));
    } catch (const std::exception&) {
      throw ValidationError("invalid integer list entry '" + piece + "'");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  require(!out.empty(), "empty integer list");
  return out;
}

struct SampleArgs {
  int n = 2, m = 2, r = 1, count = 1;
  std::uint64_t seed = 0, stream = 0;
  std::string out;
};

inline int run_sample(const SampleArgs& a) {
  require(a.count >= 1, "--count must be positive");
  if (a.count == 1) {
    SeededRng rng(a.seed, a.stream);
    emit(tuple_to_json(sample_haar_tuple(a.n, a.m, a.r, rng)), a.out);
  } else {
    json tuples = json::array();
    for (int i = 0; i < a.count; ++i) {
      SeededRng rng(a.seed, a.stream + static_cast<std::uint64_t>(i));
      tuples.push_back(tuple_to_json(sample_haar_tuple(a.n, a.m, a.r, rng)));
    }
    emit(tuples, a.out);
  }
  return 0;
}

struct AnalyzeArgs {
  std::string tuple_path, state_path, dims, out;
  double rel_tol = tol::kRank;
  bool full_wedge = false;
};

inline int run_analyze(const AnalyzeArgs& a) {
  require(a.tuple_path.empty() != a.state_path.empty(),
          "analyze expects exactly one of --tuple or --state");
  json output;
  if (!a.tuple_path.empty()) {
    const IsometryTuple v = tuple_from_json(load_json(a.tuple_path));
    const WedgeInvariant wi = wedge_invariants(
        v, a.rel_tol, a.full_wedge ? WedgePath::Full : WedgePath::Compressed);
    const SeparabilityVerdict verdict = decide(v, purify(maximally_mixed(v.n)), a.rel_tol);
    output = verdict_to_json(verdict);
    output["wedge"] = wedge_invariant_to_json(wi);
    output["tuple_rank"] = tuple_rank(v, a.rel_tol);
  } else {
    const json j = load_json(a.state_path);
    const DensityMatrix rho = density_from_json(j);
    auto [m, n] = resolve_dims(a.dims, j);
    require(rho.dim() == m * n, "state dimension does not match --dims");
    const SeparabilityVerdict verdict = decide(rho, m, n, a.rel_tol);
    output = verdict_to_json(verdict);
    const MarginalState omega = MarginalState::from_density(
        DensityMatrix::from_matrix(partial_trace(rho.matrix(), m, n, Factor::First)));
    if (omega.faithful) {
      const IsometryTuple v = tuple_from_state(rho, rho.rank(), purify(omega));
      output["wedge"] = wedge_invariant_to_json(wedge_invariants(
          v, a.rel_tol, a.full_wedge ? WedgePath::Full : WedgePath::Compressed));
    } else {
      output["wedge"] = nullptr;  // marginal not faithful, wedge test skipped
    }
  }
  emit(output, a.out);
  return 0;
}

struct ExperimentArgs {
  std::string config_path;
  int n = 0, m = 0;
  int r = 0;
  std::string r_list;
  long samples = 0;
  std::uint64_t seed = 0;
  std::string omega = "maximally-mixed";
  double rel_tol = tol::kRank;
  std::string tests;
  std::string out;
  std::string format;
  int workers = 0;
  std::set<std::string> given;  // long names of flags actually provided

  bool has(const std::string& flag) const { return given.count(flag) != 0; }
};

inline int run_experiment_cmd(const ExperimentArgs& a) {
  ExperimentConfig cfg;
  if (!a.config_path.empty()) {
    cfg = config_from_json(load_json(a.config_path));
  }
  if (a.has("--n")) cfg.n = a.n;
  if (a.has("--m")) cfg.m = a.m;
  if (a.has("--r")) cfg.r_list = {a.r};
  if (a.has("--r-list")) cfg.r_list = parse_int_list(a.r_list);
  if (a.has("--samples")) cfg.samples = a.samples;
  if (a.has("--seed")) cfg.master_seed = a.seed;
  if (a.has("--omega")) cfg.omega = OmegaSpec::parse(a.omega);
  if (a.has("--rel-tol")) cfg.rel_tol = a.rel_tol;
  if (a.has("--tests")) {
    cfg.tests.clear();
    for (const std::string& t : {std::string("wedge"), std::string("ppt"), std::string("ball")}) {
      if (a.tests.find(t) != std::string::npos) cfg.tests.insert(t);
    }
    require(!cfg.tests.empty(), "--tests must name at least one of wedge, ppt, ball");
  }
  if (a.has("--out")) cfg.output_path = a.out;
  if (a.has("--format")) cfg.format = a.format;
  if (a.has("--workers")) cfg.workers = a.workers;
  cfg.validate();

  const ExperimentReport report = run_experiment(cfg);
  if (cfg.format == "csv") {
    const std::string text = report_to_csv(report);
    if (cfg.output_path.empty()) {
      std::cout << text;
    } else {
      save_text(cfg.output_path, text);
    }
  } else {
    emit(report_to_json(report), cfg.output_path);
  }
  return 0;
}

struct WitnessArgs {
  std::string state_path, dims, out;
};

inline int run_witness(const WitnessArgs& a) {
  const json j = load_json(a.state_path);
  auto [m, n] = resolve_dims(a.dims, j);
  const Matrix raw = matrix_from_json(j);
  Vector zeta;
  if (raw.cols() == 1) {
    zeta = raw.col(0);
  } else {
    // density input: must be (numerically) pure
    const DensityMatrix rho = DensityMatrix::from_matrix(raw);
    require(rho.purity() > 1.0 - 1e-8, "witness input density matrix is not pure");
    zeta = rho.eigenvectors().col(0);
  }
  require(zeta.size() == Eigen::Index(m) * n, "state dimension does not match dims");
  const PureWitness witness = witness_from_pure(zeta, m, n);
  const double on_state = (zeta.adjoint() * witness.c * zeta).value().real();
  emit(json{{"alpha", witness.alpha},
            {"value_on_state", on_state},
            {"c", matrix_to_json(witness.c)}},
       a.out);
  return 0;
}

struct VerifyArgs {
  std::string state_path, dims, decomposition_path, out;
  double tolerance = 1e-8;
};

inline int run_verify(const VerifyArgs& a) {
  const json js = load_json(a.state_path);
  const DensityMatrix rho = density_from_json(js);
  const ProductDecomposition d = decomposition_from_json(load_json(a.decomposition_path));
  const double error = product_decomposition_error(rho, d);
  emit(json{{"valid", error <= a.tolerance}, {"max_abs_error", error}, {"tol", a.tolerance}},
       a.out);
  return 0;
}

}  // namespace detail

inline int run(std::vector<std::string> args) {
  CLI::App app{"Isometry-tuple states, wedge entanglement invariants, Monte Carlo experiments"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  detail::SampleArgs sample_args;
  auto* sample = app.add_subcommand("sample", "Draw isometry tuples and emit them as JSON");
  sample->add_option("--n", sample_args.n, "domain dimension")->required();
  sample->add_option("--m", sample_args.m, "codomain dimension")->required();
  sample->add_option("--r", sample_args.r, "number of components")->required();
  sample->add_option("--seed", sample_args.seed, "master seed");
  sample->add_option("--stream", sample_args.stream, "stream id of the first draw");
  sample->add_option("--count", sample_args.count, "number of tuples");
  sample->add_option("--out", sample_args.out, "output file (stdout when omitted)");

  detail::AnalyzeArgs analyze_args;
  auto* analyze = app.add_subcommand("analyze", "Wedge invariants and separability verdict");
  analyze->add_option("--tuple", analyze_args.tuple_path, "isometry tuple JSON file");
  analyze->add_option("--state", analyze_args.state_path, "density matrix JSON file");
  analyze->add_option("--dims", analyze_args.dims, "bipartite dimensions m,n");
  analyze->add_option("--rel-tol", analyze_args.rel_tol, "relative rank tolerance");
  analyze->add_flag("--full-wedge", analyze_args.full_wedge,
                    "use the full tensor-power wedge path (cross-validation)");
  analyze->add_option("--out", analyze_args.out, "output file");

  detail::ExperimentArgs experiment_args;
  auto* experiment = app.add_subcommand("experiment", "Run a seeded Monte Carlo campaign");
  experiment->add_option("--config", experiment_args.config_path, "config JSON file");
  experiment->add_option("--n", experiment_args.n, "marginal dimension");
  experiment->add_option("--m", experiment_args.m, "other factor dimension");
  experiment->add_option("--r", experiment_args.r, "single rank");
  experiment->add_option("--r-list", experiment_args.r_list, "comma-separated ranks");
  experiment->add_option("--samples", experiment_args.samples, "samples per rank");
  experiment->add_option("--seed", experiment_args.seed, "master seed");
  experiment->add_option("--omega", experiment_args.omega,
                         "maximally-mixed | random-faithful[:seed] | file:<path>");
  experiment->add_option("--rel-tol", experiment_args.rel_tol, "relative rank tolerance");
  experiment->add_option("--tests", experiment_args.tests, "subset of wedge,ppt,ball");
  experiment->add_option("--out", experiment_args.out, "report file");
  experiment->add_option("--format", experiment_args.format, "json or csv");
  experiment->add_option("--workers", experiment_args.workers, "worker threads");

  detail::WitnessArgs witness_args;
  auto* witness = app.add_subcommand("witness", "Entanglement witness from a pure state");
  witness->add_option("--state", witness_args.state_path, "pure state JSON file")->required();
  witness->add_option("--dims", witness_args.dims, "bipartite dimensions m,n");
  witness->add_option("--out", witness_args.out, "output file");

  detail::VerifyArgs verify_args;
  auto* verify = app.add_subcommand("verify-decomposition",
                                    "Check a product decomposition against a state");
  verify->add_option("--state", verify_args.state_path, "density matrix JSON file")->required();
  verify->add_option("--dims", verify_args.dims, "bipartite dimensions m,n");
  verify->add_option("--decomposition", verify_args.decomposition_path,
                     "product decomposition JSON file")
      ->required();
  verify->add_option("--tol", verify_args.tolerance, "entrywise tolerance");
  verify->add_option("--out", verify_args.out, "output file");

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
    for (const CLI::Option* opt : experiment->get_options()) {
      if (opt->count() > 0) experiment_args.given.insert(opt->get_name());
    }
    if (sample->parsed()) return detail::run_sample(sample_args);
    if (analyze->parsed()) return detail::run_analyze(analyze_args);
    if (experiment->parsed()) return detail::run_experiment_cmd(experiment_args);
    if (witness->parsed()) return detail::run_witness(witness_args);
    if (verify->parsed()) return detail::run_verify(verify_args);
    return 1;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << json{{"error", {{"type", "usage"}, {"message", e.what()}}}}.dump() << "\n";
    return 1;
  } catch (const ResourceError& e) {
    std::cerr << json{{"error", {{"type", "resource"}, {"message", e.what()}}}}.dump() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << json{{"error", {{"type", "validation"}, {"message", e.what()}}}}.dump() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << json{{"error", {{"type", "numerical"}, {"message", e.what()}}}}.dump() << "\n";
    return 1;
  } catch (const json::exception& e) {
    std::cerr << json{{"error", {{"type", "validation"}, {"message", e.what()}}}}.dump() << "\n";
    return 1;
  }
}

inline int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(std::move(args));
}

}  // namespace wedgelab::cli
