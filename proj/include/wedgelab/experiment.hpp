#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <exception>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "wedgelab/separability.hpp"
#include "wedgelab/serialization.hpp"
#include "wedgelab/states.hpp"
#include "wedgelab/stiefel.hpp"
#include "wedgelab/version.hpp"

// Seeded Monte Carlo campaigns over (n, m, r, omega). Sample i of a campaign
// always uses stream_id = i, so reports are independent of how samples are
// distributed over workers; merging tallies is commutative.

namespace wedgelab {

struct OmegaSpec {
  enum class Kind { MaximallyMixed, RandomFaithful, File };
  Kind kind = Kind::MaximallyMixed;
  std::uint64_t seed = 0;
  std::string path;

  /// Accepts "maximally-mixed", "random-faithful:<seed>", "file:<path>".
  static OmegaSpec parse(const std::string& text) {
    OmegaSpec spec;
    if (text == "maximally-mixed") {
      spec.kind = Kind::MaximallyMixed;
    } else if (text.rfind("random-faithful", 0) == 0) {
      spec.kind = Kind::RandomFaithful;
      const auto colon = text.find(':');
      if (colon != std::string::npos) {
        try {
          spec.seed = std::stoull(text.substr(colon + 1));
        } catch (const std::exception&) {
          throw ValidationError("invalid omega seed in '" + text + "'");
        }
      }
    } else if (text.rfind("file:", 0) == 0) {
      spec.kind = Kind::File;
      spec.path = text.substr(5);
      require(!spec.path.empty(), "omega spec 'file:' needs a path");
    } else {
      throw ValidationError("unknown omega spec '" + text +
                            "' (expected maximally-mixed, random-faithful[:seed], file:<path>)");
    }
    return spec;
  }

  std::string to_string() const {
    switch (kind) {
      case Kind::MaximallyMixed: return "maximally-mixed";
      case Kind::RandomFaithful: return "random-faithful:" + std::to_string(seed);
      default: return "file:" + path;
    }
  }
};

inline MarginalState omega_from_spec(const OmegaSpec& spec, int n) {
  switch (spec.kind) {
    case OmegaSpec::Kind::MaximallyMixed:
      return maximally_mixed(n);
    case OmegaSpec::Kind::RandomFaithful: {
      SeededRng rng(spec.seed, 0);
      const Matrix g = rng.ginibre(n, n);
      Matrix a = g * g.adjoint();
      a /= a.trace().real();
      constexpr double eps = 1e-6;
      a = (a + eps * Matrix::Identity(n, n)) / (1.0 + n * eps);
      const MarginalState omega = MarginalState::from_density(DensityMatrix::from_matrix(a));
      require(omega.faithful, "random-faithful construction produced a non-faithful state");
      return omega;
    }
    default: {
      const json j = load_json(spec.path);
      const DensityMatrix rho = density_from_json(j);
      require(rho.dim() == n, "omega file dimension does not match n");
      const MarginalState omega = MarginalState::from_density(rho);
      require(omega.faithful, "omega file state is not faithful");
      return omega;
    }
  }
}

struct ExperimentConfig {
  int n = 2;
  int m = 2;
  std::vector<int> r_list;
  long samples = 0;
  std::uint64_t master_seed = 0;
  OmegaSpec omega;
  double rel_tol = tol::kRank;
  std::set<std::string> tests{"wedge", "ppt", "ball"};
  std::string output_path;
  std::string format = "json";
  int workers = 1;

  void validate() const {
    require(n >= 2, "experiment: n must be at least 2");
    require(m >= n, "experiment: requires m >= n");
    require(!r_list.empty(), "experiment: at least one rank is required");
    for (int r : r_list) {
      require(r >= 1 && r <= m * n, "experiment: each r must satisfy 1 <= r <= m*n");
    }
    require(samples >= 0, "experiment: samples must be nonnegative");
    require(workers >= 1, "experiment: workers must be positive");
    require(rel_tol >= 0.0, "experiment: rel_tol must be nonnegative");
    require(format == "json" || format == "csv", "experiment: format must be json or csv");
    for (const std::string& t : tests) {
      require(t == "wedge" || t == "ppt" || t == "ball",
              "experiment: unknown test '" + t + "'");
    }
  }
};

inline json config_to_json(const ExperimentConfig& cfg) {
  return json{{"n", cfg.n},
              {"m", cfg.m},
              {"r_list", cfg.r_list},
              {"samples", cfg.samples},
              {"master_seed", cfg.master_seed},
              {"omega", cfg.omega.to_string()},
              {"rel_tol", cfg.rel_tol},
              {"tests", std::vector<std::string>(cfg.tests.begin(), cfg.tests.end())},
              {"output", cfg.output_path},
              {"format", cfg.format},
              {"workers", cfg.workers}};
}

inline ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  require(j.is_object(), "experiment config must be a JSON object");
  cfg.n = j.at("n").get<int>();
  cfg.m = j.at("m").get<int>();
  if (j.contains("r_list")) {
    cfg.r_list = j["r_list"].get<std::vector<int>>();
  } else if (j.contains("r")) {
    cfg.r_list = {j["r"].get<int>()};
  }
  cfg.samples = j.at("samples").get<long>();
  if (j.contains("master_seed")) cfg.master_seed = j["master_seed"].get<std::uint64_t>();
  if (j.contains("omega")) cfg.omega = OmegaSpec::parse(j["omega"].get<std::string>());
  if (j.contains("rel_tol")) cfg.rel_tol = j["rel_tol"].get<double>();
  if (j.contains("tests")) {
    cfg.tests.clear();
    for (const json& t : j["tests"]) cfg.tests.insert(t.get<std::string>());
  }
  if (j.contains("output")) cfg.output_path = j["output"].get<std::string>();
  if (j.contains("format")) cfg.format = j["format"].get<std::string>();
  if (j.contains("workers")) cfg.workers = j["workers"].get<int>();
  cfg.validate();
  return cfg;
}

/// Wilson score interval at confidence z (default 95%). The endpoints are
/// pinned to exactly 0 (resp. 1) when no successes (resp. no failures) were
/// observed, so the interval always contains the point estimate.
inline std::pair<double, double> wilson_interval(long successes, long trials,
                                                 double z = 1.959963984540054) {
  if (trials <= 0) return {0.0, 1.0};
  const double nn = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  const double lo = (successes == 0) ? 0.0 : std::max(0.0, center - half);
  const double hi = (successes == trials) ? 1.0 : std::min(1.0, center + half);
  return {lo, hi};
}

struct PerRankResult {
  int r = 0;
  long samples = 0;
  std::map<int, long> tuple_rank_histogram;
  std::map<int, long> state_rank_histogram;
  long wedge_entangled = 0;
  long npt = 0;
  long ball_separable = 0;
  long ppt_exact_separable = 0;
  long certified_entangled = 0;
  long certified_separable = 0;
  long undecided = 0;
  // min sigma_2/sigma_1 over samples whose invariant certified, or unset
  std::optional<double> min_margin_w;
  std::optional<double> min_margin_w_star;
  double entangled_fraction = 0.0;
  std::pair<double, double> wilson_ci{0.0, 1.0};

  void merge(const PerRankResult& other) {
    samples += other.samples;
    for (const auto& [k, c] : other.tuple_rank_histogram) tuple_rank_histogram[k] += c;
    for (const auto& [k, c] : other.state_rank_histogram) state_rank_histogram[k] += c;
    wedge_entangled += other.wedge_entangled;
    npt += other.npt;
    ball_separable += other.ball_separable;
    ppt_exact_separable += other.ppt_exact_separable;
    certified_entangled += other.certified_entangled;
    certified_separable += other.certified_separable;
    undecided += other.undecided;
    auto take_min = [](std::optional<double>& into, const std::optional<double>& from) {
      if (from && (!into || *from < *into)) into = *from;
    };
    take_min(min_margin_w, other.min_margin_w);
    take_min(min_margin_w_star, other.min_margin_w_star);
  }

  void finalize() {
    entangled_fraction =
        samples > 0 ? static_cast<double>(certified_entangled) / static_cast<double>(samples) : 0.0;
    wilson_ci = wilson_interval(certified_entangled, samples);
  }
};

struct Provenance {
  std::uint64_t master_seed = 0;
  std::string version = kVersion;
  double wall_time_seconds = 0.0;
};

struct ExperimentReport {
  ExperimentConfig config;
  Provenance provenance;
  std::vector<PerRankResult> results;
};

inline json report_to_json(const ExperimentReport& report) {
  json results = json::array();
  for (const PerRankResult& pr : report.results) {
    json hist_t = json::object(), hist_s = json::object();
    for (const auto& [k, c] : pr.tuple_rank_histogram) hist_t[std::to_string(k)] = c;
    for (const auto& [k, c] : pr.state_rank_histogram) hist_s[std::to_string(k)] = c;
    json entry{{"r", pr.r},
               {"samples", pr.samples},
               {"tuple_rank_histogram", std::move(hist_t)},
               {"state_rank_histogram", std::move(hist_s)},
               {"wedge_entangled", pr.wedge_entangled},
               {"npt", pr.npt},
               {"ball_separable", pr.ball_separable},
               {"ppt_exact_separable", pr.ppt_exact_separable},
               {"certified_entangled", pr.certified_entangled},
               {"certified_separable", pr.certified_separable},
               {"undecided", pr.undecided},
               {"entangled_fraction", pr.entangled_fraction},
               {"wilson_ci_95", {pr.wilson_ci.first, pr.wilson_ci.second}}};
    entry["min_margin_w"] = pr.min_margin_w ? json(*pr.min_margin_w) : json(nullptr);
    entry["min_margin_w_star"] = pr.min_margin_w_star ? json(*pr.min_margin_w_star) : json(nullptr);
    results.push_back(std::move(entry));
  }
  return json{{"config", config_to_json(report.config)},
              {"provenance",
               json{{"master_seed", report.provenance.master_seed},
                    {"version", report.provenance.version},
                    {"wall_time_seconds", report.provenance.wall_time_seconds}}},
              {"results", std::move(results)}};
}

inline std::string report_to_csv(const ExperimentReport& report) {
  std::ostringstream out;
  out << "n,m,r,samples,master_seed,omega,rel_tol,tests,"
         "wedge_entangled,npt,ball_separable,ppt_exact_separable,"
         "certified_entangled,certified_separable,undecided,"
         "entangled_fraction,wilson_lo,wilson_hi,min_margin_w,min_margin_w_star,"
         "tuple_rank_histogram,state_rank_histogram\n";
  std::string tests;
  for (const std::string& t : report.config.tests) {
    if (!tests.empty()) tests += "|";
    tests += t;
  }
  auto hist_text = [](const std::map<int, long>& h) {
    std::string s;
    for (const auto& [k, c] : h) {
      if (!s.empty()) s += ";";
      s += std::to_string(k) + ":" + std::to_string(c);
    }
    return s;
  };
  for (const PerRankResult& pr : report.results) {
    out << report.config.n << ',' << report.config.m << ',' << pr.r << ',' << pr.samples << ','
        << report.config.master_seed << ',' << report.config.omega.to_string() << ','
        << report.config.rel_tol << ',' << tests << ',' << pr.wedge_entangled << ',' << pr.npt
        << ',' << pr.ball_separable << ',' << pr.ppt_exact_separable << ','
        << pr.certified_entangled << ',' << pr.certified_separable << ',' << pr.undecided << ','
        << pr.entangled_fraction << ',' << pr.wilson_ci.first << ',' << pr.wilson_ci.second << ',';
    if (pr.min_margin_w) out << *pr.min_margin_w;
    out << ',';
    if (pr.min_margin_w_star) out << *pr.min_margin_w_star;
    out << ',' << hist_text(pr.tuple_rank_histogram) << ',' << hist_text(pr.state_rank_histogram)
        << '\n';
  }
  return out.str();
}

namespace detail {

inline void tally_sample(const ExperimentConfig& cfg, int r, long index,
                         const Purification& xi, PerRankResult& tally) {
  SeededRng rng(cfg.master_seed, static_cast<std::uint64_t>(index));
  const IsometryTuple v = sample_haar_tuple(cfg.n, cfg.m, r, rng);
  ++tally.tuple_rank_histogram[tuple_rank(v, cfg.rel_tol)];
  const DensityMatrix rho = state_from_tuple(v, xi);
  ++tally.state_rank_histogram[rho.rank(cfg.rel_tol)];

  bool entangled = false;
  bool separable = false;
  if (cfg.tests.count("wedge") != 0) {
    const WedgeInvariant wi = wedge_invariants(v, cfg.rel_tol);
    if (wi.w > 1) {
      const double margin = wi.margin_w();
      if (!tally.min_margin_w || margin < *tally.min_margin_w) tally.min_margin_w = margin;
    }
    if (wi.w_star > 1) {
      const double margin = wi.margin_w_star();
      if (!tally.min_margin_w_star || margin < *tally.min_margin_w_star) {
        tally.min_margin_w_star = margin;
      }
    }
    if (wi.w > 1 || wi.w_star > 1) {
      ++tally.wedge_entangled;
      entangled = true;
    }
  }
  if (cfg.tests.count("ppt") != 0) {
    const PptResult ppt = ppt_test(rho, cfg.m, cfg.n);
    if (ppt.npt) {
      ++tally.npt;
      entangled = true;
    }
    if (ppt.exact_separable) {
      ++tally.ppt_exact_separable;
      separable = true;
    }
  }
  if (cfg.tests.count("ball") != 0) {
    if (ball_test(rho, cfg.m, cfg.n)) {
      ++tally.ball_separable;
      separable = true;
    }
  }
  if (entangled) {
    ++tally.certified_entangled;
  } else if (separable) {
    ++tally.certified_separable;
  } else {
    ++tally.undecided;
  }
  ++tally.samples;
}

}  // namespace detail

/// Runs the configured campaign. Deterministic for a fixed config: sample i
/// of every rank uses stream i regardless of the worker count.
inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const MarginalState omega = omega_from_spec(cfg.omega, cfg.n);
  const Purification xi = purify(omega);

  ExperimentReport report;
  report.config = cfg;
  report.provenance.master_seed = cfg.master_seed;

  for (int r : cfg.r_list) {
    const int workers = static_cast<int>(std::min<long>(cfg.workers, std::max<long>(cfg.samples, 1)));
    std::vector<PerRankResult> partial(static_cast<std::size_t>(workers));
    std::vector<std::exception_ptr> failures(static_cast<std::size_t>(workers));
    auto work = [&](int worker) {
      try {
        PerRankResult& tally = partial[static_cast<std::size_t>(worker)];
        tally.r = r;
        for (long i = worker; i < cfg.samples; i += workers) {
          try {
            detail::tally_sample(cfg, r, i, xi, tally);
          } catch (const ResourceError& e) {
            throw ResourceError(std::string(e.what()) + " (r=" + std::to_string(r) +
                                ", sample=" + std::to_string(i) + ")");
          }
        }
      } catch (...) {
        failures[static_cast<std::size_t>(worker)] = std::current_exception();
      }
    };
    if (workers == 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(static_cast<std::size_t>(workers));
      for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
      for (std::thread& t : pool) t.join();
    }
    for (const std::exception_ptr& failure : failures) {
      if (failure) std::rethrow_exception(failure);
    }
    PerRankResult combined;
    combined.r = r;
    for (const PerRankResult& p : partial) combined.merge(p);
    combined.finalize();
    report.results.push_back(std::move(combined));
  }

  report.provenance.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace wedgelab
