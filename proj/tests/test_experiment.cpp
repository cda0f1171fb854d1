#include <catch2/catch_amalgamated.hpp>

#include "wedgelab/experiment.hpp"

#include <cstdio>
#include <fstream>

using namespace wedgelab;

namespace {

ExperimentConfig base_config(int n, int m, std::vector<int> r_list, long samples,
                             std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.n = n;
  cfg.m = m;
  cfg.r_list = std::move(r_list);
  cfg.samples = samples;
  cfg.master_seed = seed;
  return cfg;
}

json normalized_report(const ExperimentReport& report) {
  json j = report_to_json(report);
  j["provenance"]["wall_time_seconds"] = 0.0;
  return j;
}

}  // namespace

TEST_CASE("omega spec parsing") {
  REQUIRE(OmegaSpec::parse("maximally-mixed").kind == OmegaSpec::Kind::MaximallyMixed);
  const OmegaSpec rf = OmegaSpec::parse("random-faithful:42");
  REQUIRE(rf.kind == OmegaSpec::Kind::RandomFaithful);
  REQUIRE(rf.seed == 42);
  REQUIRE(OmegaSpec::parse("random-faithful").seed == 0);
  const OmegaSpec file = OmegaSpec::parse("file:/tmp/omega.json");
  REQUIRE(file.kind == OmegaSpec::Kind::File);
  REQUIRE(file.path == "/tmp/omega.json");
  REQUIRE_THROWS_AS(OmegaSpec::parse("bogus"), ValidationError);
  REQUIRE_THROWS_AS(OmegaSpec::parse("random-faithful:xyz"), ValidationError);
}

TEST_CASE("omega_from_spec constructions") {
  const MarginalState mm = omega_from_spec(OmegaSpec::parse("maximally-mixed"), 3);
  REQUIRE(max_abs_diff(mm.density.matrix(), Matrix::Identity(3, 3) / 3.0) == 0.0);

  const MarginalState rf = omega_from_spec(OmegaSpec::parse("random-faithful:1"), 2);
  REQUIRE(rf.faithful);
  REQUIRE(rf.density.min_eigenvalue() > 1e-6);

  // a state file with the wrong trace is rejected
  const std::string path = "omega_bad_trace.json";
  {
    std::ofstream out(path);
    out << matrix_to_json(0.9 * Matrix::Identity(2, 2) / 2.0).dump();
  }
  REQUIRE_THROWS_AS(omega_from_spec(OmegaSpec::parse("file:" + path), 2), ValidationError);
  std::remove(path.c_str());

  // a valid file round-trips
  const std::string good = "omega_good.json";
  {
    std::ofstream out(good);
    out << matrix_to_json(Matrix::Identity(2, 2) / 2.0).dump();
  }
  REQUIRE(omega_from_spec(OmegaSpec::parse("file:" + good), 2).faithful);
  REQUIRE_THROWS_AS(omega_from_spec(OmegaSpec::parse("file:" + good), 3), ValidationError);
  std::remove(good.c_str());
}

TEST_CASE("wilson interval basics") {
  const auto empty = wilson_interval(0, 0);
  REQUIRE(empty.first == 0.0);
  REQUIRE(empty.second == 1.0);

  const auto zero = wilson_interval(0, 100);
  REQUIRE(zero.first == 0.0);
  REQUIRE(zero.second > 0.0);
  REQUIRE(zero.second < 0.1);

  const auto full = wilson_interval(100, 100);
  REQUIRE(full.second == 1.0);
  REQUIRE(full.first > 0.9);

  const auto half = wilson_interval(50, 100);
  REQUIRE(half.first < 0.5);
  REQUIRE(half.second > 0.5);
}

TEST_CASE("config validation") {
  ExperimentConfig cfg = base_config(2, 2, {1}, 10, 0);
  REQUIRE_NOTHROW(cfg.validate());
  cfg.m = 1;
  REQUIRE_THROWS_AS(cfg.validate(), ValidationError);
  cfg = base_config(3, 2, {1}, 10, 0);  // m < n
  REQUIRE_THROWS_AS(cfg.validate(), ValidationError);
  cfg = base_config(2, 2, {5}, 10, 0);  // r > mn
  REQUIRE_THROWS_AS(cfg.validate(), ValidationError);
  cfg = base_config(2, 2, {1}, 10, 0);
  cfg.tests = {"bogus"};
  REQUIRE_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("config JSON round trip") {
  ExperimentConfig cfg = base_config(2, 3, {1, 2}, 25, 9);
  cfg.omega = OmegaSpec::parse("random-faithful:4");
  cfg.tests = {"ppt", "wedge"};
  cfg.format = "csv";
  cfg.workers = 2;
  const ExperimentConfig back = config_from_json(config_to_json(cfg));
  REQUIRE(back.n == 2);
  REQUIRE(back.m == 3);
  REQUIRE(back.r_list == std::vector<int>{1, 2});
  REQUIRE(back.samples == 25);
  REQUIRE(back.master_seed == 9);
  REQUIRE(back.omega.to_string() == "random-faithful:4");
  REQUIRE(back.tests == std::set<std::string>{"ppt", "wedge"});
  REQUIRE(back.format == "csv");
  REQUIRE(back.workers == 2);
}

TEST_CASE("vacuous run echoes the config") {
  const ExperimentReport report = run_experiment(base_config(2, 2, {2}, 0, 7));
  REQUIRE(report.results.size() == 1);
  REQUIRE(report.results[0].samples == 0);
  REQUIRE(report.results[0].tuple_rank_histogram.empty());
  const json j = report_to_json(report);
  REQUIRE(j["config"]["n"] == 2);
  REQUIRE(j["config"]["master_seed"] == 7);
}

TEST_CASE("small-rank campaign certifies everything entangled") {
  ExperimentConfig cfg = base_config(4, 4, {2}, 50, 11);
  const ExperimentReport report = run_experiment(cfg);
  const PerRankResult& pr = report.results[0];
  REQUIRE(pr.samples == 50);
  REQUIRE(pr.wedge_entangled == 50);
  REQUIRE(pr.certified_entangled == 50);
  REQUIRE(pr.entangled_fraction == 1.0);
  REQUIRE(pr.tuple_rank_histogram.at(2) == 50);
  REQUIRE(pr.state_rank_histogram.at(2) == 50);
  REQUIRE(pr.min_margin_w_star.has_value());
  REQUIRE(*pr.min_margin_w_star > 1e-6);
  REQUIRE(pr.wilson_ci.second == 1.0);
}

TEST_CASE("report counts are internally consistent") {
  ExperimentConfig cfg = base_config(2, 2, {4}, 300, 13);
  const ExperimentReport report = run_experiment(cfg);
  const PerRankResult& pr = report.results[0];
  REQUIRE(pr.certified_entangled + pr.certified_separable + pr.undecided == pr.samples);
  long hist_total = 0;
  for (const auto& [rank, count] : pr.tuple_rank_histogram) hist_total += count;
  REQUIRE(hist_total == pr.samples);
  // at mn = 4 the partial transpose is a complete criterion
  REQUIRE(pr.undecided == 0);
  REQUIRE(pr.certified_entangled > 0);
  REQUIRE(pr.certified_separable > 0);
}

TEST_CASE("reports are identical for 1 and 8 workers") {
  ExperimentConfig cfg = base_config(2, 2, {1, 4}, 120, 17);
  cfg.workers = 1;
  const json a = normalized_report(run_experiment(cfg));
  cfg.workers = 8;
  const json b = normalized_report(run_experiment(cfg));
  // worker count is part of the config echo; normalize it too
  json a2 = a, b2 = b;
  a2["config"]["workers"] = 0;
  b2["config"]["workers"] = 0;
  REQUIRE(a2.dump() == b2.dump());
}

TEST_CASE("identical configs replay to identical reports") {
  const ExperimentConfig cfg = base_config(2, 3, {2, 3}, 60, 37);
  const json a = normalized_report(run_experiment(cfg));
  const json b = normalized_report(run_experiment(cfg));
  REQUIRE(a.dump() == b.dump());
}

TEST_CASE("entangled fraction does not depend on the marginal") {
  // trivial regime: both fractions are exactly one
  ExperimentConfig cfg = base_config(4, 4, {2}, 40, 19);
  const double f1 = run_experiment(cfg).results[0].entangled_fraction;
  cfg.omega = OmegaSpec::parse("random-faithful:5");
  const double f2 = run_experiment(cfg).results[0].entangled_fraction;
  REQUIRE(f1 == 1.0);
  REQUIRE(f2 == 1.0);

  // nontrivial regime: NPT fractions at maximal rank agree within 4 SE
  ExperimentConfig big = base_config(2, 2, {4}, 1500, 23);
  big.tests = {"ppt"};
  const ExperimentReport ra = run_experiment(big);
  big.omega = OmegaSpec::parse("random-faithful:6");
  const ExperimentReport rb = run_experiment(big);
  const double n = 1500.0;
  const double pa = static_cast<double>(ra.results[0].npt) / n;
  const double pb = static_cast<double>(rb.results[0].npt) / n;
  const double se = std::sqrt(pa * (1 - pa) / n + pb * (1 - pb) / n);
  INFO("pa=" << pa << " pb=" << pb << " se=" << se);
  REQUIRE(std::abs(pa - pb) <= 4.0 * se);
}

TEST_CASE("resource guards surface the offending sample") {
  ExperimentConfig cfg = base_config(8, 8, {8}, 1, 29);
  cfg.tests = {"wedge"};
  try {
    run_experiment(cfg);
    FAIL("expected a ResourceError");
  } catch (const ResourceError& e) {
    const std::string message = e.what();
    REQUIRE(message.find("r=8") != std::string::npos);
    REQUIRE(message.find("sample=0") != std::string::npos);
  }
}

TEST_CASE("csv report has a header and one row per rank") {
  ExperimentConfig cfg = base_config(2, 2, {1, 2}, 5, 31);
  cfg.format = "csv";
  const std::string csv = report_to_csv(run_experiment(cfg));
  int lines = 0;
  for (char c : csv) {
    if (c == '\n') ++lines;
  }
  REQUIRE(lines == 3);
  REQUIRE(csv.rfind("n,m,r,samples", 0) == 0);
}
