// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
// criterion fails.

#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "../oracles.hpp"
#include "digit_forensics/digit_forensics.hpp"

namespace df = digit_forensics;
namespace fs = std::filesystem;

namespace {

// Tolerances and budgets.
constexpr double kBenfordTol = 1e-12;
constexpr double kIdentityTvMax = 0.01;
constexpr std::size_t kIdentityDraws = 100000;
constexpr std::size_t kOracleResamples = 20000;
constexpr double kOracleTol = 0.02;
constexpr std::size_t kOracleMaxTotal = 5;
constexpr double kF1Target = 0.774;
constexpr double kF1Tol = 0.005;
constexpr std::size_t kValidationDatasets = 100;
constexpr std::size_t kValidationSeeds = 5;
constexpr double kValidationThreshold = 0.5;
constexpr double kValidationAccuracyMin = 0.70;
constexpr std::size_t kMonotonicityCorpora = 500;
constexpr std::size_t kNullSets = 200;
constexpr std::size_t kNullSetLength = 20;
constexpr double kNullLowFractionMin = 0.90;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream os;
  os.precision(digits);
  os << std::fixed << v;
  return os.str();
}

std::string sci(double v) {
  std::ostringstream os;
  os.precision(2);
  os << std::scientific << v;
  return os.str();
}

Outcome benford_exactness() {
  const df::DigitPmf p = df::benford_pmf();
  double worst = 0.0;
  double sum = 0.0;
  for (int d = 1; d <= 9; ++d) {
    worst = std::max(worst, std::fabs(p.at(df::Digit(d)) - std::log10(1.0 + 1.0 / d)));
    sum += p.at(df::Digit(d));
  }
  const double sum_err = std::fabs(sum - 1.0);
  return {worst <= kBenfordTol && sum_err <= kBenfordTol,
          "max |P(d) - log10(1+1/d)| = " + sci(worst) + ", |sum - 1| = " + sci(sum_err)};
}

Outcome identity_reference() {
  df::SynthesisConfig cfg;
  cfg.entries_per_vector = 1;
  cfg.mc_draws = kIdentityDraws;
  const df::ReferenceDistribution ref = df::generate_reference(df::OperatorKind::Mean, cfg);
  const double tv = df::total_variation(ref.pmf, df::benford_pmf());
  return {tv <= kIdentityTvMax, "TV = " + fmt(tv, 5) + " (max " + fmt(kIdentityTvMax, 2) + ")"};
}

void for_each_histogram(std::size_t total, const std::function<void(const df::DigitHistogram::Counts&)>& fn) {
  df::DigitHistogram::Counts c{};
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t digit, std::size_t left) {
    if (digit == 8) {
      c[8] = left;
      fn(c);
      return;
    }
    for (std::size_t k = 0; k <= left; ++k) {
      c[digit] = k;
      rec(digit + 1, left - k);
    }
  };
  rec(0, total);
}

Outcome ks_oracle() {
  const oracle::Pmf ref = oracle::benford();
  double worst = 0.0;
  std::size_t checked = 0;
  for (std::size_t total = 1; total <= kOracleMaxTotal; ++total) {
    const auto table = oracle::exact_null_table(total, ref);
    std::uint64_t seed = 1000 + total;
    for_each_histogram(total, [&](const df::DigitHistogram::Counts& c) {
      const df::DigitHistogram h(c);
      const double exact = oracle::exact_p_from_table(table, oracle::ks_gap(c, ref));
      const double mc = df::ks_p_value(h, df::benford_pmf(), kOracleResamples, seed++).p_value;
      worst = std::max(worst, std::fabs(mc - exact));
      ++checked;
    });
  }
  return {worst <= kOracleTol,
          std::to_string(checked) + " histograms, max |p_mc - p_exact| = " + fmt(worst)};
}

Outcome table_metrics() {
  const df::ConfusionMetrics m = df::confusion_metrics(df::ConfusionMatrix{43, 7, 14, 36});
  const bool pass = m.accuracy == 0.79 && std::fabs(m.f1_manipulated - kF1Target) <= kF1Tol;
  return {pass, "accuracy = " + fmt(m.accuracy, 6) + ", F1(manipulated) = " + fmt(m.f1_manipulated, 6) +
                    ", F1(clean) = " + fmt(m.f1_clean, 6)};
}

Outcome scaled_validation() {
  df::ProviderOptions opts;
  df::ReferenceProvider provider(opts);
  df::Scorer scorer(provider);
  double sum = 0.0;
  std::string per_seed;
  double clean_mean = 0.0;
  double manip_mean = 0.0;
  std::size_t clean_n = 0;
  std::size_t manip_n = 0;
  for (std::size_t s = 0; s < kValidationSeeds; ++s) {
    const std::uint64_t seed = 101 + s;
    df::SyntheticCorpusSpec spec;
    spec.count = kValidationDatasets;
    spec.seed = seed;
    const auto corpus = df::synthetic_corpus(spec);
    df::ValidationOptions v;
    v.seed = seed;
    v.noise.seed = seed;
    v.decision_threshold = kValidationThreshold;
    const df::ValidationResult r = df::run_validation(corpus, scorer, v);
    sum += r.accuracy;
    per_seed += (s ? ", " : "") + fmt(r.accuracy, 2);
    for (const auto& d : r.per_dataset) {
      if (d.truth == df::Truth::ManipulationFree) {
        clean_mean += d.overall;
        ++clean_n;
      } else {
        manip_mean += d.overall;
        ++manip_n;
      }
    }
  }
  const double mean = sum / kValidationSeeds;
  return {mean >= kValidationAccuracyMin,
          "mean accuracy = " + fmt(mean, 3) + " (min " + fmt(kValidationAccuracyMin, 2) + "; per seed " +
              per_seed + "; mean overall clean " + fmt(clean_n ? clean_mean / clean_n : 0.0, 3) +
              ", manipulated " + fmt(manip_n ? manip_mean / manip_n : 0.0, 3) + ")"};
}

Outcome flag_monotonicity() {
  std::size_t violations = 0;
  for (std::size_t c = 0; c < kMonotonicityCorpora; ++c) {
    df::Engine eng = df::make_engine(77, df::StreamTag::SyntheticCorpus, c);
    const std::size_t size = 1 + df::uniform_index(eng, 60);
    std::vector<df::ScoredReport> scored;
    for (std::size_t i = 0; i < size; ++i) {
      // Mix of uniform scores and scores packed near the levels.
      const double u = df::uniform01(eng);
      const double score = (i % 2) ? u : 0.88 + 0.12 * u;
      scored.push_back({"r" + std::to_string(i), score});
    }
    const df::FlagTable t = df::build_flag_table(scored, df::kDefaultConfidenceLevels);
    for (std::size_t i = 1; i < t.rows.size(); ++i) {
      if (t.rows[i].flagged_count > t.rows[i - 1].flagged_count) ++violations;
    }
  }

  // Also through the scoring path on a small random report corpus.
  df::ProviderOptions opts;
  opts.synthesis.mc_draws = 20000;
  opts.calibration_samples = 200;
  opts.ks = df::KsOptions{5000, df::kDefaultSeed};
  df::ReferenceProvider provider(opts);
  df::ScoreOptions score;
  score.ks = opts.ks;
  df::Scorer scorer(provider, score);
  std::vector<df::ReportedStats> reports;
  for (std::size_t r = 0; r < 30; ++r) {
    df::Engine eng = df::make_engine(78, df::StreamTag::SyntheticCorpus, r);
    df::ReportedStats rep;
    rep.source_id = "report-" + std::to_string(r);
    const bool skewed = r % 3 == 0;
    for (df::OperatorKind op : df::kAllOperators) {
      std::vector<double> values(10 + df::uniform_index(eng, 30));
      for (double& x : values) {
        x = skewed ? 5.0 + 4.0 * df::uniform01(eng) : std::pow(10.0, 4.0 * df::uniform01(eng) - 2.0);
      }
      rep.groups[op] = values;
    }
    reports.push_back(rep);
  }
  const df::FlagTable t = df::scan_corpus(reports, scorer);
  std::string counts;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    if (i > 0 && t.rows[i].flagged_count > t.rows[i - 1].flagged_count) ++violations;
    counts += (i ? "," : "") + std::to_string(t.rows[i].flagged_count);
  }
  return {violations == 0, std::to_string(kMonotonicityCorpora) + " random corpora + 1 scored corpus (counts " +
                               counts + "), " + std::to_string(violations) + " violations"};
}

Outcome null_calibration() {
  df::ProviderOptions opts;
  df::ReferenceProvider provider(opts);
  const df::ReferenceDistribution& ref = provider.get(df::OperatorKind::StdDev, 20, kNullSetLength);
  df::ScoreOptions score;
  df::NullTableCache tables;
  const df::DigitSampler sampler(ref.pmf);
  std::size_t low = 0;
  std::size_t zero_violations = 0;
  for (std::size_t i = 0; i < kNullSets; ++i) {
    // Fresh stream, disjoint from the calibration draws.
    df::Engine eng = df::make_engine(0xacce55, df::StreamTag::SyntheticCorpus, i);
    std::vector<double> values(kNullSetLength);
    for (double& v : values) {
      const double digit = static_cast<double>(sampler.draw_index(eng) + 1);
      v = (digit + df::uniform01(eng)) * std::pow(10.0, static_cast<double>(df::uniform_index(eng, 7)) - 3.0);
    }
    const auto t = std::get<df::TestOutcome>(
        df::score_operator(values, df::OperatorKind::StdDev, ref, score, &tables));
    if (t.normalized_score < 0.5) ++low;
    if (t.raw_score <= ref.calibration_floor && t.normalized_score != 0.0) ++zero_violations;
  }
  const double frac = static_cast<double>(low) / kNullSets;
  return {frac >= kNullLowFractionMin && zero_violations == 0,
          "floor a = " + fmt(ref.calibration_floor, 5) + ", " + std::to_string(low) + "/" +
              std::to_string(kNullSets) + " below 0.5, " + std::to_string(zero_violations) +
              " nonzero scores with raw <= a"};
}

struct RunResult {
  int exit_code = -1;
  std::string out;
};

RunResult run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + DIGIT_FORENSICS_CLI + "\" " + args + " 2>/dev/null";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "df-acceptance-determinism";
  fs::remove_all(dir);
  fs::create_directories(dir / "reports");
  for (int r = 0; r < 6; ++r) {
    std::ofstream out(dir / "reports" / ("m" + std::to_string(r) + ".json"));
    out << R"({"source_id":"m)" << r << R"(","groups":{"mean":[)";
    for (int i = 0; i < 25; ++i) out << (i ? "," : "") << (1.0 + ((r + 3) * (i + 7) * 37) % 900 / 100.0);
    out << R"(],"std":[)";
    for (int i = 0; i < 12; ++i) out << (i ? "," : "") << (0.1 + (r * 13 + i * 29) % 97 / 10.0);
    out << "]}}";
  }

  const std::string budget = " --seed 4242 --draws 20000 --calibration-samples 300 --resamples 5000";
  const std::vector<std::pair<std::string, std::string>> commands{
      {"gen-ref", "gen-ref --operator ols_slope --n 10 --obs-len 50" + budget},
      {"validate", "validate --synthetic 10" + budget},
      {"scan-corpus", "scan-corpus \"" + (dir / "reports").string() + "\"" + budget},
  };
  bool pass = true;
  std::string detail;
  for (const auto& [name, args] : commands) {
    // Separate caches so each run regenerates every reference.
    const RunResult a = run_cli(args + " --cache \"" + (dir / (name + "-a.json")).string() + "\"");
    const RunResult b = run_cli(args + " --cache \"" + (dir / (name + "-b.json")).string() + "\"");
    const bool same = a.exit_code == 0 && b.exit_code == 0 && !a.out.empty() && a.out == b.out;
    pass = pass && same;
    detail += (detail.empty() ? "" : ", ") + name + (same ? " identical" : " DIFFERS (exit " +
                                                                std::to_string(a.exit_code) + "/" +
                                                                std::to_string(b.exit_code) + ")");
  }
  fs::remove_all(dir);
  return {pass, detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"benford-exactness", benford_exactness},
      {"identity-reference", identity_reference},
      {"ks-oracle-equivalence", ks_oracle},
      {"table-metrics", table_metrics},
      {"scaled-validation", scaled_validation},
      {"flag-monotonicity", flag_monotonicity},
      {"null-calibration", null_calibration},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << (i + 1) << ". " << criteria[i].first << ": "
              << o.detail << " [" << fmt(secs, 1) << "s]" << std::endl;
  }
  std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
