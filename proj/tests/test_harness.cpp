#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "digit_forensics/harness.hpp"

using namespace digit_forensics;

namespace {

ProviderOptions fast_options() {
  ProviderOptions opts;
  opts.synthesis.mc_draws = 5000;
  opts.synthesis.seed = 21;
  opts.calibration_samples = 200;
  opts.ks = KsOptions{2000, 21};
  return opts;
}

ScoreOptions fast_scoring() {
  ScoreOptions s;
  s.ks = KsOptions{2000, 21};
  return s;
}

SyntheticCorpusSpec small_corpus(std::size_t count) {
  SyntheticCorpusSpec spec;
  spec.count = count;
  spec.rows_min = 20;
  spec.rows_max = 40;
  spec.features_min = 5;
  spec.features_max = 8;
  spec.seed = 5;
  return spec;
}

}  // namespace

TEST(Noise, PositiveSignExample) {
  std::vector<double> g{10.0};
  NoiseSpec spec;
  spec.min_fraction = 0.1;
  spec.max_fraction = 0.1;
  spec.sign = NoiseSign::Positive;
  Engine eng = make_engine(1, StreamTag::Noise, 0);
  inject_noise_group(g, spec, eng);
  EXPECT_DOUBLE_EQ(g[0], 11.0);

  std::vector<double> n{10.0, 30.0};
  spec.sign = NoiseSign::Negative;
  inject_noise_group(n, spec, eng);
  // Scale is the group mean (20), not each value.
  EXPECT_DOUBLE_EQ(n[0], 8.0);
  EXPECT_DOUBLE_EQ(n[1], 28.0);
}

TEST(Noise, ZeroFractionIsIdentity) {
  ComputedStats s;
  s.means = {1.5, 20.0, -3.0};
  s.stds = {0.2, 0.4};
  s.slopes = {7.0};
  NoiseSpec spec;
  spec.min_fraction = 0.0;
  spec.max_fraction = 0.0;
  Engine eng = make_engine(2, StreamTag::Noise, 0);
  const ComputedStats out = inject_noise(s, spec, eng);
  EXPECT_EQ(out.means, s.means);
  EXPECT_EQ(out.stds, s.stds);
  EXPECT_EQ(out.slopes, s.slopes);
}

TEST(Noise, DeterministicAndBounded) {
  ComputedStats s;
  s.means = {1, 2, 3, 4, 5, 6};
  s.stds = {1, 1};
  s.slopes = {0.5, 0.25};
  NoiseSpec spec;
  Engine a = make_engine(3, StreamTag::Noise, 7);
  Engine b = make_engine(3, StreamTag::Noise, 7);
  const ComputedStats x = inject_noise(s, spec, a);
  const ComputedStats y = inject_noise(s, spec, b);
  EXPECT_EQ(x.means, y.means);
  EXPECT_EQ(x.slopes, y.slopes);
  for (std::size_t i = 0; i < s.means.size(); ++i) {
    const double shift = std::fabs(x.means[i] - s.means[i]);
    EXPECT_GE(shift, 0.01 * 3.5 - 1e-12);
    EXPECT_LE(shift, 0.10 * 3.5 + 1e-12);
  }
}

TEST(Noise, RejectsBadFractions) {
  NoiseSpec spec;
  spec.min_fraction = 0.2;
  spec.max_fraction = 0.1;
  EXPECT_THROW(spec.validate(), Error);
  spec.min_fraction = 0.0;
  spec.max_fraction = 0.1;
  EXPECT_THROW(spec.validate(), Error);
  spec.min_fraction = 0.5;
  spec.max_fraction = 1.0;
  EXPECT_THROW(spec.validate(), Error);
}

TEST(Confusion, KnownCountsExample) {
  const ConfusionMatrix m{43, 7, 14, 36};
  const ConfusionMetrics r = confusion_metrics(m);
  EXPECT_NEAR(r.accuracy, 0.79, 1e-12);
  EXPECT_NEAR(r.f1_clean, 0.8037383177570094, 1e-12);
  EXPECT_NEAR(r.f1_manipulated, 0.7741935483870966, 1e-12);
}

TEST(Confusion, DegenerateScorer) {
  // Everything predicted manipulated.
  std::vector<DatasetVerdict> v;
  for (int i = 0; i < 10; ++i) {
    v.push_back({"d" + std::to_string(i), i % 2 ? Truth::Manipulated : Truth::ManipulationFree, 1.0,
                 Truth::Manipulated});
  }
  const ConfusionMatrix m = tally(v);
  EXPECT_EQ(m, (ConfusionMatrix{0, 5, 0, 5}));
  const ConfusionMetrics r = confusion_metrics(m);
  EXPECT_EQ(r.accuracy, 0.5);
  EXPECT_EQ(r.f1_clean, 0.0);
  EXPECT_NEAR(r.f1_manipulated, 2.0 / 3.0, 1e-12);
}

TEST(FlagTable, CountsPerLevel) {
  const std::vector<ScoredReport> scored{{"a", 0.97}, {"b", 0.95}, {"c", 0.91}};
  const FlagTable t = build_flag_table(scored, kDefaultConfidenceLevels);
  std::vector<std::size_t> counts;
  for (const auto& row : t.rows) counts.push_back(row.flagged_count);
  EXPECT_EQ(counts, (std::vector<std::size_t>{3, 2, 2, 1, 0}));
  EXPECT_EQ(t.rows[3].flagged_ids, std::vector<std::string>{"a"});
}

TEST(FlagTable, RowsAreNested) {
  Engine eng = make_engine(4, StreamTag::SyntheticCorpus, 0);
  std::vector<ScoredReport> scored;
  for (int i = 0; i < 200; ++i) scored.push_back({"r" + std::to_string(i), uniform01(eng)});
  const std::vector<double> levels{0.1, 0.3, 0.5, 0.7, 0.9, 0.99};
  const FlagTable t = build_flag_table(scored, levels);
  for (std::size_t i = 1; i < t.rows.size(); ++i) {
    ASSERT_LE(t.rows[i].flagged_count, t.rows[i - 1].flagged_count);
    for (const auto& id : t.rows[i].flagged_ids) {
      const auto& prev = t.rows[i - 1].flagged_ids;
      ASSERT_NE(std::find(prev.begin(), prev.end(), id), prev.end());
    }
  }
  const std::vector<double> unordered{0.9, 0.5};
  EXPECT_THROW(build_flag_table(scored, unordered), Error);
}

TEST(ScanCorpus, EmptyGroupIsUnscorable) {
  ProviderOptions opts = fast_options();
  ReferenceProvider provider(opts);
  Scorer scorer(provider, fast_scoring());
  ReportedStats good;
  good.source_id = "good";
  good.groups[OperatorKind::Mean] = {1.2, 3.4, 1.7, 2.9, 8.1, 1.1, 4.4, 1.3};
  ReportedStats empty;
  empty.source_id = "empty";
  empty.groups[OperatorKind::StdDev] = {};
  const std::vector<ReportedStats> reports{good, empty};
  const FlagTable t = scan_corpus(reports, scorer);
  ASSERT_EQ(t.scored.size(), 1u);
  EXPECT_EQ(t.scored[0].id, "good");
  ASSERT_EQ(t.unscorable.size(), 1u);
  EXPECT_EQ(t.unscorable[0].id, "empty");
}

TEST(Validation, RejectsOddCount) {
  ReferenceProvider provider(fast_options());
  Scorer scorer(provider, fast_scoring());
  const auto corpus = synthetic_corpus(small_corpus(3));
  try {
    run_validation(corpus, scorer);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
  }
}

TEST(Validation, IdentityNoiseIsIndistinguishable) {
  ReferenceProvider provider(fast_options());
  Scorer scorer(provider, fast_scoring());
  const auto corpus = synthetic_corpus(small_corpus(12));
  ValidationOptions v;
  v.noise.min_fraction = 0.0;
  v.noise.max_fraction = 0.0;
  const ValidationResult r = run_validation(corpus, scorer, v);
  // Both halves are clean: nothing here can do better than the base rate.
  EXPECT_EQ(r.per_dataset.size() + r.excluded.size(), 12u);
  EXPECT_LE(r.accuracy, 0.5 + 1e-12);
  std::size_t manipulated = 0;
  for (const auto& d : r.per_dataset) manipulated += d.truth == Truth::Manipulated;
  EXPECT_EQ(manipulated, 6u);
}

TEST(Validation, FullyDeterministic) {
  const auto corpus = synthetic_corpus(small_corpus(8));
  auto run = [&] {
    ReferenceProvider provider(fast_options());
    Scorer scorer(provider, fast_scoring());
    return run_validation(corpus, scorer);
  };
  const ValidationResult a = run();
  const ValidationResult b = run();
  EXPECT_EQ(a.matrix, b.matrix);
  ASSERT_EQ(a.per_dataset.size(), b.per_dataset.size());
  for (std::size_t i = 0; i < a.per_dataset.size(); ++i) {
    EXPECT_EQ(a.per_dataset[i].name, b.per_dataset[i].name);
    EXPECT_EQ(a.per_dataset[i].overall, b.per_dataset[i].overall);
  }
}

TEST(Synthetic, ShapeWithinBounds) {
  const SyntheticCorpusSpec spec = small_corpus(6);
  const auto corpus = synthetic_corpus(spec);
  ASSERT_EQ(corpus.size(), 6u);
  EXPECT_EQ(corpus[0].name, "synthetic-0000");
  for (const auto& d : corpus) {
    EXPECT_GE(d.n_rows, spec.rows_min);
    EXPECT_LE(d.n_rows, spec.rows_max);
    EXPECT_GE(d.n_features(), spec.features_min);
    EXPECT_LE(d.n_features(), spec.features_max);
  }
  const auto again = synthetic_dataset(spec, 3);
  EXPECT_EQ(again.columns[0].values, corpus[3].columns[0].values);
}
