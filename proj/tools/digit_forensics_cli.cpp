// digit-forensics: leading-digit screening of reported statistics.
//
// Exit codes: 0 ok, 2 invalid arguments or malformed input, 3 reference
// generation failure, 4 scored and flagged at --flag-level, 5 insufficient data.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "digit_forensics/digit_forensics.hpp"

namespace fs = std::filesystem;
namespace df = digit_forensics;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitGeneration = 3;
constexpr int kExitFlagged = 4;
constexpr int kExitInsufficient = 5;

struct CliConfig {
  std::string cache_path;
  bool no_cache = false;
  std::uint64_t seed = df::kDefaultSeed;
  std::string format = "json";
  std::string output;
  int verbosity = 1;  // 0 quiet, 1 warnings, 2 info
};

CliConfig g_config;

void log_warning(const std::string& message) {
  if (g_config.verbosity >= 1) std::cerr << "warning: " << message << '\n';
}

void log_info(const std::string& message) {
  if (g_config.verbosity >= 2) std::cerr << message << '\n';
}

fs::path default_cache_path() {
  if (const char* xdg = std::getenv("XDG_CACHE_HOME"); xdg && *xdg) {
    return fs::path(xdg) / "digit-forensics" / "references.json";
  }
  if (const char* home = std::getenv("HOME"); home && *home) {
    return fs::path(home) / ".cache" / "digit-forensics" / "references.json";
  }
  return "digit_forensics_references.json";
}

std::optional<fs::path> resolve_cache_path() {
  if (g_config.no_cache) return std::nullopt;
  if (const char* env = std::getenv("DIGIT_FORENSICS_CACHE"); env && *env) return fs::path(env);
  if (!g_config.cache_path.empty()) return fs::path(g_config.cache_path);
  return default_cache_path();
}

void add_common_options(CLI::App* cmd) {
  cmd->add_option("--cache", g_config.cache_path,
                  "Reference cache file (JSON). DIGIT_FORENSICS_CACHE overrides it. "
                  "Default: $XDG_CACHE_HOME/digit-forensics/references.json");
  cmd->add_flag("--no-cache", g_config.no_cache, "Do not read or write the reference cache");
  cmd->add_option("--seed", g_config.seed, "Seed for every random stream")
      ->default_val(df::kDefaultSeed);
  cmd->add_option("--format", g_config.format, "Output format")
      ->check(CLI::IsMember({"json", "text"}))
      ->default_val("json");
  cmd->add_option("-o,--output", g_config.output, "Write the result here instead of stdout");
  cmd->add_flag_callback("-v,--verbose", [] { g_config.verbosity = 2; }, "Log progress to stderr");
  cmd->add_flag_callback("-q,--quiet", [] { g_config.verbosity = 0; }, "Suppress warnings");
}

void emit(const nlohmann::json& doc, const std::string& text) {
  const std::string body = g_config.format == "json" ? doc.dump(2) + "\n" : text;
  if (g_config.output.empty()) {
    std::cout << body;
    return;
  }
  const fs::path path(g_config.output);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw df::Error(df::ErrorCode::Io, "cannot write " + path.string());
  out << body;
}

struct ReferenceFlags {
  std::size_t draws = df::kDefaultMcDraws;
  std::size_t calibration_samples = df::kDefaultCalibrationSamples;
  std::size_t resamples = df::kDefaultScoringResamples;
  int decade_span = 3;
  double center_lo = -3.0;
  double center_hi = 3.0;
};

void add_reference_options(CLI::App* cmd, ReferenceFlags& flags) {
  cmd->add_option("--draws", flags.draws, "Monte-Carlo draws per reference distribution")
      ->default_val(df::kDefaultMcDraws)
      ->check(CLI::Range(std::size_t{1000}, std::size_t{100000000}));
  cmd->add_option("--calibration-samples", flags.calibration_samples,
                  "Conforming null samples used to set the calibration floor")
      ->default_val(df::kDefaultCalibrationSamples)
      ->check(CLI::PositiveNumber);
  cmd->add_option("--resamples", flags.resamples, "KS Monte-Carlo resamples per p-value")
      ->default_val(df::kDefaultScoringResamples)
      ->check(CLI::PositiveNumber);
  cmd->add_option("--decade-span", flags.decade_span,
                  "Decades covered by each synthetic vector (integer)")
      ->default_val(3)
      ->check(CLI::PositiveNumber);
  cmd->add_option("--center-lo", flags.center_lo, "Lower bound of the per-vector log10 offset")
      ->default_val(-3.0);
  cmd->add_option("--center-hi", flags.center_hi, "Upper bound of the per-vector log10 offset")
      ->default_val(3.0);
}

df::ProviderOptions provider_options(const ReferenceFlags& flags) {
  df::ProviderOptions opts;
  opts.synthesis.mc_draws = flags.draws;
  opts.synthesis.seed = g_config.seed;
  opts.synthesis.decade_span = flags.decade_span;
  opts.synthesis.center_lo = flags.center_lo;
  opts.synthesis.center_hi = flags.center_hi;
  opts.calibration_samples = flags.calibration_samples;
  opts.ks.resamples = flags.resamples;
  opts.ks.seed = g_config.seed;
  return opts;
}

void report_cache_use(const df::ReferenceProvider& provider) {
  log_info("reference cache: " + std::to_string(provider.cache_hits()) + " hit(s), " +
           std::to_string(provider.cache_misses()) + " generated");
}

std::vector<fs::path> list_files(const fs::path& dir, const std::string& extension) {
  if (!fs::is_directory(dir)) {
    throw df::Error(df::ErrorCode::InvalidArgument, dir.string() + " is not a directory");
  }
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == extension) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------

struct GenRefArgs {
  std::string op;
  std::size_t n = 1;
  std::size_t obs_len = 20;
  ReferenceFlags ref;
};

int run_gen_ref(const GenRefArgs& args) {
  const df::OperatorKind op = df::parse_operator(args.op);
  const auto cache = resolve_cache_path();
  df::ReferenceProvider provider(provider_options(args.ref), cache);
  const df::ReferenceDistribution& ref = provider.get(op, args.n, args.obs_len);
  if (provider.cache_hits() > 0) {
    log_info("cache hit: " + df::ReferenceCache::describe(ref.key()));
  } else if (cache) {
    log_info("stored " + df::ReferenceCache::describe(ref.key()) + " in " + cache->string());
  }
  emit(df::to_json(ref), df::render_text(ref));
  return kExitOk;
}

struct ScoreArgs {
  std::string input;
  std::size_t n = df::kDefaultReportSampleSize;
  std::size_t min_samples = df::kDefaultMinSamples;
  std::size_t pair_cap = df::kDefaultPairCap;
  std::optional<double> flag_level;
  std::string delimiter = ",";
  std::string decimal = ".";
  bool no_header = false;
  ReferenceFlags ref;
};

void add_score_options(CLI::App* cmd, ScoreArgs& args) {
  cmd->add_option("--min-samples", args.min_samples,
                  "Usable leading digits required before an operator group is tested")
      ->default_val(df::kDefaultMinSamples)
      ->check(CLI::PositiveNumber);
  cmd->add_option("--flag-level", args.flag_level,
                  "Exit with status 4 when the overall score is >= this level (0..1)")
      ->check(CLI::Range(0.0, 1.0));
}

int finish_scoring(const std::string& source, std::vector<df::OperatorScore> scores,
                   nlohmann::json extra, const ScoreArgs& args) {
  nlohmann::json doc = std::move(extra);
  doc["source"] = source;
  try {
    const df::AggregateOutcome outcome = df::aggregate(scores);
    const nlohmann::json scored = df::to_json(outcome);
    doc.update(scored);
    std::string text = source + "\n" + df::render_text(outcome);
    int code = kExitOk;
    if (args.flag_level) {
      const bool flagged = df::flag(outcome.overall, *args.flag_level);
      doc["flag_level"] = *args.flag_level;
      doc["flagged"] = flagged;
      text += flagged ? "FLAGGED\n" : "not flagged\n";
      if (flagged) code = kExitFlagged;
    }
    emit(doc, text);
    return code;
  } catch (const df::Error& e) {
    if (e.code() != df::ErrorCode::NoUsableOutcomes) throw;
    nlohmann::json insufficient = nlohmann::json::array();
    for (const auto& s : scores) {
      if (const auto* d = std::get_if<df::InsufficientData>(&s)) insufficient.push_back(df::to_json(*d));
    }
    doc["per_operator"] = nlohmann::json::array();
    doc["insufficient"] = insufficient;
    doc["overall"] = nullptr;
    emit(doc, source + "\n" + std::string(e.what()) + "\n");
    std::cerr << "error: " << e.what() << '\n';
    return kExitInsufficient;
  }
}

int run_score_dataset(const ScoreArgs& args) {
  if (args.delimiter.size() != 1 || args.decimal.size() != 1) {
    throw df::Error(df::ErrorCode::InvalidArgument, "delimiter and decimal separator are single characters");
  }
  df::CsvOptions csv;
  csv.delimiter = args.delimiter == "\\t" ? '\t' : args.delimiter[0];
  csv.decimal_separator = args.decimal[0];
  csv.header = !args.no_header;
  const df::DatasetMatrix d = df::load_csv(args.input, csv);
  for (const auto& dropped : d.dropped_columns) log_warning("dropped non-numeric column '" + dropped + "'");
  const df::ComputedStats stats = df::compute_stats(d, args.pair_cap, g_config.seed);
  for (const auto& skipped : stats.skipped_pairs) {
    log_info("skipped pair " + d.columns[skipped.pair.regressor].label + " -> " +
             d.columns[skipped.pair.response].label + ": " + skipped.reason);
  }

  df::ReferenceProvider provider(provider_options(args.ref), resolve_cache_path());
  df::ScoreOptions options;
  options.min_samples = args.min_samples;
  options.ks = provider.options().ks;
  df::Scorer scorer(provider, options);
  auto scores = scorer.score_groups(stats);
  report_cache_use(provider);

  nlohmann::json extra;
  auto finite_or_null = [](const std::vector<double>& values) {
    nlohmann::json arr = nlohmann::json::array();
    for (double v : values) {
      if (std::isfinite(v)) {
        arr.push_back(v);
      } else {
        arr.push_back(nullptr);
      }
    }
    return arr;
  };
  extra["groups"] = {{"mean", finite_or_null(stats.means)},
                     {"std", finite_or_null(stats.stds)},
                     {"ols_slope", finite_or_null(stats.slopes)}};
  extra["n_rows"] = stats.n_rows;
  extra["n_features"] = stats.n_features;
  extra["dropped_columns"] = d.dropped_columns;
  return finish_scoring(d.name, std::move(scores), std::move(extra), args);
}

int run_score_stats(const ScoreArgs& args) {
  const df::ReportedStats report = df::load_report(args.input);
  df::ReferenceProvider provider(provider_options(args.ref), resolve_cache_path());
  df::ScoreOptions options;
  options.min_samples = args.min_samples;
  options.ks = provider.options().ks;
  df::Scorer scorer(provider, options);
  auto scores = scorer.score_groups(report, args.n);
  report_cache_use(provider);
  nlohmann::json extra;
  extra["n"] = df::reported_sample_size(report).value_or(args.n);
  return finish_scoring(report.source_id, std::move(scores), std::move(extra), args);
}

struct ValidateArgs {
  std::string datasets_dir;
  std::optional<std::size_t> synthetic;
  double noise_min = 0.01;
  double noise_max = 0.10;
  double threshold = 0.5;
  std::size_t pair_cap = df::kDefaultPairCap;
  std::size_t min_samples = df::kDefaultMinSamples;
  ReferenceFlags ref;
};

int run_validate(const ValidateArgs& args) {
  std::vector<df::DatasetMatrix> datasets;
  if (args.synthetic) {
    df::SyntheticCorpusSpec spec;
    spec.count = *args.synthetic;
    spec.seed = g_config.seed;
    datasets = df::synthetic_corpus(spec);
  } else if (!args.datasets_dir.empty()) {
    for (const fs::path& p : list_files(args.datasets_dir, ".csv")) {
      datasets.push_back(df::load_csv(p));
      for (const auto& dropped : datasets.back().dropped_columns) {
        log_warning(p.filename().string() + ": dropped non-numeric column '" + dropped + "'");
      }
    }
  } else {
    throw df::Error(df::ErrorCode::InvalidArgument, "give a datasets directory or --synthetic N");
  }
  if (datasets.size() < 2 || datasets.size() % 2 != 0) {
    throw df::Error(df::ErrorCode::InvalidArgument,
                    "validation requires an even number (>= 2) of datasets, got " +
                        std::to_string(datasets.size()));
  }

  df::ReferenceProvider provider(provider_options(args.ref), resolve_cache_path());
  df::ScoreOptions options;
  options.min_samples = args.min_samples;
  options.ks = provider.options().ks;
  df::Scorer scorer(provider, options);

  df::ValidationOptions vopts;
  vopts.noise.min_fraction = args.noise_min;
  vopts.noise.max_fraction = args.noise_max;
  vopts.noise.seed = g_config.seed;
  vopts.decision_threshold = args.threshold;
  vopts.seed = g_config.seed;
  vopts.pair_cap = args.pair_cap;
  const df::ValidationResult result = df::run_validation(datasets, scorer, vopts);
  report_cache_use(provider);
  for (const auto& e : result.excluded) log_warning("excluded " + e.name + ": " + e.reason);
  emit(df::to_json(result), df::render_text(result));
  return kExitOk;
}

struct ScanArgs {
  std::string reports_dir;
  std::string levels = "0.90,0.92,0.94,0.96,0.98";
  std::size_t n = df::kDefaultReportSampleSize;
  std::size_t min_samples = df::kDefaultMinSamples;
  ReferenceFlags ref;
};

std::vector<double> parse_levels(const std::string& text) {
  std::vector<double> levels;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const df::Cell cell = df::parse_cell(item);
    if (cell.kind != df::CellKind::Number) {
      throw df::Error(df::ErrorCode::InvalidArgument, "bad confidence level '" + item + "'");
    }
    levels.push_back(cell.value);
  }
  df::validate_levels(levels);
  return levels;
}

int run_scan_corpus(const ScanArgs& args) {
  const std::vector<double> levels = parse_levels(args.levels);
  std::vector<df::ReportedStats> reports;
  std::vector<df::UnscorableReport> unreadable;
  for (const fs::path& p : list_files(args.reports_dir, ".json")) {
    try {
      reports.push_back(df::load_report(p));
    } catch (const df::Error& e) {
      if (e.code() != df::ErrorCode::SchemaViolation && e.code() != df::ErrorCode::UnknownOperator) throw;
      log_warning(p.filename().string() + ": " + e.what());
      unreadable.push_back({p.stem().string(), e.what()});
    }
  }
  if (reports.empty()) {
    throw df::Error(df::ErrorCode::InvalidArgument, "no readable reports in " + args.reports_dir);
  }
  df::ReferenceProvider provider(provider_options(args.ref), resolve_cache_path());
  df::ScoreOptions options;
  options.min_samples = args.min_samples;
  options.ks = provider.options().ks;
  df::Scorer scorer(provider, options);
  df::FlagTable table = df::scan_corpus(reports, scorer, levels, args.n);
  report_cache_use(provider);
  table.unscorable.insert(table.unscorable.end(), unreadable.begin(), unreadable.end());
  std::sort(table.unscorable.begin(), table.unscorable.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  emit(df::to_json(table), df::render_text(table));
  return kExitOk;
}

int exit_code_for(const df::Error& e) {
  switch (e.code()) {
    case df::ErrorCode::TooManySkips:
    case df::ErrorCode::InvalidDistribution:
    case df::ErrorCode::CorruptCache:
    case df::ErrorCode::UncalibratedReference:
    case df::ErrorCode::Io:
      return kExitGeneration;
    case df::ErrorCode::NoUsableOutcomes:
    case df::ErrorCode::EmptyHistogram:
      return kExitInsufficient;
    default:
      return kExitInvalid;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Leading-digit (Benford) screening of reported means, standard deviations and "
               "regression slopes"};
  app.require_subcommand(1);

  GenRefArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-ref", "Generate, calibrate and cache a reference distribution");
  gen_cmd->add_option("--operator", gen.op, "Operator: mean, std or ols_slope")->required();
  gen_cmd->add_option("--n", gen.n, "Entries per vector behind each statistic (bucketed)")
      ->default_val(1)
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--obs-len", gen.obs_len,
                      "Number of observed statistics the floor is calibrated for (bucketed)")
      ->default_val(20)
      ->check(CLI::PositiveNumber);
  add_reference_options(gen_cmd, gen.ref);
  add_common_options(gen_cmd);

  ScoreArgs dataset;
  auto* dataset_cmd = app.add_subcommand("score-dataset", "Score the statistics computed from a CSV dataset");
  dataset_cmd->add_option("csv", dataset.input, "Dataset CSV file")->required()->check(CLI::ExistingFile);
  dataset_cmd->add_option("--delimiter", dataset.delimiter, "Field delimiter (use \\t for tab)")->default_val(",");
  dataset_cmd->add_option("--decimal", dataset.decimal, "Decimal separator")->default_val(".");
  dataset_cmd->add_flag("--no-header", dataset.no_header, "The first row holds data, not labels");
  dataset_cmd->add_option("--pair-cap", dataset.pair_cap, "Maximum number of ordered feature pairs for slopes")
      ->default_val(df::kDefaultPairCap)
      ->check(CLI::PositiveNumber);
  add_score_options(dataset_cmd, dataset);
  add_reference_options(dataset_cmd, dataset.ref);
  add_common_options(dataset_cmd);

  ScoreArgs stats;
  auto* stats_cmd = app.add_subcommand("score-stats", "Score statistics transcribed from a manuscript (JSON)");
  stats_cmd->add_option("report", stats.input, "Report JSON file")->required()->check(CLI::ExistingFile);
  stats_cmd->add_option("--n", stats.n,
                        "Sample size behind each statistic when the report has no metadata.n")
      ->default_val(df::kDefaultReportSampleSize)
      ->check(CLI::PositiveNumber);
  add_score_options(stats_cmd, stats);
  add_reference_options(stats_cmd, stats.ref);
  add_common_options(stats_cmd);

  ValidateArgs validate;
  auto* validate_cmd = app.add_subcommand("validate", "Run the 50/50 noise-injection validation experiment");
  validate_cmd->add_option("datasets", validate.datasets_dir, "Directory of dataset CSV files");
  validate_cmd->add_option("--synthetic", validate.synthetic,
                           "Use N seeded synthetic datasets instead of a directory")
      ->check(CLI::PositiveNumber);
  validate_cmd->add_option("--noise-min", validate.noise_min, "Smallest noise, as a fraction of the group mean")
      ->default_val(0.01);
  validate_cmd->add_option("--noise-max", validate.noise_max, "Largest noise, as a fraction of the group mean")
      ->default_val(0.10);
  validate_cmd->add_option("--threshold", validate.threshold,
                           "Overall score at or above which a dataset is predicted manipulated")
      ->default_val(0.5)
      ->check(CLI::Range(0.0, 1.0));
  validate_cmd->add_option("--pair-cap", validate.pair_cap, "Maximum number of ordered feature pairs for slopes")
      ->default_val(df::kDefaultPairCap)
      ->check(CLI::PositiveNumber);
  validate_cmd->add_option("--min-samples", validate.min_samples, "Usable digits required per operator group")
      ->default_val(df::kDefaultMinSamples)
      ->check(CLI::PositiveNumber);
  add_reference_options(validate_cmd, validate.ref);
  add_common_options(validate_cmd);

  ScanArgs scan;
  auto* scan_cmd = app.add_subcommand("scan-corpus", "Score every report in a directory and count flags per level");
  scan_cmd->add_option("reports", scan.reports_dir, "Directory of report JSON files")->required();
  scan_cmd->add_option("--levels", scan.levels, "Comma-separated, strictly increasing confidence levels in (0,1)")
      ->default_val("0.90,0.92,0.94,0.96,0.98");
  scan_cmd->add_option("--n", scan.n, "Sample size for reports without metadata.n")
      ->default_val(df::kDefaultReportSampleSize)
      ->check(CLI::PositiveNumber);
  scan_cmd->add_option("--min-samples", scan.min_samples, "Usable digits required per operator group")
      ->default_val(df::kDefaultMinSamples)
      ->check(CLI::PositiveNumber);
  add_reference_options(scan_cmd, scan.ref);
  add_common_options(scan_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  try {
    if (gen_cmd->parsed()) return run_gen_ref(gen);
    if (dataset_cmd->parsed()) return run_score_dataset(dataset);
    if (stats_cmd->parsed()) return run_score_stats(stats);
    if (validate_cmd->parsed()) return run_validate(validate);
    if (scan_cmd->parsed()) return run_scan_corpus(scan);
  } catch (const df::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitGeneration;
  }
  return kExitInvalid;
}
