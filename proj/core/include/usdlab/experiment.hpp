#pragma once

// Configuration-driven experiments. A run produces CSV rows; the summary
// (fits and assertion verdicts) is computed from the CSV text alone, so
// re-summarizing a saved CSV reproduces the verdict.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "usdlab/rate_fit.hpp"

namespace usdlab {

enum class ExperimentKind {
  usd_search,
  usd_verify,
  entropy_profile,
  er_rate,
  recovery_rate,
  chaining_compare,
};

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(std::string_view name);

struct DictionarySpec {
  /// "exponentials_1d" (N consecutive frequencies), "hyperbolic_cross"
  /// (cross of parameter N in dimension d), or "frequencies" (explicit list).
  std::string type = "exponentials_1d";
  std::int64_t N = 7;
  std::size_t d = 1;
  std::vector<std::vector<std::int64_t>> indices;
};

struct PointsSpec {
  /// "uniform" (m, seed, draw_index), "equispaced" (per_dim), "file" (path)
  /// or "explicit" (points).
  std::string type = "uniform";
  std::size_t m = 0;
  std::uint64_t draw_index = 0;
  std::int64_t per_dim = 0;
  std::string path;
  std::vector<std::vector<double>> points;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::usd_search;
  std::optional<std::uint64_t> seed;
  std::string output = "out";
  std::size_t threads = 1;
  bool strict = false;
  bool svg = false;
  int grid_level = 10;
  double p = 2.0;
  DictionarySpec dictionary;

  // Discretization.
  std::size_t v = 2;
  std::vector<std::vector<std::size_t>> subsets;
  std::vector<std::size_t> m_sweep;
  std::size_t max_trials = 20;
  double epsilon = 0.5;
  std::size_t starts = 64;
  double gradient_tol = 1e-9;
  std::size_t max_iters = 500;
  int verification_grid_level = -1;
  double subset_cap = 1e6;
  PointsSpec points;

  // Sampled classes (entropy, er_rate, chaining_compare).
  std::size_t class_size = 20;
  std::size_t max_terms = 0;
  int n_max = 64;
  int fit_min = 4;
  int fit_max = 64;
  std::size_t mc_trials = 200;
  std::optional<double> sup_bound;

  // Recovery.
  std::vector<double> a_values;
  double b = 0.0;
  std::size_t d = 1;
  int max_level = 11;
  std::size_t terms_per_level = 0;
  std::size_t instances = 5;
  std::string method = "wcga";
  std::vector<std::size_t> v_sweep;
  std::vector<int> n_sweep;
  double oversampling = 8.0;
  double slope_tolerance = 0.2;

  /// Acceptance window for a fitted slope (entropy_profile, er_rate).
  std::optional<std::pair<double, double>> slope_range;
};

/// Parses and validates; errors carry the offending field path.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Throws ConfigError for inconsistent values.
void validate(const ExperimentConfig& config);

struct Assertion {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct Summary {
  std::vector<std::pair<std::string, RateFit>> fits;
  std::vector<Assertion> assertions;
  bool pass = true;
  /// Summary document (JSON text).
  std::string json;
};

struct ExperimentResult {
  ExperimentKind kind = ExperimentKind::usd_search;
  std::string csv;
  Summary summary;
  /// Extra files (name -> contents): certificates, point sets, profiles.
  std::map<std::string, std::string> artifacts;
  std::string svg;
  /// A certificate relied on heuristic (p != 2) verification.
  bool heuristic = false;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

/// Fits and assertions as a pure function of the configuration and CSV text.
Summary summarize(const ExperimentConfig& config, std::string_view csv);

/// Writes results.csv, summary.json, the artifacts and plot.svg into dir.
void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir);

/// 0 pass, 1 assertion failure (or a heuristic certificate under strict).
int exit_code(const ExperimentResult& result, bool strict);

/// Fit of column y against column x of a CSV document with a header row.
RateFit fit_csv_columns(std::string_view csv, const std::string& x, const std::string& y);

/// Minimal static SVG line chart in log2-log2 axes.
struct SvgSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
};
std::string svg_loglog_chart(const std::string& title, const std::string& x_label,
                             const std::string& y_label,
                             const std::vector<SvgSeries>& series);

}  // namespace usdlab
