#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ddrbench/experiment.hpp"

namespace ddrbench {

/// Right-continuous empirical CDF. `values` are the distinct sorted samples
/// and `heights[k]` is the fraction of samples <= values[k]; ties share one
/// step.
struct EcdfCurve {
  std::vector<double> values;
  std::vector<double> heights;
  std::size_t sample_count = 0;

  double operator()(double x) const;
};

EcdfCurve ecdf(std::span<double const> samples);

/// EMD between the two score samples, each treated as unit mass.
double separation_emd(std::span<double const> synonym_scores, std::span<double const> random_scores);

/// Product-moment correlation. Raises kUndefined when either side has zero
/// variance, kLengthMismatch / kEmptyInput on bad shapes.
double pearson(std::span<double const> xs, std::span<double const> ys);

/// Lower-middle median (same convention as the word-count statistics).
double lower_median(std::span<double const> samples);

struct ScatterPoint {
  std::string source_id;
  double random_score;   // x
  double synonym_score;  // y
};

struct ScatterResult {
  std::vector<ScatterPoint> points;  // ordered by source id
  std::size_t excluded = 0;          // sources with only one kind present
};

ScatterResult scatter_pairs(std::span<ScoreRecord const> records, Method method, int depth);

struct MethodDepthSummary {
  Method method = Method::kDdr;
  int depth = 0;
  std::optional<double> pearson_r;  // empty when undefined
  double emd_separation = 0;
  std::size_t n_pairs = 0;
  std::size_t excluded = 0;
  std::size_t n_synonym = 0;
  std::size_t n_random = 0;
  double synonym_median = 0;
  double random_median = 0;
  double above_diagonal_fraction = 0;  // share of points with synonym > random
};

struct Report {
  std::string manifest_sha256;
  std::vector<MethodDepthSummary> summaries;
  std::vector<std::string> missing_cells;  // "<method>/d<depth>" lacking one kind
};

Report build_report(std::span<ScoreRecord const> records, std::span<Method const> methods,
                    std::span<int const> depths, std::string manifest_sha256);

std::string report_to_json(Report const& report);

// Plot data. Each CSV starts with a "# run_manifest_sha256=<hex>" line.
void write_ecdf_csv(std::ostream& out, std::span<ScoreRecord const> records,
                    std::string const& manifest_sha256);
void write_scatter_csv(std::ostream& out, std::span<ScoreRecord const> records,
                       std::string const& manifest_sha256);
void write_reference_line_csv(std::ostream& out, std::span<ScoreRecord const> records,
                              std::string const& manifest_sha256);

}  // namespace ddrbench
