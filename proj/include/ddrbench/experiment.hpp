#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ddrbench/ddr.hpp"
#include "ddrbench/perturbation.hpp"
#include "ddrbench/provider.hpp"

namespace ddrbench {

struct ScoreRecord {
  std::string source_id;
  Method method = Method::kDdr;
  int depth = 0;
  SubstitutionKind kind = SubstitutionKind::kSynonym;
  double score = 0;
  std::uint64_t seed = 0;  // seed of the accepted variant

  friend bool operator==(ScoreRecord const&, ScoreRecord const&) = default;
};

/// Canonical order: source id, depth, kind (synonym first), method.
bool canonical_less(ScoreRecord const& a, ScoreRecord const& b);

struct CellFailure {
  std::string source_id;
  int depth = 0;
  SubstitutionKind kind = SubstitutionKind::kSynonym;
  std::string reason;

  friend bool operator==(CellFailure const&, CellFailure const&) = default;
};

/// Reproducibility envelope of a scoring run. A "cell" is one
/// (source, depth, kind); each completed cell yields one record per method.
struct RunManifest {
  std::string dataset_sha256;
  std::string lexicon_sha256;
  std::string vocabulary_sha256;
  std::string model_tag;
  std::uint64_t seed = 0;
  std::vector<Method> methods;
  std::vector<int> depths;
  std::string rng;
  bool centroid_includes_eos = false;
  std::size_t planned_cells = 0;
  std::size_t completed_cells = 0;
  // source id -> "d<depth>-<kind>" -> resamples needed (only nonzero entries)
  std::map<std::string, std::map<std::string, int>> resamples;
  std::vector<CellFailure> failures;

  double failure_fraction() const;
  friend bool operator==(RunManifest const&, RunManifest const&) = default;
};

inline constexpr double kMaxFailureFraction = 0.10;

struct ExperimentConfig {
  std::vector<Method> methods{std::begin(kAllMethods), std::end(kAllMethods)};
  std::vector<int> depths{1, 2, 3};
  std::uint64_t seed = 0;
  int concurrency = 4;
  ScoringOptions scoring;
  std::string dataset_sha256;
  std::string lexicon_sha256;
  std::string vocabulary_sha256;
};

struct RunResult {
  std::vector<ScoreRecord> records;  // canonical order
  RunManifest manifest;
};

/// For every excerpt and (depth, kind): generate a variant, embed it next to
/// the original, resample until token counts match (bounded), then score
/// with every configured method. Data problems become per-cell failures in
/// the manifest; provider transport and protocol errors abort the run.
RunResult run_experiment(std::span<SourceExcerpt const> excerpts, Lexicon const& lex,
                         EmbeddingSource& source, ExperimentConfig const& config);

/// Completes a partial run: only cells without a full set of method records
/// are computed. Refuses (kHashMismatch) when the manifest describes a
/// different dataset, lexicon, seed or method/depth plan.
RunResult resume_run(std::span<SourceExcerpt const> excerpts, Lexicon const& lex,
                     EmbeddingSource& source, ExperimentConfig const& config,
                     RunManifest const& previous, std::vector<ScoreRecord> partial);

std::string cell_key(int depth, SubstitutionKind kind);

void write_scores_csv(std::ostream& out, std::vector<ScoreRecord> records);
std::vector<ScoreRecord> read_scores_csv(std::istream& in);

std::string manifest_to_json(RunManifest const& manifest);
RunManifest manifest_from_json(std::string const& text);

std::string format_double(double v);

/// Quotes a CSV field when it contains a comma, quote or line break.
std::string csv_field(std::string const& s);

}  // namespace ddrbench
