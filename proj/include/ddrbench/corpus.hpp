#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ddrbench/ddr.hpp"
#include "ddrbench/hashing.hpp"
#include "ddrbench/perturbation.hpp"

namespace ddrbench {

struct VariantMeta {
  int depth = 0;
  SubstitutionKind kind = SubstitutionKind::kSynonym;
  std::vector<std::size_t> replaced_positions;

  friend bool operator==(VariantMeta const&, VariantMeta const&) = default;
};

/// One embedded text as stored on disk. Payloads are 32-bit floats, row-major
/// token_count x dim.
struct CorpusRecord {
  std::string text_id;
  Sha256Digest text_hash{};  // sha256 of the exact text that was embedded
  std::optional<VariantMeta> variant;
  std::size_t token_count = 0;
  std::size_t pre_dim = 0;
  std::size_t post_dim = 0;
  std::vector<float> pre;
  std::vector<float> post;
  std::vector<float> eos;
  std::string model_tag;
  std::string tokenizer_tag;
  bool normalized = false;

  /// Throws Error{kFormat} on any shape or metadata violation.
  void validate() const;
  EmbeddingPair to_pair() const;

  friend bool operator==(CorpusRecord const&, CorpusRecord const&) = default;
};

inline constexpr std::uint32_t kCorpusFormatVersion = 1;

void write_corpus(std::ostream& out, std::span<CorpusRecord const> records);
void write_corpus(std::filesystem::path const& path, std::span<CorpusRecord const> records);
std::vector<CorpusRecord> read_corpus(std::istream& in);
std::vector<CorpusRecord> read_corpus(std::filesystem::path const& path);

/// Dataset JSON Lines: one {"id", "text"} object per line. Ids must be unique.
std::vector<SourceExcerpt> parse_dataset(std::istream& in);
std::vector<SourceExcerpt> load_dataset(std::filesystem::path const& path);

/// Word-count statistics. `stddev` is the population standard deviation
/// (divide by N); `median` takes the lower middle element for even counts.
struct CorpusStats {
  std::size_t count = 0;
  double mean = 0;
  double median = 0;
  double min = 0;
  double max = 0;
  double stddev = 0;
};

inline constexpr char kStdConvention[] = "population";

CorpusStats corpus_stats(std::span<std::size_t const> word_counts);
CorpusStats corpus_stats(std::span<SourceExcerpt const> excerpts);

/// Left-closed, right-open bins of width `bin_width` starting at the bin that
/// holds the smallest count; empty interior bins are emitted with count 0.
std::vector<std::pair<double, std::size_t>> histogram_export(std::span<std::size_t const> word_counts,
                                                             double bin_width);
std::vector<std::pair<double, std::size_t>> histogram_export(std::span<SourceExcerpt const> excerpts,
                                                             double bin_width);

void write_stats_csv(std::ostream& out, CorpusStats const& stats);
void write_histogram_csv(std::ostream& out, std::vector<std::pair<double, std::size_t>> const& bins);

}  // namespace ddrbench
