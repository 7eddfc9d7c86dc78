#include "ddrbench/corpus.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "ddrbench/error.hpp"
#include "json.hpp"

namespace ddrbench {

void CorpusRecord::validate() const {
  auto bad = [&](std::string const& what) {
    fail(ErrorCode::kFormat, "corpus record '" + text_id + "': " + what);
  };
  if (text_id.empty()) fail(ErrorCode::kFormat, "corpus record has an empty text_id");
  if (token_count == 0) bad("token_count is 0");
  if (pre_dim == 0 || post_dim == 0) bad("zero embedding dimension");
  if (pre.size() != token_count * pre_dim) {
    bad("pre payload has " + std::to_string(pre.size()) + " values, expected " +
        std::to_string(token_count) + "x" + std::to_string(pre_dim));
  }
  if (post.size() != token_count * post_dim) {
    bad("post payload has " + std::to_string(post.size()) + " values, expected " +
        std::to_string(token_count) + "x" + std::to_string(post_dim));
  }
  if (eos.size() != post_dim) {
    bad("eos has " + std::to_string(eos.size()) + " values, expected " + std::to_string(post_dim));
  }
  if (model_tag.empty()) bad("model_tag is empty");
  if (tokenizer_tag.empty()) bad("tokenizer_tag is empty");
  if (variant) {
    if (variant->depth < kMinDepth || variant->depth > kMaxDepth) bad("variant depth out of range");
    if (variant->replaced_positions.size() != static_cast<std::size_t>(variant->depth)) {
      bad("variant replaced_positions does not match depth");
    }
  }
}

namespace {

TokenEmbeddingSequence rows_of(std::vector<float> const& payload, std::size_t rows, std::size_t dim) {
  std::vector<EmbeddingVector> vectors;
  vectors.reserve(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    vectors.emplace_back(std::vector<double>(payload.begin() + static_cast<std::ptrdiff_t>(r * dim),
                                             payload.begin() + static_cast<std::ptrdiff_t>((r + 1) * dim)));
  }
  return TokenEmbeddingSequence(std::move(vectors));
}

}  // namespace

EmbeddingPair CorpusRecord::to_pair() const {
  validate();
  return EmbeddingPair(text_id, rows_of(pre, token_count, pre_dim), rows_of(post, token_count, post_dim),
                       EmbeddingVector(std::vector<double>(eos.begin(), eos.end())), model_tag);
}

// ---------------------------------------------------------------------------
// Binary container. Everything little-endian:
//
//   "DDRBCORP" | u32 version | u32 0x01020304 | u32 pre_dim | u32 post_dim |
//   u8 normalized | str model_tag | str tokenizer_tag | u64 record_count |
//   record_count x (u64 block_length | block)
//
//   block = str text_id | 32-byte sha256 | u8 has_variant |
//           [u8 depth | u8 kind | u32 n | n x u32 position] |
//           u32 token_count | f32 pre[token_count*pre_dim] |
//           f32 post[token_count*post_dim] | f32 eos[post_dim]
//
//   str = u32 byte length | bytes
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'D', 'D', 'R', 'B', 'C', 'O', 'R', 'P'};
constexpr std::uint32_t kEndianMarker = 0x01020304;

class ByteWriter {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void raw(void const* data, std::size_t n) {
    bytes_.append(static_cast<char const*>(data), n);
  }
  void str(std::string const& s) {
    u32(checked32(s.size()));
    raw(s.data(), s.size());
  }
  static std::uint32_t checked32(std::size_t n) {
    if (n > 0xffffffffULL) fail(ErrorCode::kInvalidArgument, "value too large for corpus format");
    return static_cast<std::uint32_t>(n);
  }
  std::string const& bytes() const { return bytes_; }

 private:
  std::string bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::istream& in) : in_(in) {}

  void raw(void* out, std::size_t n) {
    in_.read(static_cast<char*>(out), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      fail(ErrorCode::kFormat, "corpus file truncated");
    }
    consumed_ += n;
  }
  std::uint8_t u8() {
    unsigned char c;
    raw(&c, 1);
    return c;
  }
  std::uint32_t u32() {
    unsigned char b[4];
    raw(b, 4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }
  std::uint64_t u64() {
    unsigned char b[8];
    raw(b, 8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::string str(std::uint64_t limit) {
    auto const n = u32();
    if (n > limit) fail(ErrorCode::kFormat, "corpus string length exceeds its block");
    std::string s(n, '\0');
    raw(s.data(), n);
    return s;
  }
  std::uint64_t consumed() const { return consumed_; }

 private:
  std::istream& in_;
  std::uint64_t consumed_ = 0;
};

void write_floats(ByteWriter& w, std::vector<float> const& values) {
  for (float v : values) w.f32(v);
}

std::vector<float> read_floats(ByteReader& r, std::uint64_t count, std::uint64_t remaining) {
  if (count * 4 > remaining) fail(ErrorCode::kFormat, "corpus payload larger than its block");
  std::vector<float> out(count);
  for (auto& v : out) v = r.f32();
  return out;
}

}  // namespace

void write_corpus(std::ostream& out, std::span<CorpusRecord const> records) {
  for (auto const& r : records) r.validate();
  CorpusRecord const* first = records.empty() ? nullptr : &records.front();
  for (auto const& r : records) {
    if (r.model_tag != first->model_tag || r.tokenizer_tag != first->tokenizer_tag ||
        r.pre_dim != first->pre_dim || r.post_dim != first->post_dim ||
        r.normalized != first->normalized) {
      fail(ErrorCode::kInvalidArgument, "record '" + r.text_id +
                                            "' disagrees with the corpus header (model, tokenizer, "
                                            "dimensions or normalization)");
    }
  }

  ByteWriter header;
  header.raw(kMagic, sizeof kMagic);
  header.u32(kCorpusFormatVersion);
  header.u32(kEndianMarker);
  header.u32(first ? ByteWriter::checked32(first->pre_dim) : 0);
  header.u32(first ? ByteWriter::checked32(first->post_dim) : 0);
  header.u8(first && first->normalized ? 1 : 0);
  header.str(first ? first->model_tag : std::string());
  header.str(first ? first->tokenizer_tag : std::string());
  header.u64(records.size());
  out.write(header.bytes().data(), static_cast<std::streamsize>(header.bytes().size()));

  for (auto const& r : records) {
    ByteWriter block;
    block.str(r.text_id);
    block.raw(r.text_hash.data(), r.text_hash.size());
    block.u8(r.variant ? 1 : 0);
    if (r.variant) {
      block.u8(static_cast<std::uint8_t>(r.variant->depth));
      block.u8(r.variant->kind == SubstitutionKind::kSynonym ? 0 : 1);
      block.u32(ByteWriter::checked32(r.variant->replaced_positions.size()));
      for (auto p : r.variant->replaced_positions) block.u32(ByteWriter::checked32(p));
    }
    block.u32(ByteWriter::checked32(r.token_count));
    write_floats(block, r.pre);
    write_floats(block, r.post);
    write_floats(block, r.eos);

    ByteWriter length;
    length.u64(block.bytes().size());
    out.write(length.bytes().data(), 8);
    out.write(block.bytes().data(), static_cast<std::streamsize>(block.bytes().size()));
  }
  if (!out) fail(ErrorCode::kIo, "failed writing corpus");
}

void write_corpus(std::filesystem::path const& path, std::span<CorpusRecord const> records) {
  auto const tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::kIo, "cannot open " + tmp + " for writing");
    write_corpus(out, records);
    out.flush();
    if (!out) fail(ErrorCode::kIo, "failed writing " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(ErrorCode::kIo, "cannot move " + tmp + " to " + path.string() + ": " + ec.message());
}

std::vector<CorpusRecord> read_corpus(std::istream& in) {
  ByteReader r(in);
  char magic[8];
  r.raw(magic, sizeof magic);
  if (!std::equal(std::begin(magic), std::end(magic), std::begin(kMagic))) {
    fail(ErrorCode::kFormat, "not a corpus file (bad magic)");
  }
  auto const version = r.u32();
  if (version != kCorpusFormatVersion) {
    fail(ErrorCode::kVersionMismatch, "corpus format version " + std::to_string(version) +
                                          " is not supported (expected " +
                                          std::to_string(kCorpusFormatVersion) + ")");
  }
  if (r.u32() != kEndianMarker) fail(ErrorCode::kFormat, "corpus endianness marker mismatch");
  std::size_t const pre_dim = r.u32();
  std::size_t const post_dim = r.u32();
  auto const normalized_byte = r.u8();
  if (normalized_byte > 1) fail(ErrorCode::kFormat, "corpus normalized flag is not 0 or 1");
  constexpr std::uint64_t kTagLimit = 1 << 20;
  std::string const model_tag = r.str(kTagLimit);
  std::string const tokenizer_tag = r.str(kTagLimit);
  auto const count = r.u64();

  std::vector<CorpusRecord> records;
  for (std::uint64_t k = 0; k < count; ++k) {
    auto const block_length = r.u64();
    auto const start = r.consumed();
    auto remaining = [&] { return block_length - (r.consumed() - start); };

    CorpusRecord rec;
    rec.pre_dim = pre_dim;
    rec.post_dim = post_dim;
    rec.normalized = normalized_byte == 1;
    rec.model_tag = model_tag;
    rec.tokenizer_tag = tokenizer_tag;
    rec.text_id = r.str(block_length);
    r.raw(rec.text_hash.data(), rec.text_hash.size());
    auto const has_variant = r.u8();
    if (has_variant > 1) fail(ErrorCode::kFormat, "corpus variant flag is not 0 or 1");
    if (has_variant == 1) {
      VariantMeta meta;
      meta.depth = r.u8();
      auto const kind = r.u8();
      if (kind > 1) fail(ErrorCode::kFormat, "corpus variant kind is not 0 or 1");
      meta.kind = kind == 0 ? SubstitutionKind::kSynonym : SubstitutionKind::kRandom;
      auto const n = r.u32();
      if (std::uint64_t{n} * 4 > remaining()) fail(ErrorCode::kFormat, "corpus position list larger than its block");
      for (std::uint32_t p = 0; p < n; ++p) meta.replaced_positions.push_back(r.u32());
      rec.variant = std::move(meta);
    }
    rec.token_count = r.u32();
    rec.pre = read_floats(r, std::uint64_t{rec.token_count} * pre_dim, remaining());
    rec.post = read_floats(r, std::uint64_t{rec.token_count} * post_dim, remaining());
    rec.eos = read_floats(r, post_dim, remaining());
    if (r.consumed() - start != block_length) {
      fail(ErrorCode::kFormat, "corpus record " + std::to_string(k) + " has block length " +
                                   std::to_string(block_length) + " but " +
                                   std::to_string(r.consumed() - start) + " bytes were decoded");
    }
    rec.validate();
    records.push_back(std::move(rec));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    fail(ErrorCode::kFormat, "trailing bytes after the last corpus record");
  }
  return records;
}

std::vector<CorpusRecord> read_corpus(std::filesystem::path const& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open corpus " + path.string());
  try {
    return read_corpus(in);
  } catch (Error const& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------

std::vector<SourceExcerpt> parse_dataset(std::istream& in) {
  std::vector<SourceExcerpt> excerpts;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto const where = "dataset line " + std::to_string(line_no);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (nlohmann::json::parse_error const& e) {
      fail(ErrorCode::kFormat, where + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("id") || !j.contains("text") || !j["text"].is_string()) {
      fail(ErrorCode::kFormat, where + ": expected {\"id\": ..., \"text\": string}");
    }
    std::string id = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
    if (!ids.insert(id).second) fail(ErrorCode::kFormat, where + ": duplicate id '" + id + "'");
    try {
      excerpts.emplace_back(std::move(id), j["text"].get<std::string>());
    } catch (Error const& e) {
      fail(ErrorCode::kFormat, where + ": " + e.what());
    }
  }
  return excerpts;
}

std::vector<SourceExcerpt> load_dataset(std::filesystem::path const& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open dataset " + path.string());
  return parse_dataset(in);
}

// ---------------------------------------------------------------------------

CorpusStats corpus_stats(std::span<std::size_t const> word_counts) {
  if (word_counts.empty()) fail(ErrorCode::kEmptyInput, "corpus_stats needs at least one excerpt");
  std::vector<std::size_t> sorted(word_counts.begin(), word_counts.end());
  std::sort(sorted.begin(), sorted.end());
  CorpusStats s;
  s.count = sorted.size();
  long double sum = 0;
  for (auto c : sorted) sum += c;
  long double const mean = sum / s.count;
  long double sq = 0;
  for (auto c : sorted) sq += (c - mean) * (c - mean);
  s.mean = static_cast<double>(mean);
  s.median = static_cast<double>(sorted[(sorted.size() - 1) / 2]);
  s.min = static_cast<double>(sorted.front());
  s.max = static_cast<double>(sorted.back());
  s.stddev = static_cast<double>(std::sqrt(sq / s.count));
  return s;
}

namespace {

std::vector<std::size_t> word_counts_of(std::span<SourceExcerpt const> excerpts) {
  std::vector<std::size_t> counts;
  counts.reserve(excerpts.size());
  for (auto const& e : excerpts) counts.push_back(e.word_count());
  return counts;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

CorpusStats corpus_stats(std::span<SourceExcerpt const> excerpts) {
  auto const counts = word_counts_of(excerpts);
  return corpus_stats(std::span<std::size_t const>(counts));
}

std::vector<std::pair<double, std::size_t>> histogram_export(std::span<std::size_t const> word_counts,
                                                             double bin_width) {
  if (!(bin_width > 0.0) || !std::isfinite(bin_width)) {
    fail(ErrorCode::kInvalidArgument, "histogram bin width must be positive");
  }
  std::vector<std::pair<double, std::size_t>> bins;
  if (word_counts.empty()) return bins;
  auto const [lo, hi] = std::minmax_element(word_counts.begin(), word_counts.end());
  auto const bin_of = [&](std::size_t c) {
    return static_cast<long long>(std::floor(static_cast<double>(c) / bin_width));
  };
  long long const first = bin_of(*lo);
  long long const last = bin_of(*hi);
  for (long long b = first; b <= last; ++b) bins.emplace_back(static_cast<double>(b) * bin_width, 0);
  for (auto c : word_counts) ++bins[static_cast<std::size_t>(bin_of(c) - first)].second;
  return bins;
}

std::vector<std::pair<double, std::size_t>> histogram_export(std::span<SourceExcerpt const> excerpts,
                                                             double bin_width) {
  auto const counts = word_counts_of(excerpts);
  return histogram_export(std::span<std::size_t const>(counts), bin_width);
}

void write_stats_csv(std::ostream& out, CorpusStats const& s) {
  out << "count,mean,median,min,max,std,std_convention\n"
      << s.count << ',' << format_number(s.mean) << ',' << format_number(s.median) << ','
      << format_number(s.min) << ',' << format_number(s.max) << ',' << format_number(s.stddev)
      << ',' << kStdConvention << '\n';
}

void write_histogram_csv(std::ostream& out, std::vector<std::pair<double, std::size_t>> const& bins) {
  out << "bin_start,count\n";
  for (auto const& [start, count] : bins) out << format_number(start) << ',' << count << '\n';
}

}  // namespace ddrbench
