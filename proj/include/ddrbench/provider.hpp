#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ddrbench/corpus.hpp"

namespace ddrbench {

struct EmbedRequest {
  std::string text;
  std::string text_id;
  std::optional<VariantMeta> variant;  // copied onto the returned record
};

/// Anything that can turn a text into a CorpusRecord. Implementations must be
/// safe to call from several threads.
class EmbeddingSource {
 public:
  virtual ~EmbeddingSource() = default;
  virtual CorpusRecord embed(EmbedRequest const& request) = 0;
};

/// Decodes a provider response body:
///   {"model_tag", "tokenizer_tag", "token_count", "pre": [[...]],
///    "post": [[...]], "eos": [...], "normalized": bool}
/// Schema violations raise kMalformedResponse; shape disagreements between
/// token_count, pre and post raise kProviderInconsistency.
CorpusRecord parse_provider_response(std::string_view body, std::string const& text,
                                     std::string const& text_id);

/// Request body for a provider: {"text": ...}.
std::string make_provider_request(std::string const& text);

struct ProviderOptions {
  std::string url;           // e.g. http://127.0.0.1:8080/embed
  std::string bearer_token;  // sent as "Authorization: Bearer ..." when nonempty
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{200};
  std::chrono::seconds timeout{120};
  int max_in_flight = 4;
};

/// HTTP client for the provider protocol. Transport failures (no connection,
/// timeouts, 5xx) are retried with exponential backoff; anything the provider
/// actually answered but got wrong is not.
class ProviderClient : public EmbeddingSource {
 public:
  explicit ProviderClient(ProviderOptions options);
  ~ProviderClient() override;

  CorpusRecord embed(EmbedRequest const& request) override;

  // Number of HTTP requests issued so far, retries included.
  std::size_t requests_sent() const;

 private:
  struct Endpoint;
  ProviderOptions options_;
  std::unique_ptr<Endpoint> endpoint_;
  std::counting_semaphore<> in_flight_;
  mutable std::mutex mutex_;
  std::size_t requests_ = 0;
};

/// Persistent read-through cache in front of another source, keyed by
/// (model_tag, sha256(text)). Backed by one corpus file; a response from a
/// different model than the cached one resets the cache.
class CachedSource : public EmbeddingSource {
 public:
  CachedSource(EmbeddingSource& inner, std::filesystem::path cache_file);
  ~CachedSource() override;

  CorpusRecord embed(EmbedRequest const& request) override;
  void flush();

  std::size_t hits() const;
  std::size_t misses() const;

 private:
  EmbeddingSource& inner_;
  std::filesystem::path cache_file_;
  mutable std::mutex mutex_;
  std::string model_tag_;
  std::map<Sha256Digest, CorpusRecord> entries_;
  bool dirty_ = false;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

/// Serves records out of a prebuilt corpus by text hash. Unknown texts raise
/// kNotFound.
class CorpusSource : public EmbeddingSource {
 public:
  explicit CorpusSource(std::vector<CorpusRecord> records);

  CorpusRecord embed(EmbedRequest const& request) override;
  std::size_t size() const noexcept { return by_hash_.size(); }

 private:
  std::map<Sha256Digest, CorpusRecord> by_hash_;
};

/// Remembers every record that passes through, for writing a corpus after a
/// run. Records are returned sorted by text hash, duplicates dropped.
class RecordingSource : public EmbeddingSource {
 public:
  explicit RecordingSource(EmbeddingSource& inner) : inner_(inner) {}

  CorpusRecord embed(EmbedRequest const& request) override;
  std::vector<CorpusRecord> records() const;

 private:
  EmbeddingSource& inner_;
  mutable std::mutex mutex_;
  std::map<Sha256Digest, CorpusRecord> seen_;
};

}  // namespace ddrbench
