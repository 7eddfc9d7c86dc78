#include "ddrbench/provider.hpp"

#include <cmath>
#include <iostream>
#include <thread>

#include "ddrbench/error.hpp"
#include "httplib.h"
#include "json.hpp"

namespace ddrbench {

using nlohmann::json;

std::string make_provider_request(std::string const& text) {
  json j;
  j["text"] = text;
  return j.dump();
}

namespace {

[[noreturn]] void malformed(std::string const& what) {
  fail(ErrorCode::kMalformedResponse, "malformed provider response: " + what);
}

std::vector<float> read_row(json const& row, std::string const& where) {
  if (!row.is_array()) malformed(where + " is not an array");
  std::vector<float> out;
  out.reserve(row.size());
  for (auto const& v : row) {
    if (!v.is_number()) malformed(where + " contains a non-number");
    double const d = v.get<double>();
    if (!std::isfinite(d)) malformed(where + " contains a non-finite number");
    out.push_back(static_cast<float>(d));
  }
  return out;
}

// Flattens a list of equally sized rows; returns the row width.
std::size_t read_matrix(json const& j, char const* field, std::vector<float>& out) {
  if (!j.contains(field) || !j[field].is_array()) malformed(std::string("'") + field + "' missing or not an array");
  std::size_t width = 0;
  std::size_t r = 0;
  for (auto const& row : j[field]) {
    auto values = read_row(row, std::string(field) + "[" + std::to_string(r) + "]");
    if (r == 0) width = values.size();
    if (values.size() != width || width == 0) {
      fail(ErrorCode::kProviderInconsistency, std::string("provider returned ragged or empty '") +
                                                  field + "' rows (row " + std::to_string(r) + ")");
    }
    out.insert(out.end(), values.begin(), values.end());
    ++r;
  }
  return width;
}

}  // namespace

CorpusRecord parse_provider_response(std::string_view body, std::string const& text,
                                     std::string const& text_id) {
  json j;
  try {
    j = json::parse(body);
  } catch (json::parse_error const& e) {
    malformed(e.what());
  }
  if (!j.is_object()) malformed("body is not a JSON object");
  for (char const* field : {"model_tag", "tokenizer_tag"}) {
    if (!j.contains(field) || !j[field].is_string() || j[field].get<std::string>().empty()) {
      malformed(std::string("'") + field + "' missing or not a nonempty string");
    }
  }
  if (!j.contains("token_count") || !j["token_count"].is_number_integer() ||
      j["token_count"].get<long long>() <= 0) {
    malformed("'token_count' missing or not a positive integer");
  }
  if (!j.contains("normalized") || !j["normalized"].is_boolean()) {
    malformed("'normalized' missing or not a boolean");
  }
  if (!j.contains("eos")) malformed("'eos' missing");

  CorpusRecord rec;
  rec.text_id = text_id;
  rec.text_hash = sha256(text);
  rec.model_tag = j["model_tag"].get<std::string>();
  rec.tokenizer_tag = j["tokenizer_tag"].get<std::string>();
  rec.normalized = j["normalized"].get<bool>();
  rec.token_count = j["token_count"].get<std::size_t>();
  rec.pre_dim = read_matrix(j, "pre", rec.pre);
  rec.post_dim = read_matrix(j, "post", rec.post);
  rec.eos = read_row(j["eos"], "eos");

  std::size_t const pre_rows = rec.pre_dim ? rec.pre.size() / rec.pre_dim : 0;
  std::size_t const post_rows = rec.post_dim ? rec.post.size() / rec.post_dim : 0;
  if (pre_rows != post_rows) {
    fail(ErrorCode::kProviderInconsistency, "provider returned " + std::to_string(pre_rows) +
                                                " pre rows but " + std::to_string(post_rows) +
                                                " post rows");
  }
  if (pre_rows != rec.token_count) {
    fail(ErrorCode::kProviderInconsistency, "provider token_count " +
                                                std::to_string(rec.token_count) + " disagrees with " +
                                                std::to_string(pre_rows) + " embedding rows");
  }
  if (rec.eos.size() != rec.post_dim) {
    fail(ErrorCode::kProviderInconsistency, "provider eos has " + std::to_string(rec.eos.size()) +
                                                " values but post rows have " +
                                                std::to_string(rec.post_dim));
  }
  rec.validate();
  return rec;
}

// ---------------------------------------------------------------------------

struct ProviderClient::Endpoint {
  std::string base;  // scheme://host[:port]
  std::string path;
};

ProviderClient::ProviderClient(ProviderOptions options)
    : options_(std::move(options)), in_flight_(std::max(1, options_.max_in_flight)) {
  if (options_.max_attempts < 1) fail(ErrorCode::kConfig, "provider max_attempts must be >= 1");
  auto const scheme_end = options_.url.find("://");
  if (scheme_end == std::string::npos) {
    fail(ErrorCode::kConfig, "provider url '" + options_.url + "' has no scheme");
  }
  auto const path_start = options_.url.find('/', scheme_end + 3);
  endpoint_ = std::make_unique<Endpoint>();
  endpoint_->base = options_.url.substr(0, path_start);
  endpoint_->path = path_start == std::string::npos ? "/" : options_.url.substr(path_start);
  if (endpoint_->base.size() <= scheme_end + 3) {
    fail(ErrorCode::kConfig, "provider url '" + options_.url + "' has no host");
  }
}

ProviderClient::~ProviderClient() = default;

std::size_t ProviderClient::requests_sent() const {
  std::lock_guard lock(mutex_);
  return requests_;
}

CorpusRecord ProviderClient::embed(EmbedRequest const& request) {
  if (request.text.empty()) fail(ErrorCode::kInvalidArgument, "cannot embed empty text");

  in_flight_.acquire();
  struct Release {
    std::counting_semaphore<>& s;
    ~Release() { s.release(); }
  } release{in_flight_};

  std::string const body = make_provider_request(request.text);
  httplib::Headers headers;
  if (!options_.bearer_token.empty()) {
    headers.emplace("Authorization", "Bearer " + options_.bearer_token);
  }

  std::string last_failure;
  auto backoff = options_.initial_backoff;
  for (int attempt = 1; attempt <= options_.max_attempts; ++attempt) {
    httplib::Client client(endpoint_->base);
    client.set_connection_timeout(options_.timeout);
    client.set_read_timeout(options_.timeout);
    client.set_write_timeout(options_.timeout);
    auto result = client.Post(endpoint_->path, headers, body, "application/json");
    {
      std::lock_guard lock(mutex_);
      ++requests_;
    }
    if (!result) {
      last_failure = httplib::to_string(result.error());
    } else if (result->status >= 500) {
      last_failure = "HTTP " + std::to_string(result->status);
    } else if (result->status != 200) {
      fail(ErrorCode::kMalformedResponse, "provider rejected request for '" + request.text_id +
                                              "' with HTTP " + std::to_string(result->status) +
                                              ": " + result->body);
    } else {
      auto rec = parse_provider_response(result->body, request.text, request.text_id);
      rec.variant = request.variant;
      return rec;
    }
    if (attempt < options_.max_attempts) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
  fail(ErrorCode::kTransport, "provider " + options_.url + " unreachable for '" + request.text_id +
                                  "' after " + std::to_string(options_.max_attempts) +
                                  " attempts: " + last_failure);
}

// ---------------------------------------------------------------------------

CachedSource::CachedSource(EmbeddingSource& inner, std::filesystem::path cache_file)
    : inner_(inner), cache_file_(std::move(cache_file)) {
  if (std::filesystem::exists(cache_file_)) {
    for (auto& rec : read_corpus(cache_file_)) {
      model_tag_ = rec.model_tag;
      entries_.emplace(rec.text_hash, std::move(rec));
    }
  }
}

CachedSource::~CachedSource() {
  try {
    flush();
  } catch (Error const& e) {
    std::cerr << "warning: embedding cache not saved: " << e.what() << '\n';
  }
}

CorpusRecord CachedSource::embed(EmbedRequest const& request) {
  auto const key = sha256(request.text);
  {
    std::lock_guard lock(mutex_);
    if (auto it = entries_.find(key); it != entries_.end()) {
      ++hits_;
      CorpusRecord rec = it->second;
      rec.text_id = request.text_id;
      rec.variant = request.variant;
      return rec;
    }
    ++misses_;
  }
  CorpusRecord rec = inner_.embed(request);
  std::lock_guard lock(mutex_);
  if (!model_tag_.empty() && rec.model_tag != model_tag_) {
    std::cerr << "warning: provider model changed from '" << model_tag_ << "' to '"
              << rec.model_tag << "', discarding " << entries_.size() << " cached records\n";
    entries_.clear();
  }
  model_tag_ = rec.model_tag;
  entries_.insert_or_assign(key, rec);
  dirty_ = true;
  return rec;
}

void CachedSource::flush() {
  std::lock_guard lock(mutex_);
  if (!dirty_) return;
  if (cache_file_.has_parent_path()) std::filesystem::create_directories(cache_file_.parent_path());
  std::vector<CorpusRecord> records;
  records.reserve(entries_.size());
  for (auto const& [key, rec] : entries_) records.push_back(rec);
  write_corpus(cache_file_, records);
  dirty_ = false;
}

std::size_t CachedSource::hits() const {
  std::lock_guard lock(mutex_);
  return hits_;
}

std::size_t CachedSource::misses() const {
  std::lock_guard lock(mutex_);
  return misses_;
}

// ---------------------------------------------------------------------------

CorpusSource::CorpusSource(std::vector<CorpusRecord> records) {
  for (auto& rec : records) by_hash_.insert_or_assign(rec.text_hash, std::move(rec));
}

CorpusRecord CorpusSource::embed(EmbedRequest const& request) {
  auto const it = by_hash_.find(sha256(request.text));
  if (it == by_hash_.end()) {
    fail(ErrorCode::kNotFound, "text '" + request.text_id + "' is not in the corpus");
  }
  CorpusRecord rec = it->second;
  rec.text_id = request.text_id;
  rec.variant = request.variant;
  return rec;
}

CorpusRecord RecordingSource::embed(EmbedRequest const& request) {
  CorpusRecord rec = inner_.embed(request);
  std::lock_guard lock(mutex_);
  // Identical texts can arrive under several ids; keep the smallest id so the
  // recorded corpus does not depend on thread scheduling.
  auto [it, inserted] = seen_.try_emplace(rec.text_hash, rec);
  if (!inserted && rec.text_id < it->second.text_id) it->second = rec;
  return rec;
}

std::vector<CorpusRecord> RecordingSource::records() const {
  std::lock_guard lock(mutex_);
  std::vector<CorpusRecord> out;
  out.reserve(seen_.size());
  for (auto const& [key, rec] : seen_) out.push_back(rec);
  return out;
}

}  // namespace ddrbench
