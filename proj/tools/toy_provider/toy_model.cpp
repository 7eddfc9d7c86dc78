#include "toy_model.hpp"

#include <cctype>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "ddrbench/error.hpp"
#include "ddrbench/hashing.hpp"
#include "ddrbench/text.hpp"
#include "json.hpp"

namespace ddrbench::toy {

namespace {

// Union-find over lexicon entries; the representative is the smallest word.
std::map<std::string, std::string> concept_groups(Lexicon const& lex) {
  std::map<std::string, std::string> parent;
  std::function<std::string(std::string const&)> find = [&](std::string const& w) -> std::string {
    auto it = parent.find(w);
    if (it == parent.end()) return parent[w] = w;
    if (it->second == w) return w;
    return it->second = find(it->second);
  };
  for (auto const& [head, synonyms] : lex.synonyms()) {
    for (auto const& s : synonyms) {
      auto a = find(head);
      auto b = find(s);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  }
  std::map<std::string, std::string> groups;
  for (auto const& [word, unused] : parent) groups[word] = find(word);
  return groups;
}

}  // namespace

ToyModel::ToyModel(ToyModelConfig config, Lexicon const* concepts) : config_(config) {
  if (concepts != nullptr) concept_ = concept_groups(*concepts);
  double const scale = 1.0 / std::sqrt(static_cast<double>(config_.pre_dim));
  mix_concept_ = gaussian("mix/concept", config_.post_dim * config_.pre_dim, scale);
  mix_word_ = gaussian("mix/word", config_.post_dim * config_.pre_dim, scale);
}

std::vector<double> ToyModel::gaussian(std::string_view label, std::size_t dim, double scale) const {
  std::mt19937_64 engine(sha256_prefix64(std::to_string(config_.seed) + "|" + std::string(label)));
  auto uniform = [&] { return (static_cast<double>(engine() >> 11) + 0.5) * 0x1.0p-53; };
  std::vector<double> out(dim);
  for (std::size_t i = 0; i < dim; i += 2) {
    double const r = std::sqrt(-2.0 * std::log(uniform()));
    double const theta = 2.0 * std::numbers::pi * uniform();
    out[i] = scale * r * std::cos(theta);
    if (i + 1 < dim) out[i + 1] = scale * r * std::sin(theta);
  }
  return out;
}

std::string const& ToyModel::concept_of(std::string const& token) const {
  auto const it = concept_.find(token);
  return it == concept_.end() ? token : it->second;
}

std::vector<std::string> ToyModel::tokenize(std::string_view text) const {
  std::vector<std::string> tokens;
  for (auto const& word : text::split_whitespace(text)) {
    auto const parts = text::split_word(word);
    for (char c : parts.prefix) tokens.emplace_back(1, c);
    std::string const core = text::to_lower(parts.core);
    if (core.size() > config_.split_length) {
      auto const half = core.size() / 2;
      tokens.push_back(core.substr(0, half));
      tokens.push_back("##" + core.substr(half));
    } else if (!core.empty()) {
      tokens.push_back(core);
    }
    for (char c : parts.suffix) tokens.emplace_back(1, c);
  }
  return tokens;
}

ToyEmbedding ToyModel::embed(std::string_view text) const {
  ToyEmbedding out;
  out.tokens = tokenize(text);
  if (out.tokens.empty()) fail(ErrorCode::kInvalidArgument, "text has no tokens");

  std::size_t const m = config_.pre_dim;
  std::size_t const n = config_.post_dim;
  double const unit = 1.0 / std::sqrt(static_cast<double>(m));
  std::vector<double> state(n, 0.0);

  auto step = [&](std::vector<double> const& concept_vec, std::vector<double> const& word_vec,
                  std::size_t position) {
    auto const pos = gaussian("position/" + std::to_string(position), n,
                              config_.position_scale / std::sqrt(static_cast<double>(n)));
    std::vector<double> y(n);
    for (std::size_t r = 0; r < n; ++r) {
      double drive = 0.0;
      for (std::size_t c = 0; c < m; ++c) {
        drive += mix_concept_[r * m + c] * concept_vec[c] +
                 config_.word_leak * mix_word_[r * m + c] * word_vec[c];
      }
      state[r] = config_.decay * state[r] + drive;
      y[r] = std::tanh(state[r] + pos[r]);
    }
    return y;
  };

  for (std::size_t i = 0; i < out.tokens.size(); ++i) {
    auto const& token = out.tokens[i];
    auto const concept_vec = gaussian("concept/" + concept_of(token), m, unit);
    auto const word_vec = gaussian("word/" + token, m, unit);
    std::vector<double> pre(m);
    for (std::size_t c = 0; c < m; ++c) pre[c] = concept_vec[c] + config_.word_offset * word_vec[c];
    out.pre.push_back(std::move(pre));
    out.post.push_back(step(concept_vec, word_vec, i));
  }
  out.eos = step(gaussian("concept/<eos>", m, unit), std::vector<double>(m, 0.0), out.tokens.size());
  return out;
}

std::string ToyModel::model_tag() const {
  return "toy-contextual-v1(seed=" + std::to_string(config_.seed) + ",m=" + std::to_string(config_.pre_dim) +
         ",n=" + std::to_string(config_.post_dim) + ")";
}

std::string ToyModel::respond(std::string_view text) const {
  auto const e = embed(text);
  nlohmann::ordered_json j;
  j["model_tag"] = model_tag();
  j["tokenizer_tag"] = kTokenizerTag;
  j["token_count"] = e.tokens.size();
  j["pre"] = e.pre;
  j["post"] = e.post;
  j["eos"] = e.eos;
  j["normalized"] = false;
  return j.dump();
}

}  // namespace ddrbench::toy
