#include "ddrbench/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <istream>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "ddrbench/error.hpp"
#include "ddrbench/random.hpp"
#include "json.hpp"

namespace ddrbench {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string cell_key(int depth, SubstitutionKind kind) {
  return "d" + std::to_string(depth) + "-" + std::string(to_string(kind));
}

bool canonical_less(ScoreRecord const& a, ScoreRecord const& b) {
  return std::tuple(a.source_id, a.depth, static_cast<int>(a.kind), static_cast<int>(a.method)) <
         std::tuple(b.source_id, b.depth, static_cast<int>(b.kind), static_cast<int>(b.method));
}

double RunManifest::failure_fraction() const {
  return planned_cells == 0 ? 0.0
                            : static_cast<double>(failures.size()) / static_cast<double>(planned_cells);
}

namespace {

using Cell = std::tuple<std::string, int, SubstitutionKind>;

bool is_fatal(ErrorCode code) {
  switch (code) {
    case ErrorCode::kTransport:
    case ErrorCode::kMalformedResponse:
    case ErrorCode::kProviderInconsistency:
    case ErrorCode::kIo:
    case ErrorCode::kInternal:
      return true;
    default:
      return false;
  }
}

struct ExcerptOutcome {
  std::vector<ScoreRecord> records;
  std::vector<CellFailure> failures;
  std::map<std::string, int> resamples;
  std::string model_tag;
};

ExcerptOutcome process_excerpt(SourceExcerpt const& src, std::vector<std::pair<int, SubstitutionKind>> const& cells,
                               Lexicon const& lex, EmbeddingSource& source,
                               ExperimentConfig const& config) {
  ExcerptOutcome out;
  auto fail_all = [&](std::string const& reason) {
    for (auto const& [depth, kind] : cells) out.failures.push_back({src.id(), depth, kind, reason});
  };

  std::optional<CorpusRecord> original;
  std::optional<EmbeddingPair> original_pair;
  try {
    original = source.embed({src.text(), src.id(), std::nullopt});
    original_pair.emplace(original->to_pair());
  } catch (Error const& e) {
    if (is_fatal(e.code())) throw;
    fail_all(std::string("original: ") + e.what());
    return out;
  }
  out.model_tag = original->model_tag;

  auto const base_seed = excerpt_seed(config.seed, src.id());
  for (auto const& [depth, kind] : cells) {
    try {
      bool accepted = false;
      for (int attempt = 0; attempt < kResampleBudget && !accepted; ++attempt) {
        auto const seed = variant_seed(base_seed, depth, attempt);
        Variant const v = generate_variant(src, depth, kind, lex, seed);
        auto const rec = source.embed({v.text,
                                       src.id() + "/" + cell_key(depth, kind) + "-a" + std::to_string(attempt),
                                       VariantMeta{depth, kind, v.replaced_positions}});
        if (!validate_token_length(original->token_count, rec.token_count)) {
          ++out.resamples[cell_key(depth, kind)];
          continue;
        }
        auto const pair = rec.to_pair();
        std::vector<ScoreRecord> scored;
        for (Method m : config.methods) {
          scored.push_back({src.id(), m, depth, kind, score(m, *original_pair, pair, config.scoring).value, seed});
        }
        out.records.insert(out.records.end(), scored.begin(), scored.end());
        accepted = true;
      }
      if (!accepted) {
        out.failures.push_back({src.id(), depth, kind,
                                "token length differs from the original in all " +
                                    std::to_string(kResampleBudget) + " attempts"});
      }
    } catch (Error const& e) {
      if (is_fatal(e.code())) throw;
      out.failures.push_back({src.id(), depth, kind, e.what()});
    }
  }
  return out;
}

RunResult run_cells(std::span<SourceExcerpt const> excerpts, Lexicon const& lex, EmbeddingSource& source,
                    ExperimentConfig const& config, std::set<Cell> const& done,
                    std::vector<ScoreRecord> carried_records,
                    std::map<std::string, std::map<std::string, int>> carried_resamples,
                    std::string carried_model_tag) {
  if (excerpts.empty()) fail(ErrorCode::kEmptyInput, "experiment needs at least one excerpt");
  if (config.methods.empty()) fail(ErrorCode::kConfig, "experiment needs at least one method");
  if (config.depths.empty()) fail(ErrorCode::kConfig, "experiment needs at least one depth");
  for (int d : config.depths) {
    if (d < kMinDepth || d > kMaxDepth) fail(ErrorCode::kConfig, "depth " + std::to_string(d) + " outside [1, 3]");
  }

  // Work list: excerpts that still have at least one cell to compute.
  std::vector<std::pair<SourceExcerpt const*, std::vector<std::pair<int, SubstitutionKind>>>> work;
  for (auto const& src : excerpts) {
    std::vector<std::pair<int, SubstitutionKind>> cells;
    for (int depth : config.depths) {
      for (auto kind : kAllKinds) {
        if (!done.contains(Cell{src.id(), depth, kind})) cells.emplace_back(depth, kind);
      }
    }
    if (!cells.empty()) work.emplace_back(&src, std::move(cells));
  }

  std::vector<ExcerptOutcome> outcomes(work.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (!stop.load()) {
      auto const i = next.fetch_add(1);
      if (i >= work.size()) return;
      try {
        outcomes[i] = process_excerpt(*work[i].first, work[i].second, lex, source, config);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        stop = true;
      }
    }
  };
  auto const threads = static_cast<std::size_t>(std::max(1, config.concurrency));
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < std::min(threads, work.size()); ++t) pool.emplace_back(worker);
    worker();
  }
  if (first_error) std::rethrow_exception(first_error);

  RunResult result;
  auto& m = result.manifest;
  m.dataset_sha256 = config.dataset_sha256;
  m.lexicon_sha256 = config.lexicon_sha256;
  m.vocabulary_sha256 = config.vocabulary_sha256;
  m.seed = config.seed;
  m.methods = config.methods;
  m.depths = config.depths;
  m.rng = kRngFamily;
  m.centroid_includes_eos = config.scoring.centroid_includes_eos;
  m.planned_cells = excerpts.size() * config.depths.size() * std::size(kAllKinds);
  m.resamples = std::move(carried_resamples);

  std::set<std::string> model_tags;
  if (!carried_model_tag.empty()) model_tags.insert(carried_model_tag);
  result.records = std::move(carried_records);
  for (auto& o : outcomes) {
    if (!o.model_tag.empty()) model_tags.insert(o.model_tag);
    result.records.insert(result.records.end(), o.records.begin(), o.records.end());
    m.failures.insert(m.failures.end(), o.failures.begin(), o.failures.end());
  }
  for (std::size_t i = 0; i < work.size(); ++i) {
    for (auto const& [key, count] : outcomes[i].resamples) m.resamples[work[i].first->id()][key] = count;
  }
  if (model_tags.size() > 1) {
    fail(ErrorCode::kProviderInconsistency, "run mixes embeddings from several models: '" +
                                                *model_tags.begin() + "' and '" + *model_tags.rbegin() + "'");
  }
  m.model_tag = model_tags.empty() ? std::string() : *model_tags.begin();

  std::sort(result.records.begin(), result.records.end(), canonical_less);
  std::sort(m.failures.begin(), m.failures.end(), [](CellFailure const& a, CellFailure const& b) {
    return std::tuple(a.source_id, a.depth, static_cast<int>(a.kind)) <
           std::tuple(b.source_id, b.depth, static_cast<int>(b.kind));
  });
  m.completed_cells = result.records.size() / config.methods.size();
  return result;
}

}  // namespace

RunResult run_experiment(std::span<SourceExcerpt const> excerpts, Lexicon const& lex,
                         EmbeddingSource& source, ExperimentConfig const& config) {
  return run_cells(excerpts, lex, source, config, {}, {}, {}, {});
}

RunResult resume_run(std::span<SourceExcerpt const> excerpts, Lexicon const& lex,
                     EmbeddingSource& source, ExperimentConfig const& config,
                     RunManifest const& previous, std::vector<ScoreRecord> partial) {
  auto mismatch = [](std::string const& what) {
    fail(ErrorCode::kHashMismatch, "cannot resume: " + what + " differs from the previous run");
  };
  if (previous.dataset_sha256 != config.dataset_sha256) mismatch("dataset");
  if (previous.lexicon_sha256 != config.lexicon_sha256) mismatch("lexicon");
  if (previous.vocabulary_sha256 != config.vocabulary_sha256) mismatch("vocabulary");
  if (previous.seed != config.seed) mismatch("seed");
  if (previous.methods != config.methods) mismatch("method list");
  if (previous.depths != config.depths) mismatch("depth list");
  if (previous.centroid_includes_eos != config.scoring.centroid_includes_eos) mismatch("centroid EOS convention");

  std::set<std::string> ids;
  for (auto const& e : excerpts) ids.insert(e.id());
  std::map<Cell, std::vector<ScoreRecord>> by_cell;
  for (auto& r : partial) {
    if (!ids.contains(r.source_id)) mismatch("source id '" + r.source_id + "'");
    by_cell[Cell{r.source_id, r.depth, r.kind}].push_back(std::move(r));
  }

  std::set<Cell> done;
  std::vector<ScoreRecord> carried;
  std::map<std::string, std::map<std::string, int>> carried_resamples;
  for (auto& [cell, records] : by_cell) {
    std::set<Method> present;
    for (auto const& r : records) present.insert(r.method);
    bool const complete = std::all_of(config.methods.begin(), config.methods.end(),
                                      [&](Method m) { return present.contains(m); }) &&
                          records.size() == config.methods.size();
    if (!complete) continue;
    done.insert(cell);
    carried.insert(carried.end(), records.begin(), records.end());
    auto const& [source_id, depth, kind] = cell;
    if (auto s = previous.resamples.find(source_id); s != previous.resamples.end()) {
      if (auto c = s->second.find(cell_key(depth, kind)); c != s->second.end()) {
        carried_resamples[source_id][c->first] = c->second;
      }
    }
  }
  return run_cells(excerpts, lex, source, config, done, std::move(carried), std::move(carried_resamples),
                   done.empty() ? std::string() : previous.model_tag);
}

// ---------------------------------------------------------------------------

std::string csv_field(std::string const& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

namespace {

std::vector<std::string> split_csv_line(std::string const& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char const c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  return fields;
}

constexpr char kScoresHeader[] = "source_id,method,depth,kind,score,seed";

}  // namespace

void write_scores_csv(std::ostream& out, std::vector<ScoreRecord> records) {
  std::sort(records.begin(), records.end(), canonical_less);
  out << kScoresHeader << '\n';
  for (auto const& r : records) {
    out << csv_field(r.source_id) << ',' << to_string(r.method) << ',' << r.depth << ','
        << to_string(r.kind) << ',' << format_double(r.score) << ',' << r.seed << '\n';
  }
}

std::vector<ScoreRecord> read_scores_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::kFormat, "score file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kScoresHeader) fail(ErrorCode::kFormat, "score file header is '" + line + "'");
  std::vector<ScoreRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto const where = "score file line " + std::to_string(line_no);
    auto const f = split_csv_line(line);
    if (f.size() != 6) fail(ErrorCode::kFormat, where + ": expected 6 fields");
    ScoreRecord r;
    r.source_id = f[0];
    auto const method = parse_method(f[1]);
    auto const kind = parse_kind(f[3]);
    if (!method) fail(ErrorCode::kFormat, where + ": unknown method '" + f[1] + "'");
    if (!kind) fail(ErrorCode::kFormat, where + ": unknown kind '" + f[3] + "'");
    r.method = *method;
    r.kind = *kind;
    try {
      std::size_t used = 0;
      r.depth = std::stoi(f[2], &used);
      if (used != f[2].size()) throw std::invalid_argument("depth");
      r.score = std::stod(f[4], &used);
      if (used != f[4].size()) throw std::invalid_argument("score");
      r.seed = std::stoull(f[5], &used);
      if (used != f[5].size()) throw std::invalid_argument("seed");
    } catch (std::exception const&) {
      fail(ErrorCode::kFormat, where + ": bad numeric field");
    }
    records.push_back(std::move(r));
  }
  return records;
}

std::string manifest_to_json(RunManifest const& m) {
  nlohmann::ordered_json j;
  j["dataset_sha256"] = m.dataset_sha256;
  j["lexicon_sha256"] = m.lexicon_sha256;
  j["vocabulary_sha256"] = m.vocabulary_sha256;
  j["model_tag"] = m.model_tag;
  j["seed"] = m.seed;
  auto& methods = j["methods"] = nlohmann::ordered_json::array();
  for (Method x : m.methods) methods.push_back(to_string(x));
  j["depths"] = m.depths;
  j["rng"] = m.rng;
  j["centroid_includes_eos"] = m.centroid_includes_eos;
  j["resample_budget"] = kResampleBudget;
  j["planned_cells"] = m.planned_cells;
  j["completed_cells"] = m.completed_cells;
  j["failure_fraction"] = m.failure_fraction();
  auto& resamples = j["resamples"] = nlohmann::ordered_json::object();
  for (auto const& [source, cells] : m.resamples) {
    auto& entry = resamples[source] = nlohmann::ordered_json::object();
    for (auto const& [key, count] : cells) entry[key] = count;
  }
  auto& failures = j["failures"] = nlohmann::ordered_json::array();
  for (auto const& f : m.failures) {
    failures.push_back({{"source_id", f.source_id},
                        {"depth", f.depth},
                        {"kind", to_string(f.kind)},
                        {"reason", f.reason}});
  }
  return j.dump(2) + "\n";
}

RunManifest manifest_from_json(std::string const& text) {
  RunManifest m;
  try {
    auto const j = nlohmann::json::parse(text);
    m.dataset_sha256 = j.at("dataset_sha256").get<std::string>();
    m.lexicon_sha256 = j.at("lexicon_sha256").get<std::string>();
    m.vocabulary_sha256 = j.at("vocabulary_sha256").get<std::string>();
    m.model_tag = j.at("model_tag").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    for (auto const& name : j.at("methods")) {
      auto const method = parse_method(name.get<std::string>());
      if (!method) fail(ErrorCode::kFormat, "manifest lists unknown method " + name.dump());
      m.methods.push_back(*method);
    }
    m.depths = j.at("depths").get<std::vector<int>>();
    m.rng = j.at("rng").get<std::string>();
    m.centroid_includes_eos = j.at("centroid_includes_eos").get<bool>();
    m.planned_cells = j.at("planned_cells").get<std::size_t>();
    m.completed_cells = j.at("completed_cells").get<std::size_t>();
    for (auto const& [source, cells] : j.at("resamples").items()) {
      for (auto const& [key, count] : cells.items()) m.resamples[source][key] = count.get<int>();
    }
    for (auto const& f : j.at("failures")) {
      auto const kind = parse_kind(f.at("kind").get<std::string>());
      if (!kind) fail(ErrorCode::kFormat, "manifest failure has unknown kind");
      m.failures.push_back({f.at("source_id").get<std::string>(), f.at("depth").get<int>(), *kind,
                            f.at("reason").get<std::string>()});
    }
  } catch (nlohmann::json::exception const& e) {
    fail(ErrorCode::kFormat, std::string("bad run manifest: ") + e.what());
  }
  return m;
}

}  // namespace ddrbench
