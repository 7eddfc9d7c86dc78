#include "commands.hpp"

#include <fstream>
#include <iterator>
#include <optional>
#include <ostream>
#include <sstream>

#include "ddrbench/analysis.hpp"
#include "ddrbench/corpus.hpp"
#include "ddrbench/experiment.hpp"
#include "ddrbench/hashing.hpp"
#include "ddrbench/perturbation.hpp"
#include "ddrbench/provider.hpp"

namespace ddrbench::cli {

namespace fs = std::filesystem;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig:
      return kExitConfig;
    case ErrorCode::kTransport:
    case ErrorCode::kMalformedResponse:
    case ErrorCode::kProviderInconsistency:
      return kExitProvider;
    default:
      return kExitData;
  }
}

namespace {

[[noreturn]] void config_error(std::string const& message) { fail(ErrorCode::kConfig, message); }

void require_file(fs::path const& path, char const* flag) {
  if (path.empty()) config_error(std::string("missing required option ") + flag);
  if (!fs::is_regular_file(path)) config_error(std::string(flag) + " '" + path.string() + "' does not exist");
}

void write_file(fs::path const& path, std::string const& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  auto const tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::kIo, "cannot write " + tmp);
    out << content;
    if (!out.flush()) fail(ErrorCode::kIo, "cannot write " + tmp);
  }
  fs::rename(tmp, path);
}

std::string read_file(fs::path const& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

ProviderOptions provider_options(RunConfig const& config) {
  ProviderOptions options;
  options.url = config.provider_url;
  options.bearer_token = config.provider_token;
  options.max_in_flight = config.concurrency;
  return options;
}

fs::path cache_file(RunConfig const& config) {
  fs::path const dir = config.cache_dir.empty() ? config.out / "cache" : config.cache_dir;
  return dir / (sha256_hex(config.provider_url).substr(0, 16) + ".ddrc");
}

ExperimentConfig experiment_config(RunConfig const& config) {
  ExperimentConfig e;
  e.methods = config.methods;
  e.depths = config.depths;
  e.seed = config.seed;
  e.concurrency = config.concurrency;
  e.scoring.centroid_includes_eos = config.centroid_includes_eos;
  e.dataset_sha256 = sha256_file_hex(config.dataset);
  e.lexicon_sha256 = sha256_file_hex(config.lexicon);
  e.vocabulary_sha256 = sha256_file_hex(config.vocab);
  return e;
}

void check_common(RunConfig const& config) {
  if (config.concurrency < 1) config_error("--concurrency must be >= 1");
  if (config.methods.empty()) config_error("--methods must name at least one method");
  if (config.depths.empty()) config_error("--depths must name at least one depth");
  for (int d : config.depths) {
    if (d < kMinDepth || d > kMaxDepth) config_error("--depths entries must be 1, 2 or 3");
  }
}

}  // namespace

int cmd_perturb(RunConfig const& config, std::ostream& log) {
  check_common(config);
  require_file(config.dataset, "--dataset");
  require_file(config.lexicon, "--lexicon");
  require_file(config.vocab, "--vocab");
  auto const excerpts = load_dataset(config.dataset);
  auto const lex = Lexicon::load(config.lexicon, config.vocab);

  std::string lines;
  std::size_t written = 0, skipped = 0;
  for (auto const& src : excerpts) {
    try {
      for (auto const& v : generate_suite(src, lex, excerpt_seed(config.seed, src.id()))) {
        lines += variant_to_json_line(v);
        lines += '\n';
        ++written;
      }
    } catch (Error const& e) {
      if (e.code() != ErrorCode::kInsufficientCoverage) throw;
      ++skipped;
      log << "skipping: " << e.what() << '\n';
    }
  }
  write_file(config.out / "variants.jsonl", lines);
  log << "wrote " << written << " variants for " << excerpts.size() - skipped << " excerpts ("
      << skipped << " skipped) to " << (config.out / "variants.jsonl").string() << '\n';
  return kExitOk;
}

int cmd_embed(RunConfig const& config, std::ostream& log) {
  check_common(config);
  require_file(config.dataset, "--dataset");
  if (config.provider_url.empty()) config_error("embed needs --provider-url");
  if (!config.corpus.empty()) config_error("embed writes <out>/corpus.ddrc; --corpus is not accepted");
  bool const with_variants = !config.lexicon.empty() || !config.vocab.empty();
  if (with_variants) {
    require_file(config.lexicon, "--lexicon");
    require_file(config.vocab, "--vocab");
  }
  auto const excerpts = load_dataset(config.dataset);

  ProviderClient client(provider_options(config));
  std::optional<CachedSource> cache;
  if (!config.no_cache) cache.emplace(client, cache_file(config));
  EmbeddingSource& upstream = cache ? static_cast<EmbeddingSource&>(*cache) : client;
  RecordingSource recorder(upstream);

  if (with_variants) {
    // Replays the scoring plan so every variant text scoring will ask for,
    // resamples included, ends up in the corpus.
    auto const lex = Lexicon::load(config.lexicon, config.vocab);
    auto const run = run_experiment(excerpts, lex, recorder, experiment_config(config));
    log << "planned " << run.manifest.planned_cells << " cells, " << run.manifest.failures.size()
        << " failed\n";
  } else {
    for (auto const& src : excerpts) recorder.embed({src.text(), src.id(), std::nullopt});
  }
  if (cache) cache->flush();

  auto const records = recorder.records();
  fs::create_directories(config.out);
  write_corpus(config.out / "corpus.ddrc", records);
  log << "wrote " << records.size() << " records to " << (config.out / "corpus.ddrc").string() << " ("
      << client.requests_sent() << " provider requests";
  if (cache) log << ", " << cache->hits() << " cache hits";
  log << ")\n";
  return kExitOk;
}

int cmd_score(RunConfig const& config, std::ostream& log) {
  check_common(config);
  require_file(config.dataset, "--dataset");
  require_file(config.lexicon, "--lexicon");
  require_file(config.vocab, "--vocab");
  if (config.provider_url.empty() == config.corpus.empty()) {
    config_error("score needs exactly one of --provider-url or --corpus");
  }
  if (!config.corpus.empty()) require_file(config.corpus, "--corpus");

  auto const excerpts = load_dataset(config.dataset);
  auto const lex = Lexicon::load(config.lexicon, config.vocab);
  auto const experiment = experiment_config(config);

  std::optional<CorpusSource> corpus;
  std::optional<ProviderClient> client;
  std::optional<CachedSource> cache;
  EmbeddingSource* source = nullptr;
  if (!config.corpus.empty()) {
    source = &corpus.emplace(read_corpus(config.corpus));
  } else {
    source = &client.emplace(provider_options(config));
    if (!config.no_cache) source = &cache.emplace(*client, cache_file(config));
  }

  auto const scores_path = config.out / "scores.csv";
  auto const manifest_path = config.out / "manifest.json";
  RunResult result;
  if (config.resume && fs::exists(scores_path) && fs::exists(manifest_path)) {
    auto const previous = manifest_from_json(read_file(manifest_path));
    std::istringstream scores(read_file(scores_path));
    auto partial = read_scores_csv(scores);
    log << "resuming with " << partial.size() << " existing records\n";
    result = resume_run(excerpts, lex, *source, experiment, previous, std::move(partial));
  } else {
    result = run_experiment(excerpts, lex, *source, experiment);
  }
  if (cache) cache->flush();

  std::ostringstream csv;
  write_scores_csv(csv, result.records);
  write_file(scores_path, csv.str());
  write_file(manifest_path, manifest_to_json(result.manifest));

  auto const& m = result.manifest;
  log << "wrote " << result.records.size() << " score records (" << m.completed_cells << "/"
      << m.planned_cells << " cells, " << m.failures.size() << " failed) to " << scores_path.string()
      << '\n';
  if (m.failure_fraction() > kMaxFailureFraction) {
    log << "error: " << m.failures.size() << " of " << m.planned_cells
        << " cells failed, above the 10% threshold\n";
    return kExitExcessFailures;
  }
  return kExitOk;
}

int cmd_analyze(RunConfig const& config, std::ostream& log) {
  auto const scores_path = config.out / "scores.csv";
  auto const manifest_path = config.out / "manifest.json";
  require_file(scores_path, "scores file (<out>/scores.csv)");
  require_file(manifest_path, "manifest (<out>/manifest.json)");

  auto const manifest_text = read_file(manifest_path);
  auto const manifest = manifest_from_json(manifest_text);
  auto const manifest_hash = sha256_hex(manifest_text);
  std::istringstream scores(read_file(scores_path));
  auto const records = read_scores_csv(scores);

  auto const report = build_report(records, manifest.methods, manifest.depths, manifest_hash);
  write_file(config.out / "report.json", report_to_json(report));
  std::ostringstream ecdf_csv, scatter_csv, reference_csv;
  write_ecdf_csv(ecdf_csv, records, manifest_hash);
  write_scatter_csv(scatter_csv, records, manifest_hash);
  write_reference_line_csv(reference_csv, records, manifest_hash);
  write_file(config.out / "ecdf.csv", ecdf_csv.str());
  write_file(config.out / "scatter.csv", scatter_csv.str());
  write_file(config.out / "reference_line.csv", reference_csv.str());

  for (auto const& s : report.summaries) {
    log << to_string(s.method) << " depth " << s.depth << ": r=";
    if (s.pearson_r) {
      log << format_double(*s.pearson_r);
    } else {
      log << "undefined";
    }
    log << " emd=" << format_double(s.emd_separation) << " n=" << s.n_pairs << '\n';
  }
  for (auto const& missing : report.missing_cells) log << "missing cell: " << missing << '\n';
  return kExitOk;
}

int cmd_stats(RunConfig const& config, std::ostream& log) {
  require_file(config.dataset, "--dataset");
  if (!(config.bin_width > 0.0)) config_error("--bin-width must be positive");
  auto const excerpts = load_dataset(config.dataset);
  if (excerpts.empty()) fail(ErrorCode::kEmptyInput, "dataset has no excerpts");
  auto const stats = corpus_stats(excerpts);
  std::ostringstream stats_csv, histogram_csv;
  write_stats_csv(stats_csv, stats);
  write_histogram_csv(histogram_csv, histogram_export(excerpts, config.bin_width));
  write_file(config.out / "stats.csv", stats_csv.str());
  write_file(config.out / "histogram.csv", histogram_csv.str());
  log << "excerpts=" << stats.count << " mean=" << format_double(stats.mean)
      << " median=" << format_double(stats.median) << " min=" << stats.min << " max=" << stats.max
      << " std(" << kStdConvention << ")=" << format_double(stats.stddev) << '\n';
  return kExitOk;
}

}  // namespace ddrbench::cli
