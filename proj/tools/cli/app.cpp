#include <fstream>
#include <map>
#include <ostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "ddrbench/text.hpp"

namespace ddrbench::cli {

namespace {

struct RawOptions {
  std::string dataset, lexicon, vocab, provider_url, provider_token, corpus, cache_dir, out = "ddrbench-out";
  std::uint64_t seed = 0;
  std::vector<std::string> methods{"ddr", "centroid_cosine", "eos_cosine"};
  std::vector<int> depths{1, 2, 3};
  int concurrency = 4;
  double bin_width = 5.0;
  bool no_cache = false, resume = false, centroid_includes_eos = false;
};

std::string trim(std::string_view s) {
  auto const b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto const e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// `key = value` lines; '#' starts a comment. Keys are long flag names.
std::map<std::string, std::string> read_config_file(std::string const& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kConfig, "cannot read config file '" + path + "'");
  std::map<std::string, std::string> entries;
  std::string line;
  for (int n = 1; std::getline(in, line); ++n) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto const eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorCode::kConfig, path + ":" + std::to_string(n) + ": expected 'key = value'");
    }
    entries[trim(std::string_view(line).substr(0, eq))] = trim(std::string_view(line).substr(eq + 1));
  }
  return entries;
}

// Config-file values fill only options that neither a flag nor the
// environment has set.
void apply_config_file(CLI::App& app, std::string const& path) {
  for (auto const& [key, value] : read_config_file(path)) {
    CLI::Option* opt = nullptr;
    try {
      opt = app.get_option("--" + key);
    } catch (CLI::OptionNotFound const&) {
      fail(ErrorCode::kConfig, "unknown key '" + key + "' in config file '" + path + "'");
    }
    if (opt->count() > 0) continue;
    try {
      if (opt->get_type_size() == 0) {
        opt->add_result(value == "true" || value == "1" ? "1" : "0");
      } else if (opt->get_delimiter() != '\0') {
        for (auto const& piece : CLI::detail::split(value, opt->get_delimiter())) opt->add_result(trim(piece));
      } else {
        opt->add_result(value);
      }
      opt->run_callback();
    } catch (CLI::Error const& e) {
      fail(ErrorCode::kConfig, "config file key '" + key + "': " + e.what());
    }
  }
}

RunConfig to_run_config(RawOptions const& raw) {
  RunConfig c;
  c.dataset = raw.dataset;
  c.lexicon = raw.lexicon;
  c.vocab = raw.vocab;
  c.provider_url = raw.provider_url;
  c.provider_token = raw.provider_token;
  c.corpus = raw.corpus;
  c.cache_dir = raw.cache_dir;
  c.no_cache = raw.no_cache;
  c.seed = raw.seed;
  c.methods.clear();
  for (auto const& name : raw.methods) {
    auto const m = parse_method(text::to_lower(name));
    if (!m) fail(ErrorCode::kConfig, "unknown method '" + name + "' (expected ddr, centroid_cosine, eos_cosine)");
    if (std::find(c.methods.begin(), c.methods.end(), *m) == c.methods.end()) c.methods.push_back(*m);
  }
  c.depths = raw.depths;
  std::sort(c.depths.begin(), c.depths.end());
  c.depths.erase(std::unique(c.depths.begin(), c.depths.end()), c.depths.end());
  c.out = raw.out;
  c.concurrency = raw.concurrency;
  c.bin_width = raw.bin_width;
  c.resume = raw.resume;
  c.centroid_includes_eos = raw.centroid_includes_eos;
  return c;
}

}  // namespace

int run_cli(int argc, char const* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Distance-to-distance ratio benchmark for contextual embeddings", "ddrbench"};
  app.require_subcommand(1);
  RawOptions raw;
  std::string config_path;

  auto env = [](char const* name) { return std::string("DDRBENCH_") + name; };
  app.add_option("--dataset", raw.dataset, "JSONL dataset of {\"id\",\"text\"} lines")->envname(env("DATASET"));
  app.add_option("--lexicon", raw.lexicon, "synonym lexicon (head<TAB>syn,syn,...)")->envname(env("LEXICON"));
  app.add_option("--vocab", raw.vocab, "vocabulary for random substitutions, one word per line")
      ->envname(env("VOCAB"));
  app.add_option("--provider-url", raw.provider_url, "embedding provider endpoint")->envname(env("PROVIDER_URL"));
  app.add_option("--provider-token", raw.provider_token, "bearer token for the provider")
      ->envname(env("PROVIDER_TOKEN"));
  app.add_option("--corpus", raw.corpus, "prebuilt embedding corpus")->envname(env("CORPUS"));
  app.add_option("--cache-dir", raw.cache_dir, "embedding cache directory (default <out>/cache)")
      ->envname(env("CACHE_DIR"));
  app.add_flag("--no-cache", raw.no_cache, "do not read or write the embedding cache")->envname(env("NO_CACHE"));
  app.add_option("--seed", raw.seed, "run seed")->envname(env("SEED"));
  app.add_option("--methods", raw.methods, "comma-separated scoring methods")
      ->delimiter(',')
      ->envname(env("METHODS"));
  app.add_option("--depths", raw.depths, "comma-separated substitution depths")
      ->delimiter(',')
      ->envname(env("DEPTHS"));
  app.add_option("--out", raw.out, "output directory")->envname(env("OUT"));
  app.add_option("--concurrency", raw.concurrency, "parallel excerpts / in-flight provider requests")
      ->envname(env("CONCURRENCY"));
  app.add_option("--bin-width", raw.bin_width, "histogram bin width in words")->envname(env("BIN_WIDTH"));
  app.add_flag("--resume", raw.resume, "complete a partial score run in --out")->envname(env("RESUME"));
  app.add_flag("--centroid-include-eos", raw.centroid_includes_eos, "average the EOS vector into the centroid")
      ->envname(env("CENTROID_INCLUDE_EOS"));
  app.add_option("--config", config_path, "file of `key = value` defaults")->envname(env("CONFIG"));

  using Command = int (*)(RunConfig const&, std::ostream&);
  std::vector<std::pair<CLI::App*, Command>> commands{
      {app.add_subcommand("perturb", "write the variant suite of every excerpt"), cmd_perturb},
      {app.add_subcommand("embed", "fetch embeddings into a corpus file"), cmd_embed},
      {app.add_subcommand("score", "score every variant with every method"), cmd_score},
      {app.add_subcommand("analyze", "summarize scores and export plot data"), cmd_analyze},
      {app.add_subcommand("stats", "word-count statistics of the dataset"), cmd_stats},
  };
  for (auto& [sub, fn] : commands) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (CLI::ParseError const& e) {
    int const code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (!config_path.empty()) apply_config_file(app, config_path);
    auto const config = to_run_config(raw);
    for (auto& [sub, fn] : commands) {
      if (sub->parsed()) return fn(config, err);
    }
    return kExitConfig;
  } catch (Error const& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (std::filesystem::filesystem_error const& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
}

}  // namespace ddrbench::cli
