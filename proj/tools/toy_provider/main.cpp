// Serves the toy model over the provider protocol.
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "ddrbench/error.hpp"
#include "toy_server.hpp"

namespace {
ddrbench::toy::ToyServer* g_server = nullptr;
void on_signal(int) {
  if (g_server != nullptr) g_server->stop();
}
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic toy embedding provider"};
  std::string lexicon_path;
  int port = 8077;
  std::uint64_t seed = ddrbench::toy::ToyModelConfig{}.seed;
  app.add_option("--lexicon", lexicon_path, "Synonym file; listed synonyms share a concept")->check(CLI::ExistingFile);
  app.add_option("--port", port, "Port on 127.0.0.1 (0 picks a free one)");
  app.add_option("--seed", seed, "Model weight seed");
  CLI11_PARSE(app, argc, argv);

  try {
    std::optional<ddrbench::Lexicon> lex;
    if (!lexicon_path.empty()) {
      std::ifstream syn(lexicon_path);
      std::istringstream no_vocab;
      lex = ddrbench::Lexicon::parse(syn, no_vocab);
    }
    ddrbench::toy::ToyModelConfig config;
    config.seed = seed;
    ddrbench::toy::ToyModel model(config, lex ? &*lex : nullptr);
    ddrbench::toy::ToyServer server(model, port);
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cout << "serving " << model.model_tag() << " at " << server.url() << std::endl;
    server.wait();
  } catch (ddrbench::Error const& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
