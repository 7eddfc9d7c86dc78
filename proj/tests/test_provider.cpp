#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "ddrbench/error.hpp"
#include "ddrbench/hashing.hpp"
#include "ddrbench/provider.hpp"
#include "httplib.h"
#include "support/toy_source.hpp"
#include "toy_server.hpp"

using namespace ddrbench;
using namespace std::chrono_literals;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (Error const& e) {
    return e.code();
  }
  return ErrorCode::kInternal;
}

std::string const kThreeTokens = R"({"model_tag":"stub","tokenizer_tag":"ws","token_count":3,
  "pre":[[1,0],[0,1],[1,1]],"post":[[1,0,0],[0,1,0],[0,0,1]],"eos":[0.5,0.5,0.5],"normalized":false})";

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("ddrbench-test-" + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

ProviderOptions fast(std::string url) {
  ProviderOptions o;
  o.url = std::move(url);
  o.initial_backoff = 5ms;
  o.timeout = 5s;
  return o;
}

toy::ToyModel const& model() {
  static toy::ToyModel const m(toy::ToyModelConfig{}, nullptr);
  return m;
}

}  // namespace

TEST(ProviderResponse, FixedThreeTokenResponse) {
  auto const rec = parse_provider_response(kThreeTokens, "a b c", "t1");
  EXPECT_EQ(rec.token_count, 3u);
  EXPECT_EQ(rec.pre_dim, 2u);
  EXPECT_EQ(rec.post_dim, 3u);
  EXPECT_EQ(rec.model_tag, "stub");
  EXPECT_EQ(rec.text_hash, sha256("a b c"));
  EXPECT_FALSE(rec.variant.has_value());
}

TEST(ProviderResponse, MismatchedLengthsNameBoth) {
  std::string body = kThreeTokens;
  body.replace(body.find(",[0,0,1]"), 8, "");
  try {
    parse_provider_response(body, "a b c", "t1");
    FAIL();
  } catch (Error const& e) {
    EXPECT_EQ(e.code(), ErrorCode::kProviderInconsistency);
    EXPECT_NE(std::string(e.what()).find("3 pre rows but 2 post rows"), std::string::npos) << e.what();
  }
}

TEST(ProviderResponse, Malformed) {
  EXPECT_EQ(code_of([] { parse_provider_response("nope", "x", "t"); }), ErrorCode::kMalformedResponse);
  EXPECT_EQ(code_of([] { parse_provider_response("[]", "x", "t"); }), ErrorCode::kMalformedResponse);
  std::string no_tag = kThreeTokens;
  no_tag.replace(no_tag.find("\"stub\""), 6, "\"\"");
  EXPECT_EQ(code_of([&] { parse_provider_response(no_tag, "x", "t"); }), ErrorCode::kMalformedResponse);
  std::string wrong_count = kThreeTokens;
  wrong_count.replace(wrong_count.find("\"token_count\":3"), 15, "\"token_count\":4");
  EXPECT_EQ(code_of([&] { parse_provider_response(wrong_count, "x", "t"); }), ErrorCode::kProviderInconsistency);
  std::string short_eos = kThreeTokens;
  short_eos.replace(short_eos.find("[0.5,0.5,0.5]"), 13, "[0.5]");
  EXPECT_EQ(code_of([&] { parse_provider_response(short_eos, "x", "t"); }), ErrorCode::kProviderInconsistency);
}

TEST(ProviderRequest, Body) { EXPECT_EQ(make_provider_request("a \"b\""), R"({"text":"a \"b\""})"); }

TEST(ToyModel, TokenizerAndLookupIdentity) {
  auto const tokens = model().tokenize("Police treasure good, extraordinary relations.");
  EXPECT_EQ(tokens, (std::vector<std::string>{"police", "treasure", "good", ",", "extrao", "##rdinary", "relations",
                                              "."}));
  auto const a = model().embed("good dogs");
  auto const b = model().embed("the good");
  EXPECT_EQ(a.pre[0], b.pre[1]);
  EXPECT_NE(a.post[0], b.post[1]);
  EXPECT_EQ(a.eos.size(), 48u);
}

TEST(ToyModel, SynonymsShareConcept) {
  std::istringstream syn("good\tright\n"), voc;
  auto const lex = Lexicon::parse(syn, voc);
  toy::ToyModel const with(toy::ToyModelConfig{}, &lex);
  auto const a = with.embed("good"), b = with.embed("right"), c = with.embed("blue");
  auto dot = [](auto const& u, auto const& v) {
    double s = 0, nu = 0, nv = 0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i], nu += u[i] * u[i], nv += v[i] * v[i];
    return s / std::sqrt(nu * nv);
  };
  EXPECT_GT(dot(a.pre[0], b.pre[0]), 0.4);
  EXPECT_GT(dot(a.post[0], b.post[0]), dot(a.post[0], c.post[0]));
}

TEST(ProviderClient, FetchesFromServer) {
  toy::ToyServer server(model());
  ProviderClient client(fast(server.url()));
  auto const rec = client.embed({"Hello world.", "h", std::nullopt});
  EXPECT_EQ(rec.token_count, 3u);
  EXPECT_EQ(rec.model_tag, model().model_tag());
  EXPECT_EQ(server.requests(), 1u);
}

TEST(ProviderClient, RetriesServerErrorsThenGivesUp) {
  toy::ToyServer server(model(), 0, toy::Fault::kServiceUnavailable);
  ProviderClient client(fast(server.url()));
  try {
    client.embed({"text", "t", std::nullopt});
    FAIL();
  } catch (Error const& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTransport);
    EXPECT_NE(std::string(e.what()).find("after 3 attempts"), std::string::npos) << e.what();
  }
  EXPECT_EQ(server.requests(), 3u);
}

TEST(ProviderClient, UnreachableIsTransportError) {
  int port;
  {
    toy::ToyServer probe(model());
    port = probe.port();
  }
  ProviderClient client(fast("http://127.0.0.1:" + std::to_string(port) + "/embed"));
  EXPECT_EQ(code_of([&] { client.embed({"text", "t", std::nullopt}); }), ErrorCode::kTransport);
  EXPECT_EQ(client.requests_sent(), 3u);
}

TEST(ProviderClient, MalformedPayloadIsNotRetried) {
  toy::ToyServer server(model(), 0, toy::Fault::kGarbage);
  ProviderClient client(fast(server.url()));
  EXPECT_EQ(code_of([&] { client.embed({"text", "t", std::nullopt}); }), ErrorCode::kMalformedResponse);
  EXPECT_EQ(server.requests(), 1u);
}

TEST(ProviderClient, InconsistentShapesAreHardErrors) {
  toy::ToyServer server(model(), 0, toy::Fault::kMismatchedLengths);
  ProviderClient client(fast(server.url()));
  EXPECT_EQ(code_of([&] { client.embed({"one two three", "t", std::nullopt}); }),
            ErrorCode::kProviderInconsistency);
  EXPECT_EQ(server.requests(), 1u);
}

TEST(ProviderClient, BadUrlIsConfigError) {
  EXPECT_EQ(code_of([] { ProviderClient(fast("localhost:8080")); }), ErrorCode::kConfig);
}

TEST(ToyServer, RejectsBadRequests) {
  toy::ToyServer server(model());
  httplib::Client http("http://127.0.0.1:" + std::to_string(server.port()));
  EXPECT_EQ(http.Post("/embed", "{}", "application/json")->status, 400);
  EXPECT_EQ(http.Post("/embed", "not json", "application/json")->status, 400);
  EXPECT_EQ(http.Post("/embed", R"({"text":""})", "application/json")->status, 400);
  EXPECT_EQ(http.Post("/embed", R"({"text":"fine"})", "application/json")->status, 200);
}

TEST(CachedSource, WarmCacheMakesNoCalls) {
  TempDir dir;
  auto const file = dir.path / "cache.ddrc";
  oracle::ToySource toy(model());
  {
    CachedSource cache(toy, file);
    cache.embed({"first text", "a", std::nullopt});
    cache.embed({"second text", "b", std::nullopt});
    cache.embed({"first text", "c", std::nullopt});
    EXPECT_EQ(cache.hits(), 1u);
  }
  EXPECT_EQ(toy.calls(), 2u);
  CachedSource warm(toy, file);
  auto const rec = warm.embed({"second text", "renamed", VariantMeta{1, SubstitutionKind::kRandom, {1}}});
  EXPECT_EQ(toy.calls(), 2u);
  EXPECT_EQ(rec.text_id, "renamed");
  EXPECT_EQ(rec.variant->replaced_positions, std::vector<std::size_t>{1});
}

TEST(CachedSource, ModelChangeDiscardsEntries) {
  TempDir dir;
  auto const file = dir.path / "cache.ddrc";
  oracle::ToySource first(model());
  { CachedSource(first, file).embed({"alpha", "a", std::nullopt}); }
  toy::ToyModelConfig other_config;
  other_config.seed = 1;
  toy::ToyModel const other(other_config, nullptr);
  oracle::ToySource second(other);
  CachedSource cache(second, file);
  cache.embed({"beta", "b", std::nullopt});
  cache.flush();
  EXPECT_EQ(read_corpus(file).size(), 1u);
  EXPECT_EQ(read_corpus(file)[0].model_tag, other.model_tag());
}

TEST(CorpusSource, LooksUpByText) {
  oracle::ToySource toy(model());
  CorpusSource corpus({toy.embed({"known", "k", std::nullopt})});
  EXPECT_EQ(corpus.embed({"known", "other-id", std::nullopt}).text_id, "other-id");
  EXPECT_EQ(code_of([&] { corpus.embed({"unknown", "u", std::nullopt}); }), ErrorCode::kNotFound);
}

TEST(RecordingSource, KeepsSmallestIdPerText) {
  oracle::ToySource toy(model());
  RecordingSource rec(toy);
  rec.embed({"same", "z", std::nullopt});
  rec.embed({"same", "a", std::nullopt});
  rec.embed({"different", "m", std::nullopt});
  auto const records = rec.records();
  ASSERT_EQ(records.size(), 2u);
  for (auto const& r : records) EXPECT_TRUE(r.text_id == "a" || r.text_id == "m");
}
