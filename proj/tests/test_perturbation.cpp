#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "ddrbench/corpus.hpp"
#include "ddrbench/error.hpp"
#include "ddrbench/perturbation.hpp"
#include "ddrbench/text.hpp"

using namespace ddrbench;

namespace {

SourceExcerpt police() {
  return {"police",
          "Police shudder at this prospect. Police treasure good relations with the business community."};
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (Error const& e) {
    return e.code();
  }
  return ErrorCode::kInternal;
}

Lexicon fixture_lexicon() {
  return Lexicon::load(DDRBENCH_FIXTURE_DIR "/lexicon.tsv", DDRBENCH_FIXTURE_DIR "/vocab.txt");
}

}  // namespace

TEST(SourceExcerpt, SplitsOnWhitespace) {
  SourceExcerpt const s("x", "  one\ttwo\n three  ");
  EXPECT_EQ(s.word_count(), 3u);
  EXPECT_EQ(s.words()[2], "three");
  EXPECT_THROW(SourceExcerpt("x", "   "), Error);
}

TEST(Text, WordPartsAndCase) {
  auto const p = text::split_word("\"Good,\"");
  EXPECT_EQ(p.prefix, "\"");
  EXPECT_EQ(p.core, "Good");
  EXPECT_EQ(p.suffix, ",\"");
  EXPECT_EQ(text::match_case("Good", "right"), "Right");
  EXPECT_EQ(text::match_case("GOOD", "right"), "RIGHT");
  EXPECT_EQ(text::match_case("good", "Right"), "right");
}

TEST(Lexicon, DropsHeadwordAndDuplicates) {
  std::istringstream syn("good\tright,Good,right,fine\n\n# comment\nbad\tpoor\n"), voc("than\nThe\nthan\n");
  auto const lex = Lexicon::parse(syn, voc);
  EXPECT_EQ(*lex.synonyms_of("GOOD"), (std::vector<std::string>{"right", "fine"}));
  EXPECT_EQ(lex.vocabulary(), (std::vector<std::string>{"than", "the"}));
  EXPECT_EQ(lex.synonyms_of("missing"), nullptr);
}

TEST(Lexicon, RejectsMalformedLines) {
  std::istringstream no_tab("good right\n"), voc("");
  EXPECT_EQ(code_of([&] { Lexicon::parse(no_tab, voc); }), ErrorCode::kFormat);
  std::istringstream phrase("good\tvery nice\n"), voc2("");
  EXPECT_EQ(code_of([&] { Lexicon::parse(phrase, voc2); }), ErrorCode::kFormat);
}

TEST(GenerateVariant, SynonymExampleSentence) {
  Lexicon const lex({{"good", {"right"}}}, {"than"});
  auto const v = generate_variant(police(), 1, SubstitutionKind::kSynonym, lex, 99);
  EXPECT_EQ(v.text, "Police shudder at this prospect. Police treasure right relations with the business community.");
  EXPECT_EQ(v.replaced_positions, (std::vector<std::size_t>{7}));
  EXPECT_EQ(v.replacements.at(7), "right");
}

TEST(GenerateVariant, RandomExampleSentence) {
  Lexicon const lex({{"good", {"right"}}}, {"than"});
  auto const v = generate_variant(police(), 1, SubstitutionKind::kRandom, lex, 99);
  EXPECT_EQ(v.text, "Police shudder at this prospect. Police treasure than relations with the business community.");
}

TEST(GenerateVariant, PunctuationAndCaseSurvive) {
  SourceExcerpt const s("s", "\"Good,\" she said.");
  Lexicon const lex({{"good", {"right"}}, {"said", {"stated"}}}, {});
  auto const v = generate_variant(s, 2, SubstitutionKind::kSynonym, lex, 3);
  EXPECT_EQ(v.text, "\"Right,\" she stated.");
}

TEST(GenerateVariant, Deterministic) {
  auto const lex = fixture_lexicon();
  for (auto kind : kAllKinds) {
    EXPECT_EQ(generate_variant(police(), 3, kind, lex, 1234), generate_variant(police(), 3, kind, lex, 1234));
  }
}

TEST(GenerateVariant, KindsShareReplacedPositions) {
  auto const lex = fixture_lexicon();
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    EXPECT_EQ(generate_variant(police(), 2, SubstitutionKind::kSynonym, lex, seed).replaced_positions,
              generate_variant(police(), 2, SubstitutionKind::kRandom, lex, seed).replaced_positions);
  }
}

TEST(GenerateVariant, Errors) {
  Lexicon const lex({{"good", {"right"}}}, {});
  try {
    generate_variant(police(), 2, SubstitutionKind::kSynonym, lex, 1);
    FAIL();
  } catch (Error const& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientCoverage);
    EXPECT_NE(std::string(e.what()).find("0,1,2"), std::string::npos) << e.what();
  }
  EXPECT_EQ(code_of([&] { generate_variant(police(), 1, SubstitutionKind::kRandom, lex, 1); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { generate_variant(police(), 4, SubstitutionKind::kRandom, lex, 1); }),
            ErrorCode::kInvalidArgument);
}

TEST(GenerateVariant, RandomDrawsCoverVocabulary) {
  std::vector<std::string> vocab;
  for (int i = 0; i < 100; ++i) vocab.push_back("w" + std::to_string(i));
  Lexicon const lex({}, vocab);
  SourceExcerpt const s("s", "alpha");
  std::set<std::string> seen;
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    seen.insert(generate_variant(s, 1, SubstitutionKind::kRandom, lex, seed).replacements.at(0));
  }
  EXPECT_EQ(seen.size(), 100u);
}

TEST(GenerateVariant, InvariantsOverFixture) {
  auto const lex = fixture_lexicon();
  for (auto const& src : load_dataset(DDRBENCH_FIXTURE_DIR "/dataset.jsonl")) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      for (int depth = 1; depth <= 3; ++depth) {
        for (auto kind : kAllKinds) {
          Variant v;
          try {
            v = generate_variant(src, depth, kind, lex, seed);
          } catch (Error const& e) {
            ASSERT_EQ(e.code(), ErrorCode::kInsufficientCoverage);
            continue;
          }
          SourceExcerpt const out("v", v.text);
          ASSERT_EQ(out.word_count(), src.word_count());
          ASSERT_EQ(v.replaced_positions.size(), static_cast<std::size_t>(depth));
          for (std::size_t i = 0; i < src.word_count(); ++i) {
            bool const replaced = v.replacements.count(i) > 0;
            EXPECT_EQ(replaced, out.words()[i] != src.words()[i]) << src.id() << " position " << i;
          }
          for (auto const& [pos, word] : v.replacements) {
            auto const original = text::split_word(src.words()[pos]).core;
            EXPECT_FALSE(text::iequals(word, original));
            if (kind == SubstitutionKind::kSynonym) {
              auto const& cands = *lex.synonyms_of(original);
              EXPECT_NE(std::find(cands.begin(), cands.end(), text::to_lower(word)), cands.end());
            }
          }
        }
      }
    }
  }
}

TEST(GenerateSuite, SixVariantsInOrder) {
  auto const lex = fixture_lexicon();
  auto const suite = generate_suite(police(), lex, 5);
  ASSERT_EQ(suite.size(), 6u);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(suite[i].depth, static_cast<int>(i / 2 + 1));
    EXPECT_EQ(suite[i].kind, i % 2 == 0 ? SubstitutionKind::kSynonym : SubstitutionKind::kRandom);
  }
  auto const again = generate_suite(police(), lex, 5);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(variant_to_json_line(suite[i]), variant_to_json_line(again[i]));
}

TEST(GenerateSuite, FailureNamesTheCell) {
  Lexicon const lex({{"good", {"right"}}}, {"than"});
  try {
    generate_suite(police(), lex, 5);
    FAIL();
  } catch (Error const& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientCoverage);
    EXPECT_NE(std::string(e.what()).find("depth 2, synonym"), std::string::npos) << e.what();
  }
}

TEST(Seeds, IndependentOfDatasetOrder) {
  EXPECT_EQ(excerpt_seed(7, "ex001"), excerpt_seed(7, "ex001"));
  EXPECT_NE(excerpt_seed(7, "ex001"), excerpt_seed(7, "ex002"));
  EXPECT_NE(variant_seed(1, 1, 0), variant_seed(1, 1, 1));
  EXPECT_NE(variant_seed(1, 1, 0), variant_seed(1, 2, 0));
}

TEST(ValidateTokenLength, Predicate) {
  EXPECT_TRUE(validate_token_length(46, 46));
  EXPECT_FALSE(validate_token_length(46, 47));
}

TEST(VariantJson, FieldOrder) {
  Lexicon const lex({{"good", {"right"}}}, {"than"});
  auto const line = variant_to_json_line(generate_variant(police(), 1, SubstitutionKind::kSynonym, lex, 99));
  EXPECT_EQ(line.rfind("{\"source_id\":\"police\",\"depth\":1,\"kind\":\"synonym\",\"replaced_positions\":[7],"
                       "\"replacements\":{\"7\":\"right\"},",
                       0),
            0u)
      << line;
}
