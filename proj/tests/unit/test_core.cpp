#include <gtest/gtest.h>

#include <fstream>

#include "ricl/core/corpus_io.hpp"
#include "ricl/core/rng.hpp"
#include "ricl/core/tokenizer.hpp"
#include "support/test_support.hpp"

using namespace ricl;
using ricl::testing::TempDir;

namespace {

ScenarioRecord rec(std::string id, Subset subset = Subset::vis, Split split = Split::db) {
  ScenarioRecord r;
  r.id = std::move(id);
  r.subset = subset;
  r.split = split;
  r.caption = "caption of " + r.id;
  r.outcome = "outcome of " + r.id;
  r.image_ref = "images/" + r.id + ".png";
  return r;
}

void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream(p, std::ios::binary) << s;
}

const char* kTwoLine =
    R"({"type":"record","id":"a","subset":"vis","split":"db","caption":"red liquid in steak packaging","rationale":"","outcome":"Person cooked the steak.","image_ref":"a.png","categories":[]})"
    "\n"
    R"({"type":"record","id":"b","subset":"lang","split":"test","caption":"a toy","rationale":"recall","outcome":"A child choked.","image_ref":"b.png","categories":["toys"]})"
    "\n";

}  // namespace

TEST(Tokenizer, EmptyAndWhitespace) {
  EXPECT_EQ(count_tokens(""), 0u);
  EXPECT_EQ(count_tokens("   \t\n"), 0u);
  EXPECT_EQ(count_tokens("a b c"), 3u);
}

TEST(Tokenizer, PunctuationGolden) {
  // don't | stop | , | now | !
  EXPECT_EQ(count_tokens("don't stop, now!"), 5u);
  EXPECT_EQ(tokenize("don't stop, now!"),
            (std::vector<std::string>{"don't", "stop", ",", "now", "!"}));
  EXPECT_EQ(tokenize("(hi)..."), (std::vector<std::string>{"(", "hi", ")", ".", ".", "."}));
  EXPECT_EQ(tokenize("3.5 e-mail"), (std::vector<std::string>{"3.5", "e-mail"}));
  EXPECT_EQ(tokenize("naïve café."), (std::vector<std::string>{"naïve", "café", "."}));
}

TEST(Tokenizer, ZeroIffBlank) {
  std::mt19937_64 gen(7);
  const std::string alphabet = " \t\na.,'!x";
  for (int i = 0; i < 2000; ++i) {
    std::string s;
    const auto len = gen() % 12;
    for (std::size_t j = 0; j < len; ++j) s.push_back(alphabet[gen() % alphabet.size()]);
    EXPECT_EQ(count_tokens(s) == 0, is_blank(s)) << "'" << s << "'";
  }
}

TEST(Corpus, LoadsWellFormedFixture) {
  TempDir dir;
  write_text(dir / "c.jsonl", kTwoLine);
  auto c = load_corpus(dir / "c.jsonl");
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c.records()[1].subset, Subset::lang);
  EXPECT_EQ(c.records()[1].categories, std::vector<std::string>{"toys"});
  EXPECT_EQ(c.at("a").rationale, "");
}

TEST(Corpus, MissingOutcomeNamesField) {
  TempDir dir;
  write_text(dir / "c.jsonl",
             R"({"type":"record","id":"a","subset":"vis","split":"db","caption":"x","image_ref":"a.png"})"
             "\n");
  try {
    load_corpus(dir / "c.jsonl");
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.line(), 1u);
    EXPECT_NE(std::string(e.what()).find("'outcome'"), std::string::npos) << e.what();
  }
}

TEST(Corpus, RejectsDuplicateIdUnknownEnumAndMalformedLine) {
  TempDir dir;
  const std::string a =
      R"({"type":"record","id":"a","subset":"vis","split":"db","caption":"x","outcome":"y","image_ref":"a.png"})";
  write_text(dir / "dup.jsonl", a + "\n" + a + "\n");
  try {
    load_corpus(dir / "dup.jsonl");
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("duplicate"), std::string::npos);
  }
  write_text(dir / "enum.jsonl",
             R"({"type":"record","id":"a","subset":"audio","split":"db","caption":"x","outcome":"y","image_ref":"a.png"})"
             "\n");
  EXPECT_THROW(load_corpus(dir / "enum.jsonl"), SchemaError);
  write_text(dir / "bad.jsonl", "# header\n" + a + "\n{not json\n");
  try {
    load_corpus(dir / "bad.jsonl");
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Corpus, ExplanationInvariants) {
  auto a = rec("a", Subset::vis, Split::test);
  auto b = rec("b");
  // run_id rules
  EXPECT_THROW(Corpus({a}, {make_explanation("a", ExplanationSource::model_run, "x")}), SchemaError);
  EXPECT_THROW(Corpus({a}, {make_explanation("a", ExplanationSource::llm, "x", "run1")}), SchemaError);
  EXPECT_NO_THROW(Corpus({a}, {make_explanation("a", ExplanationSource::model_run, "x", "run1")}));
  // dangling reference
  EXPECT_THROW(Corpus({a}, {make_explanation("zzz", ExplanationSource::llm, "x")}), SchemaError);
  // db records never carry human explanations
  EXPECT_THROW(Corpus({b}, {make_explanation("b", ExplanationSource::human, "x")}), SchemaError);
  EXPECT_NO_THROW(Corpus({b}, {make_explanation("b", ExplanationSource::llm, "x")}));
  // stale token count
  auto e = make_explanation("a", ExplanationSource::human, "one two");
  e.token_count = 5;
  EXPECT_THROW(Corpus({a}, {e}), SchemaError);
}

TEST(Corpus, DanglingExplanationInFileReportsLine) {
  TempDir dir;
  write_text(dir / "c.jsonl", std::string(kTwoLine) +
                                  R"({"type":"explanation","scenario_id":"nope","source":"llm","text":"t"})" + "\n");
  try {
    load_corpus(dir / "c.jsonl");
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Corpus, EmptyCorpusIsHeaderOnly) {
  TempDir dir;
  save_corpus(Corpus{}, dir / "e.jsonl");
  EXPECT_EQ(read_file(dir / "e.jsonl"), std::string(kCorpusHeader) + "\n");
  EXPECT_EQ(load_corpus(dir / "e.jsonl").size(), 0u);
}

TEST(Corpus, RoundTripIsByteStable) {
  TempDir dir;
  write_text(dir / "c.jsonl", kTwoLine);
  auto c = load_corpus(dir / "c.jsonl");
  save_corpus(c, dir / "d.jsonl");
  auto d = load_corpus(dir / "d.jsonl");
  EXPECT_EQ(c, d);
  save_corpus(d, dir / "e.jsonl");
  EXPECT_EQ(read_file(dir / "d.jsonl"), read_file(dir / "e.jsonl"));
}

TEST(Corpus, CountsPaperScaleSubsets) {
  std::vector<ScenarioRecord> rs;
  for (int i = 0; i < 515; ++i) rs.push_back(rec("vis-" + std::to_string(i), Subset::vis));
  for (int i = 0; i < 500; ++i) rs.push_back(rec("lang-" + std::to_string(i), Subset::lang));
  TempDir dir;
  save_corpus(Corpus(rs, {}), dir / "c.jsonl");
  auto c = load_corpus(dir / "c.jsonl");
  EXPECT_EQ(c.size(), 1015u);
  EXPECT_EQ(c.select(Subset::vis, std::nullopt).size(), 515u);
}

namespace {

// Random valid UTF-8 covering 1-4 byte sequences, quotes, backslashes and
// control characters.
std::string random_unicode(std::mt19937_64& gen, std::size_t max_len) {
  static const std::vector<char32_t> pool{U'a', U'Z', U' ', U'"', U'\\', U'\n', U'\t', U'\x01',
                                          U'é', U'ß', U'中', U'文', U'🙂', U'𝄞', U'{', U'}'};
  std::string s;
  const auto len = 1 + gen() % max_len;
  for (std::size_t i = 0; i < len; ++i) {
    char32_t cp = (gen() % 4 == 0) ? static_cast<char32_t>(0x20 + gen() % 0xD000) : pool[gen() % pool.size()];
    if (cp >= 0xD800 && cp <= 0xDFFF) cp = U'x';
    if (cp < 0x80) {
      s.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      s.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      s.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
      s.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      s.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      s.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      s.push_back(static_cast<char>(0xF0 | (cp >> 18)));
      s.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
      s.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      s.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
  }
  return s;
}

}  // namespace

TEST(Corpus, UnicodeRoundTripProperty) {
  std::mt19937_64 gen(20240611);
  TempDir dir;
  for (int iter = 0; iter < 50; ++iter) {
    std::vector<ScenarioRecord> rs;
    std::vector<Explanation> es;
    const int n = 1 + static_cast<int>(gen() % 6);
    for (int i = 0; i < n; ++i) {
      ScenarioRecord r;
      r.id = "r" + std::to_string(i) + random_unicode(gen, 4);
      r.subset = gen() % 2 ? Subset::vis : Subset::lang;
      r.split = gen() % 2 ? Split::db : Split::test;
      r.caption = "c" + random_unicode(gen, 20);
      r.rationale = gen() % 3 ? random_unicode(gen, 20) : "";
      r.outcome = "o" + random_unicode(gen, 20);
      r.image_ref = "img/" + std::to_string(i) + ".png";
      for (int k = 0; k < static_cast<int>(gen() % 3); ++k) r.categories.push_back(random_unicode(gen, 5));
      if (r.split == Split::test) es.push_back(make_explanation(r.id, ExplanationSource::human, "h" + random_unicode(gen, 30)));
      es.push_back(make_explanation(r.id, ExplanationSource::llm, "l" + random_unicode(gen, 30)));
      rs.push_back(std::move(r));
    }
    Corpus c(rs, es);
    save_corpus(c, dir / "u.jsonl");
    const auto first = read_file(dir / "u.jsonl");
    auto back = load_corpus(dir / "u.jsonl");
    ASSERT_EQ(back, c);
    save_corpus(back, dir / "u.jsonl");
    ASSERT_EQ(read_file(dir / "u.jsonl"), first);
  }
}

TEST(Corpus, UnwritableDestination) {
  EXPECT_THROW(save_corpus(Corpus{}, "/nonexistent-dir/x/y.jsonl"), IoError);
}

TEST(Rng, SeedDeterminismAndDerivation) {
  Rng a(RngSeed{42}), b(RngSeed{42});
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.below(1000), b.below(1000));
  EXPECT_NE(derive(RngSeed{42}, "x").value, derive(RngSeed{42}, "y").value);
  EXPECT_EQ(derive(RngSeed{42}, "x"), derive(RngSeed{42}, "x"));
}

TEST(Rng, PinnedSequenceIsPortable) {
  // mt19937_64 is fully specified, so the 10000th output is fixed by the
  // standard: 9981545732273789042.
  std::mt19937_64 ref(5489u);
  ref.discard(9999);
  EXPECT_EQ(ref(), 9981545732273789042ULL);
  Rng r(RngSeed{5489});
  std::uint64_t last = 0;
  for (int i = 0; i < 10000; ++i) last = r.next_u64();
  EXPECT_EQ(last, 9981545732273789042ULL);
}

TEST(Rng, SampleIndicesDistinctAndUniformish) {
  Rng r(RngSeed{1});
  std::vector<int> counts(10, 0);
  for (int t = 0; t < 20000; ++t) {
    auto s = r.sample_indices(10, 3);
    ASSERT_EQ(s.size(), 3u);
    ASSERT_NE(s[0], s[1]);
    ASSERT_NE(s[1], s[2]);
    ASSERT_NE(s[0], s[2]);
    for (auto i : s) ++counts[i];
  }
  for (int c : counts) EXPECT_NEAR(c, 6000, 300);
}
