#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "ricl/eval/judge.hpp"
#include "ricl/eval/judge_runs.hpp"
#include "ricl/eval/report.hpp"
#include "ricl/eval/scores.hpp"
#include "ricl/eval/stats.hpp"
#include "support/fixtures.hpp"
#include "support/test_support.hpp"

using namespace ricl;
using ricl::testing::ScriptedChat;
using ricl::testing::TempDir;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Independent restatement of the order rule: swapped iff the top bit of the
// first mt19937_64 output is set.
bool swapped_by_hand(std::uint64_t seed) { return (std::mt19937_64(seed)() >> 63) == 1; }

std::uint64_t seed_with(bool swapped) {
  for (std::uint64_t s = 0;; ++s)
    if (swapped_by_hand(s) == swapped) return s;
}

const std::string kRanking1First = R"([{"model": "model_1", "rank": 1}, {"model": "model_2", "rank": 2}])";

JudgeInputs inputs() { return {"t1", "q1", "Explain it.", "answer A", "answer B", "cond", "human_llm"}; }

PairwiseJudgment judgment(std::string cand, std::string ref, bool cand_wins, bool cand_left = true) {
  PairwiseJudgment j;
  j.left_source = cand_left ? cand : ref;
  j.right_source = cand_left ? ref : cand;
  j.winner = (cand_wins == cand_left) ? Winner::left : Winner::right;
  return j;
}

}  // namespace

// ---- ranking parser ------------------------------------------------------

TEST(ParseRanking, PlainList) {
  EXPECT_EQ(parse_ranking(kRanking1First), (std::vector<std::string>{"model_1", "model_2"}));
  EXPECT_EQ(parse_ranking(R"([{"model": "model_1", "rank": 2}, {"model": "model_2", "rank": 1}])"),
            (std::vector<std::string>{"model_2", "model_1"}));
}

TEST(ParseRanking, CodeFenceProseAndPythonQuotes) {
  EXPECT_EQ(parse_ranking("Sure!\n```python\n" + kRanking1First + "\n```\nDone."),
            (std::vector<std::string>{"model_1", "model_2"}));
  EXPECT_EQ(parse_ranking("[{'model': 'model_2', 'rank': 1}, {'model': 'model_1', 'rank': 2}]"),
            (std::vector<std::string>{"model_2", "model_1"}));
  EXPECT_EQ(parse_ranking(R"(Ranking: [{"model": "model_1", "rank": "1"}, {"model": "model_2", "rank": "2"}])")
                .front(),
            "model_1");
}

TEST(ParseRanking, Rejections) {
  EXPECT_THROW(parse_ranking(R"([{"model": "model_1", "rank": 1}, {"model": "model_2", "rank": 1}])"),
               ReplyParseError);
  EXPECT_THROW(parse_ranking(R"([{"model": "model_3", "rank": 1}])"), ReplyParseError);
  EXPECT_THROW(parse_ranking("model_1 is better"), ReplyParseError);
  EXPECT_THROW(parse_ranking(R"([{"model": "model_1", "rank": 2}, {"model": "model_2", "rank": 3}])"),
               ReplyParseError);
  EXPECT_THROW(parse_ranking(R"([{"model": "model_1", "rank": 1}, {"model": "model_1", "rank": 2}])"),
               ReplyParseError);
  EXPECT_THROW(parse_ranking("[not a list"), ReplyParseError);
}

// ---- pairwise judge ------------------------------------------------------

TEST(JudgePairwise, OrderRuleMatchesHand) {
  for (std::uint64_t s = 0; s < 200; ++s) EXPECT_EQ(presentation_swapped(s), swapped_by_hand(s));
}

TEST(JudgePairwise, FirstModelPreferredInBothOrders) {
  ScriptedChat judge([](const ChatRequest&) { return kRanking1First; });
  const auto a_first = judge_pairwise(inputs(), judge, seed_with(false));
  EXPECT_FALSE(a_first.swapped);
  EXPECT_EQ(a_first.winner, Winner::left);
  EXPECT_NE(judge.requests.back().user_text().find("\"answer\": \"\"\"answer A\"\"\""), std::string::npos);

  const auto b_first = judge_pairwise(inputs(), judge, seed_with(true));
  EXPECT_TRUE(b_first.swapped);
  EXPECT_EQ(b_first.winner, Winner::right);
  const auto text = judge.requests.back().user_text();
  EXPECT_LT(text.find("answer B"), text.find("answer A"));
  EXPECT_EQ(b_first.left_source, "cond");
  EXPECT_EQ(b_first.winning_source(), "human_llm");
}

TEST(JudgePairwise, PromptIsTemplateVerbatim) {
  ScriptedChat judge([](const ChatRequest&) { return kRanking1First; });
  judge_pairwise(inputs(), judge, seed_with(false));
  const auto& req = judge.requests.back();
  ASSERT_EQ(req.messages.size(), 2u);
  EXPECT_EQ(req.messages[0].role, "system");
  EXPECT_EQ(req.messages[0].content[0].text,
            "You are a helpful assistant, that ranks models by the quality of their answers.");
  std::string expected(prompts::kJudgePairwisePrompt);
  expected = replace_all(expected, "{instruction}", "Explain it.");
  expected = replace_all(expected, "{output_1}", "answer A");
  expected = replace_all(expected, "{output_2}", "answer B");
  EXPECT_EQ(req.user_text(), expected);
}

TEST(JudgePairwise, GarbageAndTransportFailureAreInvalid) {
  ScriptedChat garbage([](const ChatRequest&) { return std::string("I like both."); });
  const auto g = judge_pairwise(inputs(), garbage, 1);
  EXPECT_EQ(g.winner, Winner::invalid);
  EXPECT_EQ(g.attempts, 4);
  EXPECT_EQ(g.raw_reply, "I like both.");

  ScriptedChat down([](const ChatRequest&) -> std::string { throw ProviderError("timeout"); });
  EXPECT_EQ(judge_pairwise(inputs(), down, 1, 1).winner, Winner::invalid);

  int n = 0;
  ScriptedChat flaky([&](const ChatRequest&) { return ++n < 3 ? std::string("??") : kRanking1First; });
  const auto f = judge_pairwise(inputs(), flaky, seed_with(false));
  EXPECT_EQ(f.winner, Winner::left);
  EXPECT_EQ(f.attempts, 3);

  auto empty = inputs();
  empty.output_b = " ";
  EXPECT_THROW(judge_pairwise(empty, garbage, 1), PreconditionError);
}

TEST(JudgePairwise, PositionBiasCancelsOut) {
  // A judge that always prefers whatever it sees first.
  ScriptedChat first([](const ChatRequest&) { return kRanking1First; });
  std::vector<PairwiseJudgment> js;
  for (int i = 0; i < 4000; ++i) {
    auto in = inputs();
    in.task_id = "t" + std::to_string(i);
    js.push_back(judge_pairwise(in, first, derive(RngSeed{42}, in.task_id).value));
  }
  const auto w = win_rate(js, "cond");
  EXPECT_EQ(w.valid, 4000u);
  EXPECT_NEAR(w.rate, 0.5, 0.03);
}

TEST(JudgmentLog, RoundTrip) {
  TempDir dir;
  ScriptedChat judge([](const ChatRequest&) { return kRanking1First; });
  auto j = judge_pairwise(inputs(), judge, 77);
  {
    JsonlAppender log(dir / "j.jsonl");
    log.append(to_json(j));
  }
  const auto back = load_judgments(dir / "j.jsonl");
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0], j);
}

// ---- win rate ------------------------------------------------------------

TEST(WinRate, Arithmetic) {
  std::vector<PairwiseJudgment> js;
  for (int i = 0; i < 5; ++i) js.push_back(judgment("c", "ref", i < 3, i % 2 == 0));
  PairwiseJudgment bad = judgment("c", "ref", true);
  bad.winner = Winner::invalid;
  js.push_back(bad);
  const auto w = win_rate(js, "c");
  EXPECT_DOUBLE_EQ(w.rate, 0.6);
  EXPECT_EQ(w.wins, 3u);
  EXPECT_EQ(w.valid, 5u);
  EXPECT_EQ(w.invalid, 1u);
  EXPECT_THROW(win_rate(js, "nobody"), PreconditionError);
}

TEST(WinRate, EightOfFifty) {
  std::vector<PairwiseJudgment> js;
  for (int i = 0; i < 50; ++i) js.push_back(judgment("zero", "ref", i < 8, i % 3 != 0));
  EXPECT_DOUBLE_EQ(win_rate(js, "zero").rate, 0.16);
}

TEST(WinRate, RandomFixtureMatchesRecount) {
  std::mt19937_64 gen(5);
  std::vector<PairwiseJudgment> js;
  for (int i = 0; i < 777; ++i) {
    auto j = judgment(gen() % 2 ? "c" : "d", "ref", gen() % 3 == 0, gen() % 2);
    if (gen() % 10 == 0) j.winner = Winner::invalid;
    js.push_back(j);
  }
  std::size_t wins = 0, valid = 0;
  for (const auto& j : js) {
    const bool involves = j.left_source == "c" || j.right_source == "c";
    if (!involves || j.winner == Winner::invalid) continue;
    ++valid;
    const auto& w = j.winner == Winner::left ? j.left_source : j.right_source;
    wins += w == "c";
  }
  const auto got = win_rate(js, "c");
  EXPECT_EQ(got.wins, wins);
  EXPECT_EQ(got.valid, valid);
  EXPECT_DOUBLE_EQ(got.rate, double(wins) / double(valid));
}

// ---- FLASK -----------------------------------------------------------------

TEST(Flask, ReplyFormats) {
  EXPECT_EQ(parse_flask_reply("3/4/4/3"), (SkillScores{3, 4, 4, 3}));
  EXPECT_EQ(parse_flask_reply(R"({"LR": 5, "LC": 4, "LE": 3, "CS": 2})"), (SkillScores{5, 4, 3, 2}));
  EXPECT_EQ(parse_flask_reply("```json\n{\"lr\": 1, \"lc\": 2, \"le\": 3, \"cs\": 4}\n```"), (SkillScores{1, 2, 3, 4}));
  EXPECT_EQ(parse_flask_reply("LR: 2\nLC: 2\nLE = 5\nCS - 1"), (SkillScores{2, 2, 5, 1}));
}

TEST(Flask, Rejections) {
  EXPECT_THROW(parse_flask_reply("6/4/4/3"), ReplyParseError);
  EXPECT_THROW(parse_flask_reply(R"({"LR": 6, "LC": 4, "LE": 3, "CS": 2})"), ReplyParseError);
  EXPECT_THROW(parse_flask_reply(R"({"LR": 3, "LC": 4, "LE": 3})"), ReplyParseError);
  EXPECT_THROW(parse_flask_reply("good"), ReplyParseError);
}

TEST(Flask, ScoreRetriesThenFails) {
  int n = 0;
  ScriptedChat judge([&](const ChatRequest& r) {
    EXPECT_NE(r.user_text().find("Explanation: because"), std::string::npos);
    return ++n == 1 ? std::string("LR=9") : std::string("3/4/4/3");
  });
  EXPECT_EQ(flask_score("ctx", "out", "because", judge), (SkillScores{3, 4, 4, 3}));
  ScriptedChat bad([](const ChatRequest&) { return std::string("7/7/7/7"); });
  EXPECT_THROW(flask_score("c", "o", "e", bad), ReplyParseError);
  EXPECT_EQ(bad.requests.size(), 4u);
}

TEST(Flask, MeansAndGainTableGolden) {
  const std::vector<SkillScores> rnd = {{3, 3, 4, 3}, {4, 3, 3, 3}, {3, 4, 4, 2}, {3, 3, 3, 3}};
  const std::vector<SkillScores> ret = {{4, 4, 4, 3}, {4, 3, 4, 4}, {3, 4, 4, 3}, {4, 4, 3, 3}};
  const auto mr = mean_skills(rnd);
  const auto mt = mean_skills(ret);
  // hand means
  EXPECT_DOUBLE_EQ(mr.mean[0], 13.0 / 4);
  EXPECT_DOUBLE_EQ(mr.mean[3], 11.0 / 4);
  EXPECT_DOUBLE_EQ(mt.mean[0], 15.0 / 4);
  EXPECT_DOUBLE_EQ(mt.mean[2], 15.0 / 4);
  const std::vector<FlaskRow> rows = {{"model-a", mr, mt}, {"model-b", mt, mr}};
  EXPECT_EQ(render_flask_table(rows), slurp(std::filesystem::path(RICL_GOLDEN_DIR) / "flask_table.txt"));
  EXPECT_EQ(format_with_gain(3.0, 3.0), "3.00 (+0.00)");
  EXPECT_EQ(format_with_gain(2.5, 3.0), "2.50 (-0.50)");
}

// ---- specificity -----------------------------------------------------------

TEST(Specificity, ReplyParsing) {
  EXPECT_EQ(parse_specificity_reply("4"), 4);
  EXPECT_EQ(parse_specificity_reply(" [2]\n"), 2);
  EXPECT_THROW(parse_specificity_reply("between 3 and 4"), ReplyParseError);
  EXPECT_THROW(parse_specificity_reply("0"), ReplyParseError);
  EXPECT_THROW(parse_specificity_reply("3.5"), ReplyParseError);
}

TEST(Specificity, ScoreUsesPromptVerbatim) {
  ScriptedChat judge([](const ChatRequest&) { return std::string("4"); });
  EXPECT_EQ(specificity_score("The milk was fine.", judge), 4);
  const auto text = judge.requests.back().user_text();
  EXPECT_EQ(text, replace_all(prompts::kSpecificityPrompt, "[Insert the generated text here]", "The milk was fine."));
  EXPECT_THROW(specificity_score(" ", judge), PreconditionError);
}

TEST(Specificity, DistributionMean) {
  SpecificityDistribution d;
  const int counts[5] = {305, 401, 86, 119, 89};
  for (int level = 1; level <= 5; ++level)
    for (int i = 0; i < counts[level - 1]; ++i) d.add(level);
  // 1(.305) + 2(.401) + 3(.086) + 4(.119) + 5(.089)
  EXPECT_NEAR(d.mean(), 2.286, 1e-12);
  EXPECT_NEAR(d.mean(), 2.29, 0.005);
  EXPECT_DOUBLE_EQ(d.proportion(2), 0.401);
}

// ---- entropy and lengths ---------------------------------------------------

TEST(Entropy, AnalyticValues) {
  EXPECT_DOUBLE_EQ(ngram_entropy(std::vector<std::string>{"a a a"}, 1), 0.0);
  EXPECT_DOUBLE_EQ(ngram_entropy(std::vector<std::string>{"a b c d"}, 1), 2.0);
  EXPECT_DOUBLE_EQ(ngram_entropy(std::vector<std::string>{"a b a b a"}, 2), 1.0);
  EXPECT_THROW(ngram_entropy(std::vector<std::string>{"a b"}, 3), PreconditionError);
  EXPECT_THROW(ngram_entropy(std::vector<std::string>{"a"}, 0), PreconditionError);
  // short texts contribute nothing
  EXPECT_DOUBLE_EQ(ngram_entropy(std::vector<std::string>{"x", "a b c d"}, 2), std::log2(3.0));
}

TEST(Entropy, Bounds) {
  std::mt19937_64 gen(8);
  for (int t = 0; t < 200; ++t) {
    std::vector<std::string> texts(1 + gen() % 4);
    std::set<std::string> distinct;
    for (auto& s : texts)
      for (int w = 0, n = 1 + int(gen() % 10); w < n; ++w) s += std::string(1, char('a' + gen() % 5)) + " ";
    for (const auto& s : texts) {
      const auto toks = tokenize(s);
      for (const auto& tok : toks) distinct.insert(tok);
    }
    const double h = ngram_entropy(texts, 1);
    EXPECT_GE(h, 0.0);
    EXPECT_LE(h, std::log2(double(distinct.size())) + 1e-12);
  }
}

TEST(Bootstrap, SingleExplanationHasNoVariance) {
  std::map<std::string, std::vector<std::string>> pairs = {{"r1", {"a b c a"}}, {"r2", {"b c d e f"}}};
  const auto out = bootstrap_entropy(pairs, 50, RngSeed{1});
  for (std::size_t n = 1; n <= 4; ++n) {
    EXPECT_DOUBLE_EQ(out.at(n).std, 0.0);
    EXPECT_DOUBLE_EQ(out.at(n).mean, ngram_entropy(std::vector<std::string>{"a b c a", "b c d e f"}, n));
  }
}

TEST(Bootstrap, DeterministicAndNearExactExpectation) {
  std::map<std::string, std::vector<std::string>> pairs = {{"r1", {"a a a b b c d e f", "x y z w v u t s r"}},
                                                           {"r2", {"a b c d e f g h i", "q q q q q q q q q"}}};
  const auto a = bootstrap_entropy(pairs, 1000, RngSeed{3});
  const auto b = bootstrap_entropy(pairs, 1000, RngSeed{3});
  for (std::size_t n = 1; n <= 5; ++n) {
    EXPECT_EQ(a.at(n).mean, b.at(n).mean);
    EXPECT_EQ(a.at(n).std, b.at(n).std);
    double exact = 0;
    for (const auto& x : pairs["r1"])
      for (const auto& y : pairs["r2"]) exact += ngram_entropy(std::vector<std::string>{x, y}, n) / 4.0;
    const double se = a.at(n).std / std::sqrt(1000.0);
    EXPECT_LE(std::abs(a.at(n).mean - exact), 3 * se + 1e-12) << "n=" << n;
  }
  EXPECT_THROW(bootstrap_entropy({}, 10, RngSeed{1}), PreconditionError);
  EXPECT_THROW(bootstrap_entropy({{"r", {}}}, 10, RngSeed{1}), PreconditionError);
}

TEST(LengthStats, Examples) {
  const std::vector<std::string> same = {"a b", "a b"};
  EXPECT_DOUBLE_EQ(length_stats(same).mean, 2.0);
  EXPECT_DOUBLE_EQ(length_stats(same).std, 0.0);
  const std::vector<std::string> two = {"a", "a b c"};
  EXPECT_DOUBLE_EQ(length_stats(two).mean, 2.0);
  EXPECT_DOUBLE_EQ(length_stats(two).std, 1.0);
  EXPECT_THROW(length_stats(std::vector<std::string>{}), PreconditionError);
}

TEST(LengthStats, PinnedFixture) {
  // Token counts by hand: 4 ("Hi" "," "there" "!"), 1, 7 (six words and "."),
  // 4 ("(" "really" ")" "fine"), 11
  const std::vector<std::string> texts = {"Hi, there!", "ok", "The milk was only out briefly.",
                                          "(really) fine", "a b c d e f g h i j k"};
  // mean 27/5 = 5.4; squared deviations 1.96+19.36+2.56+1.96+31.36 = 57.2; var 11.44
  const auto s = length_stats(texts);
  EXPECT_NEAR(s.mean, 5.4, 1e-9);
  EXPECT_NEAR(s.std, std::sqrt(11.44), 1e-9);
}

TEST(CorpusStats, CsvSeries) {
  std::map<std::string, std::vector<std::string>> pairs = {{"r1", {"a b c d e f"}}, {"r2", {"b c d e f g"}}};
  std::vector<CorpusStats> groups = {corpus_stats("human", pairs, 10, RngSeed{1})};
  EXPECT_EQ(length_histogram_csv(groups), "group,tokens,count\nhuman,6,2\n");
  const auto csv = entropy_curve_csv(groups);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);
  EXPECT_EQ(csv.rfind("group,n,mean,std\nhuman,1,", 0), 0u);
}

// ---- report ----------------------------------------------------------------

TEST(Conditions, LabelRoundTrip) {
  for (const Condition& c : {Condition{"gpt-4o", Subset::vis, 3, ExemplarMode::retrieved},
                             Condition{"llava_1.6_34b", Subset::lang, 0, ExemplarMode::none}}) {
    const auto back = parse_condition(c.label());
    ASSERT_TRUE(back) << c.label();
    EXPECT_EQ(*back, c);
  }
  EXPECT_FALSE(parse_condition("human_llm"));
  EXPECT_FALSE(parse_condition("m_vis_12shot_random"));
}

namespace {

// 7 models x 2 subsets, 50 judgments per cell. Retrieved beats random in
// every combo except those listed in `losers`.
std::vector<PairwiseJudgment> table_fixture(std::set<std::pair<int, Subset>> losers,
                                            std::map<Condition, std::size_t>* wins_out) {
  std::vector<PairwiseJudgment> js;
  for (int m = 0; m < 7; ++m)
    for (Subset s : {Subset::vis, Subset::lang})
      for (const auto& c : grid_conditions("model" + std::to_string(m), s)) {
        std::size_t wins = 8 + static_cast<std::size_t>(c.shots) * 2 + static_cast<std::size_t>(m);
        if (c.mode == ExemplarMode::retrieved) wins += losers.contains({m, s}) ? -3 : 4;
        (*wins_out)[c] = wins;
        for (std::size_t i = 0; i < 50; ++i) {
          auto j = judgment(c.label(), "human_llm", i < wins, i % 2 == 0);
          j.task_id = c.label() + "/" + std::to_string(i);
          js.push_back(j);
        }
        auto inv = judgment(c.label(), "human_llm", true);
        inv.winner = Winner::invalid;
        js.push_back(inv);
      }
  return js;
}

}  // namespace

TEST(Report, TwelveOfFourteen) {
  std::map<Condition, std::size_t> wins;
  const auto js = table_fixture({{2, Subset::lang}, {5, Subset::vis}}, &wins);
  const auto r = build_report(condition_win_rates(js, "human_llm"));
  // recount from the fixture's win table
  std::size_t won = 0, total = 0;
  for (int m = 0; m < 7; ++m)
    for (Subset s : {Subset::vis, Subset::lang}) {
      double rnd = 0, ret = 0;
      for (int shots : {1, 3, 5}) {
        const auto model = "model" + std::to_string(m);
        rnd += double(wins[{model, s, shots, ExemplarMode::random}]) / 50.0;
        ret += double(wins[{model, s, shots, ExemplarMode::retrieved}]) / 50.0;
      }
      ++total;
      won += ret >= rnd;
    }
  EXPECT_EQ(won, 12u);
  EXPECT_EQ(total, 14u);
  EXPECT_EQ(r.summary_line(), "12 of 14");
  EXPECT_NE(render_report_text(r).find("12 of 14"), std::string::npos);
  EXPECT_TRUE(r.missing.empty());
  EXPECT_EQ(r.cells.size(), 98u);
  EXPECT_EQ(r.deltas.size(), 42u);
  for (const auto& [c, w] : r.cells) {
    EXPECT_EQ(w.valid, 50u);
    EXPECT_EQ(w.invalid, 1u);
    EXPECT_EQ(w.wins, wins[c]);
  }
  // per-model gain: five models +4 in all six cells, two models mixed
  // (+4 x3, -3 x3) -> gains 0.08 x5 and 0.01 x2, median 0.08
  ASSERT_TRUE(r.median_model_gain);
  EXPECT_NEAR(*r.median_model_gain, 0.08, 1e-12);
  const auto j = to_json(r);
  EXPECT_EQ(j["summary"], "12 of 14");
  EXPECT_EQ(j["cells"].size(), 98u);
  EXPECT_FALSE(r.candidate_aggregates.empty());
}

TEST(Report, SingleConditionAndMissingCells) {
  std::map<Condition, WinRate> one = {{Condition{"m", Subset::vis, 0, ExemplarMode::none}, WinRate{0.16, 8, 50, 0}}};
  const auto r = build_report(one);
  EXPECT_EQ(r.cells.size(), 1u);
  EXPECT_EQ(r.missing.size(), 6u);
  EXPECT_EQ(r.summary_line(), "0 of 0");
  EXPECT_FALSE(r.median_model_gain);
  const auto text = render_report_text(r);
  EXPECT_NE(text.find("16.0 (8/50)"), std::string::npos);
  EXPECT_EQ(report_cells_csv(r), "condition,model,subset,shots,mode,wins,valid,invalid,rate\n"
                                 "m_vis_0shot_none,m,vis,0,none,8,50,0,0.160000\n");
}

TEST(Report, AllInvalidCellIsMissingNotZero) {
  std::vector<PairwiseJudgment> js;
  auto j = judgment("m_vis_0shot_none", "human_llm", true);
  j.winner = Winner::invalid;
  js.push_back(j);
  EXPECT_TRUE(condition_win_rates(js, "human_llm").empty());
}

// ---- manifest judging --------------------------------------------------------

TEST(JudgeManifest, EndToEnd) {
  TempDir dir;
  const auto w = ricl::testing::synthetic_world(2, 12, 6);
  ExperimentConfig c;
  c.model_id = "mock";
  c.shots = 1;
  c.mode = ExemplarMode::random;
  RunContext ctx{w.corpus, nullptr, {}, IclTemplate::builtin(), {}};
  ScriptedChat model([](const ChatRequest&) { return std::string("A short model answer."); });
  RunOptions opt;
  opt.durable = false;
  const auto m = run_experiment(c, ctx, model, dir / "m.jsonl", opt);
  ScriptedChat judge([](const ChatRequest&) { return kRanking1First; });
  JudgeRunOptions jo;
  jo.seed = RngSeed{4};
  const auto js = judge_manifest(m, w.corpus, IclTemplate::builtin(), judge, jo, dir / "j.jsonl");
  ASSERT_EQ(js.size(), 6u);
  EXPECT_EQ(load_judgments(dir / "j.jsonl"), js);
  for (const auto& j : js) {
    EXPECT_EQ(j.left_source, "mock_vis_1shot_random");
    EXPECT_EQ(j.right_source, "human_llm");
    EXPECT_EQ(j.winner, j.swapped ? Winner::right : Winner::left);
  }
  EXPECT_NE(judge.requests.front().user_text().find("explain why the following outcome happened"),
            std::string::npos);
}
