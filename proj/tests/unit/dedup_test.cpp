#include <gtest/gtest.h>

#include <algorithm>
#include <iterator>
#include <random>
#include <regex>

#include "quizread/dedup.hpp"
#include "quizread/error.hpp"

using namespace quizread;

namespace {

// Independent reference: regex tokenization on lowercased ASCII text, std::set
// algorithms for the coefficient.
double oracle_similarity(const std::string& a, const std::string& b, const DedupConfig& config) {
  auto tokens = [&](std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    static const std::regex word("[a-z0-9]+");
    std::set<std::string> out;
    for (auto it = std::sregex_iterator(s.begin(), s.end(), word); it != std::sregex_iterator(); ++it) {
      if (config.stopwords.count(it->str()) == 0) out.insert(it->str());
    }
    return out;
  };
  const auto ta = tokens(a);
  const auto tb = tokens(b);
  if (ta.empty() && tb.empty()) return 1.0;
  if (ta.empty() || tb.empty()) return 0.0;
  std::vector<std::string> inter;
  std::vector<std::string> uni;
  std::set_intersection(ta.begin(), ta.end(), tb.begin(), tb.end(), std::back_inserter(inter));
  std::set_union(ta.begin(), ta.end(), tb.begin(), tb.end(), std::back_inserter(uni));
  return static_cast<double>(inter.size()) / static_cast<double>(uni.size());
}

std::string random_question(std::mt19937& rng) {
  static const std::vector<std::string> vocab = {
      "What", "is",     "the",   "key",     "main",    "message", "of",      "this",   "section", "How",
      "does", "author", "argue", "reading", "skimming", "Why",    "claim",   "evidence", "data",  "results",
      "a",    "an",     "model", "limits",  "study",   "compare", "readers", "time",    "page",   "questions"};
  static const std::vector<std::string> punct = {"", "", "", ",", "?", ".", ";", "-", "'s", ":"};
  std::uniform_int_distribution<int> len(0, 9);
  std::string s;
  const int n = len(rng);
  for (int i = 0; i < n; ++i) {
    if (!s.empty()) s += rng() % 4 == 0 ? "  " : " ";
    s += vocab[rng() % vocab.size()] + punct[rng() % punct.size()];
  }
  return s;
}

PageQuestionSet candidates_of(const std::vector<std::string>& questions) {
  PageQuestionSet set;
  for (std::size_t i = 0; i < questions.size(); ++i) {
    set.pairs.push_back({make_label(QuestionKind::Comprehension, static_cast<int>(i + 1)), questions[i], "ans"});
  }
  return set;
}

}  // namespace

TEST(Dedup, TrivialExamples) {
  const DedupConfig config;
  EXPECT_DOUBLE_EQ(similarity("Why does skimming help?", "Why does skimming help?", config), 1.0);
  DedupConfig no_stop;
  no_stop.stopwords.clear();
  EXPECT_DOUBLE_EQ(similarity("alpha beta", "gamma delta", no_stop), 0.0);
  EXPECT_DOUBLE_EQ(similarity("", "the of", config), 1.0);
  EXPECT_DOUBLE_EQ(similarity("", "substance", config), 0.0);
  EXPECT_GE(default_stopwords().size(), 100u);
}

TEST(Dedup, KeyMessageExampleMatchesOracle) {
  const DedupConfig config;
  const std::string a = "What is the key message of this section?";
  const std::string b = "What is the main message of the section?";
  EXPECT_DOUBLE_EQ(similarity(a, b, config), oracle_similarity(a, b, config));
  // {key, message, section} vs {main, message, section}.
  EXPECT_DOUBLE_EQ(similarity(a, b, config), 0.5);
}

TEST(Dedup, OracleAgreementOnRandomPairs) {
  std::mt19937 rng(42);
  const DedupConfig config;
  for (int i = 0; i < 200; ++i) {
    const std::string a = random_question(rng);
    const std::string b = i % 5 == 0 ? a + " " + random_question(rng) : random_question(rng);
    EXPECT_DOUBLE_EQ(similarity(a, b, config), oracle_similarity(a, b, config)) << a << " | " << b;
    EXPECT_DOUBLE_EQ(similarity(a, b, config), similarity(b, a, config));
    if (!normalized_tokens(a, config).empty()) EXPECT_DOUBLE_EQ(similarity(a, a, config), 1.0);
  }
}

TEST(Dedup, NormalizationFoldsCaseAndPunctuation) {
  const DedupConfig config;
  EXPECT_EQ(normalized_tokens("The Author's CLAIM, restated!", config),
            (std::set<std::string, std::less<>>{"author", "claim", "restated"}));
  EXPECT_EQ(normalized_tokens("caf\xC3\xA9 Caf\xC3\xA9", config), (std::set<std::string, std::less<>>{"caf\xC3\xA9"}));
}

TEST(Dedup, IdenticalQuestionOnLaterPageDropped) {
  const DedupConfig config;
  const std::vector<QAPair> accepted = {{"C1", "How does skimming differ from reading?", "x"}};
  PageQuestionSet page2 = candidates_of({"How does skimming differ from reading?", "Who ran the study?"});
  const FilterResult r = filter_repeats(page2, accepted, config);
  ASSERT_EQ(r.dropped.size(), 1u);
  EXPECT_DOUBLE_EQ(r.dropped[0].score, 1.0);
  EXPECT_EQ(r.dropped[0].matched, accepted[0]);
  ASSERT_EQ(r.kept.pairs.size(), 1u);
  EXPECT_EQ(r.kept.pairs[0].label, "C1");
  EXPECT_EQ(r.kept.pairs[0].question, "Who ran the study?");
}

TEST(Dedup, ThresholdOneKeepsNonIdentical) {
  DedupConfig config;
  config.threshold = 1.0;
  const PageQuestionSet set =
      candidates_of({"What is the key message of this section?", "What is the main message of the section?"});
  EXPECT_TRUE(filter_repeats(set, {}, config).dropped.empty());
}

TEST(Dedup, LaterNearDuplicateDroppedMiddleKept) {
  const DedupConfig config;
  const std::vector<std::string> qs = {"Which methods did the study use to measure reading speed?",
                                       "Who funded the work?",
                                       "Which methods did the study use to measure reading speed and accuracy?"};
  ASSERT_GE(oracle_similarity(qs[0], qs[2], config), 0.6);
  ASSERT_LT(oracle_similarity(qs[0], qs[1], config), 0.6);
  ASSERT_LT(oracle_similarity(qs[1], qs[2], config), 0.6);
  const FilterResult r = filter_repeats(candidates_of(qs), {}, config);
  ASSERT_EQ(r.kept.pairs.size(), 2u);
  EXPECT_EQ(r.kept.pairs[0].question, qs[0]);
  EXPECT_EQ(r.kept.pairs[1].question, qs[1]);
  ASSERT_EQ(r.dropped.size(), 1u);
  EXPECT_EQ(r.dropped[0].question.question, qs[2]);
  EXPECT_DOUBLE_EQ(r.dropped[0].score, oracle_similarity(qs[0], qs[2], config));
}

TEST(Dedup, DisabledKeepsEverything) {
  DedupConfig config;
  config.enabled = false;
  const PageQuestionSet set = candidates_of({"same?", "same?", "same?"});
  const FilterResult r = filter_repeats(set, set.pairs, config);
  EXPECT_EQ(r.kept, set);
  EXPECT_TRUE(r.dropped.empty());
}

TEST(Dedup, IssuesFollowTheirPairs) {
  const DedupConfig config;
  PageQuestionSet set = candidates_of({"Alpha topic?", "Alpha topic?", "Gamma topic?"});
  set.issues = {{IssueCode::RenumberedLabel, "r", 0, 0},
                {IssueCode::MissingAnswer, "m", 5, 1},
                {IssueCode::UnlabeledQuestion, "u", 9, 2}};
  const FilterResult r = filter_repeats(set, {}, config);
  ASSERT_EQ(r.kept.pairs.size(), 2u);
  ASSERT_EQ(r.kept.issues.size(), 2u);
  EXPECT_EQ(r.kept.issues[0].pair_index, 0u);
  EXPECT_EQ(r.kept.issues[1].code, IssueCode::UnlabeledQuestion);
  EXPECT_EQ(r.kept.issues[1].pair_index, 1u);
  EXPECT_EQ(r.kept.pairs[1].label, "C2");

  PageQuestionSet tail = candidates_of({"Alpha topic?", "Alpha topic?"});
  tail.issues = {{IssueCode::CountMismatch, "expected 3", 4, 1}};
  const FilterResult t = filter_repeats(tail, {}, config);
  ASSERT_EQ(t.kept.issues.size(), 1u);
  EXPECT_EQ(t.kept.issues[0].code, IssueCode::CountMismatch);
  EXPECT_EQ(t.kept.issues[0].pair_index, 0u);
}

TEST(Dedup, RandomizedProperties) {
  std::mt19937 rng(1234);
  for (int trial = 0; trial < 300; ++trial) {
    DedupConfig config;
    config.threshold = std::uniform_real_distribution<double>(0.2, 1.0)(rng);
    std::vector<QAPair> accepted;
    for (int i = 0; i < static_cast<int>(rng() % 4); ++i) accepted.push_back({"C1", random_question(rng), "a"});
    std::vector<std::string> qs;
    for (int i = 0; i < 1 + static_cast<int>(rng() % 8); ++i) {
      qs.push_back(!qs.empty() && rng() % 3 == 0 ? qs[rng() % qs.size()] : random_question(rng));
    }
    const PageQuestionSet set = candidates_of(qs);
    const FilterResult r = filter_repeats(set, accepted, config);

    // No loss, order preserved.
    EXPECT_EQ(r.kept.pairs.size() + r.dropped.size(), set.pairs.size());
    std::size_t k = 0;
    std::size_t d = 0;
    for (const QAPair& p : set.pairs) {
      if (k < r.kept.pairs.size() && r.kept.pairs[k].question == p.question) {
        ++k;
      } else {
        ASSERT_LT(d, r.dropped.size());
        EXPECT_EQ(r.dropped[d].question.question, p.question);
        EXPECT_GE(r.dropped[d].score, config.threshold);
        ++d;
      }
    }
    EXPECT_EQ(k, r.kept.pairs.size());

    // Brute force: no surviving pair reaches the threshold, accepted against accepted excluded.
    std::vector<std::string> pool;
    for (const QAPair& p : r.kept.pairs) pool.push_back(p.question);
    for (std::size_t i = 0; i < pool.size(); ++i) {
      for (const QAPair& a : accepted) EXPECT_LT(oracle_similarity(pool[i], a.question, config), config.threshold);
      for (std::size_t j = i + 1; j < pool.size(); ++j) {
        EXPECT_LT(oracle_similarity(pool[i], pool[j], config), config.threshold) << pool[i] << " | " << pool[j];
      }
    }

    // Idempotent.
    const FilterResult again = filter_repeats(r.kept, accepted, config);
    EXPECT_TRUE(again.dropped.empty());
    EXPECT_EQ(again.kept, r.kept);
  }
}

TEST(Dedup, ConfigValidation) {
  DedupConfig c;
  c.threshold = 1.5;
  EXPECT_THROW(c.validate(), Error);
  c.threshold = -0.1;
  EXPECT_THROW(c.validate(), Error);
  c.threshold = 0.0;
  EXPECT_NO_THROW(c.validate());
}
