#include "quizread/dedup.hpp"

#include <cctype>
#include <optional>

#include "quizread/error.hpp"

namespace quizread {

namespace {

using TokenSet = std::set<std::string, std::less<>>;

double jaccard(const TokenSet& a, const TokenSet& b) {
  if (a.empty() && b.empty()) return 1.0;
  if (a.empty() || b.empty()) return 0.0;
  std::size_t common = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++common;
      ++ia;
      ++ib;
    }
  }
  return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

}  // namespace

const TokenSet& default_stopwords() {
  static const TokenSet words = {
      "a",       "about",  "above",   "after",   "again",   "against", "all",     "am",    "an",      "and",
      "any",     "are",    "as",      "at",      "be",      "because", "been",    "before", "being",  "below",
      "between", "both",   "but",     "by",      "can",     "could",   "did",     "do",    "does",    "doing",
      "down",    "during", "each",    "few",     "for",     "from",    "further", "had",   "has",     "have",
      "having",  "he",     "her",     "here",    "hers",    "him",     "his",     "how",   "i",       "if",
      "in",      "into",   "is",      "it",      "its",     "itself",  "just",    "me",    "more",    "most",
      "my",      "no",     "nor",     "not",     "now",     "of",      "off",     "on",    "once",    "only",
      "or",      "other",  "our",     "ours",    "out",     "over",    "own",     "s",     "same",    "she",
      "should",  "so",     "some",    "such",    "t",       "than",    "that",    "the",   "their",   "theirs",
      "them",    "then",   "there",   "these",   "they",    "this",    "those",   "through", "to",    "too",
      "under",   "until",  "up",      "very",    "was",     "we",      "were",    "what",  "when",    "where",
      "which",   "while",  "who",     "whom",    "why",     "will",    "with",    "would", "you",     "your",
      "yours",   "also",   "may",     "might",   "must",    "shall",   "upon",    "us",
  };
  return words;
}

void DedupConfig::validate() const {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "dedup threshold must be within [0, 1], got " + std::to_string(threshold));
  }
}

TokenSet normalized_tokens(std::string_view text, const DedupConfig& config) {
  TokenSet tokens;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty() && !config.stopwords.contains(cur)) tokens.insert(cur);
    cur.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (c < 0x80 && (std::isspace(c) != 0 || std::ispunct(c) != 0 || std::iscntrl(c) != 0)) {
      flush();
    } else {
      cur.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  flush();
  return tokens;
}

double similarity(std::string_view a, std::string_view b, const DedupConfig& config) {
  return jaccard(normalized_tokens(a, config), normalized_tokens(b, config));
}

FilterResult filter_repeats(const PageQuestionSet& candidates, std::span<const QAPair> accepted,
                            const DedupConfig& config) {
  FilterResult result;
  result.kept.page_index = candidates.page_index;
  result.kept.kind = candidates.kind;

  if (!config.enabled) {
    result.kept = candidates;
    return result;
  }

  struct Known {
    const QAPair* pair;
    TokenSet tokens;
  };
  std::vector<Known> known;
  known.reserve(accepted.size() + candidates.pairs.size());
  for (const QAPair& p : accepted) known.push_back({&p, normalized_tokens(p.question, config)});

  std::vector<std::optional<std::size_t>> new_index(candidates.pairs.size());
  for (std::size_t i = 0; i < candidates.pairs.size(); ++i) {
    const QAPair& candidate = candidates.pairs[i];
    TokenSet tokens = normalized_tokens(candidate.question, config);
    const Known* best = nullptr;
    double best_score = -1.0;
    for (const Known& k : known) {
      const double score = jaccard(tokens, k.tokens);
      if (score >= config.threshold && score > best_score) {
        best = &k;
        best_score = score;
      }
    }
    if (best != nullptr) {
      result.dropped.push_back({candidate, *best->pair, best_score});
      continue;
    }
    new_index[i] = result.kept.pairs.size();
    result.kept.pairs.push_back(candidate);
    known.push_back({&candidates.pairs[i], std::move(tokens)});
  }

  for (const ParseIssue& issue : candidates.issues) {
    if (issue.pair_index < new_index.size() && new_index[issue.pair_index]) {
      ParseIssue moved = issue;
      moved.pair_index = *new_index[issue.pair_index];
      result.kept.issues.push_back(std::move(moved));
    } else if (issue.code == IssueCode::CountMismatch && !result.kept.pairs.empty()) {
      ParseIssue moved = issue;
      moved.pair_index = result.kept.pairs.size() - 1;
      result.kept.issues.push_back(std::move(moved));
    }
  }
  renumber(result.kept);
  return result;
}

}  // namespace quizread
