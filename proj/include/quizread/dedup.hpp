#pragma once

#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "quizread/qa_parser.hpp"

namespace quizread {

// Built-in English stopword list (lowercase).
const std::set<std::string, std::less<>>& default_stopwords();

struct DedupConfig {
  double threshold = 0.6;
  bool enabled = true;
  std::set<std::string, std::less<>> stopwords = default_stopwords();

  // Throws Error(InvalidConfig) unless 0 <= threshold <= 1.
  void validate() const;
};

// Lowercased tokens with punctuation treated as separators and stopwords removed.
std::set<std::string, std::less<>> normalized_tokens(std::string_view text, const DedupConfig& config);

// Jaccard coefficient of the normalized token sets. Two empty sets score 1,
// one empty set scores 0.
double similarity(std::string_view a, std::string_view b, const DedupConfig& config);

struct DroppedQuestion {
  QAPair question;
  QAPair matched;  // the accepted or earlier kept question it repeats
  double score = 0.0;

  bool operator==(const DroppedQuestion&) const = default;
};

struct FilterResult {
  PageQuestionSet kept;  // relabeled 1..k
  std::vector<DroppedQuestion> dropped;
};

// Drops every candidate whose question scores >= threshold against an
// accepted question or an earlier kept candidate. Issues follow their pair;
// a CountMismatch on a dropped pair moves to the last kept pair.
FilterResult filter_repeats(const PageQuestionSet& candidates, std::span<const QAPair> accepted,
                            const DedupConfig& config);

}  // namespace quizread
