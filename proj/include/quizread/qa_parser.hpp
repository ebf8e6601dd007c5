#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "quizread/question_kind.hpp"

namespace quizread {

enum class IssueCode { MissingAnswer, UnlabeledQuestion, CountMismatch, RenumberedLabel };

std::string_view to_string(IssueCode code);
std::optional<IssueCode> parse_issue_code(std::string_view text);

struct ParseIssue {
  IssueCode code = IssueCode::MissingAnswer;
  std::string detail;
  std::size_t position = 0;    // character offset in the raw completion
  std::size_t pair_index = 0;  // pair the issue is attached to

  bool operator==(const ParseIssue&) const = default;
};

struct QAPair {
  std::string label;  // kind prefix + number, e.g. "C1"
  std::string question;
  std::string answer;  // empty only when a MissingAnswer issue says so

  bool operator==(const QAPair&) const = default;
};

struct PageQuestionSet {
  std::size_t page_index = 0;
  QuestionKind kind = QuestionKind::Comprehension;
  std::vector<QAPair> pairs;
  std::vector<ParseIssue> issues;  // ordered by pair_index

  bool operator==(const PageQuestionSet&) const = default;
};

// Parses a raw completion into labeled pairs.
//
// A question starts on a line holding the kind's prefix (any case) and a
// number followed by '.', ':', ')' or whitespace; an answer starts on a line
// beginning with "Answer:" (any case) and runs to the next question. Bulleted
// ("-", "•") and bare "N." / "N)" lines are accepted as questions and
// relabeled. Labels are renumbered 1..k. At most expected_n + 5 pairs are
// returned.
//
// Throws Error(NoQuestionsFound) when nothing is recognised, and
// Error(MalformedResponse) in strict mode when any issue was recorded.
PageQuestionSet parse_qa(std::string_view raw, QuestionKind kind, int expected_n, bool strict,
                         std::size_t page_index = 0);

std::string make_label(QuestionKind kind, int number);
bool is_valid_label(std::string_view label);

// Canonical rendering, "<label>. <question>\nAnswer: <answer>\n" per pair.
std::string render_canonical(std::span<const QAPair> pairs);

// Relabels pairs 1..k with the kind's prefix.
void renumber(PageQuestionSet& set);

}  // namespace quizread
