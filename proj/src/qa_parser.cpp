#include "quizread/qa_parser.hpp"

#include <algorithm>
#include <cctype>

#include "quizread/error.hpp"
#include "quizread/ingest.hpp"
#include "quizread/prompting.hpp"

namespace quizread {

namespace {

constexpr int kRunawayMargin = 5;

struct Line {
  std::string_view text;
  std::size_t offset;
};

struct Draft {
  enum class Origin { Labeled, Bulleted, Unlabeled } origin = Origin::Labeled;
  std::string original_label;
  std::vector<std::string_view> question;
  std::vector<std::string_view> answer;
  bool has_answer = false;
  std::size_t position = 0;
};

std::vector<Line> split_lines(std::string_view raw) {
  std::vector<Line> lines;
  std::size_t start = 0;
  while (start <= raw.size()) {
    std::size_t end = raw.find('\n', start);
    if (end == std::string_view::npos) end = raw.size();
    std::string_view text = raw.substr(start, end - start);
    if (!text.empty() && text.back() == '\r') text.remove_suffix(1);
    lines.push_back({text, start});
    if (end == raw.size()) break;
    start = end + 1;
  }
  return lines;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())) != 0) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())) != 0) s.remove_suffix(1);
  return s;
}

bool iequals_prefix(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) != std::tolower(static_cast<unsigned char>(prefix[i]))) {
      return false;
    }
  }
  return true;
}

std::size_t ifind(std::string_view s, std::string_view needle) {
  if (needle.empty() || s.size() < needle.size()) return std::string_view::npos;
  for (std::size_t i = 0; i + needle.size() <= s.size(); ++i) {
    if (iequals_prefix(s.substr(i), needle)) return i;
  }
  return std::string_view::npos;
}

// "C3. text" -> label "C3", rest "text".
bool match_labeled(std::string_view line, char prefix, std::string& label, std::string_view& rest) {
  std::string_view s = trim(line);
  if (s.size() < 2) return false;
  if (std::toupper(static_cast<unsigned char>(s[0])) != prefix) return false;
  std::size_t i = 1;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])) != 0) ++i;
  if (i == 1 || i - 1 > 4) return false;
  if (i < s.size()) {
    const char sep = s[i];
    if (sep == '.' || sep == ':' || sep == ')') {
      ++i;
    } else if (std::isspace(static_cast<unsigned char>(sep)) == 0) {
      return false;
    }
  }
  label = std::string(s.substr(0, i));
  label[0] = prefix;
  while (!label.empty() && (label.back() == '.' || label.back() == ':' || label.back() == ')')) label.pop_back();
  rest = trim(s.substr(i));
  return true;
}

// "Answer: text" -> rest "text".
bool match_answer(std::string_view line, std::string_view& rest) {
  std::string_view s = trim(line);
  constexpr std::string_view kWord = kAnswerMarker.substr(0, kAnswerMarker.size() - 1);  // "Answer"
  if (!iequals_prefix(s, kWord)) return false;
  std::size_t i = kWord.size();
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  if (i >= s.size() || s[i] != ':') return false;
  rest = trim(s.substr(i + 1));
  return true;
}

// "- text", "• text", "3. text", "3) text" -> rest "text".
bool match_lenient(std::string_view line, std::string_view& rest) {
  std::string_view s = trim(line);
  if (s.empty()) return false;
  constexpr std::string_view kBullet = "\xE2\x80\xA2";  // U+2022
  if (s.starts_with(kBullet)) {
    rest = trim(s.substr(kBullet.size()));
    return !rest.empty();
  }
  if (s[0] == '-') {
    if (s.size() < 2 || std::isspace(static_cast<unsigned char>(s[1])) == 0) return false;
    rest = trim(s.substr(1));
    return !rest.empty();
  }
  std::size_t i = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])) != 0) ++i;
  if (i == 0 || i > 3 || i >= s.size() || (s[i] != '.' && s[i] != ')')) return false;
  if (i + 1 < s.size() && std::isspace(static_cast<unsigned char>(s[i + 1])) == 0) return false;
  rest = trim(s.substr(i + 1));
  return !rest.empty();
}

std::string join_normalized(const std::vector<std::string_view>& parts) {
  std::string joined;
  for (std::string_view p : parts) {
    if (p.empty()) continue;
    if (!joined.empty()) joined.push_back(' ');
    joined.append(p);
  }
  return normalize_whitespace(joined);
}

bool ends_with_question_mark(std::string_view s) {
  s = trim(s);
  return !s.empty() && s.back() == '?';
}

}  // namespace

std::string_view to_string(IssueCode code) {
  switch (code) {
    case IssueCode::MissingAnswer: return "MissingAnswer";
    case IssueCode::UnlabeledQuestion: return "UnlabeledQuestion";
    case IssueCode::CountMismatch: return "CountMismatch";
    case IssueCode::RenumberedLabel: return "RenumberedLabel";
  }
  return "Unknown";
}

std::optional<IssueCode> parse_issue_code(std::string_view text) {
  for (IssueCode c : {IssueCode::MissingAnswer, IssueCode::UnlabeledQuestion, IssueCode::CountMismatch,
                      IssueCode::RenumberedLabel}) {
    if (to_string(c) == text) return c;
  }
  return std::nullopt;
}

std::string make_label(QuestionKind kind, int number) {
  const auto& info = kind_info(kind);
  if (!info.label_prefix) {
    throw Error(ErrorCode::UnsupportedKind, "question kind '" + std::string(info.wire_name) + "' has no label prefix");
  }
  return std::string(1, *info.label_prefix) + std::to_string(number);
}

bool is_valid_label(std::string_view label) {
  if (label.size() < 2) return false;
  if (std::isupper(static_cast<unsigned char>(label[0])) == 0) return false;
  return std::all_of(label.begin() + 1, label.end(),
                     [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; });
}

std::string render_canonical(std::span<const QAPair> pairs) {
  std::string out;
  for (const QAPair& p : pairs) {
    out += p.label + ". " + p.question + "\n" + std::string(kAnswerMarker) + " " + p.answer + "\n";
  }
  return out;
}

void renumber(PageQuestionSet& set) {
  for (std::size_t k = 0; k < set.pairs.size(); ++k) set.pairs[k].label = make_label(set.kind, static_cast<int>(k + 1));
}

PageQuestionSet parse_qa(std::string_view raw, QuestionKind kind, int expected_n, bool strict, std::size_t page_index) {
  check_question_count(expected_n);
  const auto& info = kind_info(kind);
  if (!info.generation_supported || !info.label_prefix) {
    throw Error(ErrorCode::UnsupportedKind, "question kind '" + std::string(info.wire_name) + "' cannot be parsed");
  }
  const char prefix = *info.label_prefix;
  const std::size_t cap = static_cast<std::size_t>(expected_n + kRunawayMargin);

  enum class Mode { Preamble, Question, Answer } mode = Mode::Preamble;
  std::vector<Draft> drafts;
  std::vector<Line> preamble;
  bool truncated = false;

  auto start_draft = [&](Draft::Origin origin, std::string label, std::size_t position) -> bool {
    if (drafts.size() >= cap) {
      truncated = true;
      return false;
    }
    Draft d;
    d.origin = origin;
    d.original_label = std::move(label);
    d.position = position;
    drafts.push_back(std::move(d));
    mode = Mode::Question;
    return true;
  };

  // A question line may carry its answer inline: "C1. What? Answer: That."
  auto take_question_text = [&](std::string_view rest) {
    Draft& d = drafts.back();
    const std::size_t inline_answer = ifind(rest, kAnswerMarker);
    if (inline_answer != std::string_view::npos && inline_answer > 0) {
      d.question.push_back(trim(rest.substr(0, inline_answer)));
      d.answer.push_back(trim(rest.substr(inline_answer + kAnswerMarker.size())));
      d.has_answer = true;
      mode = Mode::Answer;
    } else {
      d.question.push_back(rest);
    }
  };

  for (const Line& line : split_lines(raw)) {
    if (truncated) break;
    const std::string_view content = trim(line.text);
    if (content.empty()) continue;
    const std::size_t position = line.offset + static_cast<std::size_t>(content.data() - line.text.data());

    std::string label;
    std::string_view rest;
    if (match_labeled(content, prefix, label, rest)) {
      if (!start_draft(Draft::Origin::Labeled, std::move(label), position)) break;
      take_question_text(rest);
      continue;
    }
    if (match_answer(content, rest)) {
      if (mode == Mode::Question) {
        Draft& d = drafts.back();
        d.has_answer = true;
        d.answer.push_back(rest);
        mode = Mode::Answer;
      } else if (mode == Mode::Answer) {
        Draft& d = drafts.back();
        // A trailing question line inside the previous answer was an unlabeled question.
        if (d.answer.size() > 1 && ends_with_question_mark(d.answer.back())) {
          const std::string_view q = d.answer.back();
          d.answer.pop_back();
          const std::size_t q_pos = static_cast<std::size_t>(q.data() - raw.data());
          if (!start_draft(Draft::Origin::Unlabeled, {}, q_pos)) break;
          drafts.back().question.push_back(q);
          drafts.back().has_answer = true;
          drafts.back().answer.push_back(rest);
          mode = Mode::Answer;
        } else {
          d.answer.push_back(rest);
        }
      } else if (!preamble.empty()) {
        const Line q = preamble.back();
        preamble.pop_back();
        const std::string_view qt = trim(q.text);
        const std::size_t q_pos = q.offset + static_cast<std::size_t>(qt.data() - q.text.data());
        if (!start_draft(Draft::Origin::Unlabeled, {}, q_pos)) break;
        drafts.back().question.push_back(qt);
        drafts.back().has_answer = true;
        drafts.back().answer.push_back(rest);
        mode = Mode::Answer;
      }
      continue;
    }
    if (match_lenient(content, rest) && (mode != Mode::Answer || ends_with_question_mark(rest))) {
      if (!start_draft(Draft::Origin::Bulleted, {}, position)) break;
      take_question_text(rest);
      continue;
    }
    switch (mode) {
      case Mode::Preamble:
        preamble.push_back(line);
        break;
      case Mode::Question:
        drafts.back().question.push_back(content);
        break;
      case Mode::Answer:
        drafts.back().answer.push_back(content);
        break;
    }
  }

  PageQuestionSet set;
  set.page_index = page_index;
  set.kind = kind;
  for (const Draft& d : drafts) {
    std::string question = join_normalized(d.question);
    if (question.empty()) continue;
    const std::size_t index = set.pairs.size();
    const std::string label = make_label(kind, static_cast<int>(index + 1));

    switch (d.origin) {
      case Draft::Origin::Bulleted:
        set.issues.push_back({IssueCode::RenumberedLabel, "unlabeled list item relabeled " + label, d.position, index});
        break;
      case Draft::Origin::Unlabeled:
        set.issues.push_back(
            {IssueCode::UnlabeledQuestion, "question without a label assigned " + label, d.position, index});
        break;
      case Draft::Origin::Labeled:
        if (d.original_label != label) {
          set.issues.push_back({IssueCode::RenumberedLabel, "label " + d.original_label + " renumbered to " + label,
                                d.position, index});
        }
        break;
    }
    std::string answer = join_normalized(d.answer);
    if (answer.empty()) {
      set.issues.push_back({IssueCode::MissingAnswer, "no answer given for " + label, d.position, index});
    }
    set.pairs.push_back({label, std::move(question), std::move(answer)});
  }

  if (set.pairs.empty()) {
    throw Error(ErrorCode::NoQuestionsFound, "no " + std::string(info.wire_name) + " questions found in provider output");
  }
  if (set.pairs.size() != static_cast<std::size_t>(expected_n) || truncated) {
    const std::size_t last = set.pairs.size() - 1;
    std::string detail = "expected " + std::to_string(expected_n) + " questions, found " +
                         std::to_string(set.pairs.size());
    if (truncated) detail += " (output truncated after " + std::to_string(cap) + ")";
    set.issues.push_back({IssueCode::CountMismatch, std::move(detail), drafts.empty() ? 0 : drafts.back().position, last});
  }
  std::stable_sort(set.issues.begin(), set.issues.end(),
                   [](const ParseIssue& a, const ParseIssue& b) { return a.pair_index < b.pair_index; });

  if (strict && !set.issues.empty()) {
    throw Error(ErrorCode::MalformedResponse, "provider output deviates from the expected format: " +
                                                  std::string(to_string(set.issues.front().code)) + " (" +
                                                  set.issues.front().detail + ")");
  }
  return set;
}

}  // namespace quizread
