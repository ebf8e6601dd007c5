#include "quizread/prompting.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "quizread/error.hpp"

namespace quizread {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::size_t parse_page_number(std::string_view token, std::string_view spec) {
  token = trim(token);
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (token.empty() || ec != std::errc{} || ptr != token.data() + token.size()) {
    throw Error(ErrorCode::JobRejected, "invalid page list '" + std::string(spec) + "'");
  }
  return value;
}

}  // namespace

void check_question_count(int n) {
  if (n < kMinQuestionsPerPage || n > kMaxQuestionsPerPage) {
    throw Error(ErrorCode::CountOutOfRange, "questions per page must be between " +
                                                std::to_string(kMinQuestionsPerPage) + " and " +
                                                std::to_string(kMaxQuestionsPerPage) + ", got " +
                                                std::to_string(n));
  }
}

void validate_request(const GenerationRequest& request, std::size_t page_count) {
  if (!generation_supported(request.kind)) {
    throw Error(ErrorCode::UnsupportedKind,
                "question kind '" + std::string(wire_name(request.kind)) + "' cannot be generated");
  }
  check_question_count(request.questions_per_page);
  if (page_count == 0) throw Error(ErrorCode::PageOutOfRange, "document has no pages");
  for (std::size_t p : request.pages) {
    if (p >= page_count) {
      throw Error(ErrorCode::PageOutOfRange,
                  "page " + std::to_string(p) + " is outside [0, " + std::to_string(page_count) + ")");
    }
  }
}

std::vector<std::size_t> resolve_pages(const GenerationRequest& request, std::size_t page_count) {
  std::vector<std::size_t> pages;
  if (request.pages.empty()) {
    pages.resize(page_count);
    for (std::size_t i = 0; i < page_count; ++i) pages[i] = i;
    return pages;
  }
  std::set<std::size_t> unique(request.pages.begin(), request.pages.end());
  pages.assign(unique.begin(), unique.end());
  return pages;
}

std::vector<std::size_t> parse_page_spec(std::string_view spec, std::size_t page_count) {
  std::set<std::size_t> pages;
  std::size_t start = 0;
  while (start <= spec.size()) {
    std::size_t comma = spec.find(',', start);
    if (comma == std::string_view::npos) comma = spec.size();
    std::string_view part = trim(spec.substr(start, comma - start));
    start = comma + 1;
    if (part.empty()) {
      throw Error(ErrorCode::JobRejected, "invalid page list '" + std::string(spec) + "'");
    }
    std::size_t first = 0;
    std::size_t last = 0;
    if (auto dash = part.find('-'); dash != std::string_view::npos) {
      first = parse_page_number(part.substr(0, dash), spec);
      last = parse_page_number(part.substr(dash + 1), spec);
    } else {
      first = last = parse_page_number(part, spec);
    }
    if (first == 0 || last < first) {
      throw Error(ErrorCode::JobRejected, "invalid page range '" + std::string(part) + "' (pages start at 1)");
    }
    if (last > page_count) {
      throw Error(ErrorCode::PageOutOfRange, "page " + std::to_string(last) + " is beyond the document's " +
                                                 std::to_string(page_count) + " pages");
    }
    for (std::size_t p = first; p <= last; ++p) pages.insert(p - 1);
  }
  return {pages.begin(), pages.end()};
}

std::string build_prompt(const PageText& page, QuestionKind kind, int n, std::size_t char_budget) {
  if (!generation_supported(kind)) {
    throw Error(ErrorCode::UnsupportedKind,
                "question kind '" + std::string(wire_name(kind)) + "' cannot be generated");
  }
  check_question_count(n);
  if (page.text.empty()) {
    throw Error(ErrorCode::EmptyPage, "page " + std::to_string(page.page_index) + " has no extractable text");
  }

  const std::string_view text = truncate_utf8(page.text, char_budget);
  const char prefix = *kind_info(kind).label_prefix;
  const std::string count = std::to_string(n);

  std::string prompt;
  if (kind == QuestionKind::Comprehension) {
    prompt = "Write " + count +
             " comprehension questions followed by answers to the questions on a new line about the "
             "following research article: " +
             std::string(text) + ". Number these questions with a " + prefix + " (like " + prefix + "1, " +
             prefix + "2, etc) and output each question to a new line. Output an answer preceded with '" +
             std::string(kAnswerMarker) + "' to a new line after each question.";
  } else {
    prompt = "Write " + count +
             " analysis questions followed by answers to the questions on a new line about the following "
             "research article: " +
             std::string(text) + ". Number these questions with an " + prefix + " (like " + prefix + "1, " +
             prefix + "2, etc) and output each question to a new line. Output an answer preceded with '" +
             std::string(kAnswerMarker) +
             "' to a new line after each question. Analysis questions are questions that force the reader "
             "to reflect and expand beyond the scope of the article.";
  }
  return prompt;
}

}  // namespace quizread
