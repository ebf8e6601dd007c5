#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "quizread/ingest.hpp"
#include "quizread/question_kind.hpp"

namespace quizread {

inline constexpr int kMinQuestionsPerPage = 1;
inline constexpr int kMaxQuestionsPerPage = 10;

// Marker that introduces every answer. The prompt asks for it and the QA
// parser looks for it; both read this constant.
inline constexpr std::string_view kAnswerMarker = "Answer:";

struct GenerationRequest {
  QuestionKind kind = QuestionKind::Comprehension;
  int questions_per_page = 4;
  std::vector<std::size_t> pages;  // 0-based; empty means every page

  bool operator==(const GenerationRequest&) const = default;
};

// Throws Error(CountOutOfRange) outside [1, 10].
void check_question_count(int n);

// Checks kind, count and page bounds against a document of `page_count`
// pages. Throws Error with UnsupportedKind, CountOutOfRange or PageOutOfRange.
void validate_request(const GenerationRequest& request, std::size_t page_count);

// Requested page indices, ascending and unique.
std::vector<std::size_t> resolve_pages(const GenerationRequest& request, std::size_t page_count);

// Parses "a-b,c" with 1-based page numbers into 0-based indices.
std::vector<std::size_t> parse_page_spec(std::string_view spec, std::size_t page_count);

// Fills the question-generation template for one page. The page text is cut
// to `char_budget` code points first.
std::string build_prompt(const PageText& page, QuestionKind kind, int n,
                         std::size_t char_budget = kDefaultPageCharBudget);

}  // namespace quizread
