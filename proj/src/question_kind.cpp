#include "quizread/question_kind.hpp"

#include <array>
#include <cctype>
#include <string>

#include "quizread/error.hpp"

namespace quizread {

namespace {

constexpr std::array<QuestionKindInfo, 6> kKinds = {{
    {QuestionKind::Comprehension, "Comprehension", "comprehension", 'C', true,
     "Fact-based questions whose answers lie within the text; they check that the reader can "
     "restate main terms, main ideas and supporting details."},
    {QuestionKind::Analysis, "Analysis", "analysis", 'A', true,
     "Questions that push the reader beyond the text: limitations, weaknesses of the argument, "
     "comparisons with other work, and conclusions of their own."},
    {QuestionKind::Genre, "Genre", "genre", std::nullopt, false,
     "Questions about the kind of text presented, how such texts are structured and how to use them."},
    {QuestionKind::RelationshipToText, "Relationship to Text", "relationship_to_text", std::nullopt, false,
     "Questions about the expectations and intentions a reader brings to the text."},
    {QuestionKind::Interpretation, "Interpretation", "interpretation", std::nullopt, false,
     "Questions about construing the meaning of the text from textual and contextual information."},
    {QuestionKind::ReadersVoice, "Reader's Voice", "readers_voice", std::nullopt, false,
     "Questions about how the reader participates in academic discourse about the text."},
}};

std::string lower(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return out;
}

}  // namespace

std::span<const QuestionKindInfo> all_question_kinds() { return kKinds; }

const QuestionKindInfo& kind_info(QuestionKind kind) {
  return kKinds[static_cast<std::size_t>(kind)];
}

std::optional<QuestionKind> parse_question_kind(std::string_view text) {
  const std::string key = lower(text);
  for (const auto& info : kKinds) {
    if (key == info.wire_name || key == lower(info.name)) return info.kind;
  }
  return std::nullopt;
}

QuestionKind require_generation_kind(std::string_view text) {
  auto kind = parse_question_kind(text);
  if (!kind) throw Error(ErrorCode::UnsupportedKind, "unknown question kind '" + std::string(text) + "'");
  if (!generation_supported(*kind)) {
    throw Error(ErrorCode::UnsupportedKind, "question kind '" + std::string(kind_info(*kind).wire_name) +
                                                "' cannot be generated; use comprehension or analysis");
  }
  return *kind;
}

}  // namespace quizread
