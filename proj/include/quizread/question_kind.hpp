#pragma once

#include <optional>
#include <span>
#include <string_view>

namespace quizread {

// The six reading-performance categories questions can target. Only
// Comprehension and Analysis are generated.
enum class QuestionKind {
  Comprehension,
  Analysis,
  Genre,
  RelationshipToText,
  Interpretation,
  ReadersVoice,
};

struct QuestionKindInfo {
  QuestionKind kind;
  std::string_view name;        // display name
  std::string_view wire_name;   // lowercase identifier used in JSON and flags
  std::optional<char> label_prefix;
  bool generation_supported;
  std::string_view description;
};

std::span<const QuestionKindInfo> all_question_kinds();
const QuestionKindInfo& kind_info(QuestionKind kind);

inline bool generation_supported(QuestionKind kind) { return kind_info(kind).generation_supported; }
inline std::string_view wire_name(QuestionKind kind) { return kind_info(kind).wire_name; }

// Case-insensitive lookup by wire name or display name.
std::optional<QuestionKind> parse_question_kind(std::string_view text);

// Like parse_question_kind, but also requires generation support. Throws
// Error(UnsupportedKind) otherwise.
QuestionKind require_generation_kind(std::string_view text);

}  // namespace quizread
