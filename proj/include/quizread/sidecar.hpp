#pragma once

#include <chrono>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "quizread/ingest.hpp"
#include "quizread/qa_parser.hpp"

namespace quizread {

inline constexpr int kSidecarFormatVersion = 1;
inline constexpr std::string_view kSidecarExtension = ".quiz.json";

struct DocumentDescriptor {
  std::string content_hash;
  std::string filename;
  std::size_t page_count = 0;

  bool operator==(const DocumentDescriptor&) const = default;
};

DocumentDescriptor descriptor_of(const SourceDocument& document);

struct Sidecar {
  DocumentDescriptor document;
  std::string generated_at;  // RFC 3339, UTC
  std::vector<PageQuestionSet> sets;  // sorted by (page_index, kind)
};

// Emits pretty-printed JSON with sorted keys and sets ordered by
// (page_index, kind). Each issue is written as "Code@position: detail" in the
// record of the question it is attached to.
//
// Throws Error(DuplicatePageSet) when two sets share page and kind,
// Error(PageOutOfRange) for a page beyond the document and
// Error(UnsupportedKind) for a kind that is never generated.
std::string serialize_sidecar(const DocumentDescriptor& document, std::span<const PageQuestionSet> sets,
                              std::string_view generated_at);
std::string serialize_sidecar(const SourceDocument& document, std::span<const PageQuestionSet> sets,
                              std::string_view generated_at);

// Throws Error(InvalidSidecar).
Sidecar parse_sidecar(std::string_view text);

// Sorts by (page_index, kind) and throws Error(DuplicatePageSet) on repeats.
void sort_sets(std::vector<PageQuestionSet>& sets);

// Replaces the set with the same (page_index, kind) or inserts it.
void upsert_set(std::vector<PageQuestionSet>& sets, PageQuestionSet set);

std::string rfc3339_utc(std::chrono::system_clock::time_point when);

// Timestamp recorded in new sidecars. SOURCE_DATE_EPOCH wins when set;
// otherwise deterministic runs get the Unix epoch and others the wall clock.
std::string sidecar_timestamp(bool deterministic);

}  // namespace quizread
