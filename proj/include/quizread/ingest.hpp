#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace quizread {

inline constexpr std::size_t kDefaultMaxUploadBytes = 50u * 1024u * 1024u;
inline constexpr std::size_t kDefaultPageCharBudget = 12000;

struct SourceDocument {
  std::string id;            // derived from content_hash, stable across re-uploads
  std::string filename;
  std::size_t byte_size = 0;
  std::size_t page_count = 0;
  std::string content_hash;  // lowercase hex SHA-256 of the raw bytes

  bool operator==(const SourceDocument&) const = default;
};

struct PageText {
  std::size_t page_index = 0;
  std::string text;           // whitespace-normalized
  std::size_t char_count = 0;  // Unicode code points in `text`
  bool has_text_layer = false;

  bool operator==(const PageText&) const = default;
};

struct ExtractedDocument {
  SourceDocument document;
  std::vector<PageText> pages;
};

struct IngestOptions {
  std::size_t max_bytes = kDefaultMaxUploadBytes;
};

// Parses a PDF and extracts one PageText per physical page, in page order.
// Throws Error with UnreadableDocument, EncryptedDocument, EmptyDocument or
// DocumentTooLarge.
ExtractedDocument extract_document(std::string_view pdf_bytes, std::string filename,
                                   const IngestOptions& options = {});

// Throws Error(PageOutOfRange) when no page carries `index`.
const PageText& page_text(std::span<const PageText> pages, std::int64_t index);

bool looks_like_pdf(std::string_view bytes);
std::string sha256_hex(std::string_view bytes);
std::string document_id_for(std::string_view content_hash);

// Collapses whitespace runs (and control characters) to single spaces and trims.
std::string normalize_whitespace(std::string_view text);

std::size_t utf8_length(std::string_view text);

// Longest prefix of `text` holding at most `max_chars` code points.
std::string_view truncate_utf8(std::string_view text, std::size_t max_chars);

}  // namespace quizread
