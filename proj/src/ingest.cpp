#include "quizread/ingest.hpp"

#include <openssl/evp.h>

#include <array>
#include <memory>

#include "quizread/error.hpp"
#include "quizread/pdf/document.hpp"
#include "quizread/pdf/text_extractor.hpp"

namespace quizread {

namespace {

bool is_continuation(unsigned char c) { return (c & 0xC0) == 0x80; }

// Whitespace beyond ASCII that PDF text commonly carries (NBSP, thin spaces, ...).
std::size_t unicode_space_length(std::string_view s, std::size_t i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 == 0xC2 && i + 1 < s.size() && static_cast<unsigned char>(s[i + 1]) == 0xA0) return 2;
  if (b0 == 0xE2 && i + 2 < s.size()) {
    const auto b1 = static_cast<unsigned char>(s[i + 1]);
    const auto b2 = static_cast<unsigned char>(s[i + 2]);
    if (b1 == 0x80 && (b2 <= 0x8A || b2 == 0xA8 || b2 == 0xA9 || b2 == 0xAF)) return 3;
    if (b1 == 0x81 && b2 == 0x9F) return 3;
  }
  if (b0 == 0xE3 && i + 2 < s.size() && static_cast<unsigned char>(s[i + 1]) == 0x80 &&
      static_cast<unsigned char>(s[i + 2]) == 0x80) {
    return 3;
  }
  return 0;
}

}  // namespace

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::UnreadableDocument: return "UnreadableDocument";
    case ErrorCode::EncryptedDocument: return "EncryptedDocument";
    case ErrorCode::EmptyDocument: return "EmptyDocument";
    case ErrorCode::DocumentTooLarge: return "DocumentTooLarge";
    case ErrorCode::UnsupportedMediaType: return "UnsupportedMediaType";
    case ErrorCode::PageOutOfRange: return "PageOutOfRange";
    case ErrorCode::UnsupportedKind: return "UnsupportedKind";
    case ErrorCode::CountOutOfRange: return "CountOutOfRange";
    case ErrorCode::EmptyPage: return "EmptyPage";
    case ErrorCode::ProviderTimeout: return "ProviderTimeout";
    case ErrorCode::ProviderRejected: return "ProviderRejected";
    case ErrorCode::CredentialMissing: return "CredentialMissing";
    case ErrorCode::NoQuestionsFound: return "NoQuestionsFound";
    case ErrorCode::MalformedResponse: return "MalformedResponse";
    case ErrorCode::DuplicatePageSet: return "DuplicatePageSet";
    case ErrorCode::InvalidSidecar: return "InvalidSidecar";
    case ErrorCode::JobRejected: return "JobRejected";
    case ErrorCode::JobAlreadyRunning: return "JobAlreadyRunning";
    case ErrorCode::InvalidRequest: return "InvalidRequest";
    case ErrorCode::StorageFailure: return "StorageFailure";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

bool looks_like_pdf(std::string_view bytes) {
  return bytes.substr(0, 1024).find("%PDF-") != std::string_view::npos;
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0x0F]);
  }
  return out;
}

std::string document_id_for(std::string_view content_hash) {
  return std::string(content_hash.substr(0, 24));
}

std::string normalize_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (c < 0x20 || c == 0x7F || c == ' ') {
      pending_space = true;
      ++i;
      continue;
    }
    if (const std::size_t n = unicode_space_length(text, i); n > 0) {
      pending_space = true;
      i += n;
      continue;
    }
    if (pending_space && !out.empty()) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(c));
    ++i;
  }
  return out;
}

std::size_t utf8_length(std::string_view text) {
  std::size_t n = 0;
  for (char c : text) {
    if (!is_continuation(static_cast<unsigned char>(c))) ++n;
  }
  return n;
}

std::string_view truncate_utf8(std::string_view text, std::size_t max_chars) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (is_continuation(static_cast<unsigned char>(text[i]))) continue;
    if (count == max_chars) return text.substr(0, i);
    ++count;
  }
  return text;
}

ExtractedDocument extract_document(std::string_view pdf_bytes, std::string filename, const IngestOptions& options) {
  if (pdf_bytes.empty()) throw Error(ErrorCode::UnreadableDocument, "document is empty (0 bytes)");
  if (pdf_bytes.size() > options.max_bytes) {
    throw Error(ErrorCode::DocumentTooLarge, "document exceeds the upload limit of " +
                                                 std::to_string(options.max_bytes) + " bytes");
  }
  if (!looks_like_pdf(pdf_bytes)) throw Error(ErrorCode::UnreadableDocument, "not a PDF file (missing %PDF- header)");

  std::optional<pdf::Document> doc;
  try {
    doc.emplace(pdf::Document::load(std::string(pdf_bytes)));
  } catch (const pdf::EncryptedError&) {
    throw Error(ErrorCode::EncryptedDocument, "document is password-protected");
  } catch (const std::exception& e) {
    throw Error(ErrorCode::UnreadableDocument, std::string("malformed PDF: ") + e.what());
  }
  if (doc->page_count() == 0) throw Error(ErrorCode::EmptyDocument, "document has no pages");

  ExtractedDocument result;
  result.pages.reserve(doc->page_count());
  for (std::size_t i = 0; i < doc->page_count(); ++i) {
    pdf::RawPageText raw;
    try {
      raw = pdf::extract_page_text(*doc, i);
    } catch (const std::exception&) {
      raw = {};
    }
    PageText page;
    page.page_index = i;
    page.text = normalize_whitespace(raw.text);
    page.char_count = utf8_length(page.text);
    page.has_text_layer = raw.has_text_layer;
    result.pages.push_back(std::move(page));
  }

  SourceDocument& meta = result.document;
  meta.content_hash = sha256_hex(pdf_bytes);
  meta.id = document_id_for(meta.content_hash);
  meta.filename = std::move(filename);
  meta.byte_size = pdf_bytes.size();
  meta.page_count = result.pages.size();
  return result;
}

const PageText& page_text(std::span<const PageText> pages, std::int64_t index) {
  if (index >= 0) {
    for (const PageText& p : pages) {
      if (p.page_index == static_cast<std::size_t>(index)) return p;
    }
  }
  throw Error(ErrorCode::PageOutOfRange,
              "page " + std::to_string(index) + " is outside [0, " + std::to_string(pages.size()) + ")");
}

}  // namespace quizread
