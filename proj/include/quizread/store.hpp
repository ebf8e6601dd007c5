#pragma once

#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "quizread/ingest.hpp"
#include "quizread/qa_parser.hpp"

namespace quizread {

// Filesystem document store. Each document lives in <root>/<content_hash>/
// holding source.pdf, document.json (metadata and extracted page text) and
// questions.quiz.json. Lookups accept the document id or the full hash.
class Store {
 public:
  explicit Store(std::filesystem::path root);

  struct PutResult {
    SourceDocument document;
    bool created = false;  // false when the same bytes were stored before
  };

  // Ingests and persists a PDF; re-uploading identical bytes returns the
  // existing document. Ingest errors propagate unchanged.
  PutResult put_document(std::string_view pdf_bytes, std::string filename, const IngestOptions& options = {});

  std::optional<SourceDocument> find_document(std::string_view id_or_hash) const;
  // Throws Error(NotFound).
  SourceDocument get_document(std::string_view id_or_hash) const;
  std::vector<PageText> pages(std::string_view id_or_hash) const;
  std::string read_pdf(std::string_view id_or_hash) const;

  // Writes the whole sidecar, replacing any previous one.
  void save_results(const SourceDocument& document, std::span<const PageQuestionSet> sets,
                    std::string_view generated_at);
  // Replaces stored sets sharing (page_index, kind) and keeps the rest.
  void merge_results(const SourceDocument& document, std::span<const PageQuestionSet> sets,
                     std::string_view generated_at);
  // Stored sets; empty when nothing was generated yet. Throws Error(NotFound)
  // for an unknown document.
  std::vector<PageQuestionSet> load_results(std::string_view id_or_hash) const;
  std::filesystem::path sidecar_path(const SourceDocument& document) const;

  const std::filesystem::path& root() const { return root_; }

  // Test hook run after a temp file is fully written and before it is
  // renamed over the target; throwing from it aborts the write.
  static void set_before_rename_hook(std::function<void(const std::filesystem::path&)> hook);

 private:
  std::filesystem::path dir_for(std::string_view content_hash) const;
  std::optional<std::string> resolve_hash(std::string_view id_or_hash) const;

  std::filesystem::path root_;
  mutable std::mutex write_mu_;
};

// Writes `bytes` to a temp file beside `target` and renames it into place.
// Throws Error(StorageFailure).
void write_file_atomic(const std::filesystem::path& target, std::string_view bytes);

// Throws Error(StorageFailure) when the file cannot be read.
std::string read_file(const std::filesystem::path& path);

}  // namespace quizread
