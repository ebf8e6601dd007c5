#include "quizread/store.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fstream>
#include <sstream>
#include <system_error>

#include <unistd.h>

#include <json.hpp>

#include "quizread/error.hpp"
#include "quizread/sidecar.hpp"

namespace quizread {

namespace fs = std::filesystem;

namespace {

using json = nlohmann::json;

constexpr const char* kPdfName = "source.pdf";
constexpr const char* kMetaName = "document.json";
constexpr const char* kQuestionsName = "questions.quiz.json";

std::mutex g_hook_mu;
std::function<void(const fs::path&)> g_before_rename;

bool is_lower_hex(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
  });
}

json meta_to_json(const ExtractedDocument& extracted) {
  const SourceDocument& d = extracted.document;
  json pages = json::array();
  for (const PageText& p : extracted.pages) {
    pages.push_back({{"page_index", p.page_index},
                     {"text", p.text},
                     {"char_count", p.char_count},
                     {"has_text_layer", p.has_text_layer}});
  }
  return {{"id", d.id},
          {"filename", d.filename},
          {"byte_size", d.byte_size},
          {"page_count", d.page_count},
          {"content_hash", d.content_hash},
          {"pages", pages}};
}

json read_meta(const fs::path& dir) {
  try {
    return json::parse(read_file(dir / kMetaName));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::StorageFailure, "corrupt document metadata in " + dir.string() + ": " + e.what());
  }
}

SourceDocument document_from_meta(const json& meta) {
  try {
    SourceDocument d;
    d.id = meta.at("id").get<std::string>();
    d.filename = meta.at("filename").get<std::string>();
    d.byte_size = meta.at("byte_size").get<std::size_t>();
    d.page_count = meta.at("page_count").get<std::size_t>();
    d.content_hash = meta.at("content_hash").get<std::string>();
    return d;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::StorageFailure, std::string("corrupt document metadata: ") + e.what());
  }
}

}  // namespace

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::StorageFailure, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::StorageFailure, "cannot read " + path.string());
  return std::move(buf).str();
}

void write_file_atomic(const fs::path& target, std::string_view bytes) {
  static std::atomic<unsigned> counter{0};
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::StorageFailure, "cannot create " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      fs::remove(tmp, ignored);
      throw Error(ErrorCode::StorageFailure, "cannot write " + tmp.string());
    }
  }
  std::function<void(const fs::path&)> hook;
  {
    std::lock_guard lock(g_hook_mu);
    hook = g_before_rename;
  }
  if (hook) {
    try {
      hook(tmp);
    } catch (const std::exception& e) {
      std::error_code ignored;
      fs::remove(tmp, ignored);
      throw Error(ErrorCode::StorageFailure, "write of " + target.string() + " interrupted: " + e.what());
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw Error(ErrorCode::StorageFailure, "cannot move " + tmp.string() + " into place: " + ec.message());
  }
}

Store::Store(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) throw Error(ErrorCode::StorageFailure, "cannot create storage directory " + root_.string() + ": " + ec.message());
}

void Store::set_before_rename_hook(std::function<void(const fs::path&)> hook) {
  std::lock_guard lock(g_hook_mu);
  g_before_rename = std::move(hook);
}

fs::path Store::dir_for(std::string_view content_hash) const { return root_ / std::string(content_hash); }

std::optional<std::string> Store::resolve_hash(std::string_view id_or_hash) const {
  if (!is_lower_hex(id_or_hash) || id_or_hash.size() > 64) return std::nullopt;
  std::error_code ec;
  if (id_or_hash.size() == 64) {
    if (fs::exists(dir_for(id_or_hash) / kMetaName, ec)) return std::string(id_or_hash);
    return std::nullopt;
  }
  for (const auto& entry : fs::directory_iterator(root_, ec)) {
    const std::string name = entry.path().filename().string();
    if (name.size() == 64 && name.starts_with(id_or_hash) && document_id_for(name) == id_or_hash &&
        fs::exists(entry.path() / kMetaName, ec)) {
      return name;
    }
  }
  return std::nullopt;
}

Store::PutResult Store::put_document(std::string_view pdf_bytes, std::string filename, const IngestOptions& options) {
  ExtractedDocument extracted = extract_document(pdf_bytes, std::move(filename), options);
  std::lock_guard lock(write_mu_);
  const fs::path dir = dir_for(extracted.document.content_hash);
  std::error_code ec;
  if (fs::exists(dir / kMetaName, ec)) {
    return {document_from_meta(read_meta(dir)), false};
  }
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::StorageFailure, "cannot create " + dir.string() + ": " + ec.message());
  write_file_atomic(dir / kPdfName, pdf_bytes);
  write_file_atomic(dir / kMetaName, meta_to_json(extracted).dump(2) + "\n");
  return {extracted.document, true};
}

std::optional<SourceDocument> Store::find_document(std::string_view id_or_hash) const {
  const auto hash = resolve_hash(id_or_hash);
  if (!hash) return std::nullopt;
  return document_from_meta(read_meta(dir_for(*hash)));
}

SourceDocument Store::get_document(std::string_view id_or_hash) const {
  auto doc = find_document(id_or_hash);
  if (!doc) throw Error(ErrorCode::NotFound, "no document '" + std::string(id_or_hash) + "'");
  return *doc;
}

std::vector<PageText> Store::pages(std::string_view id_or_hash) const {
  const SourceDocument doc = get_document(id_or_hash);
  const json meta = read_meta(dir_for(doc.content_hash));
  std::vector<PageText> out;
  try {
    for (const json& p : meta.at("pages")) {
      PageText page;
      page.page_index = p.at("page_index").get<std::size_t>();
      page.text = p.at("text").get<std::string>();
      page.char_count = p.at("char_count").get<std::size_t>();
      page.has_text_layer = p.at("has_text_layer").get<bool>();
      out.push_back(std::move(page));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::StorageFailure, std::string("corrupt page text: ") + e.what());
  }
  return out;
}

std::string Store::read_pdf(std::string_view id_or_hash) const {
  const SourceDocument doc = get_document(id_or_hash);
  return read_file(dir_for(doc.content_hash) / kPdfName);
}

fs::path Store::sidecar_path(const SourceDocument& document) const {
  return dir_for(document.content_hash) / kQuestionsName;
}

void Store::save_results(const SourceDocument& document, std::span<const PageQuestionSet> sets,
                         std::string_view generated_at) {
  const std::string text = serialize_sidecar(document, sets, generated_at);
  std::lock_guard lock(write_mu_);
  write_file_atomic(sidecar_path(document), text);
}

void Store::merge_results(const SourceDocument& document, std::span<const PageQuestionSet> sets,
                          std::string_view generated_at) {
  std::lock_guard lock(write_mu_);
  std::vector<PageQuestionSet> merged;
  std::error_code ec;
  if (fs::exists(sidecar_path(document), ec)) merged = parse_sidecar(read_file(sidecar_path(document))).sets;
  for (const PageQuestionSet& set : sets) upsert_set(merged, set);
  write_file_atomic(sidecar_path(document), serialize_sidecar(document, merged, generated_at));
}

std::vector<PageQuestionSet> Store::load_results(std::string_view id_or_hash) const {
  const SourceDocument doc = get_document(id_or_hash);
  std::lock_guard lock(write_mu_);
  std::error_code ec;
  if (!fs::exists(sidecar_path(doc), ec)) return {};
  return parse_sidecar(read_file(sidecar_path(doc))).sets;
}

}  // namespace quizread
