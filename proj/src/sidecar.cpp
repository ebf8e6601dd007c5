#include "quizread/sidecar.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <ctime>
#include <tuple>

#include <json.hpp>

#include "quizread/error.hpp"

namespace quizread {

namespace {

using json = nlohmann::json;

[[noreturn]] void invalid(const std::string& what) {
  throw Error(ErrorCode::InvalidSidecar, "invalid sidecar: " + what);
}

bool set_less(const PageQuestionSet& a, const PageQuestionSet& b) {
  return std::tie(a.page_index, a.kind) < std::tie(b.page_index, b.kind);
}

std::string encode_issue(const ParseIssue& issue) {
  return std::string(to_string(issue.code)) + "@" + std::to_string(issue.position) + ": " + issue.detail;
}

ParseIssue decode_issue(std::string_view text, std::size_t pair_index) {
  const auto at = text.find('@');
  if (at == std::string_view::npos) invalid("issue '" + std::string(text) + "' lacks a position");
  const auto code = parse_issue_code(text.substr(0, at));
  if (!code) invalid("unknown issue code in '" + std::string(text) + "'");
  ParseIssue issue;
  issue.code = *code;
  issue.pair_index = pair_index;
  const char* first = text.data() + at + 1;
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, issue.position);
  if (ec != std::errc{} || ptr == first) invalid("issue '" + std::string(text) + "' has a bad position");
  std::string_view rest(ptr, static_cast<std::size_t>(last - ptr));
  if (!rest.starts_with(": ")) invalid("issue '" + std::string(text) + "' lacks a detail separator");
  issue.detail = std::string(rest.substr(2));
  return issue;
}

const json& require(const json& obj, const char* key, json::value_t type) {
  if (!obj.is_object()) invalid("expected an object holding '" + std::string(key) + "'");
  auto it = obj.find(key);
  if (it == obj.end()) invalid("missing '" + std::string(key) + "'");
  const bool ok = type == json::value_t::number_unsigned ? it->is_number_unsigned() : it->type() == type;
  if (!ok) invalid("'" + std::string(key) + "' has the wrong type");
  return *it;
}

}  // namespace

DocumentDescriptor descriptor_of(const SourceDocument& document) {
  return {document.content_hash, document.filename, document.page_count};
}

void sort_sets(std::vector<PageQuestionSet>& sets) {
  std::stable_sort(sets.begin(), sets.end(), set_less);
  for (std::size_t i = 1; i < sets.size(); ++i) {
    if (sets[i - 1].page_index == sets[i].page_index && sets[i - 1].kind == sets[i].kind) {
      throw Error(ErrorCode::DuplicatePageSet, "two " + std::string(wire_name(sets[i].kind)) +
                                                   " question sets for page " + std::to_string(sets[i].page_index));
    }
  }
}

void upsert_set(std::vector<PageQuestionSet>& sets, PageQuestionSet set) {
  auto it = std::find_if(sets.begin(), sets.end(), [&](const PageQuestionSet& s) {
    return s.page_index == set.page_index && s.kind == set.kind;
  });
  if (it != sets.end()) {
    *it = std::move(set);
  } else {
    sets.push_back(std::move(set));
  }
  std::stable_sort(sets.begin(), sets.end(), set_less);
}

std::string serialize_sidecar(const DocumentDescriptor& document, std::span<const PageQuestionSet> sets,
                              std::string_view generated_at) {
  std::vector<PageQuestionSet> ordered(sets.begin(), sets.end());
  sort_sets(ordered);

  json pages = json::array();
  for (const PageQuestionSet& set : ordered) {
    if (set.page_index >= document.page_count) {
      throw Error(ErrorCode::PageOutOfRange, "question set for page " + std::to_string(set.page_index) +
                                                 " but the document has " + std::to_string(document.page_count) +
                                                 " pages");
    }
    if (!generation_supported(set.kind)) {
      throw Error(ErrorCode::UnsupportedKind,
                  "question kind '" + std::string(wire_name(set.kind)) + "' cannot be stored");
    }
    json questions = json::array();
    for (const QAPair& pair : set.pairs) {
      questions.push_back({{"label", pair.label}, {"question", pair.question}, {"answer", pair.answer},
                           {"issues", json::array()}});
    }
    for (const ParseIssue& issue : set.issues) {
      if (issue.pair_index >= questions.size()) {
        throw Error(ErrorCode::InvalidSidecar, "issue attached to missing question " +
                                                   std::to_string(issue.pair_index) + " on page " +
                                                   std::to_string(set.page_index));
      }
      questions[issue.pair_index]["issues"].push_back(encode_issue(issue));
    }
    pages.push_back({{"page_index", set.page_index}, {"kind", wire_name(set.kind)}, {"questions", questions}});
  }

  const json root = {
      {"format_version", kSidecarFormatVersion},
      {"document",
       {{"content_hash", document.content_hash}, {"filename", document.filename}, {"page_count", document.page_count}}},
      {"generated_at", generated_at},
      {"pages", pages},
  };
  return root.dump(2, ' ', false, json::error_handler_t::replace) + "\n";
}

std::string serialize_sidecar(const SourceDocument& document, std::span<const PageQuestionSet> sets,
                              std::string_view generated_at) {
  return serialize_sidecar(descriptor_of(document), sets, generated_at);
}

Sidecar parse_sidecar(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    invalid(std::string("not JSON (") + e.what() + ")");
  }
  if (!root.is_object()) invalid("top level is not an object");
  const json& version = root.find("format_version") == root.end() ? json() : root["format_version"];
  if (!version.is_number_integer() || version.get<long long>() != kSidecarFormatVersion) {
    invalid("unsupported format_version " + version.dump() + ", expected " + std::to_string(kSidecarFormatVersion));
  }

  Sidecar sidecar;
  const json& doc = require(root, "document", json::value_t::object);
  sidecar.document.content_hash = require(doc, "content_hash", json::value_t::string).get<std::string>();
  sidecar.document.filename = require(doc, "filename", json::value_t::string).get<std::string>();
  sidecar.document.page_count = require(doc, "page_count", json::value_t::number_unsigned).get<std::size_t>();
  sidecar.generated_at = require(root, "generated_at", json::value_t::string).get<std::string>();

  for (const json& page : require(root, "pages", json::value_t::array)) {
    PageQuestionSet set;
    set.page_index = require(page, "page_index", json::value_t::number_unsigned).get<std::size_t>();
    if (set.page_index >= sidecar.document.page_count) {
      invalid("page_index " + std::to_string(set.page_index) + " beyond page_count");
    }
    const auto kind = parse_question_kind(require(page, "kind", json::value_t::string).get<std::string>());
    if (!kind || !generation_supported(*kind)) invalid("unknown question kind " + page["kind"].dump());
    set.kind = *kind;
    for (const json& q : require(page, "questions", json::value_t::array)) {
      QAPair pair;
      pair.label = require(q, "label", json::value_t::string).get<std::string>();
      pair.question = require(q, "question", json::value_t::string).get<std::string>();
      pair.answer = require(q, "answer", json::value_t::string).get<std::string>();
      if (!is_valid_label(pair.label) || pair.label[0] != kind_info(set.kind).label_prefix) {
        invalid("bad label '" + pair.label + "' for " + std::string(wire_name(set.kind)) + " questions");
      }
      if (pair.question.empty()) invalid("empty question for label " + pair.label);
      for (const json& issue : require(q, "issues", json::value_t::array)) {
        if (!issue.is_string()) invalid("issue entries must be strings");
        set.issues.push_back(decode_issue(issue.get<std::string>(), set.pairs.size()));
      }
      set.pairs.push_back(std::move(pair));
    }
    sidecar.sets.push_back(std::move(set));
  }
  try {
    sort_sets(sidecar.sets);
  } catch (const Error& e) {
    invalid(e.what());
  }
  return sidecar;
}

std::string rfc3339_utc(std::chrono::system_clock::time_point when) {
  const std::time_t t = std::chrono::system_clock::to_time_t(when);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string sidecar_timestamp(bool deterministic) {
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch != nullptr && *epoch != '\0') {
    long long seconds = 0;
    const std::string_view s(epoch);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), seconds);
    if (ec == std::errc{} && ptr == s.data() + s.size()) {
      return rfc3339_utc(std::chrono::system_clock::time_point(std::chrono::seconds(seconds)));
    }
  }
  return rfc3339_utc(deterministic ? std::chrono::system_clock::time_point{} : std::chrono::system_clock::now());
}

}  // namespace quizread
