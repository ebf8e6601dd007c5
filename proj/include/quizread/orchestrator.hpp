#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "quizread/dedup.hpp"
#include "quizread/error.hpp"
#include "quizread/ingest.hpp"
#include "quizread/prompting.hpp"
#include "quizread/provider.hpp"
#include "quizread/qa_parser.hpp"

namespace quizread {

class Store;

enum class JobStatus { Running, Completed, PartiallyCompleted, Failed };
enum class PageStatus { Pending, Done, Errored };

std::string_view to_string(JobStatus status);
std::string_view to_string(PageStatus status);

struct PageError {
  ErrorCode code = ErrorCode::ProviderTimeout;
  std::string message;

  bool operator==(const PageError&) const = default;
};

struct PageResult {
  std::size_t page_index = 0;
  std::optional<PageQuestionSet> set;  // present on success
  std::optional<PageError> error;      // present on failure
  std::vector<DroppedQuestion> dropped;
  std::chrono::milliseconds latency{0};

  bool ok() const { return set.has_value(); }
};

struct JobSummary {
  JobStatus status = JobStatus::Running;
  std::map<std::size_t, PageStatus> per_page;
};

// Completed when every page is Done, Failed when none is, otherwise
// PartiallyCompleted. Running while any page is Pending.
JobStatus summarize(const std::map<std::size_t, PageStatus>& per_page);

struct RunOptions {
  bool strict_parse = false;
  std::size_t char_budget = kDefaultPageCharBudget;
  std::vector<QAPair> seed_accepted;  // questions the job must not repeat
  const std::atomic<bool>* cancel = nullptr;  // pages not yet started fail with JobRejected once set
};

using PageCallback = std::function<void(const PageResult&)>;

// Generates questions for each requested page. Provider calls overlap up to
// provider.max_parallel_calls; results are deduplicated and handed to
// `on_page` on the calling thread in ascending page order as soon as each page
// and all pages before it are finished. Page failures are reported through
// PageResult and never stop the job.
//
// Throws Error(JobRejected) when the request is invalid for `pages`.
JobSummary run_job(std::span<const PageText> pages, const GenerationRequest& request,
                   const ProviderConfig& provider, const DedupConfig& dedup, const PageCallback& on_page,
                   const RunOptions& options = {});

// Questions of `kind` stored for pages other than `page_index`.
std::vector<QAPair> accepted_from_other_pages(std::span<const PageQuestionSet> sets, QuestionKind kind,
                                              std::size_t page_index);

// Regenerates one page and, on success, replaces the stored set for
// (page, kind). Dedup runs against stored questions of the same kind on other
// pages. A failed attempt leaves storage untouched.
PageResult regenerate_page(Store& store, const SourceDocument& document, const PageText& page,
                           QuestionKind kind, int questions_per_page, const ProviderConfig& provider,
                           const DedupConfig& dedup, const RunOptions& options = {});

}  // namespace quizread
