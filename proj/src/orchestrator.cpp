#include "quizread/orchestrator.hpp"

#include <algorithm>
#include <condition_variable>
#include <mutex>
#include <thread>

#include "quizread/sidecar.hpp"
#include "quizread/store.hpp"

namespace quizread {

namespace {

using Clock = std::chrono::steady_clock;

struct Slot {
  bool finished = false;
  std::optional<PageQuestionSet> set;
  std::optional<PageError> error;
  std::chrono::milliseconds latency{0};
};

const PageText* find_page(std::span<const PageText> pages, std::size_t index) {
  for (const PageText& p : pages) {
    if (p.page_index == index) return &p;
  }
  return nullptr;
}

}  // namespace

std::string_view to_string(JobStatus status) {
  switch (status) {
    case JobStatus::Running: return "Running";
    case JobStatus::Completed: return "Completed";
    case JobStatus::PartiallyCompleted: return "PartiallyCompleted";
    case JobStatus::Failed: return "Failed";
  }
  return "Unknown";
}

std::string_view to_string(PageStatus status) {
  switch (status) {
    case PageStatus::Pending: return "Pending";
    case PageStatus::Done: return "Done";
    case PageStatus::Errored: return "Errored";
  }
  return "Unknown";
}

JobStatus summarize(const std::map<std::size_t, PageStatus>& per_page) {
  std::size_t done = 0;
  std::size_t errored = 0;
  for (const auto& [page, status] : per_page) {
    if (status == PageStatus::Pending) return JobStatus::Running;
    (status == PageStatus::Done ? done : errored)++;
  }
  if (errored == 0) return JobStatus::Completed;
  if (done == 0) return JobStatus::Failed;
  return JobStatus::PartiallyCompleted;
}

JobSummary run_job(std::span<const PageText> pages, const GenerationRequest& request, const ProviderConfig& provider,
                   const DedupConfig& dedup, const PageCallback& on_page, const RunOptions& options) {
  try {
    validate_request(request, pages.size());
    provider.validate();
    dedup.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::JobRejected, std::string(to_string(e.code())) + ": " + e.what());
  }

  const std::vector<std::size_t> indices = resolve_pages(request, pages.size());
  JobSummary summary;
  for (std::size_t i : indices) summary.per_page[i] = PageStatus::Pending;

  const auto client = make_provider(provider);
  std::vector<Slot> slots(indices.size());
  std::mutex mu;
  std::condition_variable cv;
  std::size_t next = 0;

  auto work_one = [&](std::size_t k) {
    Slot slot;
    const auto started = Clock::now();
    try {
      if (options.cancel != nullptr && options.cancel->load()) {
        throw Error(ErrorCode::JobRejected, "job cancelled");
      }
      const PageText* page = find_page(pages, indices[k]);
      if (page == nullptr) throw Error(ErrorCode::PageOutOfRange, "page " + std::to_string(indices[k]) + " missing");
      const std::string prompt = build_prompt(*page, request.kind, request.questions_per_page, options.char_budget);
      const RawCompletion completion = client->complete(prompt);
      slot.set = parse_qa(completion.text, request.kind, request.questions_per_page, options.strict_parse,
                          page->page_index);
    } catch (const Error& e) {
      slot.error = PageError{e.code(), e.what()};
    } catch (const std::exception& e) {
      slot.error = PageError{ErrorCode::ProviderRejected, std::string("unexpected failure: ") + e.what()};
    }
    slot.latency = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - started);
    slot.finished = true;
    {
      std::lock_guard lock(mu);
      slots[k] = std::move(slot);
    }
    cv.notify_all();
  };

  auto worker = [&] {
    for (;;) {
      std::size_t k = 0;
      {
        std::lock_guard lock(mu);
        if (next >= indices.size()) return;
        k = next++;
      }
      work_one(k);
    }
  };

  const std::size_t thread_count =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(provider.max_parallel_calls, 1)), indices.size());
  std::vector<std::jthread> threads;
  threads.reserve(thread_count);
  for (std::size_t t = 0; t < thread_count; ++t) threads.emplace_back(worker);

  std::vector<QAPair> accepted = options.seed_accepted;
  for (std::size_t k = 0; k < indices.size(); ++k) {
    Slot slot;
    {
      std::unique_lock lock(mu);
      cv.wait(lock, [&] { return slots[k].finished; });
      slot = std::move(slots[k]);
    }
    PageResult result;
    result.page_index = indices[k];
    result.latency = slot.latency;
    if (slot.set) {
      FilterResult filtered = filter_repeats(*slot.set, accepted, dedup);
      accepted.insert(accepted.end(), filtered.kept.pairs.begin(), filtered.kept.pairs.end());
      result.set = std::move(filtered.kept);
      result.dropped = std::move(filtered.dropped);
      summary.per_page[result.page_index] = PageStatus::Done;
    } else {
      result.error = std::move(slot.error);
      summary.per_page[result.page_index] = PageStatus::Errored;
    }
    if (on_page) on_page(result);
  }
  threads.clear();
  summary.status = summarize(summary.per_page);
  return summary;
}

std::vector<QAPair> accepted_from_other_pages(std::span<const PageQuestionSet> sets, QuestionKind kind,
                                              std::size_t page_index) {
  std::vector<QAPair> out;
  for (const PageQuestionSet& s : sets) {
    if (s.kind == kind && s.page_index != page_index) out.insert(out.end(), s.pairs.begin(), s.pairs.end());
  }
  return out;
}

PageResult regenerate_page(Store& store, const SourceDocument& document, const PageText& page, QuestionKind kind,
                           int questions_per_page, const ProviderConfig& provider, const DedupConfig& dedup,
                           const RunOptions& options) {
  const std::vector<PageQuestionSet> stored = store.load_results(document.id);
  RunOptions run = options;
  run.seed_accepted = accepted_from_other_pages(stored, kind, page.page_index);

  GenerationRequest request;
  request.kind = kind;
  request.questions_per_page = questions_per_page;
  request.pages = {0};
  PageText single = page;
  single.page_index = 0;

  PageResult result;
  run_job(std::span<const PageText>(&single, 1), request, provider, dedup,
          [&](const PageResult& r) { result = r; }, run);
  result.page_index = page.page_index;
  if (result.set) {
    result.set->page_index = page.page_index;
    store.merge_results(document, std::span<const PageQuestionSet>(&*result.set, 1),
                        sidecar_timestamp(provider.is_mock()));
  }
  return result;
}

}  // namespace quizread
