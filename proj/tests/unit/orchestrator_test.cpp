#include <gtest/gtest.h>

#include "quizread/error.hpp"
#include "quizread/orchestrator.hpp"
#include "quizread/store.hpp"
#include "test_support.hpp"

using namespace quizread;
using quizread::testing::read_fixture;
using quizread::testing::TempDir;

namespace {

ErrorCode error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::InvalidConfig;
}

std::vector<PageText> pages_of(const std::string& fixture) {
  return extract_document(read_fixture(fixture), fixture).pages;
}

ProviderConfig mock(const std::string& query = "", int parallel = 2) {
  ProviderConfig c;
  c.endpoint_url = "mock:" + (query.empty() ? "" : "?" + query);
  c.max_parallel_calls = parallel;
  return c;
}

struct JobRun {
  JobSummary summary;
  std::vector<PageResult> results;
};

JobRun run(std::span<const PageText> pages, const GenerationRequest& request, const ProviderConfig& provider,
        const DedupConfig& dedup = {}, const RunOptions& options = {}) {
  JobRun r;
  r.summary = run_job(pages, request, provider, dedup, [&](const PageResult& p) { r.results.push_back(p); }, options);
  return r;
}

}  // namespace

TEST(Orchestrator, CompletesEveryPageInOrder) {
  const auto pages = pages_of("pages_5.pdf");
  GenerationRequest request;
  request.questions_per_page = 3;
  const JobRun r = run(pages, request, mock("delay_ms=10", 3));
  EXPECT_EQ(r.summary.status, JobStatus::Completed);
  ASSERT_EQ(r.results.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(r.results[i].page_index, i);
    ASSERT_TRUE(r.results[i].ok());
    EXPECT_EQ(r.results[i].set->page_index, i);
    EXPECT_EQ(r.results[i].set->pairs.size(), 3u);
    EXPECT_EQ(r.summary.per_page.at(i), PageStatus::Done);
  }
}

TEST(Orchestrator, PageFailureIsIsolated) {
  const auto pages = pages_of("pages_4.pdf");
  const JobRun r = run(pages, {}, mock("fail_on=PAGE-2&fail_with=rejected"));
  EXPECT_EQ(r.summary.status, JobStatus::PartiallyCompleted);
  ASSERT_EQ(r.results.size(), 4u);
  EXPECT_FALSE(r.results[1].ok());
  EXPECT_EQ(r.results[1].error->code, ErrorCode::ProviderRejected);
  EXPECT_TRUE(r.results[0].ok() && r.results[2].ok() && r.results[3].ok());
  EXPECT_EQ(r.summary.per_page.at(1), PageStatus::Errored);
}

TEST(Orchestrator, ImageOnlyPageReportsEmptyPage) {
  const auto pages = pages_of("mixed_scanned.pdf");
  const JobRun r = run(pages, {}, mock());
  EXPECT_EQ(r.summary.status, JobStatus::PartiallyCompleted);
  ASSERT_EQ(r.results.size(), 3u);
  ASSERT_TRUE(r.results[1].error.has_value());
  EXPECT_EQ(r.results[1].error->code, ErrorCode::EmptyPage);

  const JobRun all_failed = run(pages_of("scanned_only.pdf"), {}, mock());
  EXPECT_EQ(all_failed.summary.status, JobStatus::Failed);
}

TEST(Orchestrator, SubsetOfPages) {
  const auto pages = pages_of("pages_5.pdf");
  GenerationRequest request;
  request.pages = {4, 1};
  const JobRun r = run(pages, request, mock());
  ASSERT_EQ(r.results.size(), 2u);
  EXPECT_EQ(r.results[0].page_index, 1u);
  EXPECT_EQ(r.results[1].page_index, 4u);
  EXPECT_EQ(r.summary.per_page.size(), 2u);
}

TEST(Orchestrator, DeterministicAcrossParallelism) {
  const auto pages = pages_of("pages_10.pdf");
  GenerationRequest request;
  request.questions_per_page = 5;
  std::vector<std::vector<PageQuestionSet>> outcomes;
  for (int parallel : {1, 2, 4, 8}) {
    const JobRun r = run(pages, request, mock("delay_ms=" + std::to_string(5 * parallel), parallel));
    std::vector<PageQuestionSet> sets;
    for (const PageResult& p : r.results) sets.push_back(p.set.value_or(PageQuestionSet{}));
    outcomes.push_back(sets);
  }
  for (std::size_t i = 1; i < outcomes.size(); ++i) EXPECT_EQ(outcomes[i], outcomes[0]);
}

TEST(Orchestrator, JobWideDedupWithDuplicatingProvider) {
  const auto pages = pages_of("pages_4.pdf");
  const DedupConfig dedup;
  const JobRun r = run(pages, {}, mock("duplicate=1"), dedup);
  ASSERT_EQ(r.results.size(), 4u);
  ASSERT_TRUE(r.results[0].ok());
  EXPECT_EQ(r.results[0].set->pairs.size(), 4u);
  std::vector<std::string> stored;
  for (std::size_t i = 0; i < r.results.size(); ++i) {
    if (i > 0) {
      // Later pages contribute nothing new.
      if (r.results[i].ok()) EXPECT_TRUE(r.results[i].set->pairs.empty());
      EXPECT_EQ(r.results[i].dropped.size(), 4u);
      for (const DroppedQuestion& d : r.results[i].dropped) EXPECT_DOUBLE_EQ(d.score, 1.0);
    }
    if (r.results[i].ok()) {
      for (const QAPair& p : r.results[i].set->pairs) stored.push_back(p.question);
    }
  }
  for (std::size_t a = 0; a < stored.size(); ++a) {
    for (std::size_t b = a + 1; b < stored.size(); ++b) EXPECT_LT(similarity(stored[a], stored[b], dedup), 0.6);
  }
}

TEST(Orchestrator, SeedAcceptedBlocksRepeats) {
  const auto pages = pages_of("pages_3.pdf");
  GenerationRequest request;
  request.pages = {0};
  const JobRun first = run(pages, request, mock());
  RunOptions options;
  options.seed_accepted = first.results[0].set->pairs;
  const JobRun second = run(pages, request, mock(), {}, options);
  EXPECT_TRUE(second.results[0].set->pairs.empty());
  EXPECT_EQ(second.results[0].dropped.size(), 4u);
}

TEST(Orchestrator, StrictParseTurnsDeviationsIntoErrors) {
  const auto pages = pages_of("pages_3.pdf");
  RunOptions strict;
  strict.strict_parse = true;
  const JobRun r = run(pages, {}, mock("format=bulleted"), {}, strict);
  EXPECT_EQ(r.summary.status, JobStatus::Failed);
  for (const PageResult& p : r.results) EXPECT_EQ(p.error->code, ErrorCode::MalformedResponse);
  const JobRun lenient = run(pages, {}, mock("format=bulleted"));
  EXPECT_EQ(lenient.summary.status, JobStatus::Completed);
}

TEST(Orchestrator, InvalidRequestsAreRejected) {
  const auto pages = pages_of("pages_3.pdf");
  GenerationRequest request;
  request.questions_per_page = 11;
  EXPECT_EQ(error_of([&] { run(pages, request, mock()); }), ErrorCode::JobRejected);
  request.questions_per_page = 3;
  request.pages = {3};
  EXPECT_EQ(error_of([&] { run(pages, request, mock()); }), ErrorCode::JobRejected);
  request.pages = {};
  request.kind = QuestionKind::Genre;
  EXPECT_EQ(error_of([&] { run(pages, request, mock()); }), ErrorCode::JobRejected);
  ProviderConfig bad = mock();
  bad.max_parallel_calls = 0;
  EXPECT_EQ(error_of([&] { run(pages, {}, bad); }), ErrorCode::JobRejected);
}

TEST(Orchestrator, CancelStopsPendingPages) {
  const auto pages = pages_of("pages_5.pdf");
  std::atomic<bool> cancel{true};
  RunOptions options;
  options.cancel = &cancel;
  const JobRun r = run(pages, {}, mock(), {}, options);
  EXPECT_EQ(r.summary.status, JobStatus::Failed);
  EXPECT_EQ(r.results.size(), 5u);
}

TEST(Orchestrator, SummaryRules) {
  EXPECT_EQ(summarize({{0, PageStatus::Done}, {1, PageStatus::Done}}), JobStatus::Completed);
  EXPECT_EQ(summarize({{0, PageStatus::Done}, {1, PageStatus::Errored}}), JobStatus::PartiallyCompleted);
  EXPECT_EQ(summarize({{0, PageStatus::Errored}}), JobStatus::Failed);
  EXPECT_EQ(summarize({{0, PageStatus::Done}, {1, PageStatus::Pending}}), JobStatus::Running);
}

TEST(Orchestrator, RegenerateReplacesOnlyThatPage) {
  TempDir dir;
  Store store(dir.path());
  const SourceDocument doc = store.put_document(read_fixture("pages_3.pdf"), "p.pdf").document;
  const auto pages = store.pages(doc.id);

  std::vector<PageQuestionSet> sets;
  run_job(pages, {}, mock(), {}, [&](const PageResult& p) { sets.push_back(*p.set); });
  store.save_results(doc, sets, "t");

  const PageResult r = regenerate_page(store, doc, pages[1], QuestionKind::Comprehension, 2, mock(), {});
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.page_index, 1u);
  const auto stored = store.load_results(doc.id);
  ASSERT_EQ(stored.size(), 3u);
  EXPECT_EQ(stored[0], sets[0]);
  EXPECT_EQ(stored[1].pairs.size(), 2u);
  EXPECT_EQ(stored[1], *r.set);
  EXPECT_EQ(stored[2], sets[2]);

  // Another kind on the same page sits beside the comprehension set.
  const PageResult analysis = regenerate_page(store, doc, pages[1], QuestionKind::Analysis, 3, mock(), {});
  ASSERT_TRUE(analysis.ok());
  const auto both = store.load_results(doc.id);
  ASSERT_EQ(both.size(), 4u);
  EXPECT_EQ(both[1].kind, QuestionKind::Comprehension);
  EXPECT_EQ(both[2].kind, QuestionKind::Analysis);
  EXPECT_EQ(both[2].pairs.front().label, "A1");
}

TEST(Orchestrator, FailedRegenerationLeavesStorageUntouched) {
  TempDir dir;
  Store store(dir.path());
  const SourceDocument doc = store.put_document(read_fixture("pages_3.pdf"), "p.pdf").document;
  const auto pages = store.pages(doc.id);
  std::vector<PageQuestionSet> sets;
  run_job(pages, {}, mock(), {}, [&](const PageResult& p) { sets.push_back(*p.set); });
  store.save_results(doc, sets, "t");
  const std::string before = read_file(store.sidecar_path(doc));

  const PageResult r =
      regenerate_page(store, doc, pages[0], QuestionKind::Comprehension, 4, mock("fail_on=PAGE-1"), {});
  EXPECT_FALSE(r.ok());
  EXPECT_EQ(r.error->code, ErrorCode::ProviderTimeout);
  EXPECT_EQ(read_file(store.sidecar_path(doc)), before);
}

TEST(Orchestrator, AcceptedFromOtherPages) {
  std::vector<PageQuestionSet> sets(3);
  sets[0].page_index = 0;
  sets[0].pairs = {{"C1", "a?", "x"}};
  sets[1].page_index = 1;
  sets[1].pairs = {{"C1", "b?", "x"}};
  sets[2].page_index = 2;
  sets[2].kind = QuestionKind::Analysis;
  sets[2].pairs = {{"A1", "c?", "x"}};
  const auto accepted = accepted_from_other_pages(sets, QuestionKind::Comprehension, 1);
  ASSERT_EQ(accepted.size(), 1u);
  EXPECT_EQ(accepted[0].question, "a?");
}
