#include <gtest/gtest.h>

#include <json.hpp>

#include "pdf_builder.hpp"
#include "quizread/error.hpp"
#include "quizread/service.hpp"
#include "quizread/sidecar.hpp"
#include "quizread/store.hpp"
#include "test_support.hpp"

using namespace quizread;
using nlohmann::json;
using quizread::testing::read_fixture;
using quizread::testing::read_sse;
using quizread::testing::TempDir;

namespace {

class ServiceTest : public ::testing::Test {
 protected:
  void start(const std::string& mock_query = "", std::size_t max_upload = kDefaultMaxUploadBytes) {
    ServiceConfig config;
    config.listen_addr = "127.0.0.1:0";
    config.storage_dir = dir_.path() / "store";
    config.provider.endpoint_url = "mock:" + (mock_query.empty() ? "" : "?" + mock_query);
    config.max_upload_bytes = max_upload;
    service_ = std::make_unique<Service>(config);
    const int port = service_->start();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port);
    client_->set_read_timeout(30, 0);
  }

  void TearDown() override {
    if (service_) service_->stop();
  }

  httplib::Result upload(const std::string& bytes, const std::string& filename = "doc.pdf") {
    httplib::MultipartFormDataItems items = {{"file", bytes, filename, "application/pdf"}};
    return client_->Post("/api/documents", items);
  }

  std::string upload_id(const std::string& fixture) {
    auto res = upload(read_fixture(fixture), fixture);
    EXPECT_TRUE(res);
    return json::parse(res->body)["document_id"].get<std::string>();
  }

  std::string start_job(const std::string& doc_id, const json& body = json::object()) {
    auto res = client_->Post("/api/documents/" + doc_id + "/jobs", body.dump(), "application/json");
    EXPECT_TRUE(res);
    EXPECT_EQ(res->status, 202) << res->body;
    return json::parse(res->body)["job_id"].get<std::string>();
  }

  static void expect_api_error(const httplib::Result& res, int status, const std::string& code) {
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, status) << res->body;
    const json body = json::parse(res->body);
    EXPECT_EQ(body["code"], code) << res->body;
    EXPECT_TRUE(body["message"].is_string());
    EXPECT_EQ(res->get_header_value("Content-Type"), "application/json");
  }

  TempDir dir_;
  std::unique_ptr<Service> service_;
  std::unique_ptr<httplib::Client> client_;
};

}  // namespace

TEST_F(ServiceTest, UploadIsIdempotentByContent) {
  start();
  const std::string bytes = read_fixture("pages_3.pdf");
  auto first = upload(bytes, "a.pdf");
  ASSERT_TRUE(first);
  EXPECT_EQ(first->status, 201);
  const json a = json::parse(first->body);
  EXPECT_EQ(a["page_count"], 3);
  EXPECT_EQ(a["filename"], "a.pdf");
  EXPECT_EQ(a["content_hash"], sha256_hex(bytes));

  auto second = upload(bytes, "b.pdf");
  EXPECT_EQ(second->status, 200);
  EXPECT_EQ(json::parse(second->body)["document_id"], a["document_id"]);

  // Raw body upload of the same bytes resolves to the same document.
  auto raw = client_->Post("/api/documents?filename=c.pdf", bytes, "application/pdf");
  EXPECT_EQ(raw->status, 200);
  EXPECT_EQ(json::parse(raw->body)["document_id"], a["document_id"]);
}

TEST_F(ServiceTest, DocumentMetadataAndFile) {
  start();
  const std::string bytes = read_fixture("mixed_scanned.pdf");
  const std::string id = upload_id("mixed_scanned.pdf");
  auto meta = client_->Get("/api/documents/" + id);
  ASSERT_EQ(meta->status, 200);
  const json m = json::parse(meta->body);
  EXPECT_EQ(m["byte_size"], bytes.size());
  ASSERT_EQ(m["pages"].size(), 3u);
  EXPECT_EQ(m["pages"][1]["has_text_layer"], false);
  EXPECT_EQ(m["pages"][0]["has_text_layer"], true);

  auto file = client_->Get("/api/documents/" + id + "/file");
  ASSERT_EQ(file->status, 200);
  EXPECT_EQ(file->get_header_value("Content-Type"), "application/pdf");
  EXPECT_EQ(file->body, bytes);
}

TEST_F(ServiceTest, UploadErrorPaths) {
  start("", 40000);
  expect_api_error(upload(read_fixture("not_a_pdf.docx"), "x.docx"), 415, "UnsupportedMediaType");
  expect_api_error(upload(read_fixture("encrypted.pdf")), 422, "EncryptedDocument");
  expect_api_error(upload(quizread::testing::build_pdf({})), 422, "EmptyDocument");
  expect_api_error(upload("%PDF-1.4\nthis is not really a pdf"), 422, "UnreadableDocument");

  std::string big = read_fixture("pages_1.pdf");
  big.append(50000 - big.size(), ' ');
  expect_api_error(upload(big), 413, "DocumentTooLarge");
  // Far beyond the limit the transport refuses it before reading the body.
  expect_api_error(client_->Post("/api/documents", std::string(200000, 'x'), "application/pdf"), 413,
                   "DocumentTooLarge");
  expect_api_error(client_->Post("/api/documents", "", "application/pdf"), 415, "UnsupportedMediaType");
}

TEST_F(ServiceTest, UnknownResources) {
  start();
  expect_api_error(client_->Get("/api/documents/abcdef"), 404, "NotFound");
  expect_api_error(client_->Get("/api/documents/abcdef/file"), 404, "NotFound");
  expect_api_error(client_->Get("/api/jobs/nope"), 404, "NotFound");
  expect_api_error(client_->Post("/api/documents/abcdef/jobs", "{}", "application/json"), 404, "NotFound");
  expect_api_error(client_->Get("/api/nothing-here"), 404, "NotFound");
}

TEST_F(ServiceTest, Kinds) {
  start();
  auto res = client_->Get("/api/kinds");
  ASSERT_EQ(res->status, 200);
  const json body = json::parse(res->body);
  EXPECT_EQ(body["kinds"].size(), 6u);
  EXPECT_EQ(body["min_questions_per_page"], 1);
  EXPECT_EQ(body["max_questions_per_page"], 10);
  int supported = 0;
  for (const json& k : body["kinds"]) supported += k["generation_supported"].get<bool>();
  EXPECT_EQ(supported, 2);
}

TEST_F(ServiceTest, JobValidation) {
  start();
  const std::string id = upload_id("pages_3.pdf");
  const std::string path = "/api/documents/" + id + "/jobs";
  for (int n = 0; n <= 11; ++n) {
    auto res = client_->Post(path, json{{"questions_per_page", n}, {"pages", {0}}}.dump(), "application/json");
    if (n >= 1 && n <= 10) {
      ASSERT_EQ(res->status, 202) << n;
      const std::string job = json::parse(res->body)["job_id"];
      read_sse(*client_, "/api/jobs/" + job + "/events");
    } else {
      expect_api_error(res, 400, "CountOutOfRange");
    }
  }
  expect_api_error(client_->Post(path, R"({"questions_per_page": 2.5})", "application/json"), 400,
                   "CountOutOfRange");
  expect_api_error(client_->Post(path, R"({"questions_per_page": "4"})", "application/json"), 400,
                   "CountOutOfRange");
  expect_api_error(client_->Post(path, R"({"kind": "genre"})", "application/json"), 400, "UnsupportedKind");
  expect_api_error(client_->Post(path, R"({"kind": "poetry"})", "application/json"), 400, "UnsupportedKind");
  expect_api_error(client_->Post(path, R"({"pages": [3]})", "application/json"), 400, "PageOutOfRange");
  expect_api_error(client_->Post(path, R"({"pages": [-1]})", "application/json"), 400, "PageOutOfRange");
  expect_api_error(client_->Post(path, "not json", "application/json"), 400, "InvalidRequest");
}

TEST_F(ServiceTest, SecondJobWhileRunningConflicts) {
  start("delay_ms=150");
  const std::string id = upload_id("pages_3.pdf");
  const std::string job = start_job(id);
  expect_api_error(client_->Post("/api/documents/" + id + "/jobs", "{}", "application/json"), 409,
                   "JobAlreadyRunning");
  const auto events = read_sse(*client_, "/api/jobs/" + job + "/events");
  ASSERT_FALSE(events.empty());
  EXPECT_EQ(events.back().name, "done");
  // Once done, a new job is accepted.
  const std::string next = start_job(id, {{"kind", "analysis"}});
  read_sse(*client_, "/api/jobs/" + next + "/events");
}

TEST_F(ServiceTest, EventsStreamEveryPageThenDone) {
  start("delay_ms=20");
  const std::string id = upload_id("pages_3.pdf");
  const std::string job = start_job(id, {{"kind", "comprehension"}, {"questions_per_page", 2}});
  int status = 0;
  const auto events = read_sse(*client_, "/api/jobs/" + job + "/events", &status);
  EXPECT_EQ(status, 200);
  ASSERT_EQ(events.size(), 4u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(events[i].name, "page");
    const json page = json::parse(events[i].data);
    EXPECT_EQ(page["page_index"], i);
    EXPECT_EQ(page["status"], "Done");
    EXPECT_EQ(page["kind"], "comprehension");
    EXPECT_EQ(page["questions"].size(), 2u);
  }
  const json done = json::parse(events[3].data);
  EXPECT_EQ(events[3].name, "done");
  EXPECT_EQ(done["status"], "Completed");
  EXPECT_EQ(done["job_id"], job);

  // Late subscribers get the full replay.
  const auto replay = read_sse(*client_, "/api/jobs/" + job + "/events");
  ASSERT_EQ(replay.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(replay[i].data, events[i].data);

  auto status_res = client_->Get("/api/jobs/" + job);
  EXPECT_EQ(json::parse(status_res->body)["status"], "Completed");
}

TEST_F(ServiceTest, ErroredPageIsReported) {
  start("fail_on=PAGE-2");
  const std::string id = upload_id("pages_4.pdf");
  const auto events = read_sse(*client_, "/api/jobs/" + start_job(id) + "/events");
  ASSERT_EQ(events.size(), 5u);
  const json errored = json::parse(events[1].data);
  EXPECT_EQ(errored["status"], "Errored");
  EXPECT_EQ(errored["error"]["code"], "ProviderTimeout");
  EXPECT_EQ(json::parse(events[4].data)["status"], "PartiallyCompleted");

  auto stored = client_->Get("/api/documents/" + id + "/questions");
  const json sets = json::parse(stored->body);
  ASSERT_EQ(sets.size(), 3u);
  for (const json& s : sets) EXPECT_NE(s["page_index"], 1);
}

TEST_F(ServiceTest, QuestionFiltersAndRegeneration) {
  start();
  const std::string id = upload_id("pages_3.pdf");
  read_sse(*client_, "/api/jobs/" + start_job(id) + "/events");
  read_sse(*client_, "/api/jobs/" + start_job(id, {{"kind", "analysis"}, {"questions_per_page", 2}}) + "/events");

  const std::string base = "/api/documents/" + id + "/questions";
  EXPECT_EQ(json::parse(client_->Get(base)->body).size(), 6u);
  EXPECT_EQ(json::parse(client_->Get(base + "?kind=analysis")->body).size(), 3u);
  const json page1 = json::parse(client_->Get(base + "?page=1&kind=comprehension")->body);
  ASSERT_EQ(page1.size(), 1u);
  EXPECT_EQ(page1[0]["questions"].size(), 4u);
  EXPECT_EQ(page1[0]["questions"][0]["label"], "C1");
  expect_api_error(client_->Get(base + "?page=9"), 400, "PageOutOfRange");
  expect_api_error(client_->Get(base + "?page=x"), 400, "InvalidRequest");
  expect_api_error(client_->Get(base + "?kind=genre"), 400, "UnsupportedKind");

  // Regenerating one page replaces only that page's comprehension set.
  read_sse(*client_, "/api/jobs/" + start_job(id, {{"questions_per_page", 2}, {"pages", {1}}}) + "/events");
  const json after = json::parse(client_->Get(base + "?kind=comprehension")->body);
  ASSERT_EQ(after.size(), 3u);
  EXPECT_EQ(after[0]["questions"].size(), 4u);
  EXPECT_EQ(after[1]["questions"].size(), 2u);
  EXPECT_EQ(after[2]["questions"].size(), 4u);

  // The stored file is a valid sidecar.
  const SourceDocument doc = service_->store().get_document(id);
  const Sidecar sidecar = parse_sidecar(read_file(service_->store().sidecar_path(doc)));
  EXPECT_EQ(sidecar.sets.size(), 6u);
}

TEST(ServiceStatus, ErrorMapping) {
  EXPECT_EQ(http_status_for(ErrorCode::UnsupportedMediaType), 415);
  EXPECT_EQ(http_status_for(ErrorCode::DocumentTooLarge), 413);
  EXPECT_EQ(http_status_for(ErrorCode::UnreadableDocument), 422);
  EXPECT_EQ(http_status_for(ErrorCode::EncryptedDocument), 422);
  EXPECT_EQ(http_status_for(ErrorCode::EmptyDocument), 422);
  EXPECT_EQ(http_status_for(ErrorCode::CountOutOfRange), 400);
  EXPECT_EQ(http_status_for(ErrorCode::NotFound), 404);
  EXPECT_EQ(http_status_for(ErrorCode::JobAlreadyRunning), 409);
  EXPECT_EQ(http_status_for(ErrorCode::ProviderTimeout), 504);
  EXPECT_EQ(http_status_for(ErrorCode::StorageFailure), 500);
  const json body = json::parse(api_error_body(ErrorCode::NotFound, "gone"));
  EXPECT_EQ(body, (json{{"code", "NotFound"}, {"message", "gone"}}));
}
