#include <gtest/gtest.h>

#include <sstream>

#include <json.hpp>

#include "quizread/cli.hpp"
#include "quizread/config.hpp"
#include "quizread/service.hpp"
#include "quizread/sidecar.hpp"
#include "quizread/store.hpp"
#include "test_support.hpp"

using namespace quizread;
using quizread::testing::read_fixture;
using quizread::testing::TempDir;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  CliRun r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::filesystem::path copy_fixture(const TempDir& dir, const std::string& name) {
  const auto target = dir / name;
  write_file_atomic(target, read_fixture(name));
  return target;
}

}  // namespace

TEST(Cli, GeneratesSidecarBesideInput) {
  TempDir dir;
  const auto input = copy_fixture(dir, "pages_3.pdf");
  const CliRun r = cli({"gen", input.string(), "--provider", "mock"});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string expected_out = input.string() + ".quiz.json";
  EXPECT_EQ(r.out, expected_out + "\n");
  EXPECT_NE(r.err.find("page 1/3: 4 questions"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("status: Completed"), std::string::npos) << r.err;

  const Sidecar s = parse_sidecar(read_file(expected_out));
  EXPECT_EQ(s.document.filename, "pages_3.pdf");
  ASSERT_EQ(s.sets.size(), 3u);
  for (const auto& set : s.sets) EXPECT_EQ(set.pairs.size(), 4u);
}

TEST(Cli, CountBoundsExhaustive) {
  TempDir dir;
  const auto input = copy_fixture(dir, "pages_1.pdf");
  for (int n = 0; n <= 11; ++n) {
    const auto out = dir / ("n" + std::to_string(n) + ".json");
    const CliRun r = cli({"gen", input.string(), "--provider", "mock", "--count", std::to_string(n), "--out",
                          out.string(), "--quiet"});
    if (n >= 1 && n <= 10) {
      EXPECT_EQ(r.code, 0) << n << r.err;
      EXPECT_EQ(parse_sidecar(read_file(out)).sets.at(0).pairs.size(), static_cast<std::size_t>(n));
    } else {
      EXPECT_EQ(r.code, 1) << n;
      EXPECT_NE(r.err.find("CountOutOfRange"), std::string::npos) << r.err;
      EXPECT_FALSE(std::filesystem::exists(out));
    }
  }
}

TEST(Cli, QuietAndPages) {
  TempDir dir;
  const auto input = copy_fixture(dir, "pages_5.pdf");
  const auto out = dir / "sub.json";
  const CliRun r = cli({"gen", input.string(), "--provider", "mock", "--pages", "2-3,5", "--kind", "analysis",
                        "--count", "2", "--out", out.string(), "--quiet"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.err, "");
  const Sidecar s = parse_sidecar(read_file(out));
  ASSERT_EQ(s.sets.size(), 3u);
  EXPECT_EQ(s.sets[0].page_index, 1u);
  EXPECT_EQ(s.sets[1].page_index, 2u);
  EXPECT_EQ(s.sets[2].page_index, 4u);
  EXPECT_EQ(s.sets[0].kind, QuestionKind::Analysis);
  EXPECT_EQ(s.sets[0].pairs[0].label, "A1");

  EXPECT_EQ(cli({"gen", input.string(), "--provider", "mock", "--pages", "6"}).code, 1);
  EXPECT_EQ(cli({"gen", input.string(), "--provider", "mock", "--pages", "0"}).code, 1);
}

TEST(Cli, PartialAndTotalFailure) {
  TempDir dir;
  const auto mixed = copy_fixture(dir, "mixed_scanned.pdf");
  const CliRun partial = cli({"gen", mixed.string(), "--provider", "mock"});
  EXPECT_EQ(partial.code, 2);
  EXPECT_NE(partial.err.find("EmptyPage"), std::string::npos) << partial.err;
  EXPECT_EQ(parse_sidecar(read_file(mixed.string() + ".quiz.json")).sets.size(), 2u);

  const auto scanned = copy_fixture(dir, "scanned_only.pdf");
  EXPECT_EQ(cli({"gen", scanned.string(), "--provider", "mock"}).code, 1);
  EXPECT_FALSE(std::filesystem::exists(scanned.string() + ".quiz.json"));

  const auto four = copy_fixture(dir, "pages_4.pdf");
  const CliRun rigged = cli({"gen", four.string(), "--provider-url", "mock:?fail_on=PAGE-2", "--quiet"});
  EXPECT_EQ(rigged.code, 2);
}

TEST(Cli, InvalidInvocations) {
  TempDir dir;
  const auto input = copy_fixture(dir, "pages_1.pdf");
  EXPECT_EQ(cli({}).code, 1);
  EXPECT_EQ(cli({"gen"}).code, 1);
  EXPECT_EQ(cli({"gen", (dir / "missing.pdf").string(), "--provider", "mock"}).code, 1);
  EXPECT_EQ(cli({"gen", input.string(), "--provider", "carrier-pigeon"}).code, 1);
  EXPECT_EQ(cli({"gen", input.string(), "--provider", "mock", "--kind", "genre"}).code, 1);
  EXPECT_EQ(cli({"gen", input.string(), "--provider", "mock", "--dedup-threshold", "2"}).code, 1);
  EXPECT_EQ(cli({"gen", input.string(), "--provider", "mock", "--count", "four"}).code, 1);
  const auto docx = copy_fixture(dir, "not_a_pdf.docx");
  const CliRun r = cli({"gen", docx.string(), "--provider", "mock"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("error: UnreadableDocument"), std::string::npos) << r.err;
}

TEST(Cli, Help) {
  const CliRun r = cli({"gen", "--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("--count"), std::string::npos);
  EXPECT_NE(r.out.find("--strict-parse"), std::string::npos);
}

TEST(Cli, SidecarMatchesServiceOutput) {
  TempDir dir;
  const auto input = copy_fixture(dir, "pages_3.pdf");
  ASSERT_EQ(cli({"gen", input.string(), "--provider", "mock", "--quiet"}).code, 0);
  const std::string from_cli = read_file(input.string() + ".quiz.json");

  ServiceConfig config;
  config.listen_addr = "127.0.0.1:0";
  config.storage_dir = dir / "store";
  config.provider.endpoint_url = "mock:";
  Service service(config);
  httplib::Client client("127.0.0.1", service.start());
  httplib::MultipartFormDataItems items = {{"file", read_fixture("pages_3.pdf"), "pages_3.pdf", "application/pdf"}};
  auto up = client.Post("/api/documents", items);
  ASSERT_TRUE(up);
  const std::string id = nlohmann::json::parse(up->body)["document_id"];
  auto job = client.Post("/api/documents/" + id + "/jobs", "{}", "application/json");
  ASSERT_EQ(job->status, 202);
  quizread::testing::read_sse(client, "/api/jobs/" + nlohmann::json::parse(job->body)["job_id"].get<std::string>() +
                                          "/events");
  const SourceDocument doc = service.store().get_document(id);
  EXPECT_EQ(read_file(service.store().sidecar_path(doc)), from_cli);
  service.stop();
}
