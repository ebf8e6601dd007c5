#include "quizread/cli.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <optional>

#include <pthread.h>

#include "quizread/config.hpp"
#include "quizread/error.hpp"
#include "quizread/orchestrator.hpp"
#include "quizread/service.hpp"
#include "quizread/sidecar.hpp"
#include "quizread/store.hpp"

namespace quizread {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitPartial = 2;

struct GenOptions {
  std::string input;
  std::string kind = "comprehension";
  int count = 4;
  std::string pages;
  std::string out;
  std::string provider;
  std::string provider_url;
  std::string model;
  std::string config;
  bool strict_parse = false;
  std::optional<double> dedup_threshold;
  bool no_dedup = false;
  std::optional<int> parallel;
  bool quiet = false;
};

struct ServeOptions {
  std::string config;
  std::string addr;
  std::string storage_dir;
  std::string static_dir;
  std::string provider_url;
  std::string model;
};

ServiceConfig base_config(const std::string& path) {
  const std::filesystem::path file(path);
  return load_config(path.empty() ? nullptr : &file, [](const char* name) { return std::getenv(name); });
}

void choose_provider(ProviderConfig& provider, const std::string& kind, const std::string& url) {
  if (!url.empty()) provider.endpoint_url = url;
  if (kind == "mock") {
    if (!provider.is_mock()) provider.endpoint_url = "mock:";
  } else if (kind == "http") {
    if (provider.is_mock()) provider.endpoint_url = std::string(kDefaultEndpoint);
  } else if (!kind.empty()) {
    throw Error(ErrorCode::InvalidConfig, "--provider must be 'mock' or 'http', got '" + kind + "'");
  }
}

int run_gen(const GenOptions& opt, std::ostream& out, std::ostream& err) {
  ServiceConfig config = base_config(opt.config);
  choose_provider(config.provider, opt.provider, opt.provider_url);
  if (!opt.model.empty()) config.provider.model_id = opt.model;
  if (opt.dedup_threshold) config.dedup.threshold = *opt.dedup_threshold;
  if (opt.no_dedup) config.dedup.enabled = false;
  if (opt.parallel) config.provider.max_parallel_calls = *opt.parallel;
  config.strict_parse = config.strict_parse || opt.strict_parse;
  config.provider.validate();
  config.dedup.validate();

  GenerationRequest request;
  request.kind = require_generation_kind(opt.kind);
  check_question_count(opt.count);
  request.questions_per_page = opt.count;

  std::string bytes;
  try {
    bytes = read_file(opt.input);
  } catch (const Error& e) {
    throw Error(ErrorCode::NotFound, e.what());
  }
  IngestOptions ingest;
  ingest.max_bytes = config.max_upload_bytes;
  const ExtractedDocument extracted =
      extract_document(bytes, std::filesystem::path(opt.input).filename().string(), ingest);
  const std::size_t page_count = extracted.document.page_count;
  if (!opt.pages.empty()) request.pages = parse_page_spec(opt.pages, page_count);
  validate_request(request, page_count);

  RunOptions run;
  run.strict_parse = config.strict_parse;
  run.char_budget = config.page_char_budget;

  std::vector<PageQuestionSet> sets;
  const JobSummary summary = run_job(
      extracted.pages, request, config.provider, config.dedup,
      [&](const PageResult& r) {
        if (r.set) sets.push_back(*r.set);
        if (opt.quiet) return;
        err << "page " << (r.page_index + 1) << "/" << page_count << ": ";
        if (r.set) {
          err << r.set->pairs.size() << " questions";
          if (!r.set->issues.empty()) err << ", " << r.set->issues.size() << " parse issues";
          if (!r.dropped.empty()) err << ", " << r.dropped.size() << " repeats dropped";
        } else {
          err << "failed, " << to_string(r.error->code) << ": " << r.error->message;
        }
        err << " (" << r.latency.count() << " ms)\n";
        err.flush();
      });

  if (summary.status == JobStatus::Failed) {
    err << "error: every requested page failed; no sidecar written\n";
    return kExitFailure;
  }
  const std::string out_path = opt.out.empty() ? opt.input + std::string(kSidecarExtension) : opt.out;
  write_file_atomic(out_path, serialize_sidecar(extracted.document, sets, sidecar_timestamp(config.provider.is_mock())));
  out << out_path << "\n";
  if (!opt.quiet) err << "status: " << to_string(summary.status) << "\n";
  return summary.status == JobStatus::Completed ? kExitOk : kExitPartial;
}

int run_serve(const ServeOptions& opt, std::ostream& err) {
  ServiceConfig config = base_config(opt.config);
  if (!opt.addr.empty()) config.listen_addr = opt.addr;
  if (!opt.storage_dir.empty()) config.storage_dir = opt.storage_dir;
  if (!opt.static_dir.empty()) config.static_dir = opt.static_dir;
  if (!opt.provider_url.empty()) config.provider.endpoint_url = opt.provider_url;
  if (!opt.model.empty()) config.provider.model_id = opt.model;

  // Block the shutdown signals before any thread starts so sigwait sees them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  Service service(config);
  const int port = service.start();
  err << "quizread listening on " << split_listen_addr(config.listen_addr).first << ":" << port << ", storage "
      << config.storage_dir.string() << "\n";
  err.flush();
  int sig = 0;
  sigwait(&signals, &sig);
  err << "shutting down\n";
  service.stop();
  pthread_sigmask(SIG_UNBLOCK, &signals, nullptr);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Generate reading questions for PDF documents", "quizread"};
  app.require_subcommand(1);

  GenOptions gen;
  CLI::App* gen_cmd = app.add_subcommand("gen", "Write a question sidecar for a PDF");
  gen_cmd->add_option("input", gen.input, "PDF file")->required();
  gen_cmd->add_option("--kind", gen.kind, "comprehension or analysis")->capture_default_str();
  gen_cmd->add_option("--count", gen.count, "Questions per page, 1 to 10")->capture_default_str();
  gen_cmd->add_option("--pages", gen.pages, "Pages to process, 1-based, e.g. 1-3,5");
  gen_cmd->add_option("--out", gen.out, "Sidecar path (default: INPUT.quiz.json)");
  gen_cmd->add_option("--provider", gen.provider, "mock or http");
  gen_cmd->add_option("--provider-url", gen.provider_url, "Chat completion endpoint or mock:?options");
  gen_cmd->add_option("--model", gen.model, "Model id");
  gen_cmd->add_option("--config", gen.config, "Config file");
  gen_cmd->add_flag("--strict-parse", gen.strict_parse, "Fail pages whose output deviates from the format");
  gen_cmd->add_option("--dedup-threshold", gen.dedup_threshold, "Similarity at which repeats are dropped");
  gen_cmd->add_flag("--no-dedup", gen.no_dedup, "Keep repeated questions");
  gen_cmd->add_option("--parallel", gen.parallel, "Concurrent provider calls");
  gen_cmd->add_flag("--quiet", gen.quiet, "Suppress progress output");

  ServeOptions serve;
  CLI::App* serve_cmd = app.add_subcommand("serve", "Run the HTTP API");
  serve_cmd->add_option("--config", serve.config, "Config file");
  serve_cmd->add_option("--addr", serve.addr, "Listen address host:port");
  serve_cmd->add_option("--storage-dir", serve.storage_dir, "Document storage directory");
  serve_cmd->add_option("--static-dir", serve.static_dir, "Front-end files served at /");
  serve_cmd->add_option("--provider-url", serve.provider_url, "Chat completion endpoint or mock:?options");
  serve_cmd->add_option("--model", serve.model, "Model id");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitFailure;
  }

  try {
    if (gen_cmd->parsed()) return run_gen(gen, out, err);
    return run_serve(serve, err);
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace quizread
