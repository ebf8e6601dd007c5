#include "quizread/service.hpp"

#include <httplib.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <condition_variable>
#include <map>
#include <mutex>
#include <random>
#include <thread>

#include <json.hpp>

#include "quizread/orchestrator.hpp"
#include "quizread/sidecar.hpp"
#include "quizread/store.hpp"

namespace quizread {

namespace {

using json = nlohmann::json;

constexpr std::size_t kMultipartOverhead = 64 * 1024;
constexpr auto kKeepaliveInterval = std::chrono::seconds(10);

json questions_json(const PageQuestionSet& set) {
  json questions = json::array();
  for (const QAPair& p : set.pairs) {
    questions.push_back({{"label", p.label}, {"question", p.question}, {"answer", p.answer}, {"issues", json::array()}});
  }
  for (const ParseIssue& issue : set.issues) {
    if (issue.pair_index >= questions.size()) continue;
    questions[issue.pair_index]["issues"].push_back(
        {{"code", to_string(issue.code)}, {"detail", issue.detail}, {"position", issue.position}});
  }
  return questions;
}

json set_json(const PageQuestionSet& set) {
  return {{"page_index", set.page_index}, {"kind", wire_name(set.kind)}, {"questions", questions_json(set)}};
}

json page_result_json(const PageResult& r, QuestionKind kind) {
  json out = {{"page_index", r.page_index},
              {"kind", wire_name(kind)},
              {"status", to_string(r.ok() ? PageStatus::Done : PageStatus::Errored)},
              {"latency_ms", r.latency.count()}};
  if (r.set) out["questions"] = questions_json(*r.set);
  if (r.error) out["error"] = {{"code", to_string(r.error->code)}, {"message", r.error->message}};
  json dropped = json::array();
  for (const DroppedQuestion& d : r.dropped) {
    dropped.push_back({{"question", d.question.question},
                       {"answer", d.question.answer},
                       {"matched", d.matched.question},
                       {"score", d.score}});
  }
  out["dropped"] = std::move(dropped);
  return out;
}

std::string random_id() {
  static std::mutex mu;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(mu);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(rng()));
  return buf;
}

struct Job {
  std::string id;
  SourceDocument document;
  GenerationRequest request;
  std::vector<std::size_t> pages;

  std::mutex mu;
  std::condition_variable cv;
  std::vector<std::string> page_events;  // finalized pages, in emission order
  std::map<std::size_t, PageStatus> per_page;
  JobStatus status = JobStatus::Running;
  std::string done_event;
  bool finished = false;

  std::atomic<bool> cancel{false};
  std::thread thread;

  json status_json() {
    std::lock_guard lock(mu);
    return status_json_locked();
  }

  json status_json_locked() const {
    json pp = json::array();
    for (const auto& [page, st] : per_page) pp.push_back({{"page_index", page}, {"status", to_string(st)}});
    return {{"job_id", id},
            {"document_id", document.id},
            {"kind", wire_name(request.kind)},
            {"questions_per_page", request.questions_per_page},
            {"pages", pages},
            {"status", to_string(status)},
            {"per_page", pp}};
  }
};

}  // namespace

int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnsupportedMediaType: return 415;
    case ErrorCode::DocumentTooLarge: return 413;
    case ErrorCode::UnreadableDocument:
    case ErrorCode::EncryptedDocument:
    case ErrorCode::EmptyDocument: return 422;
    case ErrorCode::PageOutOfRange:
    case ErrorCode::UnsupportedKind:
    case ErrorCode::CountOutOfRange:
    case ErrorCode::JobRejected:
    case ErrorCode::InvalidRequest:
    case ErrorCode::InvalidConfig: return 400;
    case ErrorCode::NotFound: return 404;
    case ErrorCode::JobAlreadyRunning: return 409;
    case ErrorCode::ProviderTimeout: return 504;
    case ErrorCode::ProviderRejected:
    case ErrorCode::CredentialMissing:
    case ErrorCode::NoQuestionsFound:
    case ErrorCode::MalformedResponse:
    case ErrorCode::EmptyPage: return 502;
    case ErrorCode::DuplicatePageSet:
    case ErrorCode::InvalidSidecar:
    case ErrorCode::StorageFailure: return 500;
  }
  return 500;
}

std::string api_error_body(ErrorCode code, const std::string& message) {
  return json{{"code", to_string(code)}, {"message", message}}.dump(-1, ' ', false, json::error_handler_t::replace);
}

struct Service::Impl {
  explicit Impl(ServiceConfig cfg) : config(std::move(cfg)), store(config.storage_dir) {}

  ServiceConfig config;
  Store store;
  httplib::Server server;
  std::thread listener;
  std::atomic<bool> stopping{false};

  std::mutex jobs_mu;
  std::map<std::string, std::shared_ptr<Job>> jobs;
  std::map<std::string, std::string> running_by_document;

  static void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(-1, ' ', false, json::error_handler_t::replace), "application/json");
  }

  static void send_error(httplib::Response& res, ErrorCode code, const std::string& message) {
    res.status = http_status_for(code);
    res.set_content(api_error_body(code, message), "application/json");
  }

  void routes() {
    server.set_payload_max_length(config.max_upload_bytes + kMultipartOverhead);
    if (!config.static_dir.empty() && !server.set_mount_point("/", config.static_dir.string())) {
      throw Error(ErrorCode::InvalidConfig, "static directory " + config.static_dir.string() + " does not exist");
    }

    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      try {
        std::rethrow_exception(ep);
      } catch (const Error& e) {
        send_error(res, e.code(), e.what());
      } catch (const std::exception& e) {
        send_error(res, ErrorCode::StorageFailure, std::string("internal error: ") + e.what());
      } catch (...) {
        send_error(res, ErrorCode::StorageFailure, "internal error");
      }
    });

    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (!res.body.empty()) return httplib::Server::HandlerResponse::Unhandled;
      ErrorCode code = ErrorCode::InvalidRequest;
      std::string message = httplib::status_message(res.status);
      if (res.status == 404) code = ErrorCode::NotFound;
      if (res.status == 413) {
        code = ErrorCode::DocumentTooLarge;
        message = "upload exceeds the size limit";
      }
      const int status = res.status;
      send_error(res, code, message);
      res.status = status;
      return httplib::Server::HandlerResponse::Handled;
    });

    server.Get("/api/kinds", [](const httplib::Request&, httplib::Response& res) {
      json kinds = json::array();
      for (const QuestionKindInfo& k : all_question_kinds()) {
        json entry = {{"kind", k.wire_name},
                      {"name", k.name},
                      {"generation_supported", k.generation_supported},
                      {"description", k.description}};
        entry["label_prefix"] = k.label_prefix ? json(std::string(1, *k.label_prefix)) : json(nullptr);
        kinds.push_back(std::move(entry));
      }
      send_json(res, 200, {{"kinds", kinds},
                           {"min_questions_per_page", kMinQuestionsPerPage},
                           {"max_questions_per_page", kMaxQuestionsPerPage}});
    });

    server.Post("/api/documents", [this](const httplib::Request& req, httplib::Response& res) { upload(req, res); });

    server.Get("/api/documents/:id", [this](const httplib::Request& req, httplib::Response& res) {
      const SourceDocument doc = store.get_document(req.path_params.at("id"));
      json pages = json::array();
      for (const PageText& p : store.pages(doc.id)) {
        pages.push_back({{"page_index", p.page_index}, {"char_count", p.char_count}, {"has_text_layer", p.has_text_layer}});
      }
      json body = document_json(doc);
      body["pages"] = std::move(pages);
      send_json(res, 200, body);
    });

    server.Get("/api/documents/:id/file", [this](const httplib::Request& req, httplib::Response& res) {
      const SourceDocument doc = store.get_document(req.path_params.at("id"));
      res.set_content(store.read_pdf(doc.id), "application/pdf");
      res.set_header("Content-Disposition", "inline");
    });

    server.Get("/api/documents/:id/questions",
               [this](const httplib::Request& req, httplib::Response& res) { questions(req, res); });

    server.Post("/api/documents/:id/jobs",
                [this](const httplib::Request& req, httplib::Response& res) { start_job(req, res); });

    server.Get("/api/jobs/:id", [this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, 200, find_job(req.path_params.at("id"))->status_json());
    });

    server.Get("/api/jobs/:id/events", [this](const httplib::Request& req, httplib::Response& res) { events(req, res); });
  }

  static json document_json(const SourceDocument& doc) {
    return {{"document_id", doc.id},
            {"filename", doc.filename},
            {"page_count", doc.page_count},
            {"byte_size", doc.byte_size},
            {"content_hash", doc.content_hash}};
  }

  void upload(const httplib::Request& req, httplib::Response& res) {
    std::string bytes;
    std::string filename = "document.pdf";
    if (req.is_multipart_form_data()) {
      if (req.files.empty()) throw Error(ErrorCode::InvalidRequest, "multipart upload carries no file part");
      const httplib::MultipartFormData& part =
          req.has_file("file") ? req.get_file_value("file") : req.files.begin()->second;
      bytes = part.content;
      if (!part.filename.empty()) filename = part.filename;
    } else {
      bytes = req.body;
      if (req.has_param("filename")) filename = req.get_param_value("filename");
    }
    if (bytes.size() > config.max_upload_bytes) {
      throw Error(ErrorCode::DocumentTooLarge, "upload of " + std::to_string(bytes.size()) +
                                                   " bytes exceeds the limit of " +
                                                   std::to_string(config.max_upload_bytes));
    }
    if (!looks_like_pdf(bytes)) {
      throw Error(ErrorCode::UnsupportedMediaType, "upload is not a PDF document");
    }
    IngestOptions options;
    options.max_bytes = config.max_upload_bytes;
    const Store::PutResult put = store.put_document(bytes, filename, options);
    send_json(res, put.created ? 201 : 200, document_json(put.document));
  }

  void questions(const httplib::Request& req, httplib::Response& res) {
    const SourceDocument doc = store.get_document(req.path_params.at("id"));
    std::optional<std::size_t> page;
    std::optional<QuestionKind> kind;
    if (req.has_param("page")) {
      const std::string text = req.get_param_value("page");
      std::size_t value = 0;
      auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
      if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
        throw Error(ErrorCode::InvalidRequest, "page filter '" + text + "' is not a page index");
      }
      if (value >= doc.page_count) {
        throw Error(ErrorCode::PageOutOfRange, "page " + text + " is outside [0, " + std::to_string(doc.page_count) + ")");
      }
      page = value;
    }
    if (req.has_param("kind")) kind = require_generation_kind(req.get_param_value("kind"));

    json out = json::array();
    for (const PageQuestionSet& set : store.load_results(doc.id)) {
      if (page && set.page_index != *page) continue;
      if (kind && set.kind != *kind) continue;
      out.push_back(set_json(set));
    }
    send_json(res, 200, out);
  }

  static GenerationRequest parse_job_body(const std::string& body) {
    json j;
    try {
      j = json::parse(body.empty() ? std::string("{}") : body);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::InvalidRequest, std::string("request body is not JSON: ") + e.what());
    }
    if (!j.is_object()) throw Error(ErrorCode::InvalidRequest, "request body must be a JSON object");

    GenerationRequest request;
    if (j.contains("kind")) {
      if (!j["kind"].is_string()) throw Error(ErrorCode::UnsupportedKind, "kind must be a string");
      request.kind = require_generation_kind(j["kind"].get<std::string>());
    }
    if (j.contains("questions_per_page")) {
      const json& n = j["questions_per_page"];
      const std::string bound = "questions_per_page must be an integer between " +
                                std::to_string(kMinQuestionsPerPage) + " and " + std::to_string(kMaxQuestionsPerPage);
      if (n.is_number_integer()) {
        const long long v = n.get<long long>();
        if (v < kMinQuestionsPerPage || v > kMaxQuestionsPerPage) {
          throw Error(ErrorCode::CountOutOfRange, bound + ", got " + std::to_string(v));
        }
        request.questions_per_page = static_cast<int>(v);
      } else if (n.is_number_float()) {
        throw Error(ErrorCode::CountOutOfRange, bound + ", got " + n.dump());
      } else {
        throw Error(ErrorCode::CountOutOfRange, bound);
      }
    }
    check_question_count(request.questions_per_page);
    if (j.contains("pages") && !j["pages"].is_null()) {
      if (!j["pages"].is_array()) throw Error(ErrorCode::InvalidRequest, "pages must be an array of page indices");
      for (const json& p : j["pages"]) {
        if (!p.is_number_unsigned()) {
          throw Error(ErrorCode::PageOutOfRange, "page " + p.dump() + " is not a valid page index");
        }
        request.pages.push_back(p.get<std::size_t>());
      }
      if (request.pages.empty()) throw Error(ErrorCode::InvalidRequest, "pages must not be empty when given");
    }
    return request;
  }

  void start_job(const httplib::Request& req, httplib::Response& res) {
    const SourceDocument doc = store.get_document(req.path_params.at("id"));
    GenerationRequest request = parse_job_body(req.body);
    validate_request(request, doc.page_count);

    auto job = std::make_shared<Job>();
    job->id = random_id();
    job->document = doc;
    job->pages = resolve_pages(request, doc.page_count);
    job->request = std::move(request);
    for (std::size_t p : job->pages) job->per_page[p] = PageStatus::Pending;

    {
      std::lock_guard lock(jobs_mu);
      if (stopping) throw Error(ErrorCode::JobRejected, "service is shutting down");
      if (auto it = running_by_document.find(doc.id); it != running_by_document.end()) {
        throw Error(ErrorCode::JobAlreadyRunning, "job " + it->second + " is still running for this document");
      }
      running_by_document[doc.id] = job->id;
      jobs[job->id] = job;
      job->thread = std::thread([this, job] { run(job); });
    }
    send_json(res, 202, {{"job_id", job->id}, {"document_id", doc.id}});
  }

  void run(const std::shared_ptr<Job>& job) {
    auto publish = [&](std::string event, bool done) {
      {
        std::lock_guard lock(job->mu);
        if (done) {
          job->done_event = std::move(event);
          job->finished = true;
        } else {
          job->page_events.push_back(std::move(event));
        }
      }
      job->cv.notify_all();
    };

    try {
      const std::vector<PageText> pages = store.pages(job->document.id);
      RunOptions options;
      options.strict_parse = config.strict_parse;
      options.char_budget = config.page_char_budget;
      options.cancel = &job->cancel;
      // Pages outside this job keep their questions; don't repeat them.
      for (const PageQuestionSet& s : store.load_results(job->document.id)) {
        if (s.kind != job->request.kind) continue;
        if (std::find(job->pages.begin(), job->pages.end(), s.page_index) != job->pages.end()) continue;
        options.seed_accepted.insert(options.seed_accepted.end(), s.pairs.begin(), s.pairs.end());
      }
      const std::string generated_at = sidecar_timestamp(config.provider.is_mock());

      const JobSummary summary = run_job(
          pages, job->request, config.provider, config.dedup,
          [&](const PageResult& r) {
            PageResult result = r;
            if (result.set) {
              try {
                store.merge_results(job->document, std::span<const PageQuestionSet>(&*result.set, 1), generated_at);
              } catch (const Error& e) {
                result.error = PageError{e.code(), e.what()};
                result.set.reset();
              }
            }
            {
              std::lock_guard lock(job->mu);
              job->per_page[result.page_index] = result.ok() ? PageStatus::Done : PageStatus::Errored;
            }
            publish(page_result_json(result, job->request.kind).dump(-1, ' ', false, json::error_handler_t::replace),
                    false);
          },
          options);
      (void)summary;
    } catch (const Error& e) {
      std::lock_guard lock(job->mu);
      for (auto& [page, st] : job->per_page) {
        if (st == PageStatus::Pending) st = PageStatus::Errored;
      }
    }

    json done;
    {
      std::lock_guard lock(job->mu);
      job->status = summarize(job->per_page);
      done = job->status_json_locked();
    }
    {
      std::lock_guard lock(jobs_mu);
      running_by_document.erase(job->document.id);
    }
    publish(done.dump(), true);
  }

  std::shared_ptr<Job> find_job(const std::string& id) {
    std::lock_guard lock(jobs_mu);
    auto it = jobs.find(id);
    if (it == jobs.end()) throw Error(ErrorCode::NotFound, "no job '" + id + "'");
    return it->second;
  }

  void events(const httplib::Request& req, httplib::Response& res) {
    auto job = find_job(req.path_params.at("id"));
    res.set_header("Cache-Control", "no-cache");
    res.set_header("X-Accel-Buffering", "no");
    auto sent = std::make_shared<std::size_t>(0);
    res.set_chunked_content_provider(
        "text/event-stream",
        [this, job, sent](std::size_t, httplib::DataSink& sink) {
          std::unique_lock lock(job->mu);
          job->cv.wait_for(lock, kKeepaliveInterval,
                           [&] { return *sent < job->page_events.size() || job->finished || stopping.load(); });
          std::string chunk;
          while (*sent < job->page_events.size()) {
            chunk += "event: page\ndata: " + job->page_events[*sent] + "\n\n";
            ++*sent;
          }
          const bool finished = job->finished;
          if (finished) chunk += "event: done\ndata: " + job->done_event + "\n\n";
          lock.unlock();

          if (chunk.empty()) chunk = ": keepalive\n\n";
          if (!sink.is_writable() || !sink.write(chunk.data(), chunk.size())) return false;
          if (finished || stopping) sink.done();
          return true;
        });
  }
};

Service::Service(ServiceConfig config) {
  config.validate();
  impl_ = std::make_unique<Impl>(std::move(config));
  impl_->routes();
}

Service::~Service() { stop(); }

int Service::start() {
  const auto [host, port] = split_listen_addr(impl_->config.listen_addr);
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw Error(ErrorCode::InvalidConfig, "cannot listen on " + impl_->config.listen_addr);
  impl_->listener = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void Service::stop() {
  if (!impl_) return;
  std::vector<std::shared_ptr<Job>> jobs;
  {
    std::lock_guard lock(impl_->jobs_mu);
    impl_->stopping = true;
    for (auto& [id, job] : impl_->jobs) {
      job->cancel = true;
      jobs.push_back(job);
    }
  }
  for (auto& job : jobs) job->cv.notify_all();
  impl_->server.stop();
  if (impl_->listener.joinable()) impl_->listener.join();
  for (auto& job : jobs) {
    if (job->thread.joinable()) job->thread.join();
  }
}

Store& Service::store() { return impl_->store; }

const ServiceConfig& Service::config() const { return impl_->config; }

}  // namespace quizread
