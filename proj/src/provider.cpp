#include "quizread/provider.hpp"

#include <httplib.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <random>
#include <thread>

#include <json.hpp>

#include "quizread/ingest.hpp"
#include "quizread/prompting.hpp"

namespace quizread {

namespace {

using Clock = std::chrono::steady_clock;
using json = nlohmann::json;

struct Endpoint {
  std::string scheme_host_port;
  std::string path;
};

Endpoint split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::InvalidConfig, "provider endpoint '" + url + "' is not an http(s) URL");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  Endpoint ep;
  ep.scheme_host_port = url.substr(0, path_start);
  ep.path = path_start == std::string::npos ? "/" : url.substr(path_start);
  return ep;
}

std::string redact(std::string text, const std::string& secret) {
  if (secret.empty()) return text;
  std::size_t pos = 0;
  while ((pos = text.find(secret, pos)) != std::string::npos) {
    text.replace(pos, secret.size(), "[redacted]");
    pos += 10;
  }
  return text;
}

std::chrono::milliseconds backoff_delay(std::chrono::milliseconds base, int retry_index) {
  thread_local std::mt19937 rng{std::random_device{}()};
  std::uniform_real_distribution<double> jitter(0.0, 0.5);
  const double scaled = static_cast<double>(base.count()) * static_cast<double>(1LL << std::min(retry_index, 20));
  return std::chrono::milliseconds(static_cast<long long>(scaled * (1.0 + jitter(rng))));
}

class HttpProvider final : public CompletionProvider {
 public:
  explicit HttpProvider(ProviderConfig config) : config_(std::move(config)), endpoint_(split_url(config_.endpoint_url)) {}

  RawCompletion complete(const std::string& prompt) override {
    std::string credential;
    if (!config_.credential_ref.empty()) {
      const char* value = std::getenv(config_.credential_ref.c_str());
      if (value == nullptr || *value == '\0') {
        throw Error(ErrorCode::CredentialMissing,
                    "environment variable " + config_.credential_ref + " holding the provider API key is not set");
      }
      credential = value;
    }

    const json body = {
        {"model", config_.model_id},
        {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
        {"temperature", config_.temperature},
    };
    const std::string payload = body.dump();

    RawCompletion completion;
    completion.meta.model_id = config_.model_id;
    const auto started = Clock::now();
    std::string last_failure;

    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
      ++completion.meta.attempts;
      Outcome outcome;
      {
        auto slot = CallLimiter::instance().acquire(config_.max_parallel_calls);
        outcome = attempt_once(payload, credential);
      }
      if (outcome.kind == Outcome::Kind::Ok) {
        completion.text = std::move(outcome.text);
        completion.meta.prompt_tokens = outcome.prompt_tokens;
        completion.meta.completion_tokens = outcome.completion_tokens;
        completion.meta.latency = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - started);
        return completion;
      }
      if (outcome.kind == Outcome::Kind::Rejected) {
        throw Error(ErrorCode::ProviderRejected, redact(outcome.detail, credential));
      }
      last_failure = outcome.detail;
      if (attempt < config_.max_retries) {
        const auto delay = backoff_delay(config_.backoff_base, attempt);
        completion.meta.backoff_delays.push_back(delay);
        std::this_thread::sleep_for(delay);
      }
    }
    throw Error(ErrorCode::ProviderTimeout,
                redact("provider did not answer after " + std::to_string(completion.meta.attempts) +
                           " attempts (last failure: " + last_failure + ")",
                       credential));
  }

 private:
  struct Outcome {
    enum class Kind { Ok, Transient, Rejected } kind = Kind::Transient;
    std::string text;
    std::string detail;
    std::optional<int> prompt_tokens;
    std::optional<int> completion_tokens;
  };

  Outcome attempt_once(const std::string& payload, const std::string& credential) const {
    httplib::Client client(endpoint_.scheme_host_port);
    const auto whole = static_cast<time_t>(config_.timeout_seconds);
    const auto micros = static_cast<time_t>((config_.timeout_seconds - static_cast<double>(whole)) * 1e6);
    client.set_connection_timeout(whole, micros);
    client.set_read_timeout(whole, micros);
    client.set_write_timeout(whole, micros);

    httplib::Headers headers;
    if (!credential.empty()) headers.emplace("Authorization", "Bearer " + credential);

    Outcome out;
    auto res = client.Post(endpoint_.path, headers, payload, "application/json");
    if (!res) {
      out.kind = Outcome::Kind::Transient;
      out.detail = httplib::to_string(res.error());
      return out;
    }
    const int status = res->status;
    if (status == 429 || status >= 500) {
      out.kind = Outcome::Kind::Transient;
      out.detail = "HTTP " + std::to_string(status);
      return out;
    }
    if (status < 200 || status >= 300) {
      out.kind = Outcome::Kind::Rejected;
      out.detail = "provider rejected the request with HTTP " + std::to_string(status) + ": " +
                   res->body.substr(0, 200);
      return out;
    }
    try {
      const json reply = json::parse(res->body);
      out.text = reply.at("choices").at(0).at("message").at("content").get<std::string>();
      if (reply.contains("usage") && reply["usage"].is_object()) {
        const json& usage = reply["usage"];
        if (usage.contains("prompt_tokens")) out.prompt_tokens = usage["prompt_tokens"].get<int>();
        if (usage.contains("completion_tokens")) out.completion_tokens = usage["completion_tokens"].get<int>();
      }
      out.kind = Outcome::Kind::Ok;
    } catch (const json::exception& e) {
      out.kind = Outcome::Kind::Rejected;
      out.detail = std::string("provider response is not a chat completion: ") + e.what();
    }
    return out;
  }

  ProviderConfig config_;
  Endpoint endpoint_;
};

class MockProvider final : public CompletionProvider {
 public:
  explicit MockProvider(ProviderConfig config)
      : config_(std::move(config)), options_(parse_mock_options(config_.endpoint_url)) {}

  RawCompletion complete(const std::string& prompt) override {
    const auto started = Clock::now();
    auto slot = CallLimiter::instance().acquire(config_.max_parallel_calls);
    if (options_.delay.count() > 0) std::this_thread::sleep_for(options_.delay);
    for (const std::string& token : options_.fail_on) {
      if (contains_token(prompt, token)) {
        throw Error(options_.fail_with, "mock provider rigged to fail on '" + token + "'");
      }
    }
    RawCompletion completion;
    completion.text = mock_completion(prompt, options_);
    completion.meta.model_id = "mock";
    completion.meta.attempts = 1;
    completion.meta.latency = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - started);
    return completion;
  }

 private:
  static bool contains_token(std::string_view haystack, std::string_view token) {
    if (token.empty()) return false;
    std::size_t pos = 0;
    while ((pos = haystack.find(token, pos)) != std::string_view::npos) {
      const std::size_t end = pos + token.size();
      const bool left_ok = pos == 0 || std::isalnum(static_cast<unsigned char>(haystack[pos - 1])) == 0;
      const bool right_ok = end >= haystack.size() || std::isalnum(static_cast<unsigned char>(haystack[end])) == 0;
      if (left_ok && right_ok) return true;
      pos = end;
    }
    return false;
  }

  ProviderConfig config_;
  MockOptions options_;
};

std::vector<std::string> content_words(std::string_view text) {
  std::vector<std::string> words;
  std::string cur;
  auto flush = [&] {
    if (cur.size() >= 4 && std::find(words.begin(), words.end(), cur) == words.end()) words.push_back(cur);
    cur.clear();
  };
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '-') {
      cur.push_back(c);
    } else {
      flush();
    }
  }
  flush();
  return words;
}

std::string excerpt_after(std::string_view text, std::string_view word, std::size_t max_words) {
  std::size_t pos = text.find(word);
  if (pos == std::string_view::npos) pos = 0;
  std::string out;
  std::size_t count = 0;
  for (std::size_t i = pos; i < text.size() && count < max_words; ++i) {
    const char c = text[i];
    if (c == '\n' || c == '\r') {
      out.push_back(' ');
    } else {
      out.push_back(c);
    }
    if (c == ' ') ++count;
  }
  while (!out.empty() && (out.back() == ' ' || out.back() == '.')) out.pop_back();
  return out;
}

}  // namespace

void ProviderConfig::validate() const {
  if (max_parallel_calls < 1) throw Error(ErrorCode::InvalidConfig, "max_parallel_calls must be at least 1");
  if (max_retries < 0) throw Error(ErrorCode::InvalidConfig, "max_retries must be non-negative");
  if (!(timeout_seconds > 0)) throw Error(ErrorCode::InvalidConfig, "timeout must be positive");
  if (backoff_base.count() < 0) throw Error(ErrorCode::InvalidConfig, "backoff base must be non-negative");
  if (!is_mock()) split_url(endpoint_url);
}

std::unique_ptr<CompletionProvider> make_provider(const ProviderConfig& config) {
  config.validate();
  if (config.is_mock()) return std::make_unique<MockProvider>(config);
  return std::make_unique<HttpProvider>(config);
}

RawCompletion complete(const std::string& prompt, const ProviderConfig& config) {
  return make_provider(config)->complete(prompt);
}

CallLimiter::Slot::~Slot() {
  if (owner_ != nullptr) owner_->release();
}

CallLimiter& CallLimiter::instance() {
  static CallLimiter limiter;
  return limiter;
}

CallLimiter::Slot CallLimiter::acquire(int limit) {
  limit = std::max(limit, 1);
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return in_flight_ < limit; });
  ++in_flight_;
  peak_ = std::max(peak_, in_flight_);
  return Slot(this);
}

void CallLimiter::release() {
  {
    std::lock_guard lock(mu_);
    --in_flight_;
  }
  cv_.notify_all();
}

int CallLimiter::in_flight() const {
  std::lock_guard lock(mu_);
  return in_flight_;
}

int CallLimiter::peak() const {
  std::lock_guard lock(mu_);
  return peak_;
}

void CallLimiter::reset_peak() {
  std::lock_guard lock(mu_);
  peak_ = in_flight_;
}

MockOptions parse_mock_options(std::string_view endpoint_url) {
  MockOptions options;
  const auto q = endpoint_url.find('?');
  if (q == std::string_view::npos) return options;
  std::string_view query = endpoint_url.substr(q + 1);
  while (!query.empty()) {
    auto amp = query.find('&');
    std::string_view pair = query.substr(0, amp);
    query = amp == std::string_view::npos ? std::string_view{} : query.substr(amp + 1);
    auto eq = pair.find('=');
    std::string_view key = pair.substr(0, eq);
    std::string_view value = eq == std::string_view::npos ? std::string_view{} : pair.substr(eq + 1);
    if (key == "delay_ms") {
      long long ms = 0;
      std::from_chars(value.data(), value.data() + value.size(), ms);
      options.delay = std::chrono::milliseconds(ms);
    } else if (key == "fail_on") {
      while (!value.empty()) {
        auto bar = value.find('|');
        if (bar != 0) options.fail_on.emplace_back(value.substr(0, bar));
        value = bar == std::string_view::npos ? std::string_view{} : value.substr(bar + 1);
      }
    } else if (key == "fail_with") {
      options.fail_with = value == "rejected" ? ErrorCode::ProviderRejected : ErrorCode::ProviderTimeout;
    } else if (key == "duplicate") {
      options.duplicate = value == "1" || value == "true";
    } else if (key == "format") {
      options.format = value == "bulleted" ? MockOptions::Format::Bulleted : MockOptions::Format::Canonical;
    }
  }
  return options;
}

std::string mock_completion(std::string_view prompt, const MockOptions& options) {
  // Recover count, kind and page text from the generation template.
  int n = 3;
  char prefix = 'C';
  std::string_view page_text = prompt;
  if (prompt.starts_with("Write ")) {
    std::size_t pos = 6;
    int parsed = 0;
    auto [ptr, ec] = std::from_chars(prompt.data() + pos, prompt.data() + prompt.size(), parsed);
    if (ec == std::errc{}) n = std::clamp(parsed, kMinQuestionsPerPage, kMaxQuestionsPerPage);
    const std::string_view rest(ptr, static_cast<std::size_t>(prompt.data() + prompt.size() - ptr));
    if (rest.starts_with(" analysis")) prefix = 'A';
    constexpr std::string_view kOpen = "research article: ";
    constexpr std::string_view kClose = ". Number these questions with";
    const auto open = prompt.find(kOpen);
    const auto close = prompt.rfind(kClose);
    if (open != std::string_view::npos && close != std::string_view::npos && close >= open + kOpen.size()) {
      page_text = prompt.substr(open + kOpen.size(), close - open - kOpen.size());
    }
  }

  std::vector<std::string> words = content_words(page_text);
  if (words.empty() || options.duplicate) words = {"passage"};
  const std::string seed = options.duplicate ? std::string(1, prefix) + std::to_string(n) : std::string(prompt);

  std::string out;
  for (int i = 1; i <= n; ++i) {
    const std::string h = sha256_hex(seed + "#" + std::to_string(i));
    const std::size_t pick = std::stoul(h.substr(0, 8), nullptr, 16) % words.size();
    const std::string& word = words[pick];
    const std::string question = "What does the text establish about \"" + word + "\" (ref " + h.substr(8, 6) +
                                 " " + h.substr(14, 6) + ")?";
    std::string answer = "The text discusses \"" + word + "\"";
    if (!options.duplicate) {
      const std::string ex = excerpt_after(page_text, word, 12);
      if (!ex.empty()) answer += " in the passage: " + ex;
    }
    answer += ".";

    if (options.format == MockOptions::Format::Bulleted) {
      out += "- " + question + "\n";
    } else {
      out += std::string(1, prefix) + std::to_string(i) + ". " + question + "\n" + std::string(kAnswerMarker) +
             " " + answer + "\n";
    }
  }
  return out;
}

}  // namespace quizread
