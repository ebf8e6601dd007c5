#pragma once

#include <chrono>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "quizread/error.hpp"

namespace quizread {

inline constexpr std::string_view kDefaultEndpoint = "https://api.openai.com/v1/chat/completions";

struct ProviderConfig {
  std::string endpoint_url{kDefaultEndpoint};  // "mock:..." selects the offline provider
  std::string model_id = "gpt-3.5-turbo";
  std::string credential_ref = "OPENAI_API_KEY";  // env var holding the key; empty = no auth header
  double timeout_seconds = 60.0;
  int max_retries = 3;
  int max_parallel_calls = 2;
  double temperature = 0.7;
  std::chrono::milliseconds backoff_base{1000};

  bool is_mock() const { return endpoint_url.starts_with("mock:"); }

  // Throws Error(InvalidConfig).
  void validate() const;
};

struct ProviderMeta {
  std::string model_id;
  std::chrono::milliseconds latency{0};
  int attempts = 0;
  std::vector<std::chrono::milliseconds> backoff_delays;
  std::optional<int> prompt_tokens;
  std::optional<int> completion_tokens;
};

struct RawCompletion {
  std::string text;  // verbatim provider output
  ProviderMeta meta;
};

class CompletionProvider {
 public:
  virtual ~CompletionProvider() = default;

  // Throws Error with ProviderTimeout, ProviderRejected or CredentialMissing.
  virtual RawCompletion complete(const std::string& prompt) = 0;
};

std::unique_ptr<CompletionProvider> make_provider(const ProviderConfig& config);

// One-shot convenience over make_provider(config)->complete(prompt).
RawCompletion complete(const std::string& prompt, const ProviderConfig& config);

// Process-wide bound on in-flight provider requests. Each caller passes its
// own limit; a request starts only while fewer than `limit` are in flight.
class CallLimiter {
 public:
  class Slot {
   public:
    Slot(Slot&& other) noexcept : owner_(std::exchange(other.owner_, nullptr)) {}
    Slot& operator=(Slot&&) = delete;
    Slot(const Slot&) = delete;
    ~Slot();

   private:
    friend class CallLimiter;
    explicit Slot(CallLimiter* owner) : owner_(owner) {}
    CallLimiter* owner_;
  };

  static CallLimiter& instance();

  Slot acquire(int limit);
  int in_flight() const;
  int peak() const;
  void reset_peak();

 private:
  void release();

  mutable std::mutex mu_;
  std::condition_variable cv_;
  int in_flight_ = 0;
  int peak_ = 0;
};

// Rigging knobs for the offline provider, parsed from the endpoint URL query:
//   mock:?delay_ms=200&fail_on=PAGE-2|PAGE-3&fail_with=timeout&duplicate=1&format=bulleted
struct MockOptions {
  enum class Format { Canonical, Bulleted };

  std::chrono::milliseconds delay{0};
  std::vector<std::string> fail_on;  // fail when the prompt contains one of these tokens
  ErrorCode fail_with = ErrorCode::ProviderTimeout;
  bool duplicate = false;  // same questions for every page
  Format format = Format::Canonical;
};

MockOptions parse_mock_options(std::string_view endpoint_url);

// Deterministic completion for `prompt`: a pure function of the prompt (and
// the options), well-formed in the labeled question/answer grammar.
std::string mock_completion(std::string_view prompt, const MockOptions& options = {});

}  // namespace quizread
