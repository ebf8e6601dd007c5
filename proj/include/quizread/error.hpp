#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace quizread {

enum class ErrorCode {
  // ingest
  UnreadableDocument,
  EncryptedDocument,
  EmptyDocument,
  DocumentTooLarge,
  UnsupportedMediaType,
  PageOutOfRange,
  // prompting / provider
  UnsupportedKind,
  CountOutOfRange,
  EmptyPage,
  ProviderTimeout,
  ProviderRejected,
  CredentialMissing,
  // qa parsing and sidecars
  NoQuestionsFound,
  MalformedResponse,
  DuplicatePageSet,
  InvalidSidecar,
  // orchestration and storage
  JobRejected,
  JobAlreadyRunning,
  InvalidRequest,
  StorageFailure,
  NotFound,
  InvalidConfig,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace quizread
