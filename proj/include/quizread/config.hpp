#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>

#include "quizread/dedup.hpp"
#include "quizread/ingest.hpp"
#include "quizread/provider.hpp"

namespace quizread {

struct ServiceConfig {
  std::string listen_addr = "127.0.0.1:8080";  // host:port
  std::filesystem::path storage_dir = "quizread-data";
  std::filesystem::path static_dir;  // optional front-end files served at "/"
  ProviderConfig provider;
  DedupConfig dedup;
  std::size_t max_upload_bytes = kDefaultMaxUploadBytes;
  std::size_t page_char_budget = kDefaultPageCharBudget;
  bool strict_parse = false;

  // Throws Error(InvalidConfig).
  void validate() const;
};

using EnvLookup = std::function<const char*(const char*)>;

// Sets one option by its config-file key. Throws Error(InvalidConfig) for an
// unknown key or a malformed value.
void set_option(ServiceConfig& config, const std::string& key, const std::string& value);

// "key = value" lines; blank lines and lines starting with '#' are ignored.
void apply_config_text(ServiceConfig& config, const std::string& text);
void apply_config_file(ServiceConfig& config, const std::filesystem::path& path);

// QUIZREAD_ADDR, QUIZREAD_STORAGE_DIR, QUIZREAD_PROVIDER_URL, QUIZREAD_MODEL,
// QUIZREAD_API_KEY_VAR and QUIZREAD_DEDUP_THRESHOLD.
void apply_env(ServiceConfig& config, const EnvLookup& getenv);

// Defaults, then the file (if any), then the environment.
ServiceConfig load_config(const std::filesystem::path* file, const EnvLookup& getenv);

// Splits "host:port"; a bare port binds 127.0.0.1. Throws Error(InvalidConfig).
std::pair<std::string, int> split_listen_addr(const std::string& addr);

}  // namespace quizread
