#include "quizread/config.hpp"

#include <charconv>
#include <sstream>

#include "quizread/error.hpp"
#include "quizread/store.hpp"

namespace quizread {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& want) {
  throw Error(ErrorCode::InvalidConfig, "option '" + key + "' expects " + want + ", got '" + value + "'");
}

template <typename T>
T parse_number(const std::string& key, const std::string& value, const std::string& want) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (value.empty() || ec != std::errc{} || ptr != value.data() + value.size()) bad_value(key, value, want);
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  bad_value(key, value, "true or false");
}

}  // namespace

void ServiceConfig::validate() const {
  split_listen_addr(listen_addr);
  provider.validate();
  dedup.validate();
  if (storage_dir.empty()) throw Error(ErrorCode::InvalidConfig, "storage directory must be set");
  if (max_upload_bytes == 0) throw Error(ErrorCode::InvalidConfig, "upload limit must be positive");
  if (page_char_budget == 0) throw Error(ErrorCode::InvalidConfig, "page character budget must be positive");
}

void set_option(ServiceConfig& config, const std::string& key, const std::string& value) {
  if (key == "listen_addr") {
    config.listen_addr = value;
  } else if (key == "storage_dir") {
    config.storage_dir = value;
  } else if (key == "static_dir") {
    config.static_dir = value;
  } else if (key == "provider_url") {
    config.provider.endpoint_url = value;
  } else if (key == "model") {
    config.provider.model_id = value;
  } else if (key == "api_key_var") {
    config.provider.credential_ref = value;
  } else if (key == "timeout_seconds") {
    config.provider.timeout_seconds = parse_number<double>(key, value, "a number of seconds");
  } else if (key == "max_retries") {
    config.provider.max_retries = parse_number<int>(key, value, "an integer");
  } else if (key == "max_parallel_calls") {
    config.provider.max_parallel_calls = parse_number<int>(key, value, "an integer");
  } else if (key == "temperature") {
    config.provider.temperature = parse_number<double>(key, value, "a number");
  } else if (key == "backoff_base_ms") {
    config.provider.backoff_base = std::chrono::milliseconds(parse_number<long long>(key, value, "milliseconds"));
  } else if (key == "dedup_threshold") {
    config.dedup.threshold = parse_number<double>(key, value, "a number in [0, 1]");
  } else if (key == "dedup_enabled") {
    config.dedup.enabled = parse_bool(key, value);
  } else if (key == "max_upload_bytes") {
    config.max_upload_bytes = parse_number<std::size_t>(key, value, "a byte count");
  } else if (key == "page_char_budget") {
    config.page_char_budget = parse_number<std::size_t>(key, value, "a character count");
  } else if (key == "strict_parse") {
    config.strict_parse = parse_bool(key, value);
  } else {
    throw Error(ErrorCode::InvalidConfig, "unknown option '" + key + "'");
  }
  try {
    config.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidConfig, "option '" + key + "': " + e.what());
  }
}

void apply_config_text(ServiceConfig& config, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::InvalidConfig, "config line " + std::to_string(number) + " is not 'key = value'");
    }
    set_option(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

void apply_config_file(ServiceConfig& config, const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidConfig, e.what());
  }
  apply_config_text(config, text);
}

void apply_env(ServiceConfig& config, const EnvLookup& getenv) {
  static constexpr std::pair<const char*, const char*> kVars[] = {
      {"QUIZREAD_ADDR", "listen_addr"},          {"QUIZREAD_STORAGE_DIR", "storage_dir"},
      {"QUIZREAD_PROVIDER_URL", "provider_url"}, {"QUIZREAD_MODEL", "model"},
      {"QUIZREAD_API_KEY_VAR", "api_key_var"},   {"QUIZREAD_DEDUP_THRESHOLD", "dedup_threshold"},
  };
  for (const auto& [var, key] : kVars) {
    const char* value = getenv(var);
    if (value != nullptr && *value != '\0') set_option(config, key, value);
  }
}

ServiceConfig load_config(const std::filesystem::path* file, const EnvLookup& getenv) {
  ServiceConfig config;
  if (file != nullptr) apply_config_file(config, *file);
  apply_env(config, getenv);
  return config;
}

std::pair<std::string, int> split_listen_addr(const std::string& addr) {
  const auto colon = addr.rfind(':');
  std::string host = colon == std::string::npos ? "127.0.0.1" : addr.substr(0, colon);
  const std::string port_text = colon == std::string::npos ? addr : addr.substr(colon + 1);
  if (host.empty()) host = "0.0.0.0";
  int port = -1;
  auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (port_text.empty() || ec != std::errc{} || ptr != port_text.data() + port_text.size() || port < 0 ||
      port > 65535) {
    throw Error(ErrorCode::InvalidConfig, "listen address '" + addr + "' is not host:port");
  }
  return {host, port};
}

}  // namespace quizread
