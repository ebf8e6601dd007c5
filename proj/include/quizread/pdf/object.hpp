#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace quizread::pdf {

class Object;

struct Null {
  bool operator==(const Null&) const = default;
};

struct Ref {
  int num = 0;
  int gen = 0;
  auto operator<=>(const Ref&) const = default;
};

struct Name {
  std::string value;
  bool operator==(const Name&) const = default;
};

struct String {
  std::string bytes;
  bool hex = false;
  bool operator==(const String&) const = default;
};

using Array = std::vector<Object>;

// Insertion-ordered dictionary; PDF dictionaries are small, linear lookup is fine.
class Dict {
 public:
  using Entries = std::vector<std::pair<std::string, Object>>;

  const Object* find(std::string_view key) const;
  void set(std::string key, Object value);
  bool contains(std::string_view key) const { return find(key) != nullptr; }
  std::size_t size() const;
  Entries::const_iterator begin() const;
  Entries::const_iterator end() const;

 private:
  Entries entries_;
};

struct Stream {
  Dict dict;
  std::string data;  // raw, still filter-encoded
};

class Object {
 public:
  using Value = std::variant<Null, bool, std::int64_t, double, String, Name, Array, Dict, Stream, Ref>;

  Object() = default;
  template <typename T>
    requires std::is_constructible_v<Value, T&&>
  Object(T&& v) : value_(std::forward<T>(v)) {}

  bool is_null() const { return std::holds_alternative<Null>(value_); }
  bool is_bool() const { return std::holds_alternative<bool>(value_); }
  bool is_int() const { return std::holds_alternative<std::int64_t>(value_); }
  bool is_number() const { return is_int() || std::holds_alternative<double>(value_); }
  bool is_string() const { return std::holds_alternative<String>(value_); }
  bool is_name() const { return std::holds_alternative<Name>(value_); }
  bool is_array() const { return std::holds_alternative<Array>(value_); }
  bool is_dict() const { return std::holds_alternative<Dict>(value_); }
  bool is_stream() const { return std::holds_alternative<Stream>(value_); }
  bool is_ref() const { return std::holds_alternative<Ref>(value_); }

  bool is_name(std::string_view n) const { return is_name() && std::get<Name>(value_).value == n; }

  std::int64_t as_int() const { return std::get<std::int64_t>(value_); }
  double as_number() const;
  const std::string& as_name() const { return std::get<Name>(value_).value; }
  const String& as_string() const { return std::get<String>(value_); }
  const Array& as_array() const { return std::get<Array>(value_); }
  const Dict& as_dict() const { return std::get<Dict>(value_); }
  const Stream& as_stream() const { return std::get<Stream>(value_); }
  Ref as_ref() const { return std::get<Ref>(value_); }

  // Dictionary of a dict or of a stream; nullptr for anything else.
  const Dict* dict() const;

  const Value& value() const { return value_; }

 private:
  Value value_;
};

inline std::size_t Dict::size() const { return entries_.size(); }
inline Dict::Entries::const_iterator Dict::begin() const { return entries_.begin(); }
inline Dict::Entries::const_iterator Dict::end() const { return entries_.end(); }

std::optional<std::int64_t> int_value(const Object* obj);
std::optional<double> number_value(const Object* obj);

}  // namespace quizread::pdf
