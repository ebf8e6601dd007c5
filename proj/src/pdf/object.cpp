#include "quizread/pdf/object.hpp"

namespace quizread::pdf {

const Object* Dict::find(std::string_view key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return &v;
  }
  return nullptr;
}

void Dict::set(std::string key, Object value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  entries_.emplace_back(std::move(key), std::move(value));
}

double Object::as_number() const {
  if (is_int()) return static_cast<double>(as_int());
  return std::get<double>(value_);
}

const Dict* Object::dict() const {
  if (is_dict()) return &as_dict();
  if (is_stream()) return &as_stream().dict;
  return nullptr;
}

std::optional<std::int64_t> int_value(const Object* obj) {
  if (obj == nullptr || !obj->is_number()) return std::nullopt;
  if (obj->is_int()) return obj->as_int();
  return static_cast<std::int64_t>(obj->as_number());
}

std::optional<double> number_value(const Object* obj) {
  if (obj == nullptr || !obj->is_number()) return std::nullopt;
  return obj->as_number();
}

}  // namespace quizread::pdf
