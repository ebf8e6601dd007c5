#pragma once

#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "quizread/pdf/object.hpp"

namespace quizread::pdf {

// Structural failure while reading a file; callers map it to UnreadableDocument.
class SyntaxError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EncryptedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A parsed PDF file: cross-reference data, lazily resolved objects and the
// flattened page list. Not thread-safe (resolution caches objects); use one
// instance per thread.
class Document {
 public:
  // Throws SyntaxError for malformed input and EncryptedError when the
  // trailer declares an /Encrypt dictionary.
  static Document load(std::string bytes);

  std::size_t page_count() const { return pages_.size(); }

  // Page dictionary with inheritable attributes (Resources) merged in.
  const Dict& page(std::size_t index) const { return pages_.at(index); }

  // Follows indirect references; unknown objects resolve to Null.
  Object resolve(const Object& obj) const;
  const Object& trailer() const { return trailer_; }

  // Lookup in `dict` followed by resolution.
  Object get(const Dict& dict, std::string_view key) const;

  // Applies the stream's filter chain. Throws UnsupportedFilter for image codecs.
  std::string decode_stream(const Stream& stream) const;

  bool recovered() const { return recovered_; }

 private:
  struct XrefEntry {
    enum class Kind { Free, InFile, InObjectStream } kind = Kind::Free;
    std::size_t offset = 0;      // InFile: byte offset
    int container = 0;           // InObjectStream: object number of the ObjStm
    int index = 0;               // InObjectStream: index inside the ObjStm
  };

  Document() = default;

  void read_xref_chain(std::size_t start);
  std::size_t read_xref_section(std::size_t offset, std::set<std::size_t>& visited);
  void read_xref_stream(const Stream& stream);
  void reconstruct();
  void build_page_list();

  Object load_object(int num) const;
  Object parse_indirect_at(std::size_t offset, int expected_num) const;
  Object load_from_object_stream(int container, int index, int num) const;
  std::string read_stream_data(std::size_t data_start, const Dict& dict) const;

  std::shared_ptr<const std::string> bytes_;
  std::map<int, XrefEntry> xref_;
  Object trailer_;
  std::vector<Dict> pages_;
  bool recovered_ = false;

  mutable std::map<int, Object> cache_;
  mutable std::set<int> resolving_;
  mutable std::map<int, std::shared_ptr<std::vector<std::pair<int, std::size_t>>>> objstm_index_;
  mutable std::map<int, std::shared_ptr<std::string>> objstm_data_;
};

}  // namespace quizread::pdf
