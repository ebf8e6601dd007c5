#include "quizread/pdf/document.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <optional>

#include "quizread/pdf/filters.hpp"
#include "quizread/pdf/lexer.hpp"

namespace quizread::pdf {

namespace {

constexpr std::size_t kNotFound = std::string_view::npos;
constexpr int kMaxPageTreeDepth = 64;
constexpr int kMaxRefHops = 32;

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Offset of the first byte of stream data following the "stream" keyword.
std::size_t skip_stream_eol(std::string_view data, std::size_t pos) {
  if (pos < data.size() && data[pos] == '\r') ++pos;
  if (pos < data.size() && data[pos] == '\n') ++pos;
  return pos;
}

}  // namespace

Document Document::load(std::string bytes) {
  Document doc;
  doc.bytes_ = std::make_shared<const std::string>(std::move(bytes));
  std::string_view data = *doc.bytes_;

  const std::size_t header = data.substr(0, 1024).find("%PDF-");
  if (header == kNotFound) throw SyntaxError("missing %PDF- header");

  bool chain_ok = false;
  try {
    const std::size_t sx = data.rfind("startxref");
    if (sx != kNotFound) {
      Lexer lex(data, sx + 9);
      Token off = lex.next();
      if (off.type == Token::Type::Integer && off.integer >= 0 &&
          static_cast<std::size_t>(off.integer) < data.size()) {
        doc.read_xref_chain(static_cast<std::size_t>(off.integer));
        const Dict* tr = doc.trailer_.dict();
        chain_ok = tr != nullptr && doc.resolve(doc.get(*tr, "Root")).is_dict();
      }
    }
  } catch (const EncryptedError&) {
    throw;
  } catch (const std::exception&) {
    chain_ok = false;
  }

  if (!chain_ok) doc.reconstruct();

  const Dict* tr = doc.trailer_.dict();
  if (tr == nullptr) throw SyntaxError("no trailer dictionary");
  if (const Object* enc = tr->find("Encrypt"); enc != nullptr && !enc->is_null()) {
    throw EncryptedError("document is encrypted");
  }

  try {
    doc.build_page_list();
  } catch (const std::exception&) {
    if (doc.recovered_) throw SyntaxError("unreadable page tree");
    doc.reconstruct();
    doc.build_page_list();
  }
  if (doc.pages_.empty() && !doc.recovered_) {
    // A page tree that yields nothing often means a broken xref; rescan once.
    doc.reconstruct();
    doc.build_page_list();
  }
  return doc;
}

void Document::read_xref_chain(std::size_t start) {
  std::set<std::size_t> visited;
  std::size_t offset = start;
  while (offset != kNotFound && !visited.contains(offset)) {
    visited.insert(offset);
    offset = read_xref_section(offset, visited);
  }
}

std::size_t Document::read_xref_section(std::size_t offset, std::set<std::size_t>& visited) {
  std::string_view data = *bytes_;
  Lexer lex(data, offset);
  lex.skip_whitespace();

  auto merge_trailer = [this](const Dict& section) {
    if (!trailer_.is_dict()) {
      trailer_ = section;
      return;
    }
    Dict merged = trailer_.as_dict();
    for (const auto& [k, v] : section) {
      if (!merged.contains(k)) merged.set(k, v);
    }
    trailer_ = std::move(merged);
  };

  Token first = lex.peek();
  if (first.is_keyword("xref")) {
    lex.next();
    for (;;) {
      Token t = lex.next();
      if (t.is_keyword("trailer")) break;
      if (t.type != Token::Type::Integer) throw SyntaxError("bad xref subsection header");
      Token count = lex.next();
      if (count.type != Token::Type::Integer) throw SyntaxError("bad xref subsection count");
      for (std::int64_t k = 0; k < count.integer; ++k) {
        Token field1 = lex.next();
        Token field2 = lex.next();
        Token kind = lex.next();
        if (field1.type != Token::Type::Integer || field2.type != Token::Type::Integer ||
            kind.type != Token::Type::Keyword) {
          throw SyntaxError("bad xref entry");
        }
        const int num = static_cast<int>(t.integer + k);
        if (kind.text == "n" && !xref_.contains(num) && field1.integer > 0) {
          XrefEntry e;
          e.kind = XrefEntry::Kind::InFile;
          e.offset = static_cast<std::size_t>(field1.integer);
          xref_[num] = e;
        }
      }
    }
    Object section = parse_object(lex);
    if (!section.is_dict()) throw SyntaxError("trailer is not a dictionary");
    const Dict& sd = section.as_dict();
    merge_trailer(sd);

    if (auto stm = int_value(sd.find("XRefStm")); stm && *stm > 0 &&
                                                  !visited.contains(static_cast<std::size_t>(*stm))) {
      visited.insert(static_cast<std::size_t>(*stm));
      read_xref_section(static_cast<std::size_t>(*stm), visited);
    }
    if (auto prev = int_value(sd.find("Prev")); prev && *prev >= 0) return static_cast<std::size_t>(*prev);
    return kNotFound;
  }

  // Cross-reference stream (PDF 1.5+).
  Object obj = parse_indirect_at(lex.position(), -1);
  if (!obj.is_stream()) throw SyntaxError("startxref does not point at xref data");
  const Stream& stream = obj.as_stream();
  read_xref_stream(stream);
  merge_trailer(stream.dict);
  if (auto prev = int_value(stream.dict.find("Prev")); prev && *prev >= 0) {
    return static_cast<std::size_t>(*prev);
  }
  return kNotFound;
}

void Document::read_xref_stream(const Stream& stream) {
  const Object* w = stream.dict.find("W");
  if (w == nullptr || !w->is_array() || w->as_array().size() < 3) throw SyntaxError("xref stream without W");
  int widths[3];
  for (int k = 0; k < 3; ++k) {
    widths[k] = static_cast<int>(int_value(&w->as_array()[k]).value_or(0));
    if (widths[k] < 0 || widths[k] > 8) throw SyntaxError("bad xref stream field width");
  }
  const std::size_t row = static_cast<std::size_t>(widths[0] + widths[1] + widths[2]);
  if (row == 0) throw SyntaxError("empty xref stream rows");

  std::vector<std::pair<std::int64_t, std::int64_t>> ranges;
  if (const Object* idx = stream.dict.find("Index"); idx != nullptr && idx->is_array()) {
    const Array& a = idx->as_array();
    for (std::size_t k = 0; k + 1 < a.size(); k += 2) {
      ranges.emplace_back(int_value(&a[k]).value_or(0), int_value(&a[k + 1]).value_or(0));
    }
  } else {
    ranges.emplace_back(0, int_value(stream.dict.find("Size")).value_or(0));
  }

  const std::string data = decode_stream(stream);
  auto field = [&](std::size_t pos, int width, std::int64_t fallback) -> std::int64_t {
    if (width == 0) return fallback;
    std::int64_t v = 0;
    for (int b = 0; b < width; ++b) v = (v << 8) | static_cast<unsigned char>(data[pos + b]);
    return v;
  };

  std::size_t pos = 0;
  for (auto [first, count] : ranges) {
    for (std::int64_t k = 0; k < count && pos + row <= data.size(); ++k, pos += row) {
      const std::int64_t type = field(pos, widths[0], 1);
      const std::int64_t f2 = field(pos + widths[0], widths[1], 0);
      const std::int64_t f3 = field(pos + widths[0] + widths[1], widths[2], 0);
      const int num = static_cast<int>(first + k);
      if (xref_.contains(num)) continue;
      XrefEntry e;
      if (type == 1) {
        e.kind = XrefEntry::Kind::InFile;
        e.offset = static_cast<std::size_t>(f2);
      } else if (type == 2) {
        e.kind = XrefEntry::Kind::InObjectStream;
        e.container = static_cast<int>(f2);
        e.index = static_cast<int>(f3);
      } else {
        continue;
      }
      xref_[num] = e;
    }
  }
}

void Document::reconstruct() {
  recovered_ = true;
  xref_.clear();
  cache_.clear();
  objstm_index_.clear();
  objstm_data_.clear();
  std::string_view data = *bytes_;

  // Every "N G obj" header; later definitions override earlier ones.
  std::size_t pos = 0;
  while ((pos = data.find("obj", pos)) != kNotFound) {
    const std::size_t kw = pos;
    pos += 3;
    if (kw >= 1 && (std::isalnum(static_cast<unsigned char>(data[kw - 1])) != 0)) continue;
    if (kw + 3 < data.size() && std::isalnum(static_cast<unsigned char>(data[kw + 3])) != 0) continue;
    std::size_t p = kw;
    while (p > 0 && is_pdf_whitespace(static_cast<unsigned char>(data[p - 1]))) --p;
    std::size_t gen_end = p;
    while (p > 0 && is_digit(data[p - 1])) --p;
    if (p == gen_end) continue;
    std::size_t sep = p;
    while (p > 0 && is_pdf_whitespace(static_cast<unsigned char>(data[p - 1]))) --p;
    if (p == sep) continue;
    std::size_t num_end = p;
    while (p > 0 && is_digit(data[p - 1])) --p;
    if (p == num_end) continue;
    if (p > 0 && !is_pdf_whitespace(static_cast<unsigned char>(data[p - 1])) &&
        !is_pdf_delimiter(static_cast<unsigned char>(data[p - 1]))) {
      continue;
    }
    const int num = std::atoi(std::string(data.substr(p, num_end - p)).c_str());
    XrefEntry e;
    e.kind = XrefEntry::Kind::InFile;
    e.offset = p;
    xref_[num] = e;
  }

  // Objects packed in object streams.
  std::vector<std::pair<int, XrefEntry>> packed;
  Dict trailer;
  for (const auto& [num, entry] : xref_) {
    Object obj;
    try {
      obj = parse_indirect_at(entry.offset, num);
    } catch (const std::exception&) {
      continue;
    }
    const Dict* d = obj.dict();
    if (d == nullptr) continue;
    if (obj.is_stream() && d->find("Type") != nullptr && d->find("Type")->is_name("ObjStm")) {
      try {
        const std::string content = decode_stream(obj.as_stream());
        Lexer lex(content);
        const auto n = int_value(d->find("N")).value_or(0);
        for (std::int64_t k = 0; k < n; ++k) {
          Token on = lex.next();
          Token oo = lex.next();
          if (on.type != Token::Type::Integer || oo.type != Token::Type::Integer) break;
          XrefEntry pe;
          pe.kind = XrefEntry::Kind::InObjectStream;
          pe.container = num;
          pe.index = static_cast<int>(k);
          packed.emplace_back(static_cast<int>(on.integer), pe);
        }
      } catch (const std::exception&) {
      }
    }
    if (d->find("Type") != nullptr && d->find("Type")->is_name("XRef")) {
      for (const auto& [k, v] : *d) {
        if (k == "Root" || k == "Info" || k == "Encrypt" || k == "ID") trailer.set(k, v);
      }
    }
  }
  for (const auto& [num, pe] : packed) {
    if (!xref_.contains(num)) xref_[num] = pe;
  }
  cache_.clear();

  // Classic trailers, newest last.
  pos = 0;
  while ((pos = data.find("trailer", pos)) != kNotFound) {
    Lexer lex(data, pos + 7);
    pos += 7;
    try {
      Object t = parse_object(lex);
      if (t.is_dict()) {
        for (const auto& [k, v] : t.as_dict()) trailer.set(k, v);
      }
    } catch (const std::exception&) {
    }
  }

  if (!trailer.contains("Root") || !resolve(get(trailer, "Root")).is_dict()) {
    for (const auto& [num, entry] : xref_) {
      Object obj = load_object(num);
      const Dict* d = obj.dict();
      if (d != nullptr && d->find("Type") != nullptr && d->find("Type")->is_name("Catalog")) {
        trailer.set("Root", Ref{num, 0});
        break;
      }
    }
  }
  trailer_ = std::move(trailer);
}

void Document::build_page_list() {
  pages_.clear();
  const Dict* tr = trailer_.dict();
  if (tr == nullptr) throw SyntaxError("no trailer");
  Object root = resolve(get(*tr, "Root"));
  if (!root.is_dict()) throw SyntaxError("missing document catalog");
  Object pages_root = get(root.as_dict(), "Pages");

  std::set<Ref> visited;
  struct Frame {
    Object node;
    Object resources;
    int depth;
  };

  // Depth-first in document order: push kids reversed.
  std::vector<Frame> stack;
  if (const Object* p = root.as_dict().find("Pages"); p != nullptr && p->is_ref()) visited.insert(p->as_ref());
  stack.push_back({pages_root, Object{}, 0});
  while (!stack.empty()) {
    Frame frame = std::move(stack.back());
    stack.pop_back();
    const Dict* node = frame.node.dict();
    if (node == nullptr) continue;
    if (frame.depth > kMaxPageTreeDepth) throw SyntaxError("page tree too deep");

    Object resources = frame.resources;
    if (const Object* r = node->find("Resources"); r != nullptr && !r->is_null()) resources = *r;

    Object kids = get(*node, "Kids");
    const Object* type = node->find("Type");
    const bool is_leaf = (type != nullptr && type->is_name("Page")) || !kids.is_array();
    if (is_leaf) {
      Dict page = *node;
      if (!page.contains("Resources") && !resources.is_null()) page.set("Resources", resources);
      pages_.push_back(std::move(page));
      continue;
    }
    const Array& arr = kids.as_array();
    for (auto it = arr.rbegin(); it != arr.rend(); ++it) {
      if (it->is_ref()) {
        if (visited.contains(it->as_ref())) continue;
        visited.insert(it->as_ref());
      }
      stack.push_back({resolve(*it), resources, frame.depth + 1});
    }
  }
}

Object Document::resolve(const Object& obj) const {
  Object cur = obj;
  for (int hop = 0; hop < kMaxRefHops && cur.is_ref(); ++hop) cur = load_object(cur.as_ref().num);
  if (cur.is_ref()) return Null{};
  return cur;
}

Object Document::get(const Dict& dict, std::string_view key) const {
  const Object* v = dict.find(key);
  if (v == nullptr) return Null{};
  return resolve(*v);
}

Object Document::load_object(int num) const {
  if (auto it = cache_.find(num); it != cache_.end()) return it->second;
  auto entry = xref_.find(num);
  if (entry == xref_.end()) return Null{};
  if (resolving_.contains(num)) return Null{};  // reference cycle
  resolving_.insert(num);

  Object obj;
  try {
    if (entry->second.kind == XrefEntry::Kind::InFile) {
      obj = parse_indirect_at(entry->second.offset, num);
    } else if (entry->second.kind == XrefEntry::Kind::InObjectStream) {
      obj = load_from_object_stream(entry->second.container, entry->second.index, num);
    }
  } catch (const std::exception&) {
    obj = Null{};
  }
  resolving_.erase(num);
  cache_[num] = obj;
  return obj;
}

Object Document::parse_indirect_at(std::size_t offset, int expected_num) const {
  std::string_view data = *bytes_;
  if (offset >= data.size()) throw SyntaxError("object offset past end of file");
  Lexer lex(data, offset);
  Token num = lex.next();
  Token gen = lex.next();
  Token kw = lex.next();
  if (num.type != Token::Type::Integer || gen.type != Token::Type::Integer || !kw.is_keyword("obj")) {
    throw SyntaxError("expected indirect object header");
  }
  if (expected_num >= 0 && num.integer != expected_num) throw SyntaxError("xref offset points at wrong object");

  Object obj = parse_object(lex);
  Token after = lex.next();
  if (after.is_keyword("stream") && obj.is_dict()) {
    Dict dict = obj.as_dict();
    const std::size_t data_start = skip_stream_eol(data, after.offset + 6);
    std::string raw = read_stream_data(data_start, dict);
    return Stream{std::move(dict), std::move(raw)};
  }
  return obj;
}

std::string Document::read_stream_data(std::size_t data_start, const Dict& dict) const {
  std::string_view data = *bytes_;
  std::optional<std::int64_t> length;
  if (const Object* len = dict.find("Length"); len != nullptr) {
    if (len->is_ref()) {
      Object resolved = resolve(*len);
      length = int_value(&resolved);
    } else {
      length = int_value(len);
    }
  }
  if (length && *length >= 0 && data_start + static_cast<std::size_t>(*length) <= data.size()) {
    std::size_t end = data_start + static_cast<std::size_t>(*length);
    std::size_t probe = end;
    while (probe < data.size() && is_pdf_whitespace(static_cast<unsigned char>(data[probe]))) ++probe;
    if (data.substr(probe, 9) == "endstream") return std::string(data.substr(data_start, end - data_start));
  }
  // Length missing or wrong: scan for the terminator.
  std::size_t end = data.find("endstream", data_start);
  if (end == kNotFound) end = data.size();
  if (end > data_start && data[end - 1] == '\n') --end;
  if (end > data_start && data[end - 1] == '\r') --end;
  return std::string(data.substr(data_start, end - data_start));
}

Object Document::load_from_object_stream(int container, int index, int num) const {
  auto data_it = objstm_data_.find(container);
  if (data_it == objstm_data_.end()) {
    Object holder = load_object(container);
    if (!holder.is_stream()) return Null{};
    const Stream& stream = holder.as_stream();
    auto content = std::make_shared<std::string>(decode_stream(stream));
    auto entries = std::make_shared<std::vector<std::pair<int, std::size_t>>>();
    const auto n = int_value(stream.dict.find("N")).value_or(0);
    const auto first = static_cast<std::size_t>(int_value(stream.dict.find("First")).value_or(0));
    Lexer lex(*content);
    for (std::int64_t k = 0; k < n; ++k) {
      Token on = lex.next();
      Token oo = lex.next();
      if (on.type != Token::Type::Integer || oo.type != Token::Type::Integer) break;
      entries->emplace_back(static_cast<int>(on.integer), first + static_cast<std::size_t>(oo.integer));
    }
    objstm_index_[container] = entries;
    data_it = objstm_data_.emplace(container, std::move(content)).first;
  }
  const auto& entries = *objstm_index_[container];
  std::size_t offset = kNotFound;
  if (index >= 0 && static_cast<std::size_t>(index) < entries.size() && entries[index].first == num) {
    offset = entries[index].second;
  } else {
    for (const auto& [n, off] : entries) {
      if (n == num) {
        offset = off;
        break;
      }
    }
  }
  if (offset == kNotFound || offset >= data_it->second->size()) return Null{};
  Lexer lex(*data_it->second, offset);
  return parse_object(lex);
}

std::string Document::decode_stream(const Stream& stream) const {
  Object filter = get(stream.dict, "Filter");
  Object parms = get(stream.dict, "DecodeParms");
  if (parms.is_null()) parms = get(stream.dict, "DP");
  if (filter.is_null()) return stream.data;

  std::vector<std::string> names;
  std::vector<Object> parm_list;
  if (filter.is_name()) {
    names.push_back(filter.as_name());
    parm_list.push_back(parms);
  } else if (filter.is_array()) {
    const Array& fa = filter.as_array();
    for (std::size_t k = 0; k < fa.size(); ++k) {
      Object f = resolve(fa[k]);
      if (!f.is_name()) continue;
      names.push_back(f.as_name());
      if (parms.is_array() && k < parms.as_array().size()) {
        parm_list.push_back(resolve(parms.as_array()[k]));
      } else {
        parm_list.emplace_back();
      }
    }
  }

  std::string data = stream.data;
  for (std::size_t k = 0; k < names.size(); ++k) {
    const Dict* pd = parm_list[k].is_dict() ? &parm_list[k].as_dict() : nullptr;
    data = apply_filter(names[k], std::move(data), pd);
  }
  return data;
}

}  // namespace quizread::pdf
