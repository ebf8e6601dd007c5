#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "quizread/pdf/object.hpp"

namespace quizread::pdf {

struct Token {
  enum class Type {
    Eof,
    Integer,
    Real,
    String,
    HexString,
    Name,
    Keyword,
    ArrayBegin,
    ArrayEnd,
    DictBegin,
    DictEnd,
    ProcBegin,
    ProcEnd,
  };

  Type type = Type::Eof;
  std::string text;  // decoded bytes for strings and names, raw for keywords
  std::int64_t integer = 0;
  double real = 0.0;
  std::size_t offset = 0;

  bool is_keyword(std::string_view kw) const { return type == Type::Keyword && text == kw; }
};

// Tokenizer shared by the file-structure parser and the content-stream interpreter.
class Lexer {
 public:
  explicit Lexer(std::string_view data, std::size_t pos = 0) : data_(data), pos_(pos) {}

  Token next();
  Token peek();

  std::size_t position() const { return pos_; }
  void seek(std::size_t pos) { pos_ = pos < data_.size() ? pos : data_.size(); }
  std::string_view data() const { return data_; }

  void skip_whitespace();

 private:
  Token read_literal_string(std::size_t start);
  Token read_hex_string(std::size_t start);
  Token read_name(std::size_t start);
  Token read_regular(std::size_t start);

  std::string_view data_;
  std::size_t pos_ = 0;
};

bool is_pdf_whitespace(unsigned char c);
bool is_pdf_delimiter(unsigned char c);

// Parses one object at the lexer's position. Indirect references ("N G R")
// are recognised when `allow_refs` is set; content streams have none.
// Returns Null at end of input. Throws std::runtime_error on malformed syntax.
Object parse_object(Lexer& lexer, bool allow_refs = true);

// Continues parsing an object whose first token has already been read.
Object parse_object_from(Lexer& lexer, Token first, bool allow_refs = true);

}  // namespace quizread::pdf
