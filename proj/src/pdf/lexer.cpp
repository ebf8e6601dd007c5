#include "quizread/pdf/lexer.hpp"

#include <charconv>
#include <cstdlib>
#include <stdexcept>

namespace quizread::pdf {

namespace {

constexpr int kMaxNesting = 256;

int hex_digit(unsigned char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

bool is_regular(unsigned char c) { return !is_pdf_whitespace(c) && !is_pdf_delimiter(c); }

Object parse_with_depth(Lexer& lexer, Token first, bool allow_refs, int depth);

Object parse_array(Lexer& lexer, bool allow_refs, int depth) {
  Array items;
  for (;;) {
    Token tok = lexer.next();
    if (tok.type == Token::Type::ArrayEnd) break;
    if (tok.type == Token::Type::Eof) throw std::runtime_error("unterminated array");
    items.push_back(parse_with_depth(lexer, std::move(tok), allow_refs, depth + 1));
  }
  return Object(std::move(items));
}

Object parse_dict(Lexer& lexer, bool allow_refs, int depth) {
  Dict dict;
  for (;;) {
    Token key = lexer.next();
    if (key.type == Token::Type::DictEnd) break;
    if (key.type == Token::Type::Eof) throw std::runtime_error("unterminated dictionary");
    if (key.type != Token::Type::Name) {
      // Tolerate junk keys by skipping them; some writers emit stray tokens.
      continue;
    }
    Token value_tok = lexer.next();
    if (value_tok.type == Token::Type::DictEnd) {
      dict.set(std::move(key.text), Null{});
      break;
    }
    if (value_tok.type == Token::Type::Eof) throw std::runtime_error("unterminated dictionary");
    dict.set(std::move(key.text), parse_with_depth(lexer, std::move(value_tok), allow_refs, depth + 1));
  }
  return Object(std::move(dict));
}

Object parse_with_depth(Lexer& lexer, Token tok, bool allow_refs, int depth) {
  if (depth > kMaxNesting) throw std::runtime_error("object nesting too deep");
  switch (tok.type) {
    case Token::Type::Eof:
      return Null{};
    case Token::Type::Integer: {
      if (allow_refs) {
        const std::size_t save = lexer.position();
        Token gen = lexer.next();
        if (gen.type == Token::Type::Integer) {
          Token r = lexer.next();
          if (r.is_keyword("R")) {
            return Ref{static_cast<int>(tok.integer), static_cast<int>(gen.integer)};
          }
        }
        lexer.seek(save);
      }
      return tok.integer;
    }
    case Token::Type::Real:
      return tok.real;
    case Token::Type::String:
      return String{std::move(tok.text), false};
    case Token::Type::HexString:
      return String{std::move(tok.text), true};
    case Token::Type::Name:
      return Name{std::move(tok.text)};
    case Token::Type::ArrayBegin:
      return parse_array(lexer, allow_refs, depth);
    case Token::Type::DictBegin:
      return parse_dict(lexer, allow_refs, depth);
    case Token::Type::Keyword:
      if (tok.text == "true") return true;
      if (tok.text == "false") return false;
      if (tok.text == "null") return Null{};
      throw std::runtime_error("unexpected keyword '" + tok.text + "'");
    default:
      throw std::runtime_error("unexpected token");
  }
}

}  // namespace

bool is_pdf_whitespace(unsigned char c) {
  return c == 0 || c == '\t' || c == '\n' || c == '\f' || c == '\r' || c == ' ';
}

bool is_pdf_delimiter(unsigned char c) {
  switch (c) {
    case '(': case ')': case '<': case '>': case '[': case ']':
    case '{': case '}': case '/': case '%':
      return true;
    default:
      return false;
  }
}

void Lexer::skip_whitespace() {
  while (pos_ < data_.size()) {
    const auto c = static_cast<unsigned char>(data_[pos_]);
    if (is_pdf_whitespace(c)) {
      ++pos_;
    } else if (c == '%') {
      while (pos_ < data_.size() && data_[pos_] != '\n' && data_[pos_] != '\r') ++pos_;
    } else {
      break;
    }
  }
}

Token Lexer::peek() {
  const std::size_t save = pos_;
  Token tok = next();
  pos_ = save;
  return tok;
}

Token Lexer::next() {
  skip_whitespace();
  Token tok;
  tok.offset = pos_;
  if (pos_ >= data_.size()) return tok;

  const std::size_t start = pos_;
  const char c = data_[pos_];
  switch (c) {
    case '(':
      return read_literal_string(start);
    case '<':
      if (pos_ + 1 < data_.size() && data_[pos_ + 1] == '<') {
        pos_ += 2;
        tok.type = Token::Type::DictBegin;
        return tok;
      }
      return read_hex_string(start);
    case '>':
      ++pos_;
      if (pos_ < data_.size() && data_[pos_] == '>') ++pos_;
      tok.type = Token::Type::DictEnd;
      return tok;
    case '[':
      ++pos_;
      tok.type = Token::Type::ArrayBegin;
      return tok;
    case ']':
      ++pos_;
      tok.type = Token::Type::ArrayEnd;
      return tok;
    case '{':
      ++pos_;
      tok.type = Token::Type::ProcBegin;
      return tok;
    case '}':
      ++pos_;
      tok.type = Token::Type::ProcEnd;
      return tok;
    case '/':
      return read_name(start);
    case ')':
      // Stray closing paren: surface it as a keyword so callers can skip it.
      ++pos_;
      tok.type = Token::Type::Keyword;
      tok.text = ")";
      return tok;
    default:
      return read_regular(start);
  }
}

Token Lexer::read_literal_string(std::size_t start) {
  Token tok;
  tok.type = Token::Type::String;
  tok.offset = start;
  ++pos_;  // '('
  int depth = 1;
  std::string& out = tok.text;
  while (pos_ < data_.size()) {
    char c = data_[pos_++];
    if (c == '\\') {
      if (pos_ >= data_.size()) break;
      char e = data_[pos_++];
      switch (e) {
        case 'n': out.push_back('\n'); break;
        case 'r': out.push_back('\r'); break;
        case 't': out.push_back('\t'); break;
        case 'b': out.push_back('\b'); break;
        case 'f': out.push_back('\f'); break;
        case '(': out.push_back('('); break;
        case ')': out.push_back(')'); break;
        case '\\': out.push_back('\\'); break;
        case '\r':
          if (pos_ < data_.size() && data_[pos_] == '\n') ++pos_;
          break;
        case '\n':
          break;
        default:
          if (e >= '0' && e <= '7') {
            int value = e - '0';
            for (int i = 0; i < 2 && pos_ < data_.size() && data_[pos_] >= '0' && data_[pos_] <= '7'; ++i) {
              value = value * 8 + (data_[pos_++] - '0');
            }
            out.push_back(static_cast<char>(value & 0xff));
          } else {
            out.push_back(e);
          }
      }
    } else if (c == '(') {
      ++depth;
      out.push_back(c);
    } else if (c == ')') {
      if (--depth == 0) return tok;
      out.push_back(c);
    } else if (c == '\r') {
      if (pos_ < data_.size() && data_[pos_] == '\n') ++pos_;
      out.push_back('\n');
    } else {
      out.push_back(c);
    }
  }
  return tok;  // unterminated: keep what we have
}

Token Lexer::read_hex_string(std::size_t start) {
  Token tok;
  tok.type = Token::Type::HexString;
  tok.offset = start;
  ++pos_;  // '<'
  int pending = -1;
  while (pos_ < data_.size()) {
    const auto c = static_cast<unsigned char>(data_[pos_++]);
    if (c == '>') break;
    const int d = hex_digit(c);
    if (d < 0) continue;
    if (pending < 0) {
      pending = d;
    } else {
      tok.text.push_back(static_cast<char>(pending * 16 + d));
      pending = -1;
    }
  }
  if (pending >= 0) tok.text.push_back(static_cast<char>(pending * 16));
  return tok;
}

Token Lexer::read_name(std::size_t start) {
  Token tok;
  tok.type = Token::Type::Name;
  tok.offset = start;
  ++pos_;  // '/'
  while (pos_ < data_.size()) {
    const auto c = static_cast<unsigned char>(data_[pos_]);
    if (!is_regular(c)) break;
    ++pos_;
    if (c == '#' && pos_ + 1 < data_.size()) {
      const int hi = hex_digit(static_cast<unsigned char>(data_[pos_]));
      const int lo = hex_digit(static_cast<unsigned char>(data_[pos_ + 1]));
      if (hi >= 0 && lo >= 0) {
        tok.text.push_back(static_cast<char>(hi * 16 + lo));
        pos_ += 2;
        continue;
      }
    }
    tok.text.push_back(static_cast<char>(c));
  }
  return tok;
}

Token Lexer::read_regular(std::size_t start) {
  Token tok;
  tok.offset = start;
  while (pos_ < data_.size() && is_regular(static_cast<unsigned char>(data_[pos_]))) ++pos_;
  std::string_view word = data_.substr(start, pos_ - start);
  if (word.empty()) {
    // Unknown byte that is neither regular nor handled above.
    ++pos_;
    tok.type = Token::Type::Keyword;
    tok.text = std::string(data_.substr(start, 1));
    return tok;
  }

  bool numeric = true;
  bool has_dot = false;
  bool has_digit = false;
  for (std::size_t i = 0; i < word.size(); ++i) {
    const char c = word[i];
    if (c >= '0' && c <= '9') {
      has_digit = true;
    } else if (c == '.' && !has_dot) {
      has_dot = true;
    } else if ((c == '+' || c == '-') && i == 0) {
    } else {
      numeric = false;
      break;
    }
  }
  if (numeric && has_digit) {
    if (!has_dot) {
      std::int64_t value = 0;
      const char* first = word.data() + (word.front() == '+' ? 1 : 0);
      auto [ptr, ec] = std::from_chars(first, word.data() + word.size(), value);
      if (ec == std::errc{}) {
        tok.type = Token::Type::Integer;
        tok.integer = value;
        return tok;
      }
    }
    tok.type = Token::Type::Real;
    tok.real = std::strtod(std::string(word).c_str(), nullptr);
    return tok;
  }
  tok.type = Token::Type::Keyword;
  tok.text = std::string(word);
  return tok;
}

Object parse_object(Lexer& lexer, bool allow_refs) {
  return parse_with_depth(lexer, lexer.next(), allow_refs, 0);
}

Object parse_object_from(Lexer& lexer, Token first, bool allow_refs) {
  return parse_with_depth(lexer, std::move(first), allow_refs, 0);
}

}  // namespace quizread::pdf
