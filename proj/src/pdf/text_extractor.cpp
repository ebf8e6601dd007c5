#include "quizread/pdf/text_extractor.hpp"

#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <set>
#include <vector>

#include "quizread/pdf/filters.hpp"
#include "quizread/pdf/fonts.hpp"
#include "quizread/pdf/lexer.hpp"

namespace quizread::pdf {

namespace {

constexpr int kMaxFormDepth = 12;
constexpr std::size_t kMaxOperands = 4096;

// Row-vector affine matrix [a b c d e f], as in PDF.
struct Matrix {
  double a = 1, b = 0, c = 0, d = 1, e = 0, f = 0;

  static Matrix translate(double tx, double ty) { return {1, 0, 0, 1, tx, ty}; }

  Matrix operator*(const Matrix& m) const {
    return {a * m.a + b * m.c,       a * m.b + b * m.d,       c * m.a + d * m.c,
            c * m.b + d * m.d,       e * m.a + f * m.c + m.e, e * m.b + f * m.d + m.f};
  }

  double scale() const { return std::sqrt(std::abs(a * d - b * c)); }
};

struct GraphicsState {
  Matrix ctm;
  std::shared_ptr<const FontDecoder> font;
  double font_size = 0;
  double char_spacing = 0;
  double word_spacing = 0;
  double horizontal_scale = 1;
  double leading = 0;
  double rise = 0;
};

Matrix matrix_from(const std::vector<Object>& ops, std::size_t first) {
  Matrix m;
  if (ops.size() < first + 6) return m;
  std::array<double, 6> v{};
  for (std::size_t k = 0; k < 6; ++k) {
    if (!ops[first + k].is_number()) return m;
    v[k] = ops[first + k].as_number();
  }
  return {v[0], v[1], v[2], v[3], v[4], v[5]};
}

class Interpreter {
 public:
  explicit Interpreter(const Document& doc) : doc_(doc) {}

  void run(const std::string& content, const Object& resources, int depth) {
    Lexer lex(content);
    std::vector<Object> operands;
    for (;;) {
      Token tok = lex.next();
      if (tok.type == Token::Type::Eof) break;
      if (tok.type == Token::Type::Keyword && tok.text != "true" && tok.text != "false" && tok.text != "null") {
        if (tok.text == "BI") {
          skip_inline_image(lex);
        } else {
          execute(tok.text, operands, resources, depth);
        }
        operands.clear();
        continue;
      }
      if (tok.type == Token::Type::ArrayEnd || tok.type == Token::Type::DictEnd ||
          tok.type == Token::Type::ProcBegin || tok.type == Token::Type::ProcEnd) {
        continue;
      }
      try {
        operands.push_back(parse_object_from(lex, std::move(tok), false));
      } catch (const std::exception&) {
        operands.clear();
      }
      if (operands.size() > kMaxOperands) operands.clear();
    }
  }

  RawPageText result() && { return {std::move(out_), has_text_layer_}; }

 private:
  void skip_inline_image(Lexer& lex) {
    // Key/value pairs up to ID, then binary data terminated by whitespace + EI.
    for (;;) {
      Token t = lex.next();
      if (t.type == Token::Type::Eof) return;
      if (t.is_keyword("ID")) break;
    }
    std::string_view data = lex.data();
    std::size_t pos = lex.position() + 1;
    while (pos + 2 <= data.size()) {
      const std::size_t hit = data.find("EI", pos);
      if (hit == std::string_view::npos) {
        lex.seek(data.size());
        return;
      }
      const bool before_ok = hit > 0 && is_pdf_whitespace(static_cast<unsigned char>(data[hit - 1]));
      const bool after_ok = hit + 2 >= data.size() || is_pdf_whitespace(static_cast<unsigned char>(data[hit + 2]));
      if (before_ok && after_ok) {
        lex.seek(hit + 2);
        return;
      }
      pos = hit + 2;
    }
    lex.seek(data.size());
  }

  std::shared_ptr<const FontDecoder> load_font(const Object& resources, const std::string& name) {
    const Dict* res = resources.dict();
    if (res == nullptr) return nullptr;
    Object fonts = doc_.get(*res, "Font");
    const Dict* fd = fonts.dict();
    if (fd == nullptr) return nullptr;
    const Object* entry = fd->find(name);
    if (entry == nullptr) return nullptr;
    if (entry->is_ref()) {
      if (auto it = font_cache_.find(entry->as_ref()); it != font_cache_.end()) return it->second;
    }
    Object font = doc_.resolve(*entry);
    if (!font.is_dict()) return nullptr;
    auto decoder = std::make_shared<const FontDecoder>(FontDecoder::from_font(doc_, font.as_dict()));
    if (entry->is_ref()) font_cache_[entry->as_ref()] = decoder;
    return decoder;
  }

  void emit_separator_before(double x, double y, double em) {
    if (!have_last_) return;
    const double tolerance = std::max(em, 1.0);
    const double dy = std::abs(y - last_y_);
    if (dy > 0.5 * tolerance) {
      out_.push_back('\n');
      return;
    }
    const double dx = x - last_x_;
    if (dx > 0.15 * tolerance || dx < -0.5 * tolerance) {
      if (!out_.empty() && out_.back() != ' ' && out_.back() != '\n') out_.push_back(' ');
    }
  }

  void show_string(const std::string& bytes) {
    has_text_layer_ = true;
    if (!gs_.font) return;
    const double fs = gs_.font_size;
    const double th = gs_.horizontal_scale;

    bool first = true;
    for (const Glyph& g : gs_.font->decode(bytes)) {
      const Matrix trm = Matrix{fs * th, 0, 0, fs, 0, gs_.rise} * text_matrix_ * gs_.ctm;
      const double em = trm.scale();
      if (first) {
        emit_separator_before(trm.e, trm.f, em);
        first = false;
      }
      out_ += g.text;
      const double advance =
          (g.width / 1000.0 * fs + gs_.char_spacing + (g.word_space ? gs_.word_spacing : 0.0)) * th;
      text_matrix_ = Matrix::translate(advance, 0) * text_matrix_;
      const Matrix end = Matrix{fs * th, 0, 0, fs, 0, gs_.rise} * text_matrix_ * gs_.ctm;
      last_x_ = end.e;
      last_y_ = end.f;
      have_last_ = true;
    }
  }

  void adjust(double thousandths) {
    const double tx = -thousandths / 1000.0 * gs_.font_size * gs_.horizontal_scale;
    text_matrix_ = Matrix::translate(tx, 0) * text_matrix_;
    // Large negative kerning in TJ arrays is how many writers encode word gaps.
    if (thousandths < -200 && !out_.empty() && out_.back() != ' ' && out_.back() != '\n') out_.push_back(' ');
    if (have_last_) {
      const Matrix end = Matrix{1, 0, 0, 1, 0, gs_.rise} * text_matrix_ * gs_.ctm;
      last_x_ = end.e;
      last_y_ = end.f;
    }
  }

  void next_line(double tx, double ty) {
    line_matrix_ = Matrix::translate(tx, ty) * line_matrix_;
    text_matrix_ = line_matrix_;
  }

  static double num(const std::vector<Object>& ops, std::size_t i) {
    return i < ops.size() && ops[i].is_number() ? ops[i].as_number() : 0.0;
  }

  void execute(const std::string& op, const std::vector<Object>& ops, const Object& resources, int depth) {
    if (op == "q") {
      stack_.push_back(gs_);
    } else if (op == "Q") {
      if (!stack_.empty()) {
        gs_ = stack_.back();
        stack_.pop_back();
      }
    } else if (op == "cm") {
      gs_.ctm = matrix_from(ops, ops.size() >= 6 ? ops.size() - 6 : 0) * gs_.ctm;
    } else if (op == "BT") {
      text_matrix_ = Matrix{};
      line_matrix_ = Matrix{};
    } else if (op == "Tf") {
      if (ops.size() >= 2 && ops[ops.size() - 2].is_name()) {
        gs_.font = load_font(resources, ops[ops.size() - 2].as_name());
        gs_.font_size = num(ops, ops.size() - 1);
      }
    } else if (op == "Tc") {
      gs_.char_spacing = num(ops, 0);
    } else if (op == "Tw") {
      gs_.word_spacing = num(ops, 0);
    } else if (op == "Tz") {
      gs_.horizontal_scale = num(ops, 0) / 100.0;
    } else if (op == "TL") {
      gs_.leading = num(ops, 0);
    } else if (op == "Ts") {
      gs_.rise = num(ops, 0);
    } else if (op == "Td") {
      next_line(num(ops, 0), num(ops, 1));
    } else if (op == "TD") {
      gs_.leading = -num(ops, 1);
      next_line(num(ops, 0), num(ops, 1));
    } else if (op == "Tm") {
      line_matrix_ = matrix_from(ops, 0);
      text_matrix_ = line_matrix_;
    } else if (op == "T*") {
      next_line(0, -gs_.leading);
    } else if (op == "Tj") {
      if (!ops.empty() && ops.back().is_string()) show_string(ops.back().as_string().bytes);
    } else if (op == "'") {
      next_line(0, -gs_.leading);
      if (!ops.empty() && ops.back().is_string()) show_string(ops.back().as_string().bytes);
    } else if (op == "\"") {
      if (ops.size() >= 3) {
        gs_.word_spacing = num(ops, 0);
        gs_.char_spacing = num(ops, 1);
      }
      next_line(0, -gs_.leading);
      if (!ops.empty() && ops.back().is_string()) show_string(ops.back().as_string().bytes);
    } else if (op == "TJ") {
      if (!ops.empty() && ops.back().is_array()) {
        for (const Object& item : ops.back().as_array()) {
          if (item.is_string()) {
            show_string(item.as_string().bytes);
          } else if (item.is_number()) {
            adjust(item.as_number());
          }
        }
      }
    } else if (op == "Do") {
      if (!ops.empty() && ops.back().is_name()) run_xobject(ops.back().as_name(), resources, depth);
    }
  }

  void run_xobject(const std::string& name, const Object& resources, int depth) {
    if (depth >= kMaxFormDepth) return;
    const Dict* res = resources.dict();
    if (res == nullptr) return;
    Object xobjects = doc_.get(*res, "XObject");
    const Dict* xd = xobjects.dict();
    if (xd == nullptr) return;
    const Object* entry = xd->find(name);
    if (entry == nullptr) return;
    if (entry->is_ref()) {
      if (active_forms_.contains(entry->as_ref())) return;
      active_forms_.insert(entry->as_ref());
    }
    Object form = doc_.resolve(*entry);
    if (form.is_stream() && doc_.get(form.as_stream().dict, "Subtype").is_name("Form")) {
      const Stream& stream = form.as_stream();
      std::string content;
      try {
        content = doc_.decode_stream(stream);
      } catch (const std::exception&) {
        content.clear();
      }
      Object form_resources = doc_.get(stream.dict, "Resources");
      if (form_resources.is_null()) form_resources = resources;

      const GraphicsState saved = gs_;
      const Matrix saved_tm = text_matrix_;
      const Matrix saved_tlm = line_matrix_;
      Object matrix = doc_.get(stream.dict, "Matrix");
      if (matrix.is_array()) gs_.ctm = matrix_from(matrix.as_array(), 0) * gs_.ctm;
      run(content, form_resources, depth + 1);
      gs_ = saved;
      text_matrix_ = saved_tm;
      line_matrix_ = saved_tlm;
    }
    if (entry->is_ref()) active_forms_.erase(entry->as_ref());
  }

  const Document& doc_;
  GraphicsState gs_;
  std::vector<GraphicsState> stack_;
  Matrix text_matrix_;
  Matrix line_matrix_;
  std::map<Ref, std::shared_ptr<const FontDecoder>> font_cache_;
  std::set<Ref> active_forms_;

  std::string out_;
  bool has_text_layer_ = false;
  bool have_last_ = false;
  double last_x_ = 0;
  double last_y_ = 0;
};

std::string page_content(const Document& doc, const Dict& page) {
  Object contents = doc.get(page, "Contents");
  std::vector<Object> parts;
  if (contents.is_stream()) {
    parts.push_back(contents);
  } else if (contents.is_array()) {
    for (const Object& item : contents.as_array()) parts.push_back(doc.resolve(item));
  }
  std::string content;
  for (const Object& part : parts) {
    if (!part.is_stream()) continue;
    try {
      content += doc.decode_stream(part.as_stream());
    } catch (const std::exception&) {
      continue;
    }
    content.push_back('\n');
  }
  return content;
}

}  // namespace

RawPageText extract_page_text(const Document& doc, std::size_t page_index) {
  const Dict& page = doc.page(page_index);
  Interpreter interp(doc);
  const Object* resources = page.find("Resources");
  interp.run(page_content(doc, page), resources != nullptr ? doc.resolve(*resources) : Object{}, 0);
  return std::move(interp).result();
}

}  // namespace quizread::pdf
