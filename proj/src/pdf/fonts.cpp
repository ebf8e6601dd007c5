#include "quizread/pdf/fonts.hpp"

#include <array>
#include <cstdlib>
#include <unordered_map>

#include "quizread/pdf/filters.hpp"
#include "quizread/pdf/lexer.hpp"

namespace quizread::pdf {

namespace {

// WinAnsiEncoding 0x80..0x9F; zero marks an undefined code.
constexpr std::array<std::uint16_t, 32> kWinAnsiHigh = {
    0x20AC, 0,      0x201A, 0x0192, 0x201E, 0x2026, 0x2020, 0x2021, 0x02C6, 0x2030, 0x0160,
    0x2039, 0x0152, 0,      0x017D, 0,      0,      0x2018, 0x2019, 0x201C, 0x201D, 0x2022,
    0x2013, 0x2014, 0x02DC, 0x2122, 0x0161, 0x203A, 0x0153, 0,      0x017E, 0x0178,
};

// StandardEncoding above 0x7F, sparse.
const std::unordered_map<std::uint8_t, std::uint16_t>& standard_high() {
  static const std::unordered_map<std::uint8_t, std::uint16_t> table = {
      {0xA1, 0x00A1}, {0xA2, 0x00A2}, {0xA3, 0x00A3}, {0xA4, 0x2044}, {0xA5, 0x00A5}, {0xA6, 0x0192},
      {0xA7, 0x00A7}, {0xA8, 0x00A4}, {0xA9, 0x0027}, {0xAA, 0x201C}, {0xAB, 0x00AB}, {0xAC, 0x2039},
      {0xAD, 0x203A}, {0xAE, 0xFB01}, {0xAF, 0xFB02}, {0xB1, 0x2013}, {0xB2, 0x2020}, {0xB3, 0x2021},
      {0xB4, 0x00B7}, {0xB6, 0x00B6}, {0xB7, 0x2022}, {0xB8, 0x201A}, {0xB9, 0x201E}, {0xBA, 0x201D},
      {0xBB, 0x00BB}, {0xBC, 0x2026}, {0xBD, 0x2030}, {0xBF, 0x00BF}, {0xC1, 0x0060}, {0xC2, 0x00B4},
      {0xC3, 0x02C6}, {0xC4, 0x02DC}, {0xC5, 0x00AF}, {0xC6, 0x02D8}, {0xC7, 0x02D9}, {0xC8, 0x00A8},
      {0xCA, 0x02DA}, {0xCB, 0x00B8}, {0xCD, 0x02DD}, {0xCE, 0x02DB}, {0xCF, 0x02C7}, {0xD0, 0x2014},
      {0xE1, 0x00C6}, {0xE3, 0x00AA}, {0xE8, 0x0141}, {0xE9, 0x00D8}, {0xEA, 0x0152}, {0xEB, 0x00BA},
      {0xF1, 0x00E6}, {0xF5, 0x0131}, {0xF8, 0x0142}, {0xF9, 0x00F8}, {0xFA, 0x0153}, {0xFB, 0x00DF},
  };
  return table;
}

// Latin-1 supplement glyph names, 0xA0..0xFF.
constexpr std::array<std::string_view, 96> kLatin1Names = {
    "space",        "exclamdown",  "cent",          "sterling",    "currency",    "yen",
    "brokenbar",    "section",     "dieresis",      "copyright",   "ordfeminine", "guillemotleft",
    "logicalnot",   "hyphen",      "registered",    "macron",      "degree",      "plusminus",
    "twosuperior",  "threesuperior", "acute",       "mu",          "paragraph",   "periodcentered",
    "cedilla",      "onesuperior", "ordmasculine",  "guillemotright", "onequarter", "onehalf",
    "threequarters", "questiondown", "Agrave",      "Aacute",      "Acircumflex", "Atilde",
    "Adieresis",    "Aring",       "AE",            "Ccedilla",    "Egrave",      "Eacute",
    "Ecircumflex",  "Edieresis",   "Igrave",        "Iacute",      "Icircumflex", "Idieresis",
    "Eth",          "Ntilde",      "Ograve",        "Oacute",      "Ocircumflex", "Otilde",
    "Odieresis",    "multiply",    "Oslash",        "Ugrave",      "Uacute",      "Ucircumflex",
    "Udieresis",    "Yacute",      "Thorn",         "germandbls",  "agrave",      "aacute",
    "acircumflex",  "atilde",      "adieresis",     "aring",       "ae",          "ccedilla",
    "egrave",       "eacute",      "ecircumflex",   "edieresis",   "igrave",      "iacute",
    "icircumflex",  "idieresis",   "eth",           "ntilde",      "ograve",      "oacute",
    "ocircumflex",  "otilde",      "odieresis",     "divide",      "oslash",      "ugrave",
    "uacute",       "ucircumflex", "udieresis",     "yacute",      "thorn",       "ydieresis",
};

// Printable ASCII glyph names, 0x20..0x7E.
constexpr std::array<std::string_view, 95> kAsciiNames = {
    "space",      "exclam",      "quotedbl",     "numbersign", "dollar",    "percent",   "ampersand",
    "quotesingle", "parenleft",  "parenright",   "asterisk",   "plus",      "comma",     "hyphen",
    "period",     "slash",       "zero",         "one",        "two",       "three",     "four",
    "five",       "six",         "seven",        "eight",      "nine",      "colon",     "semicolon",
    "less",       "equal",       "greater",      "question",   "at",        "A",         "B",
    "C",          "D",           "E",            "F",          "G",         "H",         "I",
    "J",          "K",           "L",            "M",          "N",         "O",         "P",
    "Q",          "R",           "S",            "T",          "U",         "V",         "W",
    "X",          "Y",           "Z",            "bracketleft", "backslash", "bracketright", "asciicircum",
    "underscore", "grave",       "a",            "b",          "c",         "d",         "e",
    "f",          "g",           "h",            "i",          "j",         "k",         "l",
    "m",          "n",           "o",            "p",          "q",         "r",         "s",
    "t",          "u",           "v",            "w",          "x",         "y",         "z",
    "braceleft",  "bar",         "braceright",   "asciitilde",
};

const std::unordered_map<std::string_view, std::string_view>& extra_glyphs() {
  static const std::unordered_map<std::string_view, std::string_view> table = {
      {"quoteleft", "‘"},     {"quoteright", "’"},   {"quotedblleft", "“"},
      {"quotedblright", "”"}, {"quotesinglbase", "‚"}, {"quotedblbase", "„"},
      {"endash", "–"},        {"emdash", "—"},       {"bullet", "•"},
      {"ellipsis", "…"},      {"dagger", "†"},       {"daggerdbl", "‡"},
      {"trademark", "™"},     {"perthousand", "‰"},  {"florin", "ƒ"},
      {"circumflex", "ˆ"},    {"tilde", "˜"},        {"minus", "−"},
      {"fraction", "⁄"},      {"Euro", "€"},         {"Scaron", "Š"},
      {"scaron", "š"},        {"Zcaron", "Ž"},       {"zcaron", "ž"},
      {"OE", "Œ"},            {"oe", "œ"},           {"Ydieresis", "Ÿ"},
      {"dotlessi", "ı"},      {"Lslash", "Ł"},       {"lslash", "ł"},
      {"guilsinglleft", "‹"}, {"guilsinglright", "›"}, {"fi", "fi"},
      {"fl", "fl"},                {"ff", "ff"},               {"ffi", "ffi"},
      {"ffl", "ffl"},              {"breve", "˘"},        {"dotaccent", "˙"},
      {"ring", "˚"},          {"ogonek", "˛"},       {"caron", "ˇ"},
      {"hungarumlaut", "˝"},  {"nbspace", " "},      {"sfthyphen", "­"},
      {"quotesingle", "'"},        {"grave", "`"},
  };
  return table;
}

std::optional<std::uint32_t> parse_hex_cp(std::string_view digits) {
  if (digits.empty() || digits.size() > 6) return std::nullopt;
  std::uint32_t v = 0;
  for (char c : digits) {
    v <<= 4;
    if (c >= '0' && c <= '9') v |= static_cast<std::uint32_t>(c - '0');
    else if (c >= 'A' && c <= 'F') v |= static_cast<std::uint32_t>(c - 'A' + 10);
    else if (c >= 'a' && c <= 'f') v |= static_cast<std::uint32_t>(c - 'a' + 10);
    else return std::nullopt;
  }
  return v;
}

std::uint32_t bytes_to_code(std::string_view bytes) {
  std::uint32_t v = 0;
  for (char c : bytes) v = (v << 8) | static_cast<unsigned char>(c);
  return v;
}

enum class BaseEncoding { Standard, WinAnsi, MacRoman };

std::string base_char(BaseEncoding enc, std::uint8_t code) {
  if (code >= 0x20 && code <= 0x7E) {
    if (enc == BaseEncoding::Standard && code == 0x27) return "’";
    if (enc == BaseEncoding::Standard && code == 0x60) return "‘";
    return std::string(1, static_cast<char>(code));
  }
  if (enc == BaseEncoding::Standard) {
    auto it = standard_high().find(code);
    return it == standard_high().end() ? std::string{} : utf8_encode(it->second);
  }
  if (code >= 0x80 && code <= 0x9F) {
    const std::uint16_t cp = kWinAnsiHigh[code - 0x80];
    return cp == 0 ? std::string{} : utf8_encode(cp);
  }
  if (code >= 0xA0) return utf8_encode(code);
  if (code == '\t' || code == '\n' || code == '\r') return " ";
  return {};
}

}  // namespace

std::string utf8_encode(std::uint32_t cp) {
  std::string out;
  if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
  return out;
}

std::string utf16be_to_utf8(std::string_view bytes) {
  std::string out;
  for (std::size_t i = 0; i + 1 < bytes.size(); i += 2) {
    std::uint32_t unit = (static_cast<unsigned char>(bytes[i]) << 8) | static_cast<unsigned char>(bytes[i + 1]);
    if (unit >= 0xD800 && unit <= 0xDBFF && i + 3 < bytes.size()) {
      const std::uint32_t lo =
          (static_cast<unsigned char>(bytes[i + 2]) << 8) | static_cast<unsigned char>(bytes[i + 3]);
      if (lo >= 0xDC00 && lo <= 0xDFFF) {
        unit = 0x10000 + ((unit - 0xD800) << 10) + (lo - 0xDC00);
        i += 2;
      }
    }
    if (unit == 0) continue;
    out += utf8_encode(unit);
  }
  return out;
}

std::optional<std::string> glyph_name_to_utf8(std::string_view name) {
  if (name.empty()) return std::nullopt;
  // Drop suffixes such as "a.sc" or "f_i" components are handled below.
  if (auto dot = name.find('.'); dot != std::string_view::npos && dot > 0) name = name.substr(0, dot);

  if (name.starts_with("uni") && name.size() >= 7 && (name.size() - 3) % 4 == 0) {
    std::string out;
    for (std::size_t i = 3; i < name.size(); i += 4) {
      auto cp = parse_hex_cp(name.substr(i, 4));
      if (!cp) return std::nullopt;
      out += utf8_encode(*cp);
    }
    return out;
  }
  if (name.size() >= 5 && name.size() <= 7 && name.front() == 'u') {
    if (auto cp = parse_hex_cp(name.substr(1))) return utf8_encode(*cp);
  }
  for (std::size_t k = 0; k < kAsciiNames.size(); ++k) {
    if (kAsciiNames[k] == name) return std::string(1, static_cast<char>(0x20 + k));
  }
  for (std::size_t k = 1; k < kLatin1Names.size(); ++k) {
    if (kLatin1Names[k] == name) return utf8_encode(static_cast<std::uint32_t>(0xA0 + k));
  }
  if (auto it = extra_glyphs().find(name); it != extra_glyphs().end()) return std::string(it->second);
  if (name.find('_') != std::string_view::npos) {
    // Ligature names like "f_f_i".
    std::string out;
    std::size_t start = 0;
    while (start <= name.size()) {
      std::size_t end = name.find('_', start);
      if (end == std::string_view::npos) end = name.size();
      auto part = glyph_name_to_utf8(name.substr(start, end - start));
      if (!part) return std::nullopt;
      out += *part;
      start = end + 1;
    }
    return out;
  }
  return std::nullopt;
}

FontDecoder::FontDecoder() : simple_map_(256) {
  for (int c = 0; c < 256; ++c) simple_map_[c] = base_char(BaseEncoding::WinAnsi, static_cast<std::uint8_t>(c));
}

FontDecoder FontDecoder::from_font(const Document& doc, const Dict& font) {
  FontDecoder dec;
  Object subtype = doc.get(font, "Subtype");
  Object base_font = doc.get(font, "BaseFont");
  const std::string base_name = base_font.is_name() ? base_font.as_name() : std::string{};

  if (subtype.is_name("Type0")) {
    dec.composite_ = true;
    dec.codespace_ = {{2, 0x0000, 0xFFFF}};
    dec.default_width_ = 1000.0;
    Object encoding = doc.get(font, "Encoding");
    if (encoding.is_name()) {
      const std::string& enc = encoding.as_name();
      if (enc.find("UCS2") != std::string::npos || enc.find("UTF16") != std::string::npos) dec.ucs2_codes_ = true;
    } else if (encoding.is_stream()) {
      try {
        // Embedded CMap: only the codespace ranges matter for splitting codes.
        FontDecoder cmap_reader;
        cmap_reader.load_to_unicode(doc.decode_stream(encoding.as_stream()));
        if (!cmap_reader.codespace_.empty()) dec.codespace_ = cmap_reader.codespace_;
      } catch (const std::exception&) {
      }
    }

    Object descendants = doc.get(font, "DescendantFonts");
    if (descendants.is_array() && !descendants.as_array().empty()) {
      Object cid_font = doc.resolve(descendants.as_array().front());
      if (const Dict* cf = cid_font.dict()) {
        if (auto dw = number_value(cf->find("DW"))) dec.default_width_ = *dw;
        Object w = doc.get(*cf, "W");
        if (w.is_array()) {
          const Array& arr = w.as_array();
          std::size_t k = 0;
          while (k < arr.size()) {
            auto first = int_value(&arr[k]);
            if (!first || k + 1 >= arr.size()) break;
            Object next = doc.resolve(arr[k + 1]);
            if (next.is_array()) {
              std::uint32_t cid = static_cast<std::uint32_t>(*first);
              for (const Object& wv : next.as_array()) {
                Object r = doc.resolve(wv);
                if (auto v = number_value(&r)) dec.widths_[cid] = *v;
                ++cid;
              }
              k += 2;
            } else {
              if (k + 2 >= arr.size()) break;
              auto last = int_value(&next);
              Object wv = doc.resolve(arr[k + 2]);
              auto v = number_value(&wv);
              if (last && v && *last >= *first && *last - *first < 65536) {
                for (auto cid = *first; cid <= *last; ++cid) dec.widths_[static_cast<std::uint32_t>(cid)] = *v;
              }
              k += 3;
            }
          }
        }
      }
    }
  } else {
    BaseEncoding base = subtype.is_name("TrueType") ? BaseEncoding::WinAnsi : BaseEncoding::Standard;
    Object encoding = doc.get(font, "Encoding");
    Object differences;
    auto pick = [&](const Object& name) {
      if (name.is_name("WinAnsiEncoding")) base = BaseEncoding::WinAnsi;
      else if (name.is_name("StandardEncoding")) base = BaseEncoding::Standard;
      else if (name.is_name("MacRomanEncoding")) base = BaseEncoding::MacRoman;
    };
    if (encoding.is_name()) {
      pick(encoding);
    } else if (encoding.is_dict()) {
      pick(doc.get(encoding.as_dict(), "BaseEncoding"));
      differences = doc.get(encoding.as_dict(), "Differences");
    }
    for (int c = 0; c < 256; ++c) dec.simple_map_[c] = base_char(base, static_cast<std::uint8_t>(c));
    if (differences.is_array()) {
      std::int64_t code = 0;
      for (const Object& item : differences.as_array()) {
        Object v = doc.resolve(item);
        if (v.is_int()) {
          code = v.as_int();
        } else if (v.is_name()) {
          if (code >= 0 && code < 256) {
            dec.simple_map_[static_cast<std::size_t>(code)] = glyph_name_to_utf8(v.as_name()).value_or("");
          }
          ++code;
        }
      }
    }

    const auto first_char = int_value(font.find("FirstChar")).value_or(0);
    Object widths = doc.get(font, "Widths");
    if (widths.is_array()) {
      std::uint32_t code_w = static_cast<std::uint32_t>(first_char);
      for (const Object& wv : widths.as_array()) {
        Object r = doc.resolve(wv);
        if (auto v = number_value(&r)) dec.widths_[code_w] = *v;
        ++code_w;
      }
    }
    Object descriptor = doc.get(font, "FontDescriptor");
    if (const Dict* fd = descriptor.dict()) {
      if (auto mw = number_value(fd->find("MissingWidth")); mw && *mw > 0) dec.default_width_ = *mw;
    }
    if (base_name.find("Courier") != std::string::npos) dec.default_width_ = 600.0;
  }

  Object to_unicode = doc.get(font, "ToUnicode");
  if (to_unicode.is_stream()) {
    try {
      dec.load_to_unicode(doc.decode_stream(to_unicode.as_stream()));
    } catch (const std::exception&) {
    }
  }
  return dec;
}

void FontDecoder::load_to_unicode(std::string_view cmap) {
  Lexer lex(cmap);
  std::vector<CodespaceRange> ranges;
  std::vector<Token> operands;
  for (;;) {
    Token tok = lex.next();
    if (tok.type == Token::Type::Eof) break;
    if (tok.type != Token::Type::Keyword) {
      operands.push_back(std::move(tok));
      continue;
    }
    const std::string& op = tok.text;
    if (op == "endcodespacerange") {
      for (std::size_t k = 0; k + 1 < operands.size(); k += 2) {
        if (operands[k].type != Token::Type::HexString) continue;
        const std::string& lo = operands[k].text;
        const std::string& hi = operands[k + 1].text;
        if (lo.empty() || lo.size() > 4) continue;
        ranges.push_back({static_cast<int>(lo.size()), bytes_to_code(lo), bytes_to_code(hi)});
      }
    } else if (op == "endbfchar") {
      for (std::size_t k = 0; k + 1 < operands.size(); k += 2) {
        const Token& src = operands[k];
        const Token& dst = operands[k + 1];
        if (dst.type == Token::Type::Name) {
          if (auto t = glyph_name_to_utf8(dst.text)) to_unicode_[bytes_to_code(src.text)] = *t;
        } else {
          to_unicode_[bytes_to_code(src.text)] = utf16be_to_utf8(dst.text);
        }
      }
    } else if (op == "endbfrange") {
      std::size_t k = 0;
      while (k + 2 < operands.size()) {
        const std::uint32_t lo = bytes_to_code(operands[k].text);
        const std::uint32_t hi = bytes_to_code(operands[k + 1].text);
        if (operands[k + 2].type == Token::Type::ArrayBegin) {
          std::size_t j = k + 3;
          std::uint32_t code = lo;
          while (j < operands.size() && operands[j].type != Token::Type::ArrayEnd) {
            if (code <= hi) to_unicode_[code++] = utf16be_to_utf8(operands[j].text);
            ++j;
          }
          k = j + 1;
        } else {
          const std::string& dst = operands[k + 2].text;
          if (hi >= lo && hi - lo < 65536 && dst.size() >= 2) {
            const std::size_t n = dst.size();
            const std::uint32_t base_unit =
                (static_cast<unsigned char>(dst[n - 2]) << 8) | static_cast<unsigned char>(dst[n - 1]);
            for (std::uint32_t code = lo; code <= hi; ++code) {
              std::string cur = dst;
              const std::uint32_t unit = (base_unit + (code - lo)) & 0xFFFF;
              cur[n - 2] = static_cast<char>(unit >> 8);
              cur[n - 1] = static_cast<char>(unit & 0xFF);
              to_unicode_[code] = utf16be_to_utf8(cur);
            }
          }
          k += 3;
        }
      }
    }
    if (op.starts_with("end") || op.starts_with("begin") || op == "def" || op == "usecmap") operands.clear();
  }
  if (!ranges.empty()) codespace_ = std::move(ranges);
}

int FontDecoder::code_length_at(std::string_view bytes, std::size_t pos) const {
  if (codespace_.empty()) return composite_ ? 2 : 1;
  for (int len = 1; len <= 4; ++len) {
    if (pos + static_cast<std::size_t>(len) > bytes.size()) break;
    const std::uint32_t code = bytes_to_code(bytes.substr(pos, static_cast<std::size_t>(len)));
    for (const auto& r : codespace_) {
      if (r.bytes == len && code >= r.low && code <= r.high) return len;
    }
  }
  int shortest = 4;
  for (const auto& r : codespace_) shortest = std::min(shortest, r.bytes);
  return shortest;
}

double FontDecoder::width_of(std::uint32_t code) const {
  if (auto it = widths_.find(code); it != widths_.end()) return it->second;
  return default_width_;
}

std::vector<Glyph> FontDecoder::decode(std::string_view bytes) const {
  std::vector<Glyph> glyphs;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    std::size_t len = static_cast<std::size_t>(code_length_at(bytes, pos));
    len = std::min(len, bytes.size() - pos);
    const std::uint32_t code = bytes_to_code(bytes.substr(pos, len));
    pos += len;

    Glyph g;
    g.code = code;
    g.width = width_of(code);
    if (auto it = to_unicode_.find(code); it != to_unicode_.end()) {
      g.text = it->second;
    } else if (composite_) {
      if (ucs2_codes_) g.text = utf8_encode(code);
    } else if (code < 256) {
      g.text = simple_map_[code];
    }
    g.word_space = (len == 1 && code == 32);
    glyphs.push_back(std::move(g));
  }
  return glyphs;
}

}  // namespace quizread::pdf
