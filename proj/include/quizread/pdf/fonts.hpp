#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "quizread/pdf/document.hpp"

namespace quizread::pdf {

struct Glyph {
  std::uint32_t code = 0;
  std::string text;      // UTF-8, empty when unmappable
  double width = 0.0;    // glyph space units (1/1000 em)
  bool word_space = false;  // single-byte code 32, receives Tw
};

// Maps the bytes of a shown string to Unicode text and advance widths.
class FontDecoder {
 public:
  FontDecoder();
  static FontDecoder from_font(const Document& doc, const Dict& font);

  std::vector<Glyph> decode(std::string_view bytes) const;

  // Parses a ToUnicode CMap program into this decoder.
  void load_to_unicode(std::string_view cmap);

 private:
  struct CodespaceRange {
    int bytes = 1;
    std::uint32_t low = 0;
    std::uint32_t high = 0xff;
  };

  int code_length_at(std::string_view bytes, std::size_t pos) const;
  double width_of(std::uint32_t code) const;

  bool composite_ = false;
  bool ucs2_codes_ = false;  // predefined UCS-2 CMaps: code is the code point
  std::vector<CodespaceRange> codespace_;
  std::map<std::uint32_t, std::string> to_unicode_;
  std::vector<std::string> simple_map_;  // 256 entries for simple fonts
  std::map<std::uint32_t, double> widths_;
  double default_width_ = 500.0;
};

std::string utf8_encode(std::uint32_t cp);
std::string utf16be_to_utf8(std::string_view bytes);

// Unicode text for a glyph name (AGL subset plus uniXXXX / uXXXX forms).
std::optional<std::string> glyph_name_to_utf8(std::string_view name);

}  // namespace quizread::pdf
