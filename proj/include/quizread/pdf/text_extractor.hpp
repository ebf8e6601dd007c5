#pragma once

#include <string>

#include "quizread/pdf/document.hpp"

namespace quizread::pdf {

struct RawPageText {
  std::string text;             // layout-ish text: '\n' between lines, ' ' between words
  bool has_text_layer = false;  // page executed at least one text-showing operator
};

// Interprets the page's content streams (and nested form XObjects) and
// collects the text shown on it. Streams that cannot be decoded contribute
// nothing rather than failing the page.
RawPageText extract_page_text(const Document& doc, std::size_t page_index);

}  // namespace quizread::pdf
