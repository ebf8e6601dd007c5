#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "quizread/pdf/object.hpp"

namespace quizread::pdf {

// Raised for filters we do not decode (image codecs). Callers treat the
// stream as carrying no text.
class UnsupportedFilter : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string flate_decode(std::string_view in);
std::string ascii_hex_decode(std::string_view in);
std::string ascii85_decode(std::string_view in);
std::string lzw_decode(std::string_view in, bool early_change = true);
std::string run_length_decode(std::string_view in);

// Undoes PNG (10..15) and TIFF (2) predictors as described by DecodeParms.
std::string apply_predictor(std::string data, const Dict* parms);

// Applies one named filter with its (already resolved) parameters.
std::string apply_filter(std::string_view name, std::string data, const Dict* parms);

}  // namespace quizread::pdf
