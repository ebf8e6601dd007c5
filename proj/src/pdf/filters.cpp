#include "quizread/pdf/filters.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdlib>
#include <vector>

namespace quizread::pdf {

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::int64_t parm_int(const Dict* parms, std::string_view key, std::int64_t fallback) {
  if (parms == nullptr) return fallback;
  return int_value(parms->find(key)).value_or(fallback);
}

int paeth(int a, int b, int c) {
  const int p = a + b - c;
  const int pa = std::abs(p - a);
  const int pb = std::abs(p - b);
  const int pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

}  // namespace

std::string flate_decode(std::string_view in) {
  std::string out;
  if (in.empty()) return out;

  z_stream zs{};
  // 32 + MAX_WBITS lets zlib detect zlib or gzip headers.
  if (inflateInit2(&zs, 32 + MAX_WBITS) != Z_OK) throw std::runtime_error("inflateInit failed");
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(in.data()));
  zs.avail_in = static_cast<uInt>(in.size());

  std::array<char, 16384> buf{};
  int rc = Z_OK;
  while (rc == Z_OK) {
    zs.next_out = reinterpret_cast<Bytef*>(buf.data());
    zs.avail_out = static_cast<uInt>(buf.size());
    rc = inflate(&zs, Z_NO_FLUSH);
    out.append(buf.data(), buf.size() - zs.avail_out);
    if (rc == Z_BUF_ERROR && zs.avail_in == 0) break;  // truncated input
  }
  inflateEnd(&zs);

  if (rc != Z_STREAM_END && rc != Z_BUF_ERROR && out.empty()) {
    // Some writers omit the zlib header; retry as raw deflate.
    z_stream raw{};
    if (inflateInit2(&raw, -MAX_WBITS) != Z_OK) throw std::runtime_error("inflateInit failed");
    raw.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(in.data()));
    raw.avail_in = static_cast<uInt>(in.size());
    int rrc = Z_OK;
    while (rrc == Z_OK) {
      raw.next_out = reinterpret_cast<Bytef*>(buf.data());
      raw.avail_out = static_cast<uInt>(buf.size());
      rrc = inflate(&raw, Z_NO_FLUSH);
      out.append(buf.data(), buf.size() - raw.avail_out);
    }
    inflateEnd(&raw);
    if (out.empty()) throw std::runtime_error("corrupt flate stream");
  }
  return out;
}

std::string ascii_hex_decode(std::string_view in) {
  std::string out;
  int pending = -1;
  for (char c : in) {
    if (c == '>') break;
    const int d = hex_value(c);
    if (d < 0) continue;
    if (pending < 0) {
      pending = d;
    } else {
      out.push_back(static_cast<char>(pending * 16 + d));
      pending = -1;
    }
  }
  if (pending >= 0) out.push_back(static_cast<char>(pending * 16));
  return out;
}

std::string ascii85_decode(std::string_view in) {
  std::string out;
  std::size_t i = 0;
  if (in.substr(0, 2) == "<~") i = 2;
  std::uint32_t tuple = 0;
  int count = 0;
  for (; i < in.size(); ++i) {
    const char c = in[i];
    if (c == '~') break;
    if (static_cast<unsigned char>(c) <= ' ') continue;
    if (c == 'z' && count == 0) {
      out.append(4, '\0');
      continue;
    }
    if (c < '!' || c > 'u') throw std::runtime_error("invalid ASCII85 byte");
    tuple = tuple * 85 + static_cast<std::uint32_t>(c - '!');
    if (++count == 5) {
      for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<char>((tuple >> s) & 0xff));
      tuple = 0;
      count = 0;
    }
  }
  if (count > 1) {
    for (int k = count; k < 5; ++k) tuple = tuple * 85 + 84;
    for (int k = 0; k < count - 1; ++k) out.push_back(static_cast<char>((tuple >> (24 - 8 * k)) & 0xff));
  }
  return out;
}

std::string lzw_decode(std::string_view in, bool early_change) {
  std::string out;
  std::vector<std::string> table;
  auto reset = [&] {
    table.clear();
    table.reserve(4096);
    for (int k = 0; k < 256; ++k) table.emplace_back(1, static_cast<char>(k));
    table.emplace_back();  // 256 clear
    table.emplace_back();  // 257 eod
  };
  reset();

  int code_len = 9;
  std::uint32_t bitbuf = 0;
  int bits = 0;
  std::size_t pos = 0;
  std::string prev;
  bool have_prev = false;

  for (;;) {
    while (bits < code_len && pos < in.size()) {
      bitbuf = (bitbuf << 8) | static_cast<unsigned char>(in[pos++]);
      bits += 8;
    }
    if (bits < code_len) break;
    const int code = static_cast<int>((bitbuf >> (bits - code_len)) & ((1u << code_len) - 1));
    bits -= code_len;

    if (code == 256) {
      reset();
      code_len = 9;
      have_prev = false;
      continue;
    }
    if (code == 257) break;

    std::string entry;
    if (code < static_cast<int>(table.size())) {
      entry = table[code];
    } else if (have_prev && code == static_cast<int>(table.size())) {
      entry = prev + prev.front();
    } else {
      throw std::runtime_error("invalid LZW code");
    }
    out += entry;
    if (have_prev && table.size() < 4096) table.push_back(prev + entry.front());
    prev = std::move(entry);
    have_prev = true;

    const std::size_t next_size = table.size() + (early_change ? 1 : 0);
    if (next_size >= 2048) {
      code_len = 12;
    } else if (next_size >= 1024) {
      code_len = 11;
    } else if (next_size >= 512) {
      code_len = 10;
    }
  }
  return out;
}

std::string run_length_decode(std::string_view in) {
  std::string out;
  std::size_t i = 0;
  while (i < in.size()) {
    const int len = static_cast<unsigned char>(in[i++]);
    if (len == 128) break;
    if (len < 128) {
      const std::size_t n = std::min<std::size_t>(len + 1, in.size() - i);
      out.append(in.substr(i, n));
      i += n;
    } else if (i < in.size()) {
      out.append(static_cast<std::size_t>(257 - len), in[i++]);
    }
  }
  return out;
}

std::string apply_predictor(std::string data, const Dict* parms) {
  const std::int64_t predictor = parm_int(parms, "Predictor", 1);
  if (predictor <= 1) return data;

  const auto colors = static_cast<std::size_t>(std::max<std::int64_t>(1, parm_int(parms, "Colors", 1)));
  const auto bpc = static_cast<std::size_t>(std::max<std::int64_t>(1, parm_int(parms, "BitsPerComponent", 8)));
  const auto columns = static_cast<std::size_t>(std::max<std::int64_t>(1, parm_int(parms, "Columns", 1)));
  const std::size_t bpp = std::max<std::size_t>(1, (colors * bpc + 7) / 8);
  const std::size_t row_len = (colors * bpc * columns + 7) / 8;

  if (predictor == 2) {
    if (bpc != 8) return data;
    for (std::size_t row = 0; row + row_len <= data.size(); row += row_len) {
      for (std::size_t k = bpp; k < row_len; ++k) {
        data[row + k] = static_cast<char>(static_cast<unsigned char>(data[row + k]) +
                                          static_cast<unsigned char>(data[row + k - bpp]));
      }
    }
    return data;
  }

  // PNG predictors: every row is prefixed by its filter type byte.
  std::string out;
  std::vector<unsigned char> prior(row_len, 0);
  std::vector<unsigned char> cur(row_len, 0);
  std::size_t pos = 0;
  while (pos < data.size()) {
    const int type = static_cast<unsigned char>(data[pos++]);
    const std::size_t n = std::min(row_len, data.size() - pos);
    std::fill(cur.begin(), cur.end(), 0);
    for (std::size_t k = 0; k < n; ++k) cur[k] = static_cast<unsigned char>(data[pos + k]);
    pos += n;
    for (std::size_t k = 0; k < row_len; ++k) {
      const int left = k >= bpp ? cur[k - bpp] : 0;
      const int up = prior[k];
      const int up_left = k >= bpp ? prior[k - bpp] : 0;
      int v = cur[k];
      switch (type) {
        case 1: v += left; break;
        case 2: v += up; break;
        case 3: v += (left + up) / 2; break;
        case 4: v += paeth(left, up, up_left); break;
        default: break;
      }
      cur[k] = static_cast<unsigned char>(v & 0xff);
    }
    out.append(reinterpret_cast<const char*>(cur.data()), n);
    prior = cur;
  }
  return out;
}

std::string apply_filter(std::string_view name, std::string data, const Dict* parms) {
  if (name == "FlateDecode" || name == "Fl") return apply_predictor(flate_decode(data), parms);
  if (name == "LZWDecode" || name == "LZW") {
    const bool early = parm_int(parms, "EarlyChange", 1) != 0;
    return apply_predictor(lzw_decode(data, early), parms);
  }
  if (name == "ASCIIHexDecode" || name == "AHx") return ascii_hex_decode(data);
  if (name == "ASCII85Decode" || name == "A85") return ascii85_decode(data);
  if (name == "RunLengthDecode" || name == "RL") return run_length_decode(data);
  if (name == "Crypt") return data;  // Identity crypt filter
  throw UnsupportedFilter("unsupported filter " + std::string(name));
}

}  // namespace quizread::pdf
