#pragma once

// Minimal PDF writer for tests. Produces files with a classic xref table, a
// cross-reference stream (optionally packing objects into an object stream),
// or deliberately wrong offsets to exercise recovery.

#include <zlib.h>

#include <algorithm>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace quizread::testing {

inline std::string deflate(const std::string& data) {
  uLongf size = compressBound(static_cast<uLong>(data.size()));
  std::string out(size, '\0');
  if (compress(reinterpret_cast<Bytef*>(out.data()), &size, reinterpret_cast<const Bytef*>(data.data()),
               static_cast<uLong>(data.size())) != Z_OK) {
    throw std::runtime_error("compress failed");
  }
  out.resize(size);
  return out;
}

inline std::string stream_object(const std::string& dict_entries, const std::string& data) {
  return "<< " + dict_entries + " /Length " + std::to_string(data.size()) + " >>\nstream\n" + data + "\nendstream";
}

inline std::string flate_stream_object(const std::string& dict_entries, const std::string& data) {
  return stream_object(dict_entries + " /Filter /FlateDecode", deflate(data));
}

enum class XrefStyle { Table, Stream, ObjectStream, BrokenOffsets, NoXref };

class PdfBuilder {
 public:
  int reserve() { return next_++; }

  int add(std::string body) {
    const int num = reserve();
    objects_[num] = std::move(body);
    return num;
  }

  void set(int num, std::string body) { objects_[num] = std::move(body); }

  std::string build(int root, XrefStyle style = XrefStyle::Table, const std::string& trailer_extra = "") const {
    std::string out = "%PDF-1.7\n%\xE2\xE3\xCF\xD3\n";
    std::map<int, std::size_t> offsets;
    const int size = next_;

    if (style == XrefStyle::ObjectStream) {
      // Non-stream objects go into one object stream; streams stay top level.
      std::string header;
      std::string body;
      std::vector<int> packed;
      for (const auto& [num, text] : objects_) {
        if (text.find("stream\n") != std::string::npos) continue;
        header += std::to_string(num) + " " + std::to_string(body.size()) + " ";
        body += text + "\n";
        packed.push_back(num);
      }
      const int objstm = size;
      const int xref_num = size + 1;
      for (const auto& [num, text] : objects_) {
        if (text.find("stream\n") == std::string::npos) continue;
        offsets[num] = out.size();
        out += std::to_string(num) + " 0 obj\n" + text + "\nendobj\n";
      }
      const std::string content = header + body;
      offsets[objstm] = out.size();
      out += std::to_string(objstm) + " 0 obj\n" +
             flate_stream_object("/Type /ObjStm /N " + std::to_string(packed.size()) + " /First " +
                                     std::to_string(header.size()),
                                 content) +
             "\nendobj\n";
      std::string rows;
      auto row = [&](int type, std::size_t a, int b) {
        rows.push_back(static_cast<char>(type));
        rows.push_back(static_cast<char>((a >> 24) & 0xff));
        rows.push_back(static_cast<char>((a >> 16) & 0xff));
        rows.push_back(static_cast<char>((a >> 8) & 0xff));
        rows.push_back(static_cast<char>(a & 0xff));
        rows.push_back(static_cast<char>(b & 0xff));
      };
      const std::size_t xref_offset = out.size();
      for (int num = 0; num < xref_num + 1; ++num) {
        if (num == 0) {
          row(0, 0, 255);
        } else if (num == xref_num) {
          row(1, xref_offset, 0);
        } else if (offsets.count(num)) {
          row(1, offsets[num], 0);
        } else {
          auto it = std::find(packed.begin(), packed.end(), num);
          if (it != packed.end()) {
            row(2, static_cast<std::size_t>(objstm), static_cast<int>(it - packed.begin()));
          } else {
            row(0, 0, 0);
          }
        }
      }
      out += std::to_string(xref_num) + " 0 obj\n" +
             flate_stream_object("/Type /XRef /Size " + std::to_string(xref_num + 1) + " /W [1 4 1] /Root " +
                                     std::to_string(root) + " 0 R " + trailer_extra,
                                 rows) +
             "\nendobj\n";
      out += "startxref\n" + std::to_string(xref_offset) + "\n%%EOF\n";
      return out;
    }

    for (const auto& [num, text] : objects_) {
      offsets[num] = out.size();
      out += std::to_string(num) + " 0 obj\n" + text + "\nendobj\n";
    }

    if (style == XrefStyle::Stream) {
      const int xref_num = size;
      const std::size_t xref_offset = out.size();
      std::string rows;
      for (int num = 0; num <= xref_num; ++num) {
        std::size_t off = 0;
        int type = 0;
        if (num == xref_num) {
          off = xref_offset;
          type = 1;
        } else if (offsets.count(num)) {
          off = offsets.at(num);
          type = 1;
        }
        rows.push_back(static_cast<char>(type));
        rows.push_back(static_cast<char>((off >> 16) & 0xff));
        rows.push_back(static_cast<char>((off >> 8) & 0xff));
        rows.push_back(static_cast<char>(off & 0xff));
        rows.push_back(static_cast<char>(num == 0 ? 0xff : 0));
      }
      out += std::to_string(xref_num) + " 0 obj\n" +
             flate_stream_object("/Type /XRef /Size " + std::to_string(xref_num + 1) + " /W [1 3 1] /Root " +
                                     std::to_string(root) + " 0 R " + trailer_extra,
                                 rows) +
             "\nendobj\n";
      out += "startxref\n" + std::to_string(xref_offset) + "\n%%EOF\n";
      return out;
    }

    if (style == XrefStyle::NoXref) {
      out += "trailer\n<< /Size " + std::to_string(size) + " /Root " + std::to_string(root) + " 0 R " +
             trailer_extra + " >>\n%%EOF\n";
      return out;
    }

    const std::size_t xref_offset = out.size();
    out += "xref\n0 " + std::to_string(size) + "\n";
    char line[32];
    std::snprintf(line, sizeof line, "%010d %05d f\r\n", 0, 65535);
    out += line;
    for (int num = 1; num < size; ++num) {
      std::size_t off = offsets.count(num) ? offsets.at(num) : 0;
      if (style == XrefStyle::BrokenOffsets && off != 0) off += 7;
      std::snprintf(line, sizeof line, "%010zu %05d %c\r\n", off, 0, offsets.count(num) ? 'n' : 'f');
      out += line;
    }
    out += "trailer\n<< /Size " + std::to_string(size) + " /Root " + std::to_string(root) + " 0 R " +
           trailer_extra + " >>\nstartxref\n" + std::to_string(xref_offset) + "\n%%EOF\n";
    return out;
  }

 private:
  int next_ = 1;
  std::map<int, std::string> objects_;
};

struct PageSpec {
  std::string content;  // content stream operators
  bool flate = false;
  std::string extra_resources;  // appended inside /Resources << >>
};

// One Helvetica font (F1, WinAnsi) shared by all pages.
inline std::string build_pdf(const std::vector<PageSpec>& pages, XrefStyle style = XrefStyle::Table,
                             const std::string& trailer_extra = "") {
  PdfBuilder b;
  const int catalog = b.reserve();
  const int tree = b.reserve();
  const int font = b.add("<< /Type /Font /Subtype /Type1 /BaseFont /Helvetica /Encoding /WinAnsiEncoding >>");
  std::string kids;
  for (const PageSpec& p : pages) {
    const int content = b.add(p.flate ? flate_stream_object("", p.content) : stream_object("", p.content));
    const int page = b.add("<< /Type /Page /Parent " + std::to_string(tree) +
                           " 0 R /MediaBox [0 0 612 792] /Resources << /Font << /F1 " + std::to_string(font) +
                           " 0 R >> " + p.extra_resources + " >> /Contents " + std::to_string(content) + " 0 R >>");
    kids += std::to_string(page) + " 0 R ";
  }
  b.set(tree, "<< /Type /Pages /Kids [" + kids + "] /Count " + std::to_string(pages.size()) + " >>");
  b.set(catalog, "<< /Type /Catalog /Pages " + std::to_string(tree) + " 0 R >>");
  return b.build(catalog, style, trailer_extra);
}

// Content stream showing each line at a fresh baseline.
inline std::string text_lines(const std::vector<std::string>& lines, double size = 12) {
  std::string s = "BT /F1 " + std::to_string(size) + " Tf 72 720 Td " + std::to_string(size * 1.2) + " TL\n";
  for (const std::string& line : lines) {
    std::string escaped;
    for (char c : line) {
      if (c == '(' || c == ')' || c == '\\') escaped.push_back('\\');
      escaped.push_back(c);
    }
    s += "(" + escaped + ") Tj T*\n";
  }
  s += "ET\n";
  return s;
}

}  // namespace quizread::testing
