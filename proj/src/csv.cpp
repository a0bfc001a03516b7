#include "txg/csv.hpp"

#include <algorithm>

#include "txg/error.hpp"

namespace txg::csv {

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string join(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += escape(fields[i]);
  }
  return out;
}

Reader::Reader(const std::filesystem::path& path,
               const std::vector<std::string>& header)
    : path_(path), in_(path) {
  if (!in_) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::string first;
  if (!std::getline(in_, first)) fail("missing header");
  ++line_;
  columns_ = split(first);
  if (columns_.size() < header.size() ||
      !std::equal(header.begin(), header.end(), columns_.begin())) {
    fail("unexpected header '" + first + "'");
  }
}

bool Reader::next(std::vector<std::string>& row) {
  std::string text;
  while (std::getline(in_, text)) {
    ++line_;
    if (text.empty() || text == "\r") continue;
    row = split(text);
    if (row.size() != columns_.size()) {
      fail("expected " + std::to_string(columns_.size()) + " fields, got " +
           std::to_string(row.size()));
    }
    return true;
  }
  return false;
}

void Reader::fail(const std::string& reason) const {
  throw Error(ErrorKind::kMalformedRecord,
              path_.string() + ":" + std::to_string(line_) + ": " + reason);
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  return out;
}

}  // namespace txg::csv
