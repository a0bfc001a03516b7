#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace txg::csv {

/// Splits one line. Double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split(std::string_view line);

/// Quotes the field only when it contains a comma, quote or newline.
std::string escape(std::string_view field);

std::string join(const std::vector<std::string>& fields);

/// Line reader that checks the header and tracks line numbers for errors.
class Reader {
 public:
  /// Opens `path` and requires its first line to start with `header`
  /// columns. Extra trailing columns are allowed and exposed by columns().
  Reader(const std::filesystem::path& path, const std::vector<std::string>& header);

  /// Next non-blank row; false at end of file.
  bool next(std::vector<std::string>& row);

  const std::vector<std::string>& columns() const noexcept { return columns_; }
  std::size_t line() const noexcept { return line_; }
  const std::filesystem::path& path() const noexcept { return path_; }

  /// Throws Error(kMalformedRecord) mentioning the file and current line.
  [[noreturn]] void fail(const std::string& reason) const;

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  std::vector<std::string> columns_;
  std::size_t line_ = 0;
};

/// Opens `path` for writing, creating parent directories; throws Error(kIo).
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace txg::csv
