#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace maskguard::cli {

// Shortest round-trip decimal form.
std::string format_double(double v);
std::string format_optional(const std::optional<double>& v);

// Comma-separated rows; fields never contain commas or quotes.
class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header);

  CsvWriter& field(std::string_view s);
  CsvWriter& field(const char* s) { return field(std::string_view(s)); }
  CsvWriter& field(const std::string& s) { return field(std::string_view(s)); }
  CsvWriter& field(double v) { return field(std::string_view(format_double(v))); }
  CsvWriter& field(const std::optional<double>& v) {
    return field(std::string_view(format_optional(v)));
  }
  CsvWriter& field(bool b) { return field(std::string_view(b ? "1" : "0")); }
  CsvWriter& field(std::size_t n) { return field(std::string_view(std::to_string(n))); }
  CsvWriter& field(int n) { return field(std::string_view(std::to_string(n))); }
  void end_row();

  const std::string& str() const { return buf_; }

 private:
  std::string buf_;
  std::size_t columns_ = 0;
  std::size_t in_row_ = 0;
};

// Minimal reader for the files CsvWriter produces.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;  // throws FormatError
};

CsvTable read_csv(const std::filesystem::path& path);

// Writes `<path>.tmp` then renames it over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view content);

std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t v);

// Stream time as an ISO-8601 timestamp from the Unix epoch, microsecond resolution.
std::string iso_timestamp(double t_s);

}  // namespace maskguard::cli
