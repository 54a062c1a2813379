#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace gnids::csv {

/// Splits one CSV line into fields. Double-quoted fields may contain commas
/// and doubled quotes; embedded newlines are not supported.
std::vector<std::string> split_line(std::string_view line);

/// Streaming row reader. Strips a UTF-8 BOM and trailing '\r'.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}
  bool next(std::vector<std::string>& fields);
  std::size_t line_number() const { return line_; }

 private:
  std::istream& in_;
  std::string buffer_;
  std::size_t line_ = 0;
};

std::string escape(std::string_view field);

/// Shortest text that parses back to exactly the same double.
std::string format_double(double v);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);

}  // namespace gnids::csv
