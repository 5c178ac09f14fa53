#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace valvebench {

/// Formats a double so that parsing it back yields the identical bits.
std::string format_exact(double value);
double parse_double(std::string_view text);

/// Line-oriented text archive: every record is `tag field field ...`.
/// Doubles are written in shortest-exact decimal so save/load/save is
/// byte-identical.
class ArchiveWriter {
 public:
  explicit ArchiveWriter(std::ostream& out) : out_(out) {}

  void text(std::string_view tag, std::string_view value);
  void integer(std::string_view tag, std::int64_t value);
  void unsigned_integer(std::string_view tag, std::uint64_t value);
  void scalar(std::string_view tag, double value);
  /// `tag n v0 v1 ...`
  void values(std::string_view tag, std::span<const double> values);

 private:
  std::ostream& out_;
};

class ArchiveReader {
 public:
  explicit ArchiveReader(std::istream& in) : in_(in) {}

  /// Consumes the next record, which must carry `tag`, and returns its fields.
  std::vector<std::string> record(std::string_view tag);
  std::string text(std::string_view tag);
  std::int64_t integer(std::string_view tag);
  std::uint64_t unsigned_integer(std::string_view tag);
  double scalar(std::string_view tag);
  std::vector<double> values(std::string_view tag);
  /// Reads exactly out.size() values.
  void values_into(std::string_view tag, std::span<double> out);
  /// Tag of the next record without consuming it; empty at end of input.
  std::string peek_tag();

  std::size_t line_number() const { return line_no_; }

 private:
  bool fetch();

  std::istream& in_;
  std::string pending_;
  bool has_pending_ = false;
  std::size_t line_no_ = 0;
};

std::int64_t parse_int(std::string_view text);
std::uint64_t parse_uint(std::string_view text);

}  // namespace valvebench
