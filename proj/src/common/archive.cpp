#include "valvebench/common/archive.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "valvebench/common/errors.hpp"

namespace valvebench {

std::string format_exact(double value) {
  if (!std::isfinite(value)) throw NumericFault("archive: refusing to write non-finite value");
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw FormatError("not a number: '" + std::string(text) + "'");
  }
  return value;
}

std::int64_t parse_int(std::string_view text) {
  std::int64_t value = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw FormatError("not an integer: '" + std::string(text) + "'");
  }
  return value;
}

std::uint64_t parse_uint(std::string_view text) {
  std::uint64_t value = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw FormatError("not an unsigned integer: '" + std::string(text) + "'");
  }
  return value;
}

void ArchiveWriter::text(std::string_view tag, std::string_view value) {
  out_ << tag << ' ' << value << '\n';
}

void ArchiveWriter::integer(std::string_view tag, std::int64_t value) {
  out_ << tag << ' ' << value << '\n';
}

void ArchiveWriter::unsigned_integer(std::string_view tag, std::uint64_t value) {
  out_ << tag << ' ' << value << '\n';
}

void ArchiveWriter::scalar(std::string_view tag, double value) {
  out_ << tag << ' ' << format_exact(value) << '\n';
}

void ArchiveWriter::values(std::string_view tag, std::span<const double> values) {
  out_ << tag << ' ' << values.size();
  for (double v : values) out_ << ' ' << format_exact(v);
  out_ << '\n';
}

bool ArchiveReader::fetch() {
  if (has_pending_) return true;
  while (std::getline(in_, pending_)) {
    ++line_no_;
    if (pending_.empty()) continue;
    has_pending_ = true;
    return true;
  }
  return false;
}

std::string ArchiveReader::peek_tag() {
  if (!fetch()) return {};
  return pending_.substr(0, pending_.find(' '));
}

std::vector<std::string> ArchiveReader::record(std::string_view tag) {
  if (!fetch()) {
    throw FormatError("archive: unexpected end of input, expected '" + std::string(tag) + "'");
  }
  has_pending_ = false;
  std::istringstream fields(pending_);
  std::string got;
  fields >> got;
  if (got != tag) {
    throw FormatError("archive line " + std::to_string(line_no_) + ": expected '" +
                      std::string(tag) + "', found '" + got + "'");
  }
  std::vector<std::string> out;
  for (std::string field; fields >> field;) out.push_back(std::move(field));
  return out;
}

std::string ArchiveReader::text(std::string_view tag) {
  if (!fetch()) {
    throw FormatError("archive: unexpected end of input, expected '" + std::string(tag) + "'");
  }
  const auto space = pending_.find(' ');
  const std::string got = pending_.substr(0, space);
  if (got != tag) {
    throw FormatError("archive line " + std::to_string(line_no_) + ": expected '" +
                      std::string(tag) + "', found '" + got + "'");
  }
  has_pending_ = false;
  return space == std::string::npos ? std::string{} : pending_.substr(space + 1);
}

std::int64_t ArchiveReader::integer(std::string_view tag) {
  const auto fields = record(tag);
  if (fields.size() != 1) throw FormatError("archive: '" + std::string(tag) + "' expects one field");
  return parse_int(fields[0]);
}

std::uint64_t ArchiveReader::unsigned_integer(std::string_view tag) {
  const auto fields = record(tag);
  if (fields.size() != 1) throw FormatError("archive: '" + std::string(tag) + "' expects one field");
  return parse_uint(fields[0]);
}

double ArchiveReader::scalar(std::string_view tag) {
  const auto fields = record(tag);
  if (fields.size() != 1) throw FormatError("archive: '" + std::string(tag) + "' expects one field");
  return parse_double(fields[0]);
}

std::vector<double> ArchiveReader::values(std::string_view tag) {
  const auto fields = record(tag);
  if (fields.empty()) throw FormatError("archive: '" + std::string(tag) + "' missing count");
  const auto count = parse_uint(fields[0]);
  if (fields.size() != count + 1) {
    throw FormatError("archive: '" + std::string(tag) + "' declares " + fields[0] +
                      " values but has " + std::to_string(fields.size() - 1));
  }
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t i = 1; i < fields.size(); ++i) out.push_back(parse_double(fields[i]));
  return out;
}

void ArchiveReader::values_into(std::string_view tag, std::span<double> out) {
  const auto got = values(tag);
  if (got.size() != out.size()) {
    throw FormatError("archive: '" + std::string(tag) + "' has " + std::to_string(got.size()) +
                      " values, expected " + std::to_string(out.size()));
  }
  std::copy(got.begin(), got.end(), out.begin());
}

}  // namespace valvebench
