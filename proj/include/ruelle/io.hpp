#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace ruelle::io {

/// Round-trip formatting with 17 significant digits; "nan"/"inf" spelled out.
std::string format_double(double value);

/// Minimal CSV writer: columns are fixed by the header, numbers go through
/// `format_double`.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::vector<std::string>& header);
  CsvWriter& cell(double value);
  CsvWriter& cell(long long value);
  CsvWriter& cell(std::string_view text);
  void end_row();

 private:
  std::ostream& out_;
  std::size_t columns_;
  std::size_t filled_ = 0;
};

/// JSON text with every float printed to 17 significant digits (a trailing
/// ".0" keeps integral floats floats). NaN and infinities become null.
std::string dump_json(const nlohmann::ordered_json& value, int indent = 2);

}  // namespace ruelle::io
