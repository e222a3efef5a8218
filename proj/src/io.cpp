#include "ruelle/io.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace ruelle::io {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

CsvWriter::CsvWriter(std::ostream& out, const std::vector<std::string>& header)
    : out_(out), columns_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

CsvWriter& CsvWriter::cell(double value) { return cell(std::string_view(format_double(value))); }

CsvWriter& CsvWriter::cell(long long value) { return cell(std::string_view(std::to_string(value))); }

CsvWriter& CsvWriter::cell(std::string_view text) {
  if (filled_ == columns_) throw std::logic_error("CsvWriter: too many cells in row");
  out_ << (filled_ ? "," : "") << text;
  ++filled_;
  return *this;
}

void CsvWriter::end_row() {
  if (filled_ != columns_) throw std::logic_error("CsvWriter: incomplete row");
  out_ << '\n';
  filled_ = 0;
}

namespace {

void dump_into(std::string& out, const nlohmann::ordered_json& v, int indent, int level) {
  const auto newline = [&](int lvl) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * lvl), ' ');
  };
  switch (v.type()) {
    case nlohmann::json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (const auto& [key, item] : v.items()) {
        if (!first) out += ',';
        first = false;
        newline(level + 1);
        out += nlohmann::ordered_json(key).dump();
        out += indent < 0 ? ":" : ": ";
        dump_into(out, item, indent, level + 1);
      }
      newline(level);
      out += '}';
      return;
    }
    case nlohmann::json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      out += '[';
      bool first = true;
      for (const auto& item : v) {
        if (!first) out += ',';
        first = false;
        newline(level + 1);
        dump_into(out, item, indent, level + 1);
      }
      newline(level);
      out += ']';
      return;
    }
    case nlohmann::json::value_t::number_float: {
      const double d = v.get<double>();
      if (!std::isfinite(d)) {
        out += "null";
        return;
      }
      std::string text = format_double(d);
      if (text.find_first_of(".eE") == std::string::npos) text += ".0";
      out += text;
      return;
    }
    default:
      out += v.dump();
  }
}

}  // namespace

std::string dump_json(const nlohmann::ordered_json& value, int indent) {
  std::string out;
  dump_into(out, value, indent, 0);
  out += '\n';
  return out;
}

}  // namespace ruelle::io
