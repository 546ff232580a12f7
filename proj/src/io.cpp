#include "shellcap/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "shellcap/error.hpp"

namespace shellcap {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

nlohmann::json json_number(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

void Table::add(std::vector<nlohmann::json> row) {
  if (row.size() != header_.size())
    throw Error(ErrorKind::InvalidArgument, "row has " + std::to_string(row.size()) + " cells, header " +
                                                std::to_string(header_.size()));
  rows_.push_back(std::move(row));
}

namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string cell_text(const nlohmann::json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return v.dump();
  if (v.is_number_float()) return format_double(v.get<double>());
  return v.dump();
}

}  // namespace

std::string Table::csv() const {
  std::string out;
  for (std::size_t i = 0; i < header_.size(); ++i) out += (i ? "," : "") + quote(header_[i]);
  out += "\n";
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + quote(cell_text(row[i]));
    out += "\n";
  }
  return out;
}

nlohmann::json Table::json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& row : rows_) {
    nlohmann::json obj = nlohmann::json::object();
    for (std::size_t i = 0; i < row.size(); ++i) obj[header_[i]] = row[i];
    arr.push_back(std::move(obj));
  }
  return arr;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::IoError, "cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw Error(ErrorKind::IoError, "failed writing '" + path + "'");
}

std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace shellcap
