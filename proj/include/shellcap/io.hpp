#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace shellcap {

/// Round-trip text for a double: 17 significant digits, "inf"/"-inf"/"nan".
std::string format_double(double x);

/// JSON value for a double; non-finite values become strings.
nlohmann::json json_number(double x);

/// Rows of typed cells under a fixed header. CSV output quotes fields that
/// contain separators; JSON output is an array of objects keyed by header.
class Table {
 public:
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}

  const std::vector<std::string>& header() const { return header_; }
  std::size_t size() const { return rows_.size(); }
  /// Throws InvalidArgument when the cell count differs from the header.
  void add(std::vector<nlohmann::json> row);

  std::string csv() const;
  nlohmann::json json() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<nlohmann::json>> rows_;
};

/// Writes text to a file; throws IoError.
void write_text(const std::string& path, const std::string& text);

/// Stable dump: two-space indent, keys sorted.
std::string dump_json(const nlohmann::json& j);

}  // namespace shellcap
