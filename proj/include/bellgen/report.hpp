#pragma once

#include <json.hpp>

#include <string>
#include <vector>

namespace bellgen {

// All numbers in emitted reports are rounded to 12 significant digits so
// that repeated runs (and independent implementations of the schema) can be
// compared byte for byte.
double round_sig12(double x);
std::string format_sig12(double x);

// Inserts a double rounded to 12 significant digits.
nlohmann::json jnum(double x);
nlohmann::json jcomplex(const std::complex<double>& z);  // [re, im]

std::string fnv1a64_hex(const std::string& data);

// Canonical serialization (sorted keys, trailing newline).
std::string dump_json(const nlohmann::json& j);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// CSV with a `# key=value ...` provenance line, a header row, and
// 12-significant-digit cells.
class CsvWriter {
 public:
  CsvWriter(std::string provenance, std::vector<std::string> columns);
  void add_row(const std::vector<double>& values);
  void add_row_text(const std::vector<std::string>& cells);
  std::string str() const { return body_; }

 private:
  std::string body_;
  std::size_t n_cols_;
};

}  // namespace bellgen
