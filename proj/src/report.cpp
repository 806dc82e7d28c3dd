#include "bellgen/report.hpp"

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bellgen/errors.hpp"

namespace bellgen {

double round_sig12(double x) {
  if (!std::isfinite(x)) return x;
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return std::strtod(buf, nullptr);
}

std::string format_sig12(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

nlohmann::json jnum(double x) { return round_sig12(x); }

nlohmann::json jcomplex(const std::complex<double>& z) {
  return nlohmann::json::array({jnum(z.real()), jnum(z.imag())});
}

std::string fnv1a64_hex(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

void write_text_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw fit_error("cannot open output file " + path);
  out << content;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw validation_error("cannot open file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CsvWriter::CsvWriter(std::string provenance, std::vector<std::string> columns)
    : n_cols_(columns.size()) {
  body_ = "# " + std::move(provenance) + "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) {
    body_ += columns[i];
    body_ += (i + 1 < columns.size()) ? ',' : '\n';
  }
}

void CsvWriter::add_row(const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    body_ += format_sig12(values[i]);
    body_ += (i + 1 < values.size()) ? ',' : '\n';
  }
}

void CsvWriter::add_row_text(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    body_ += cells[i];
    body_ += (i + 1 < cells.size()) ? ',' : '\n';
  }
}

}  // namespace bellgen
