#include "mixguide/harness/csv.hpp"

#include <cstdio>
#include <stdexcept>

namespace mixguide::harness {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

CsvFile::CsvFile(const std::string& path, const std::vector<std::string>& header)
    : os_(path, std::ios::binary), path_(path), cols_(header.size()) {
  if (!os_) throw std::runtime_error("cannot open for writing: " + path);
  if (header.empty()) throw std::runtime_error("csv header must be non-empty: " + path);
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) os_ << ',';
    os_ << header[i];
  }
  os_ << '\n';
}

CsvFile::~CsvFile() {
  if (os_.is_open()) os_.close();
}

void CsvFile::sep() {
  if (col_) os_ << ',';
  ++col_;
}

void CsvFile::cell(double v) {
  sep();
  os_ << format_double(v);
}

void CsvFile::cell(int v) {
  sep();
  os_ << v;
}

void CsvFile::cell(std::uint64_t v) {
  sep();
  os_ << v;
}

void CsvFile::cell(const std::string& v) {
  sep();
  os_ << v;
}

void CsvFile::end_row() {
  if (col_ != cols_)
    throw std::runtime_error("csv row width " + std::to_string(col_) + " != header width " +
                             std::to_string(cols_) + ": " + path_);
  os_ << '\n';
  col_ = 0;
}

void CsvFile::close() {
  os_.close();
  if (os_.fail()) throw std::runtime_error("write failed: " + path_);
}

}  // namespace mixguide::harness
