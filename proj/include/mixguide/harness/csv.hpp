#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

// Deterministic CSV emission: fixed headers, "%.17g" floats, "\n" line
// endings, so identical (config, seed) pairs produce identical bytes.
namespace mixguide::harness {

std::string format_double(double v);  // %.17g; nan prints as "nan"

class CsvFile {
 public:
  CsvFile(const std::string& path, const std::vector<std::string>& header);
  ~CsvFile();
  CsvFile(const CsvFile&) = delete;
  CsvFile& operator=(const CsvFile&) = delete;

  void cell(double v);
  void cell(int v);
  void cell(std::uint64_t v);
  void cell(const std::string& v);
  // Ends the current row; throws std::runtime_error if the cell count does
  // not match the header width.
  void end_row();
  void close();

  const std::string& path() const { return path_; }

 private:
  void sep();

  std::ofstream os_;
  std::string path_;
  std::size_t cols_ = 0;
  std::size_t col_ = 0;
};

}  // namespace mixguide::harness
