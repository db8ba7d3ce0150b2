#ifndef RDABC_CSV_HPP_
#define RDABC_CSV_HPP_

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rdabc {

// Minimal RFC-4180 CSV: UTF-8, LF line endings, quoting only when needed.
// Numeric cells are written with 17 significant digits so values round-trip.
class CsvWriter {
 public:
  explicit CsvWriter(std::string path);
  ~CsvWriter();

  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void write_row(const std::vector<std::string>& cells);
  void write_row_numeric(const std::vector<double>& values);

  static std::string format_double(double v);

 private:
  struct Impl;
  Impl* impl_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column_index(const std::string& name) const;  // -1 when absent
  Eigen::MatrixXd numeric_block(const std::vector<int>& columns) const;
};

CsvTable read_csv(const std::string& path);

// Writes a header plus a numeric matrix.
void write_csv_matrix(const std::string& path, const std::vector<std::string>& header,
                      const Eigen::MatrixXd& values);

}  // namespace rdabc

#endif  // RDABC_CSV_HPP_
