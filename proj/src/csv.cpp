#include "rdabc/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rdabc/errors.hpp"

namespace rdabc {

struct CsvWriter::Impl {
  std::ofstream out;
};

CsvWriter::CsvWriter(std::string path) : impl_(new Impl) {
  impl_->out.open(path, std::ios::binary);
  if (!impl_->out) {
    delete impl_;
    throw std::runtime_error("cannot open for writing: " + path);
  }
}

CsvWriter::~CsvWriter() { delete impl_; }

namespace {

bool needs_quoting(const std::string& cell) {
  return cell.find_first_of(",\"\n\r") != std::string::npos;
}

std::string quote(const std::string& cell) {
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::string CsvWriter::format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void CsvWriter::write_row(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) impl_->out << ',';
    impl_->out << (needs_quoting(cells[i]) ? quote(cells[i]) : cells[i]);
  }
  impl_->out << '\n';
}

void CsvWriter::write_row_numeric(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_double(v));
  write_row(cells);
}

namespace {

std::vector<std::string> parse_line(const std::string& line, std::istream& in) {
  std::vector<std::string> cells;
  std::string cell;
  bool in_quotes = false;
  std::string buf = line;
  std::size_t i = 0;
  for (;;) {
    if (i >= buf.size()) {
      if (in_quotes) {
        // Quoted newline: pull the next physical line.
        std::string more;
        if (!std::getline(in, more)) throw FormatError("csv: unterminated quoted field");
        buf += '\n';
        buf += more;
        continue;
      }
      break;
    }
    const char c = buf[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < buf.size() && buf[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        cell += c;
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      cells.push_back(cell);
      cell.clear();
    } else if (c == '\r') {
      // tolerate CRLF input
    } else {
      cell += c;
    }
    ++i;
  }
  cells.push_back(cell);
  return cells;
}

}  // namespace

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() && in.peek() == EOF) break;
    auto cells = parse_line(line, in);
    if (first) {
      table.header = std::move(cells);
      first = false;
    } else {
      table.rows.push_back(std::move(cells));
    }
  }
  return table;
}

int CsvTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

Eigen::MatrixXd CsvTable::numeric_block(const std::vector<int>& columns) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const int col = columns[c];
      if (col < 0 || col >= static_cast<int>(rows[r].size())) {
        throw FormatError("csv: missing column in row " + std::to_string(r));
      }
      try {
        out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = std::stod(rows[r][static_cast<std::size_t>(col)]);
      } catch (const std::exception&) {
        throw FormatError("csv: non-numeric cell in row " + std::to_string(r));
      }
    }
  }
  return out;
}

void write_csv_matrix(const std::string& path, const std::vector<std::string>& header,
                      const Eigen::MatrixXd& values) {
  CsvWriter w(path);
  w.write_row(header);
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(values.cols()));
    for (Eigen::Index j = 0; j < values.cols(); ++j) row[static_cast<std::size_t>(j)] = values(i, j);
    w.write_row_numeric(row);
  }
}

}  // namespace rdabc
