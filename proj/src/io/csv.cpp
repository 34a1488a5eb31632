#include "covsv/io/csv.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

#include "covsv/core/error.hpp"

namespace covsv::io {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void write_observables_csv(std::ostream& os, const verify::ExperimentReport& report) {
  os << "ensemble,replicate,observable,value\n";
  for (const auto& t : report.observables)
    for (std::size_t r = 0; r < t.rows.size(); ++r)
      for (std::size_t c = 0; c < t.columns.size(); ++c)
        os << t.ensemble << ',' << r << ",\"" << t.columns[c] << "\"," << format_double(t.rows[r][c]) << '\n';
}

void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? "," : "") << format_double(m(i, j));
    os << '\n';
  }
}

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      const auto b = cell.find_first_not_of(" \t"), e = cell.find_last_not_of(" \t");
      double v = 0.0;
      const char* first = b == std::string::npos ? cell.data() : cell.data() + b;
      const char* last = b == std::string::npos ? cell.data() : cell.data() + e + 1;
      const auto res = std::from_chars(first, last, v);
      if (res.ec != std::errc() || res.ptr != last)
        throw DataError(path.string() + ":" + std::to_string(lineno) + ": non-numeric cell '" + cell + "'");
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                      std::to_string(rows.front().size()) + " columns, got " + std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError(path.string() + ": no data rows");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

}  // namespace covsv::io
