#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "covsv/verify/report.hpp"

namespace covsv::io {

// Long format, columns: ensemble,replicate,observable,value
void write_observables_csv(std::ostream& os, const verify::ExperimentReport& report);

// Plain numeric matrix, one row per line, comma separated, 17 significant digits.
void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& m);

// Reads a numeric matrix; lines starting with '#' and blank lines are
// skipped. DataError on ragged rows or non-numeric cells (with line number).
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);

// Formats a double with 17 significant digits (round-trip safe).
std::string format_double(double v);

}  // namespace covsv::io
