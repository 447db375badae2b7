#pragma once

#include <string>
#include <vector>

#include "kimpute/types.hpp"

namespace kimpute {

// Full-precision scientific notation, locale independent.
std::string format_double(double v);

void write_matrix_csv(const std::string& path, const Matrix& m);
Matrix read_matrix_csv(const std::string& path);

void write_lines(const std::string& path,
                 const std::vector<std::string>& lines);

}  // namespace kimpute
