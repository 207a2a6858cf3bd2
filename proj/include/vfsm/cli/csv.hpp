#ifndef VFSM_CLI_CSV_HPP
#define VFSM_CLI_CSV_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "vfsm/gp.hpp"

namespace vfsm::cli {

/// Reads "x1,...,xd,y" CSV with a header row. Blank lines are skipped.
/// Throws ParseError with the 1-based line and column of the offending cell.
Dataset read_dataset(std::istream& in, const std::string& source = "<input>");
Dataset read_dataset_file(const std::string& path);

/// Reads "x1,...,xd" CSV (a trailing y column is accepted and ignored).
Matrix read_points(std::istream& in, const std::string& source = "<input>");
Matrix read_points_file(const std::string& path);

void write_dataset(std::ostream& out, const Dataset& data);
void write_table(std::ostream& out, const std::vector<std::string>& header, const Matrix& rows);

/// Shortest text that reads back to the same double (at most 17 significant digits).
std::string format_double(double v);

}  // namespace vfsm::cli

#endif  // VFSM_CLI_CSV_HPP
