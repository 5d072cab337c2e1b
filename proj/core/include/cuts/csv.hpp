#ifndef CUTS_CSV_HPP_
#define CUTS_CSV_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace cuts::csv {

// Fixed-precision formatting so tables are byte-stable across runs.
std::string fmt(double x);

void write_row(std::ostream& out, const std::vector<std::string>& cells);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Column index by name; throws InvalidInput when absent.
  std::size_t column(const std::string& name) const;
  double number(std::size_t row, const std::string& name) const;
};

Table read(std::istream& in);
Table read_file(const std::string& path);

}  // namespace cuts::csv

#endif  // CUTS_CSV_HPP_
