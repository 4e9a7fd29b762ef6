#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "wpi/config.hpp"

namespace wpi {

// Column table written as CSV (17 significant digits) or as an aligned text table.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;  // NaN cells print empty
  void add(std::vector<double> row) { rows.push_back(std::move(row)); }
};

void write_table(std::ostream& os, const Table& t, const std::string& format);
// writes <out>/<stem>.csv or <out>/<stem>.txt; returns the path
std::string emit(const RunConfig& rc, const std::string& stem, const Table& t);

// Each returns the process exit status and logs a summary to `log`.
int cmd_rate(const RunConfig& rc, std::ostream& log);
int cmd_chain(const RunConfig& rc, std::ostream& log);
int cmd_imh(const RunConfig& rc, std::ostream& log);
int cmd_pm(const RunConfig& rc, std::ostream& log);
int cmd_verify(const RunConfig& rc, std::ostream& log);

// writes <out>/<command>_config.json, then dispatches
int run_command(const RunConfig& rc, std::ostream& log);

}  // namespace wpi
