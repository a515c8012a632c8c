#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace cmaccm {

// Shortest form with 9 significant digits, '.' decimal, locale-independent.
std::string format_sig9(double v);

// One emitted table; every cell is numeric (flags are 0/1).
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct RunMetadata {
  std::string command;
  std::string mode;
  std::uint64_t seed = 0;
  int n_samples = 0;
  std::string generator;  // empty when no sampling happened
  std::string version;
  double power_rel_tol = 0.0;
  double power_abs_tol = 0.0;
  // free-form extras (e.g. async method tag, discrepancy flags)
  std::vector<std::pair<std::string, std::string>> extra;
};

std::string table_to_csv(const Table& table);
std::string table_to_json(const Table& table, const RunMetadata& meta);

}  // namespace cmaccm
