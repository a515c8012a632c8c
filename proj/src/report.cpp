#include "cmaccm/report.hpp"

#include <charconv>
#include <stdexcept>

#include "json.hpp"

namespace cmaccm {

std::string format_sig9(double v) {
  char buf[64];
  auto [ptr, ec] =
      std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 9);
  if (ec != std::errc{})
    throw std::runtime_error("number formatting failed");
  return std::string(buf, ptr);
}

std::string table_to_csv(const Table& table) {
  std::string out;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out += ',';
    out += table.columns[i];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size())
      throw std::invalid_argument("table row width mismatch");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_sig9(row[i]);
    }
    out += '\n';
  }
  return out;
}

std::string table_to_json(const Table& table, const RunMetadata& meta) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json jm;
  jm["command"] = meta.command;
  jm["mode"] = meta.mode;
  jm["version"] = meta.version;
  if (!meta.generator.empty()) {
    jm["generator"] = meta.generator;
    jm["seed"] = meta.seed;
    jm["n_samples"] = meta.n_samples;
  }
  nlohmann::ordered_json jt;
  jt["power_rel"] = meta.power_rel_tol;
  jt["power_abs"] = meta.power_abs_tol;
  jm["tolerances"] = jt;
  for (const auto& [key, value] : meta.extra) jm[key] = value;
  j["metadata"] = jm;
  j["columns"] = table.columns;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size())
      throw std::invalid_argument("table row width mismatch");
    rows.push_back(row);
  }
  j["rows"] = rows;
  return j.dump(2) + "\n";
}

}  // namespace cmaccm
