#include "cmaccm/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace cmaccm {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

using Section = std::map<std::string, Entry>;

double parse_double(const std::string& key, const Entry& e) {
  std::string_view v = e.value;
  double out = 0.0;
  const auto* begin = v.data();
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc{} || ptr != end || !std::isfinite(out))
    throw ConfigError(e.line, key, "line " + std::to_string(e.line) +
                                       ": value of '" + key +
                                       "' is not a finite number: '" +
                                       e.value + "'");
  return out;
}

std::uint64_t parse_u64(const std::string& key, const Entry& e) {
  std::string_view v = e.value;
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw ConfigError(e.line, key, "line " + std::to_string(e.line) +
                                       ": value of '" + key +
                                       "' is not an unsigned integer: '" +
                                       e.value + "'");
  return out;
}

int parse_int(const std::string& key, const Entry& e) {
  std::string_view v = e.value;
  int out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw ConfigError(e.line, key, "line " + std::to_string(e.line) +
                                       ": value of '" + key +
                                       "' is not an integer: '" + e.value +
                                       "'");
  return out;
}

std::vector<double> parse_list(const std::string& key, const Entry& e) {
  std::string spaced = e.value;
  std::replace(spaced.begin(), spaced.end(), ',', ' ');
  std::istringstream in(spaced);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    Entry item{tok, e.line, false};
    out.push_back(parse_double(key, item));
  }
  if (out.empty())
    throw ConfigError(e.line, key, "line " + std::to_string(e.line) +
                                       ": list '" + key + "' is empty");
  return out;
}

class Sections {
 public:
  explicit Sections(std::map<std::string, Section> data)
      : data_(std::move(data)) {}

  bool has(const std::string& section) const { return data_.count(section); }

  Entry* find(const std::string& section, const std::string& key) {
    auto sit = data_.find(section);
    if (sit == data_.end()) return nullptr;
    auto kit = sit->second.find(key);
    if (kit == sit->second.end()) return nullptr;
    kit->second.used = true;
    return &kit->second;
  }

  Entry& require(const std::string& section, const std::string& key) {
    Entry* e = find(section, key);
    if (!e)
      throw ConfigError(0, key, "missing required key '" + key +
                                    "' in section [" + section + "]");
    return *e;
  }

  void reject_section(const std::string& section, const std::string& why) {
    auto sit = data_.find(section);
    if (sit == data_.end()) return;
    const int line = sit->second.empty() ? 0 : sit->second.begin()->second.line;
    throw ConfigError(line, section, "section [" + section + "] " + why);
  }

  void reject_unused() const {
    for (const auto& [section, entries] : data_)
      for (const auto& [key, e] : entries)
        if (!e.used)
          throw ConfigError(e.line, key,
                            "line " + std::to_string(e.line) +
                                ": unknown key '" + key + "' in section [" +
                                section + "]");
  }

 private:
  std::map<std::string, Section> data_;
};

Sections tokenize(std::string_view text) {
  static const std::map<std::string, std::vector<std::string>> kKnown = {
      {"scenario", {"mode"}},
      {"parallel", {"nu", "mu", "p1_db", "p2_db"}},
      {"fading",
       {"sigma1", "sigma2", "sigma3", "nu", "mu", "p1_db", "p2_db", "samples",
        "seed"}},
      {"sweep", {"gamma1"}},
      {"output", {"path", "format"}},
  };

  std::map<std::string, Section> data;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(
        pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    const std::size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(line_no, "",
                          "line " + std::to_string(line_no) +
                              ": unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (!kKnown.count(section))
        throw ConfigError(line_no, section,
                          "line " + std::to_string(line_no) +
                              ": unknown section [" + section + "]");
      data[section];  // remember even if empty
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(line_no, "",
                        "line " + std::to_string(line_no) +
                            ": expected 'key = value'");
    if (section.empty())
      throw ConfigError(line_no, "",
                        "line " + std::to_string(line_no) +
                            ": key outside any [section]");
    const std::string key{trim(line.substr(0, eq))};
    const std::string value{trim(line.substr(eq + 1))};
    const auto& allowed = kKnown.at(section);
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError(line_no, key,
                        "line " + std::to_string(line_no) +
                            ": unknown key '" + key + "' in section [" +
                            section + "]");
    if (value.empty())
      throw ConfigError(line_no, key, "line " + std::to_string(line_no) +
                                          ": key '" + key + "' has no value");
    auto [it, fresh] = data[section].emplace(key, Entry{value, line_no, false});
    if (!fresh)
      throw ConfigError(line_no, key,
                        "line " + std::to_string(line_no) + ": duplicate key '" +
                            key + "' (first set on line " +
                            std::to_string(it->second.line) + ")");
  }
  return Sections(std::move(data));
}

}  // namespace

std::vector<double> default_gamma1_sweep() {
  return {0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0};
}

ScenarioConfig parse_scenario_text(std::string_view text) {
  Sections sections = tokenize(text);
  ScenarioConfig cfg;

  const Entry& mode = sections.require("scenario", "mode");
  if (mode.value == "parallel-gaussian") {
    cfg.mode = Mode::ParallelGaussian;
  } else if (mode.value == "fading") {
    cfg.mode = Mode::Fading;
  } else {
    throw ConfigError(mode.line, "mode",
                      "line " + std::to_string(mode.line) +
                          ": mode must be 'parallel-gaussian' or 'fading', "
                          "got '" +
                          mode.value + "'");
  }

  if (cfg.mode == Mode::ParallelGaussian) {
    sections.reject_section("fading",
                            "is not allowed in parallel-gaussian mode");
    const Entry& nu = sections.require("parallel", "nu");
    const Entry& mu = sections.require("parallel", "mu");
    cfg.nu = parse_list("nu", nu);
    cfg.mu = parse_list("mu", mu);
    if (cfg.nu.size() != cfg.mu.size())
      throw ConfigError(mu.line, "mu",
                        "nu has " + std::to_string(cfg.nu.size()) +
                            " entries but mu has " +
                            std::to_string(cfg.mu.size()));
    for (double v : cfg.nu)
      if (v <= 0.0)
        throw ConfigError(nu.line, "nu", "nu entries must be positive");
    for (double v : cfg.mu)
      if (v <= 0.0)
        throw ConfigError(mu.line, "mu", "mu entries must be positive");
    cfg.p1_db = parse_double("p1_db", sections.require("parallel", "p1_db"));
    cfg.p2_db = parse_double("p2_db", sections.require("parallel", "p2_db"));
  } else {
    sections.reject_section("parallel", "is not allowed in fading mode");
    RayleighSpec& ray = cfg.rayleigh;
    if (Entry* e = sections.find("fading", "sigma1"))
      ray.sigma1 = parse_double("sigma1", *e);
    if (Entry* e = sections.find("fading", "sigma2"))
      ray.sigma2 = parse_double("sigma2", *e);
    if (Entry* e = sections.find("fading", "sigma3"))
      ray.sigma3 = parse_double("sigma3", *e);
    ray.nu = parse_double("nu", sections.require("fading", "nu"));
    ray.mu = parse_double("mu", sections.require("fading", "mu"));
    cfg.p1_db = parse_double("p1_db", sections.require("fading", "p1_db"));
    cfg.p2_db = parse_double("p2_db", sections.require("fading", "p2_db"));
    if (Entry* e = sections.find("fading", "samples")) {
      cfg.n_samples = parse_int("samples", *e);
      if (cfg.n_samples < 1)
        throw ConfigError(e->line, "samples", "samples must be at least 1");
    }
    if (Entry* e = sections.find("fading", "seed"))
      cfg.seed = parse_u64("seed", *e);
    ray.n_samples = cfg.n_samples;
    ray.seed = cfg.seed;
    try {
      validate(ray);
    } catch (const std::invalid_argument& ex) {
      throw ConfigError(0, "fading", ex.what());
    }
  }

  if (Entry* e = sections.find("sweep", "gamma1")) {
    cfg.gamma1_list = parse_list("gamma1", *e);
    for (std::size_t i = 0; i < cfg.gamma1_list.size(); ++i) {
      if (cfg.gamma1_list[i] < 0.0)
        throw ConfigError(e->line, "gamma1",
                          "gamma1 entries must be nonnegative");
      if (i > 0 && cfg.gamma1_list[i] < cfg.gamma1_list[i - 1])
        throw ConfigError(e->line, "gamma1",
                          "gamma1 entries must be sorted ascending");
    }
  } else {
    cfg.gamma1_list = default_gamma1_sweep();
  }

  if (Entry* e = sections.find("output", "path")) cfg.out_path = e->value;
  if (Entry* e = sections.find("output", "format")) {
    if (e->value == "csv")
      cfg.format = OutputFormat::Csv;
    else if (e->value == "json")
      cfg.format = OutputFormat::Json;
    else if (e->value == "both")
      cfg.format = OutputFormat::Both;
    else
      throw ConfigError(e->line, "format",
                        "line " + std::to_string(e->line) +
                            ": format must be csv, json or both");
  }

  sections.reject_unused();
  return cfg;
}

ScenarioConfig parse_scenario_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ConfigError(0, "", "cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str());
}

}  // namespace cmaccm
