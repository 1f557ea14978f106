#include "dpns/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

namespace dpns {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',' || c == ' ' || c == '[' || c == ']') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

int to_int(const std::string& key, const std::string& s) {
  int v = 0;
  const auto t = trim(s);
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size() || t.empty())
    throw ConfigError(fmt::format("{}: '{}' is not an integer", key, s));
  return v;
}

double to_double(const std::string& key, const std::string& s) {
  const auto t = trim(s);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (t.empty() || used != t.size() || !std::isfinite(v))
    throw ConfigError(fmt::format("{}: '{}' is not a finite number", key, s));
  return v;
}

bool to_bool(const std::string& key, const std::string& s) {
  const auto t = trim(s);
  if (t == "true" || t == "1" || t == "on" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "off" || t == "no") return false;
  throw ConfigError(fmt::format("{}: '{}' is not a boolean", key, s));
}

std::string unquote(std::string s) {
  s = trim(s);
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
    s = s.substr(1, s.size() - 2);
  return s;
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"run.experiment", [](RunConfig& c, auto&, auto& v) { c.experiment = unquote(v); }},
      {"run.h", [](RunConfig& c, auto& k, auto& v) {
         c.h.clear();
         for (auto& s : split_list(v)) c.h.push_back(to_int(k, s));
       }},
      {"run.r", [](RunConfig& c, auto& k, auto& v) { c.r = to_int(k, v); }},
      {"run.ratios", [](RunConfig& c, auto& k, auto& v) {
         c.ratios.clear();
         for (auto& s : split_list(v)) c.ratios.push_back(to_int(k, s));
       }},
      {"run.workers", [](RunConfig& c, auto& k, auto& v) { c.workers = to_int(k, v); }},
      {"run.out", [](RunConfig& c, auto&, auto& v) { c.out = unquote(v); }},
      {"run.final_time", [](RunConfig& c, auto& k, auto& v) { c.final_time = to_double(k, v); }},
      {"run.dt", [](RunConfig& c, auto& k, auto& v) { c.dt = to_double(k, v); }},
      {"run.ds", [](RunConfig& c, auto& k, auto& v) { c.ds = to_double(k, v); }},
      {"run.repeats", [](RunConfig& c, auto& k, auto& v) { c.repeats = to_int(k, v); }},
      {"run.vtk_every", [](RunConfig& c, auto& k, auto& v) { c.vtk_every = to_int(k, v); }},
      {"physics.gamma", [](RunConfig& c, auto& k, auto& v) { c.gamma = to_double(k, v); }},
      {"physics.gammas", [](RunConfig& c, auto& k, auto& v) {
         c.gammas.clear();
         for (auto& s : split_list(v)) c.gammas.push_back(to_double(k, s));
       }},
      {"physics.theta", [](RunConfig& c, auto& k, auto& v) { c.theta = to_double(k, v); }},
      {"solver.newton_tol", [](RunConfig& c, auto& k, auto& v) { c.newton_tol = to_double(k, v); }},
      {"solver.newton_max_iter",
       [](RunConfig& c, auto& k, auto& v) { c.newton_max_iter = to_int(k, v); }},
      {"solver.pin_pressure", [](RunConfig& c, auto& k, auto& v) { c.pin_pressure = to_bool(k, v); }},
      {"solver.monitor_energy",
       [](RunConfig& c, auto& k, auto& v) { c.monitor_energy = to_bool(k, v); }},
      {"solver.log_every", [](RunConfig& c, auto& k, auto& v) { c.log_every = to_int(k, v); }},
  };
  return table;
}

std::string fmt_double(double v) { return fmt::format("{}", v); }

}  // namespace

std::vector<int> parse_int_list(std::string_view text) {
  std::vector<int> out;
  for (auto& s : split_list(text)) out.push_back(to_int("list", s));
  return out;
}

std::vector<double> parse_double_list(std::string_view text) {
  std::vector<double> out;
  for (auto& s : split_list(text)) out.push_back(to_double("list", s));
  return out;
}

RunConfig parse_config(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_config(in);
  } catch (const CLI::Error& e) {
    throw ConfigError(fmt::format("malformed configuration: {}", e.what()));
  }
  RunConfig c;
  for (const auto& item : items) {
    if (item.name == "--" || item.name == "++") continue;  // section open/close markers
    if (item.parents.size() != 1)
      throw ConfigError(fmt::format("key '{}' must live in one of [run], [physics], [solver]",
                                    item.fullname()));
    const std::string key = item.parents.front() + "." + item.name;
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError(fmt::format("unknown configuration key '{}'", key));
    std::string value;
    for (std::size_t i = 0; i < item.inputs.size(); ++i) {
      if (i) value += ',';
      value += item.inputs[i];
    }
    it->second(c, key, value);
  }
  validate(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError(fmt::format("cannot open configuration file '{}'", path));
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& c) {
  std::string s;
  s += "[run]\n";
  s += fmt::format("experiment = \"{}\"\n", c.experiment);
  if (!c.h.empty()) s += fmt::format("h = {}\n", fmt::join(c.h, ","));
  s += fmt::format("r = {}\n", c.r);
  if (!c.ratios.empty()) s += fmt::format("ratios = {}\n", fmt::join(c.ratios, ","));
  s += fmt::format("workers = {}\n", c.workers);
  s += fmt::format("out = \"{}\"\n", c.out);
  s += fmt::format("final_time = {}\n", fmt_double(c.final_time));
  s += fmt::format("dt = {}\n", fmt_double(c.dt));
  s += fmt::format("ds = {}\n", fmt_double(c.ds));
  s += fmt::format("repeats = {}\n", c.repeats);
  s += fmt::format("vtk_every = {}\n", c.vtk_every);
  s += "\n[physics]\n";
  s += fmt::format("gamma = {}\n", fmt_double(c.gamma));
  if (!c.gammas.empty()) {
    std::vector<std::string> g;
    for (double v : c.gammas) g.push_back(fmt_double(v));
    s += fmt::format("gammas = {}\n", fmt::join(g, ","));
  }
  s += fmt::format("theta = {}\n", fmt_double(c.theta));
  s += "\n[solver]\n";
  s += fmt::format("newton_tol = {}\n", fmt_double(c.newton_tol));
  s += fmt::format("newton_max_iter = {}\n", c.newton_max_iter);
  s += fmt::format("pin_pressure = {}\n", c.pin_pressure);
  s += fmt::format("monitor_energy = {}\n", c.monitor_energy);
  s += fmt::format("log_every = {}\n", c.log_every);
  return s;
}

void validate(const RunConfig& c) {
  static const std::vector<std::string> experiments = {"converge", "ratio-sweep", "penalty-sweep",
                                                       "compare-newton", "wellbore"};
  if (std::find(experiments.begin(), experiments.end(), c.experiment) == experiments.end())
    throw ConfigError(fmt::format("unknown experiment '{}'", c.experiment));
  for (int n : c.h)
    if (n < 1) throw ConfigError(fmt::format("h = 1/{} needs a positive subdivision count", n));
  if (c.r < 1) throw ConfigError(fmt::format("r must be a positive integer, got {}", c.r));
  for (int r : c.ratios)
    if (r < 1) throw ConfigError(fmt::format("ratio {} must be a positive integer", r));
  if (c.workers < 1 || c.workers > 2)
    throw ConfigError(fmt::format("workers must be 1 or 2, got {}", c.workers));
  if (c.final_time < 0.0) throw ConfigError("final_time must be non-negative");
  if (c.dt < 0.0) throw ConfigError("dt must be non-negative");
  if (c.ds < 0.0) throw ConfigError("ds must be non-negative");
  if (c.repeats < 1) throw ConfigError("repeats must be at least 1");
  if (c.vtk_every < 1) throw ConfigError("vtk_every must be at least 1");
  if (c.gamma < 0.0) throw ConfigError("gamma must be non-negative");
  for (double g : c.gammas)
    if (g < 0.0) throw ConfigError(fmt::format("penalty {} must be non-negative", g));
  if (c.theta < 0.0) throw ConfigError("theta must be non-negative");
  if (!(c.newton_tol > 0.0)) throw ConfigError("newton_tol must be positive");
  if (c.newton_max_iter < 1) throw ConfigError("newton_max_iter must be at least 1");
  if (c.log_every < 0) throw ConfigError("log_every must be non-negative");
}

}  // namespace dpns
