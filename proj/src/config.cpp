#include "tailcq/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "tailcq/contour.hpp"
#include "tailcq/rk.hpp"

namespace tailcq {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config: '" + key + "' expects a number, got '" + v + "'");
  }
  if (pos != v.size() || !std::isfinite(x)) throw ConfigError("config: '" + key + "' expects a number, got '" + v + "'");
  return x;
}

long long parse_int(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  long long x = 0;
  try {
    x = std::stoll(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config: '" + key + "' expects an integer, got '" + v + "'");
  }
  if (pos != v.size()) throw ConfigError("config: '" + key + "' expects an integer, got '" + v + "'");
  return x;
}

using Table = std::vector<std::pair<std::string, std::string>>;

const Table& common_keys() {
  static const Table t = {
      {"tableau", "radau_iia_3"}, {"theta_mode", "sharp"}, {"theta", "0.75"}, {"eps_eval", "1e-15"},
      {"output", "-"},            {"self_check", "false"}, {"tol", "0"},      {"seed", "0"},
  };
  return t;
}

Table specific_keys(const std::string& sub) {
  if (sub == "gamma-table") return {{"xi", "1,0.5"}, {"methods", "backward_euler,radau_iia_2,radau_iia_3"}};
  if (sub == "weights-error")
    return {{"kernel", "k0"},  {"alpha_damp", "0"}, {"d", "0.1"},       {"h", "0.1"},      {"L", "15"},
            {"B", "5"},        {"alpha", "0.9"},    {"gamma", "0.8"},   {"b_strip", "0.6"}, {"n0", "-1"},
            {"ell_min", "2"},  {"ell_max", "0"},    {"samples", "64"},  {"fft_cap", "40000"},
            {"oversample", "8"}, {"ref_L", "70"}};
  if (sub == "conv-scalar")
    return {{"kernel", "k0"}, {"alpha_damp", "0"}, {"d", "0.1"},     {"h", "0.1"},       {"N", "400"},
            {"L", "15"},      {"B", "5"},          {"alpha", "0.9"}, {"gamma", "0.8"},   {"b_strip", "0.6"},
            {"n0", "-1"},     {"oversample", "8"}, {"strategy", "corollary"}};
  if (sub == "bem-disk")
    return {{"M", "100"},        {"N", "400"},        {"T", "40"},       {"alpha_damp", "0"},
            {"d1", "1.4142135623730951"}, {"L", "26"}, {"B", "5"},      {"alpha", "0.98"},
            {"gamma", "0.6"},    {"b_strip", "0.33"}, {"oversample", "4"}, {"obs_x", "0"},
            {"obs_y", "1"},      {"sweep_L", ""},     {"sweep_gamma", ""}};
  throw ConfigError("unknown subcommand '" + sub + "'");
}

}  // namespace

Config Config::defaults_for(const std::string& subcommand) {
  Config c;
  c.sub_ = subcommand;
  for (const auto& [k, v] : specific_keys(subcommand)) c.values_[k] = {v, "default"};
  for (const auto& [k, v] : common_keys()) c.values_[k] = {v, "default"};
  return c;
}

void Config::set(const std::string& key, const std::string& value, const std::string& origin) {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("config: unknown key '" + key + "' for " + sub_);
  it->second = {value, origin};
}

void Config::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("config: expected key=value, got '" + assignment + "'");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)), "cli");
}

void Config::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::string line;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: " + path + ":" + std::to_string(no) + ": expected key=value");
    set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)), path);
  }
}

std::string Config::str(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("config: unknown key '" + key + "'");
  return it->second.value;
}

double Config::real(const std::string& key) const { return parse_real(key, str(key)); }
long long Config::integer(const std::string& key) const { return parse_int(key, str(key)); }

bool Config::flag(const std::string& key) const {
  const std::string v = str(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config: '" + key + "' expects true/false, got '" + v + "'");
}

std::vector<double> Config::reals(const std::string& key) const {
  std::vector<double> out;
  for (const auto& s : split_list(str(key))) out.push_back(parse_real(key, s));
  return out;
}

std::vector<long long> Config::integers(const std::string& key) const {
  std::vector<long long> out;
  for (const auto& s : split_list(str(key))) out.push_back(parse_int(key, s));
  return out;
}

void Config::echo(std::ostream& os) const {
  os << "# tailcq " << sub_ << "\n";
  for (const auto& [k, e] : values_) os << "# " << k << " = " << e.value << "\n";
}

void validate(const Config& c) {
  auto positive = [&](const char* k) {
    if (!(c.real(k) > 0.0)) throw ConfigError(std::string("config: '") + k + "' must be positive");
  };
  auto open_unit = [&](const char* k) {
    const double v = c.real(k);
    if (!(v > 0.0 && v < 1.0)) throw ConfigError(std::string("config: '") + k + "' must lie in (0,1)");
  };
  const std::string& sub = c.subcommand();
  (void)parse_theta_mode(c.str("theta_mode"));
  c.flag("self_check");
  if (c.real("tol") < 0.0) throw ConfigError("config: 'tol' must be nonnegative");
  if (sub == "gamma-table") {
    for (double x : c.reals("xi"))
      if (!(x > 0.0)) throw ConfigError("config: 'xi' entries must be positive");
    for (const auto& m : split_list(c.str("methods"))) (void)make_tableau(m);
    return;
  }
  (void)make_tableau(c.str("tableau"));
  for (const char* k : {"L", "B"}) positive(k);
  if (c.integer("L") < 1) throw ConfigError("config: 'L' must be at least 1");
  const double B = c.real("B");
  if (B < 2.0 || B != std::floor(B)) throw ConfigError("config: 'B' must be an integer >= 2");
  open_unit("gamma");
  open_unit("theta");
  positive("b_strip");
  const double alpha = c.real("alpha");
  if (!(alpha > 0.0 && alpha < kPi / 2)) throw ConfigError("config: 'alpha' must lie in (0, pi/2)");
  if (!(alpha - c.real("b_strip") > 0.0 && alpha + c.real("b_strip") < kPi / 2))
    throw ConfigError("config: need 0 < alpha - b_strip and alpha + b_strip < pi/2");
  if (c.real("alpha_damp") < 0.0) throw ConfigError("config: 'alpha_damp' must be nonnegative");
  if (c.integer("oversample") < 2) throw ConfigError("config: 'oversample' must be >= 2");
  if (sub == "weights-error" || sub == "conv-scalar") {
    positive("d");
    positive("h");
    const std::string k = c.str("kernel");
    if (k != "k0" && k != "wave2d" && k != "wave3d") throw ConfigError("config: 'kernel' must be k0, wave2d or wave3d");
  }
  if (sub == "weights-error") {
    if (c.integer("ell_min") < 2) throw ConfigError("config: 'ell_min' must be >= 2");
    if (c.integer("ell_max") != 0 && c.integer("ell_max") < c.integer("ell_min"))
      throw ConfigError("config: 'ell_max' must be 0 (auto) or >= ell_min");
    if (c.integer("samples") < 2) throw ConfigError("config: 'samples' must be >= 2");
    if (c.integer("ref_L") <= c.integer("L")) throw ConfigError("config: 'ref_L' must exceed L");
  }
  if (sub == "conv-scalar") {
    if (c.integer("N") < 1) throw ConfigError("config: 'N' must be positive");
    const std::string s = c.str("strategy");
    if (s != "corollary" && s != "heuristic") throw ConfigError("config: 'strategy' must be corollary or heuristic");
  }
  if (sub == "bem-disk") {
    if (c.integer("M") < 2) throw ConfigError("config: 'M' must be >= 2");
    if (c.integer("N") < 1) throw ConfigError("config: 'N' must be positive");
    positive("T");
    positive("d1");
    for (long long L : c.integers("sweep_L"))
      if (L < 1) throw ConfigError("config: 'sweep_L' entries must be positive");
    for (double g : c.reals("sweep_gamma"))
      if (!(g > 0.0 && g < 1.0)) throw ConfigError("config: 'sweep_gamma' entries must lie in (0,1)");
  }
}

}  // namespace tailcq
