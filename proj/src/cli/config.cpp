#include "qlab/cli/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace qlab::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_commas(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  double d = 0.0;
  const char* b = v.data();
  const char* e = b + v.size();
  auto [p, ec] = std::from_chars(b, e, d);
  if (ec != std::errc{} || p != e) throw ConfigError("key '" + key + "': '" + v + "' is not a number");
  return d;
}

}  // namespace

ScenarioConfig::ScenarioConfig()
    : entries_{
          {"scenario", "harmonic", "free_superposition | harmonic | gaussian_packet | plane_wave | custom_csv"},
          {"potential", "auto", "auto | zero | harmonic; auto picks harmonic for the harmonic scenario"},
          {"hbar", "1", "reduced Planck constant"},
          {"m", "1", "particle mass"},
          {"c", "1", "speed of light"},
          {"omega", "1", "oscillator angular frequency"},
          {"k", "1", "wavenumber of the plane-wave scenarios"},
          {"A", "1", "plane-wave amplitude"},
          {"sigma", "1", "Gaussian packet width (standard deviation of rho)"},
          {"k0", "0", "Gaussian packet wavenumber"},
          {"xc", "0", "Gaussian packet centre"},
          {"level", "0", "oscillator level for the harmonic scenario"},
          {"x0", "-10", "left end of the grid"},
          {"dx", "0.02", "grid spacing"},
          {"n", "1001", "number of grid points"},
          {"dt", "0.005", "time step"},
          {"nt", "100", "number of time steps"},
          {"stride", "1", "store every stride-th step"},
          {"seed", "12345", "ensemble sampling seed"},
          {"particles", "1000", "ensemble size"},
          {"substeps", "4", "RK4 steps per stored snapshot interval"},
          {"traj_out", "16", "number of trajectories written to CSV"},
          {"threads", "1", "worker threads for ensembles and per-slice eigensolves"},
          {"node_rel", "1e-8", "node mask threshold relative to max amplitude"},
          {"st_n", "256", "spacetime grid size per axis for the Minkowski residual"},
          {"q_csv", "", "Q profile CSV for the custom_csv scenario, relative to the config file"},
          {"f", "const", "flux function kind: zero | const | linear"},
          {"f_value", "1", "f(0)"},
          {"f_slope", "1", "df/dt for f = linear"},
          {"times", "11", "number of reconstruction times"},
          {"t_span", "1", "reconstruction time span"},
          {"eps", "1e-3", "reconstruction amplitude mask relative to max R"},
          {"tol_round_trip", "1e-4", "sup-norm tolerance of the amplitude round trip"},
          {"x_points", "-1,-0.5,0.5,1", "positions sampled by the olavo command"},
          {"states", "gaussian,boosted,chirped,ho_mix,sech", "states for the uncertainty command"},
      } {}

ScenarioConfig ScenarioConfig::parse(std::istream& in, const std::string& source) {
  ScenarioConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(source + ":" + std::to_string(lineno) + ": expected key = value");
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

ScenarioConfig ScenarioConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  ScenarioConfig cfg = parse(in, path.string());
  cfg.base_ = path.parent_path();
  return cfg;
}

void ScenarioConfig::set(const std::string& key, const std::string& value) {
  for (ConfigEntry& e : entries_)
    if (e.key == key) {
      e.value = value;
      return;
    }
  throw ConfigError("unknown config key '" + key + "'");
}

const ConfigEntry& ScenarioConfig::find(const std::string& key) const {
  for (const ConfigEntry& e : entries_)
    if (e.key == key) return e;
  throw ConfigError("unknown config key '" + key + "'");
}

const std::string& ScenarioConfig::str(const std::string& key) const { return find(key).value; }

double ScenarioConfig::num(const std::string& key) const { return parse_double(key, str(key)); }

std::int64_t ScenarioConfig::integer(const std::string& key) const {
  const std::string& v = str(key);
  std::int64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size())
    throw ConfigError("key '" + key + "': '" + v + "' is not an integer");
  return out;
}

std::size_t ScenarioConfig::count(const std::string& key) const {
  const std::int64_t v = integer(key);
  if (v < 0) throw ConfigError("key '" + key + "' must be non-negative");
  return static_cast<std::size_t>(v);
}

std::vector<std::string> ScenarioConfig::list(const std::string& key) const { return split_commas(str(key)); }

std::vector<double> ScenarioConfig::num_list(const std::string& key) const {
  std::vector<double> out;
  for (const std::string& s : list(key)) out.push_back(parse_double(key, s));
  return out;
}

}  // namespace qlab::cli
