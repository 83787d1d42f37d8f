#include "leoipac/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "leoipac/errors.hpp"

namespace leoipac {

std::string to_string(Modulation m) {
  switch (m) {
    case Modulation::Bpsk: return "bpsk";
    case Modulation::Qpsk: return "qpsk";
    case Modulation::Psk8: return "8psk";
    case Modulation::Psk16: return "16psk";
  }
  return "unknown";
}

Modulation parse_modulation(const std::string& text) {
  std::string t = text;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "bpsk") return Modulation::Bpsk;
  if (t == "qpsk" || t == "4psk") return Modulation::Qpsk;
  if (t == "8psk") return Modulation::Psk8;
  if (t == "16psk" || t == "16-psk") return Modulation::Psk16;
  throw ConfigError("unknown modulation '" + text + "'");
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto first = item.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    const auto last = item.find_last_not_of(" \t");
    const std::string tok = item.substr(first, last - first + 1);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      throw ConfigError("not a number: '" + tok + "'");
    }
    if (used != tok.size()) throw ConfigError("not a number: '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

namespace {

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

std::string format_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += format_double(v[i]);
  }
  return s;
}

double to_double(const std::string& key, const std::string& text) {
  const auto v = parse_number_list(text);
  if (v.size() != 1) throw ConfigError(key + ": expected a single number");
  return v[0];
}

int to_int(const std::string& key, const std::string& text) {
  const double v = to_double(key, text);
  if (v != std::floor(v) || std::abs(v) > 2e9) throw ConfigError(key + ": expected an integer");
  return static_cast<int>(v);
}

bool to_bool(const std::string& key, const std::string& text) {
  std::string t = text;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError(key + ": expected a boolean");
}

struct Field {
  std::function<void(ScenarioConfig&, const std::string&)> set;
  std::function<std::string(const ScenarioConfig&)> get;
};

using FieldTable = std::map<std::string, std::map<std::string, Field>>;

#define DBL(sec, key, member)                                                        \
  t[sec][key] = Field{[](ScenarioConfig& c, const std::string& v) { c.member = to_double(key, v); }, \
                      [](const ScenarioConfig& c) { return format_double(c.member); }}
#define INT(sec, key, member)                                                        \
  t[sec][key] = Field{[](ScenarioConfig& c, const std::string& v) { c.member = to_int(key, v); },    \
                      [](const ScenarioConfig& c) { return std::to_string(c.member); }}
#define BOOL(sec, key, member)                                                       \
  t[sec][key] = Field{[](ScenarioConfig& c, const std::string& v) { c.member = to_bool(key, v); },   \
                      [](const ScenarioConfig& c) { return std::string(c.member ? "true" : "false"); }}
#define DBM(sec, key, member)                                                        \
  t[sec][key] = Field{[](ScenarioConfig& c, const std::string& v) {                  \
                        c.member = dbm_to_watts(to_double(key, v));                  \
                      },                                                             \
                      [](const ScenarioConfig& c) { return format_double(watts_to_dbm(c.member)); }}
#define LIST(sec, key, member)                                                       \
  t[sec][key] = Field{[](ScenarioConfig& c, const std::string& v) { c.member = parse_number_list(v); }, \
                      [](const ScenarioConfig& c) { return format_list(c.member); }}

const FieldTable& field_table() {
  static const FieldTable table = [] {
    FieldTable t;
    INT("scenario", "num_satellites", scenario.num_satellites);
    INT("scenario", "num_users", scenario.num_users);
    DBL("scenario", "carrier_frequency_hz", scenario.carrier_frequency);
    DBL("scenario", "subcarrier_spacing_hz", scenario.subcarrier_spacing);
    INT("scenario", "num_subcarriers", scenario.num_subcarriers);
    INT("scenario", "array_horizontal", scenario.array_horizontal);
    INT("scenario", "array_vertical", scenario.array_vertical);
    DBL("scenario", "antenna_spacing_wavelengths", scenario.antenna_spacing);
    DBM("scenario", "sat_power_dbm", scenario.sat_power);
    DBM("scenario", "ut_power_dbm", scenario.ut_power);
    DBM("scenario", "noise_power_dbm", scenario.noise_power);
    DBL("scenario", "orbit_altitude_m", scenario.orbit_altitude);
    DBL("scenario", "earth_radius_m", scenario.earth_radius);
    t["scenario"]["modulation"] =
        Field{[](ScenarioConfig& c, const std::string& v) { c.scenario.modulation = parse_modulation(v); },
              [](const ScenarioConfig& c) { return to_string(c.scenario.modulation); }};
    DBL("scenario", "update_interval_s", scenario.update_interval);
    t["scenario"]["accel_noise_cov"] = Field{
        [](ScenarioConfig& c, const std::string& v) {
          const auto vals = parse_number_list(v);
          Mat3 m = Mat3::Zero();
          if (vals.size() == 1) {
            m = vals[0] * Mat3::Identity();
          } else if (vals.size() == 3) {
            m.diagonal() << vals[0], vals[1], vals[2];
          } else if (vals.size() == 9) {
            for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = vals[static_cast<std::size_t>(i)];
          } else {
            throw ConfigError("accel_noise_cov: expected 1, 3 or 9 values");
          }
          c.scenario.accel_noise_cov = m;
        },
        [](const ScenarioConfig& c) {
          std::vector<double> v;
          for (int i = 0; i < 9; ++i) v.push_back(c.scenario.accel_noise_cov(i / 3, i % 3));
          return format_list(v);
        }};
    t["scenario"]["master_seed"] = Field{
        [](ScenarioConfig& c, const std::string& v) {
          try {
            c.scenario.master_seed = std::stoull(v);
          } catch (const std::exception&) {
            throw ConfigError("master_seed: expected an unsigned integer");
          }
        },
        [](const ScenarioConfig& c) { return std::to_string(c.scenario.master_seed); }};
    DBL("scenario", "ref_latitude_deg", scenario.ref_latitude_deg);
    DBL("scenario", "ref_longitude_deg", scenario.ref_longitude_deg);
    DBL("scenario", "epoch_s", scenario.epoch);
    LIST("scenario", "sat_inclination_deg", scenario.sat_inclination_deg);
    LIST("scenario", "sat_raan_deg", scenario.sat_raan_deg);
    LIST("scenario", "sat_phase_deg", scenario.sat_phase_deg);
    DBL("scenario", "ut_speed_mps", scenario.ut_speed);
    DBL("scenario", "ut_heading_deg", scenario.ut_heading_deg);
    DBL("scenario", "ut_accel_amplitude_mps2", scenario.ut_accel_amplitude);
    DBL("scenario", "ut_accel_period_s", scenario.ut_accel_period);
    DBL("scenario", "clock_bias_std_s", scenario.clock_bias_std);
    DBL("scenario", "user_separation_m", scenario.user_separation);

    INT("channel", "num_paths", channel.num_paths);
    DBL("channel", "rician_factor", channel.rician_factor);
    DBL("channel", "decay_exponent", channel.decay_exponent);
    DBL("channel", "atmospheric_loss_db", channel.atmospheric_loss_db);
    DBL("channel", "shadow_v_sigma", channel.shadow_v_sigma);
    DBL("channel", "shadow_v_theta", channel.shadow_v_theta);

    INT("positioning", "pilot_symbols", positioning.pilot_symbols);
    INT("positioning", "fim_subcarriers", positioning.fim_subcarriers);
    DBL("positioning", "ukf_alpha", positioning.ukf_alpha);
    DBL("positioning", "ukf_beta", positioning.ukf_beta);
    DBL("positioning", "ukf_kappa", positioning.ukf_kappa);
    DBL("positioning", "epsilon_scale", positioning.epsilon_scale);
    DBL("positioning", "divergence_ceiling_m", positioning.divergence_ceiling);
    BOOL("positioning", "cache_fim", positioning.cache_fim);
    DBL("positioning", "nuisance_ridge", positioning.nuisance_ridge);
    DBL("positioning", "init_position_std_m", positioning.init_position_std);
    DBL("positioning", "init_position_var", positioning.init_position_var);
    DBL("positioning", "init_velocity_var", positioning.init_velocity_var);
    DBL("positioning", "init_bias_var", positioning.init_bias_var);
    INT("positioning", "steps", positioning.steps);

    INT("jude", "num_pilots", jude.num_pilots);
    INT("jude", "slots", jude.slots);
    INT("jude", "em_iterations", jude.em_iterations);
    DBL("jude", "em_tolerance", jude.em_tolerance);
    t["jude"]["interferer_priors"] = Field{
        [](ScenarioConfig& c, const std::string& v) {
          if (v == "frozen") c.jude.interferer_priors = InterfererPriorMode::Frozen;
          else if (v == "running") c.jude.interferer_priors = InterfererPriorMode::Running;
          else throw ConfigError("interferer_priors: expected frozen|running");
        },
        [](const ScenarioConfig& c) {
          return std::string(c.jude.interferer_priors == InterfererPriorMode::Frozen ? "frozen" : "running");
        }};
    t["jude"]["tap_prior"] = Field{
        [](ScenarioConfig& c, const std::string& v) {
          if (v == "stationary") c.jude.tap_prior = TapPriorMode::Stationary;
          else if (v == "process_noise") c.jude.tap_prior = TapPriorMode::ProcessNoise;
          else throw ConfigError("tap_prior: expected stationary|process_noise");
        },
        [](const ScenarioConfig& c) {
          return std::string(c.jude.tap_prior == TapPriorMode::Stationary ? "stationary" : "process_noise");
        }};
    INT("jude", "trials", jude.trials);

    INT("harness", "position_steps", harness.position_steps);
    BOOL("harness", "truth_positions", harness.truth_positions);
    return t;
  }();
  return table;
}

#undef DBL
#undef INT
#undef BOOL
#undef DBM
#undef LIST

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

}  // namespace

void ScenarioConfig::validate() const {
  const auto& s = scenario;
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(s.num_satellites >= 1, "num_satellites must be >= 1");
  require(s.num_users >= 1, "num_users must be >= 1");
  require(is_power_of_two(s.num_subcarriers), "num_subcarriers must be a power of two");
  require(s.subcarrier_spacing > 0, "subcarrier_spacing must be > 0");
  require(s.carrier_frequency > 0, "carrier_frequency must be > 0");
  require(s.array_horizontal >= 1 && s.array_vertical >= 1, "array dimensions must be >= 1");
  require(std::isfinite(s.sat_power) && std::isfinite(s.ut_power) && std::isfinite(s.noise_power),
          "powers must be finite");
  require(s.noise_power > 0, "noise_power must be > 0");
  require(s.update_interval > 0, "update_interval must be > 0");
  require(s.orbit_altitude > 0 && s.earth_radius > 0, "orbit geometry must be positive");
  const std::size_t S = static_cast<std::size_t>(s.num_satellites);
  for (const auto* v : {&s.sat_inclination_deg, &s.sat_raan_deg, &s.sat_phase_deg}) {
    require(v->empty() || v->size() == S, "per-satellite element lists must have num_satellites entries");
  }
  Eigen::SelfAdjointEigenSolver<Mat3> es(s.accel_noise_cov);
  require(es.eigenvalues().minCoeff() >= -1e-15, "accel_noise_cov must be PSD");

  require(channel.num_paths >= 1, "num_paths must be >= 1");
  require(channel.rician_factor > 0, "rician_factor must be > 0");
  require(channel.num_paths <= s.num_subcarriers, "num_paths must not exceed num_subcarriers");

  require(positioning.pilot_symbols >= 1, "pilot_symbols must be >= 1");
  require(fim_subcarriers() >= 1, "fim_subcarriers must be >= 1");
  require(positioning.ukf_alpha > 0, "ukf_alpha must be > 0");
  require(positioning.steps >= 1, "positioning steps must be >= 1");

  require(jude.num_pilots >= 1 && s.num_subcarriers % jude.num_pilots == 0,
          "num_pilots must divide num_subcarriers");
  require(jude.slots >= 1, "slots must be >= 1");
  require(jude.em_iterations >= 0, "em_iterations must be >= 0");
  require(jude.trials >= 1, "trials must be >= 1");
  require(harness.position_steps >= 1, "position_steps must be >= 1");
}

ScenarioConfig parse_config(const std::string& ini_text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream is(ini_text);
  try {
    pt::ini_parser::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(e.what());
  }
  ScenarioConfig config;
  const auto& table = field_table();
  for (const auto& [section, body] : tree) {
    const auto sec = table.find(section);
    if (sec == table.end()) throw ConfigError("unknown section [" + section + "]");
    if (!body.data().empty() && body.empty()) {
      throw ConfigError("key '" + section + "' outside of any section");
    }
    for (const auto& [key, value] : body) {
      const auto field = sec->second.find(key);
      if (field == sec->second.end()) throw ConfigError("unknown key '" + key + "' in [" + section + "]");
      field->second.set(config, value.data());
    }
  }
  config.validate();
  return config;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void write_config(std::ostream& os, const ScenarioConfig& config) {
  for (const auto& [section, fields] : field_table()) {
    os << "[" << section << "]\n";
    for (const auto& [key, field] : fields) os << key << " = " << field.get(config) << "\n";
    os << "\n";
  }
}

}  // namespace leoipac
