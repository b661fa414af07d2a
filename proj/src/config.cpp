#include "connmaint/config.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace connmaint {
namespace {

// Shortest text that reads back to the same double.
std::string format_value(double v) { return fmt::format("{}", v); }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || trim(v.substr(used)) != "" || !std::isfinite(out)) {
    throw ConfigError(key + ": expected a finite number, got '" + v + "'");
  }
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  }
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw ConfigError(key + ": integer out of range '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

struct Field {
  std::function<void(ScenarioConfig&, const std::string& key, const std::string& value)> set;
  std::function<std::string(const ScenarioConfig&)> get;
};

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError(key + ": " + what);
}

Field real(double ScenarioConfig::*member, std::function<bool(double)> ok, const char* rule) {
  return {[=](ScenarioConfig& c, const std::string& k, const std::string& v) {
            const double x = to_double(k, v);
            require(ok(x), k, std::string("value ") + v + " violates " + rule);
            c.*member = x;
          },
          [=](const ScenarioConfig& c) { return format_value(c.*member); }};
}

template <typename Getter>
Field nested_real(Getter access, std::function<bool(double)> ok, const char* rule) {
  return {[=](ScenarioConfig& c, const std::string& k, const std::string& v) {
            const double x = to_double(k, v);
            require(ok(x), k, std::string("value ") + v + " violates " + rule);
            access(c) = x;
          },
          [=](const ScenarioConfig& c) {
            return format_value(access(const_cast<ScenarioConfig&>(c)));
          }};
}

const auto any = [](double) { return true; };
const auto positive = [](double x) { return x > 0.0; };
const auto nonneg = [](double x) { return x >= 0.0; };

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = [] {
    std::map<std::string, Field> t;
    t["agents.count"] = {[](ScenarioConfig& c, const std::string& k, const std::string& v) {
                           const auto n = to_uint(k, v);
                           require(n >= 2 && n <= 64, k, "must lie in [2, 64]");
                           c.n_agents = static_cast<std::size_t>(n);
                         },
                         [](const ScenarioConfig& c) { return std::to_string(c.n_agents); }};
    t["agents.dim"] = {[](ScenarioConfig& c, const std::string& k, const std::string& v) {
                         const auto n = to_uint(k, v);
                         require(n >= 2 && n <= 3, k, "must be 2 or 3");
                         c.dim = static_cast<std::size_t>(n);
                       },
                       [](const ScenarioConfig& c) { return std::to_string(c.dim); }};
    t["mode"] = {[](ScenarioConfig& c, const std::string& k, const std::string& v) {
                   if (v == "formation") c.mode = Mode::formation;
                   else if (v == "rendezvous") c.mode = Mode::rendezvous;
                   else throw ConfigError(k + ": expected formation or rendezvous, got '" + v + "'");
                 },
                 [](const ScenarioConfig& c) { return std::string(to_string(c.mode)); }};
    t["formation.radius"] = real(&ScenarioConfig::formation_radius, nonneg, ">= 0");
    t["migration.velocity"] = {
        [](ScenarioConfig& c, const std::string& k, const std::string& v) {
          const auto xs = parse_double_list(v, k);
          c.drift = Eigen::Map<const Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
        },
        [](const ScenarioConfig& c) {
          const Vec d = c.drift_velocity();
          std::string s;
          for (Eigen::Index k = 0; k < d.size(); ++k) s += (k ? "," : "") + format_value(d(k));
          return s;
        }};

    t["world.init_box"] = real(&ScenarioConfig::init_box, positive, "> 0");
    t["world.init_center_x"] = real(&ScenarioConfig::init_center_x, any, "finite");
    t["world.init_center_y"] = real(&ScenarioConfig::init_center_y, any, "finite");
    t["world.max_init_retries"] = {
        [](ScenarioConfig& c, const std::string& k, const std::string& v) {
          const auto n = to_uint(k, v);
          require(n >= 1 && n <= 10'000'000, k, "must lie in [1, 1e7]");
          c.max_init_retries = static_cast<int>(n);
        },
        [](const ScenarioConfig& c) { return std::to_string(c.max_init_retries); }};

    t["obstacles.count"] = {[](ScenarioConfig& c, const std::string& k, const std::string& v) {
                              c.obstacles.count = static_cast<std::size_t>(to_uint(k, v));
                            },
                            [](const ScenarioConfig& c) { return std::to_string(c.obstacles.count); }};
    t["obstacles.influence_radius"] =
        nested_real([](ScenarioConfig& c) -> double& { return c.obstacles.influence_radius; },
                    positive, "> 0");
    t["obstacles.gain"] =
        nested_real([](ScenarioConfig& c) -> double& { return c.obstacles.gain; }, positive, "> 0");
    t["obstacles.max_push"] = nested_real(
        [](ScenarioConfig& c) -> double& { return c.obstacles.max_push; }, positive, "> 0");
    t["obstacles.band_x_min"] =
        nested_real([](ScenarioConfig& c) -> double& { return c.obstacles.band_x_min; }, any, "finite");
    t["obstacles.band_x_max"] =
        nested_real([](ScenarioConfig& c) -> double& { return c.obstacles.band_x_max; }, any, "finite");
    t["obstacles.band_y_min"] =
        nested_real([](ScenarioConfig& c) -> double& { return c.obstacles.band_y_min; }, any, "finite");
    t["obstacles.band_y_max"] =
        nested_real([](ScenarioConfig& c) -> double& { return c.obstacles.band_y_max; }, any, "finite");

    t["range.R"] =
        nested_real([](ScenarioConfig& c) -> double& { return c.range.range; }, positive, "> 0");
    t["range.delta"] = nested_real([](ScenarioConfig& c) -> double& { return c.range.delta; },
                                   [](double x) { return x > 0.0 && x < 1.0; }, "0 < delta < 1");

    t["estimator.k1"] = nested_real([](ScenarioConfig& c) -> double& { return c.gains.k1; }, nonneg, ">= 0");
    t["estimator.k2"] = nested_real([](ScenarioConfig& c) -> double& { return c.gains.k2; }, positive, "> 0");
    t["estimator.k3"] = nested_real([](ScenarioConfig& c) -> double& { return c.gains.k3; }, nonneg, ">= 0");
    t["estimator.gamma"] =
        nested_real([](ScenarioConfig& c) -> double& { return c.gains.gamma; }, nonneg, ">= 0");
    t["estimator.kp"] = nested_real([](ScenarioConfig& c) -> double& { return c.gains.kp; }, nonneg, ">= 0");
    t["estimator.ki"] = nested_real([](ScenarioConfig& c) -> double& { return c.gains.ki; }, nonneg, ">= 0");

    t["control.epsilon"] =
        nested_real([](ScenarioConfig& c) -> double& { return c.control.epsilon; }, positive, "> 0");
    t["control.epsilon_bar"] = nested_real(
        [](ScenarioConfig& c) -> double& { return c.control.epsilon_bar; }, positive, "> 0");
    t["control.epsilon_tilde"] = nested_real(
        [](ScenarioConfig& c) -> double& { return c.control.epsilon_tilde; }, positive, "> 0");
    t["control.k_margin"] = nested_real(
        [](ScenarioConfig& c) -> double& { return c.control.k_margin; }, [](double x) { return x > 1.0; },
        "> 1");
    t["control.u_c_max"] =
        nested_real([](ScenarioConfig& c) -> double& { return c.control.u_c_max; }, positive, "> 0");
    t["control.csch_floor"] = nested_real(
        [](ScenarioConfig& c) -> double& { return c.control.csch_floor; }, positive, "> 0");
    t["control.gamma"] = {
        [](ScenarioConfig& c, const std::string& k, const std::string& v) {
          if (v.empty() || v == "default") {
            c.control.gamma.clear();
            return;
          }
          auto xs = parse_double_list(v, k);
          for (double x : xs) require(x > 0.0, k, "every gain must be > 0");
          c.control.gamma = std::move(xs);
        },
        [](const ScenarioConfig& c) {
          if (c.control.gamma.empty()) return std::string("default");
          std::string s;
          for (std::size_t i = 0; i < c.control.gamma.size(); ++i)
            s += (i ? "," : "") + format_value(c.control.gamma[i]);
          return s;
        }};

    t["control.consensus_weights"] = {
        [](ScenarioConfig& c, const std::string& k, const std::string& v) {
          try {
            c.control.consensus = consensus_weights_from_string(v);
          } catch (const InvalidParameter&) {
            throw ConfigError(k + ": expected gaussian or binary, got '" + v + "'");
          }
        },
        [](const ScenarioConfig& c) { return std::string(to_string(c.control.consensus)); }};

    t["disturbance.p_fail"] = nested_real(
        [](ScenarioConfig& c) -> double& { return c.disturbance.p_fail; },
        [](double x) { return x >= 0.0 && x <= 1.0; }, "0 <= p_fail <= 1");
    t["disturbance.eta"] =
        nested_real([](ScenarioConfig& c) -> double& { return c.disturbance.eta; }, nonneg, ">= 0");
    t["disturbance.nu_default"] = nested_real(
        [](ScenarioConfig& c) -> double& { return c.disturbance.nu_default; }, any, "finite");
    t["disturbance.failure_scope"] = {
        [](ScenarioConfig& c, const std::string& k, const std::string& v) {
          try {
            c.disturbance.scope = failure_scope_from_string(v);
          } catch (const InvalidParameter&) {
            throw ConfigError(k + ": expected link or broadcast, got '" + v + "'");
          }
        },
        [](const ScenarioConfig& c) { return std::string(to_string(c.disturbance.scope)); }};

    t["actuation.ideal"] = {[](ScenarioConfig& c, const std::string& k, const std::string& v) {
                              c.ideal = to_bool(k, v);
                            },
                            [](const ScenarioConfig& c) { return std::string(c.ideal ? "true" : "false"); }};
    t["actuation.cutoff"] = real(&ScenarioConfig::cutoff, positive, "> 0");
    t["actuation.filter_target"] = {
        [](ScenarioConfig& c, const std::string& k, const std::string& v) {
          if (v == "connectivity") c.filter_target = FilterTarget::connectivity;
          else if (v == "total") c.filter_target = FilterTarget::total;
          else throw ConfigError(k + ": expected connectivity or total, got '" + v + "'");
        },
        [](const ScenarioConfig& c) { return std::string(to_string(c.filter_target)); }};

    t["time.dt"] = real(&ScenarioConfig::dt, positive, "> 0");
    t["time.T"] = real(&ScenarioConfig::horizon, positive, "> 0");
    t["seed"] = {[](ScenarioConfig& c, const std::string& k, const std::string& v) {
                   const auto s = to_uint(k, v);
                   c.seed = s;
                   c.disturbance.seed = s;
                 },
                 [](const ScenarioConfig& c) { return std::to_string(c.seed); }};
    t["reference.enabled"] = {[](ScenarioConfig& c, const std::string& k, const std::string& v) {
                                c.reference_run = to_bool(k, v);
                              },
                              [](const ScenarioConfig& c) {
                                return std::string(c.reference_run ? "true" : "false");
                              }};
    return t;
  }();
  return table;
}

void apply(ScenarioConfig& c, const std::string& key, const std::string& value) {
  const auto it = fields().find(key);
  if (it == fields().end()) throw ConfigError("unknown key '" + key + "'");
  it->second.set(c, key, value);
}

std::pair<std::string, std::string> split_assignment(const std::string& line,
                                                     const std::string& where) {
  const auto eq = line.find('=');
  if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
  std::string key = trim(line.substr(0, eq));
  if (key.empty()) throw ConfigError(where + ": missing key");
  return {std::move(key), trim(line.substr(eq + 1))};
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, f] : fields()) keys.push_back(k);
  return keys;
}

ScenarioConfig parse_config_text(const std::string& text,
                                 const std::vector<std::string>& overrides) {
  ScenarioConfig c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto [key, value] = split_assignment(line, "line " + std::to_string(lineno));
    apply(c, key, value);
  }
  for (const auto& o : overrides) {
    auto [key, value] = split_assignment(o, "override '" + o + "'");
    apply(c, key, value);
  }
  try {
    c.range = RangeParams::make(c.range.range, c.range.delta);
  } catch (const InvalidParameter& e) {
    throw ConfigError(std::string("range: ") + e.what());
  }
  c.validate();
  return c;
}

ScenarioConfig parse_config(const std::filesystem::path& path,
                            const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), overrides);
}

std::string format_config(const ScenarioConfig& config) {
  std::ostringstream os;
  for (const auto& [key, field] : fields()) os << key << " = " << field.get(config) << '\n';
  return os.str();
}

std::vector<double> parse_double_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError(what + ": empty list item");
    const auto c1 = item.find(':');
    if (c1 == std::string::npos) {
      out.push_back(to_double(what, item));
      continue;
    }
    const auto c2 = item.find(':', c1 + 1);
    if (c2 == std::string::npos) throw ConfigError(what + ": range must be start:stop:step");
    const double a = to_double(what, item.substr(0, c1));
    const double b = to_double(what, item.substr(c1 + 1, c2 - c1 - 1));
    const double h = to_double(what, item.substr(c2 + 1));
    require(h > 0.0 && b >= a, what, "range needs step > 0 and stop >= start");
    const auto count = static_cast<long>(std::floor((b - a) / h + 1e-9));
    for (long k = 0; k <= count; ++k) {
      // Rounded to 12 decimals so 0:0.7:0.05 yields 0.35, not 0.35000000000000003.
      out.push_back(std::round((a + static_cast<double>(k) * h) * 1e12) / 1e12);
    }
  }
  if (out.empty()) throw ConfigError(what + ": empty list");
  return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    const auto dash = item.find('-');
    if (dash != std::string::npos && dash > 0) {
      const auto a = to_uint("seeds", item.substr(0, dash));
      const auto b = to_uint("seeds", item.substr(dash + 1));
      require(b >= a, "seeds", "range end before start");
      for (auto s = a; s <= b; ++s) out.push_back(s);
    } else {
      out.push_back(to_uint("seeds", item));
    }
  }
  if (out.empty()) throw ConfigError("seeds: empty list");
  return out;
}

}  // namespace connmaint
