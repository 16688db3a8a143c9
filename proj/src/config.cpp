#include "gpec/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "gpec/error.hpp"
#include "gpec/io.hpp"

namespace gpec {

namespace {

class ExpressionParser {
 public:
  explicit ExpressionParser(const std::string& text) : text_(text) {}

  double parse() {
    const double value = expression();
    skip_space();
    if (pos_ != text_.size()) {
      fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    }
    return value;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw ConfigError("bad numeric expression '" + text_ + "': " + why);
  }

  void skip_space() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  double expression() {
    double value = term();
    for (;;) {
      if (accept('+')) {
        value += term();
      } else if (accept('-')) {
        value -= term();
      } else {
        return value;
      }
    }
  }

  double term() {
    double value = factor();
    for (;;) {
      if (accept('*')) {
        value *= factor();
      } else if (accept('/')) {
        value /= factor();
      } else {
        return value;
      }
    }
  }

  double factor() {
    if (accept('+')) return factor();
    if (accept('-')) return -factor();
    if (accept('(')) {
      const double value = expression();
      if (!accept(')')) fail("missing ')'");
      return value;
    }
    skip_space();
    if (text_.compare(pos_, 2, "pi") == 0) {
      pos_ += 2;
      return std::numbers::pi;
    }
    double value = 0.0;
    const auto result = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), value);
    if (result.ec != std::errc()) {
      fail(pos_ < text_.size() ? "expected a number at '" + text_.substr(pos_) + "'" : "expected a number");
    }
    pos_ = static_cast<std::size_t>(result.ptr - text_.data());
    return value;
  }

  const std::string& text_;
  std::size_t pos_ = 0;
};

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError("empty list element in '" + value + "'");
    out.push_back(item);
  }
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

std::size_t to_count(double v, const std::string& key) {
  if (!(v >= 0.0) || v != std::floor(v) || v > 1e12) {
    throw ConfigError(key + " must be a non-negative integer");
  }
  return static_cast<std::size_t>(v);
}

int to_int(double v, const std::string& key) {
  if (v != std::floor(v) || std::abs(v) > 1e9) {
    throw ConfigError(key + " must be an integer");
  }
  return static_cast<int>(v);
}

bool to_bool(const std::string& value, const std::string& key) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError(key + " must be true or false");
}

AdjointScheme parse_scheme(const std::string& value) {
  if (value == "exact") return AdjointScheme::exact_discrete;
  if (value == "frozen") return AdjointScheme::frozen_exponential;
  throw ConfigError("adjoint_scheme must be 'exact' or 'frozen'");
}

template <typename T, typename F>
std::string join(const std::vector<T>& values, F format) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += format(values[i]);
  }
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::filesystem::path&)>;

const std::map<std::string, Setter>& setters() {
  auto num = [](const std::string& v) { return evaluate_expression(v); };
  static const std::map<std::string, Setter> table = {
      {"hbar", [=](RunConfig& c, const std::string& v, auto&) { c.constants.hbar = num(v); }},
      {"mass", [=](RunConfig& c, const std::string& v, auto&) { c.constants.mass = num(v); }},
      {"omega", [=](RunConfig& c, const std::string& v, auto&) { c.constants.omega = num(v); }},
      {"length", [=](RunConfig& c, const std::string& v, auto&) { c.length = num(v); }},
      {"points", [=](RunConfig& c, const std::string& v, auto&) { c.points = to_count(num(v), "points"); }},
      {"duration", [=](RunConfig& c, const std::string& v, auto&) { c.duration = num(v); }},
      {"steps", [=](RunConfig& c, const std::string& v, auto&) { c.steps = to_count(num(v), "steps"); }},
      {"g0", [=](RunConfig& c, const std::string& v, auto&) { c.g0 = num(v); }},
      {"target", [=](RunConfig& c, const std::string& v, auto&) { c.target = to_int(num(v), "target"); }},
      {"scenario",
       [](RunConfig& c, const std::string& v, auto&) {
         try {
           c.scenario = parse_scenario(v);
         } catch (const InvalidArgument& e) {
           throw ConfigError(e.what());
         }
       }},
      {"phase",
       [](RunConfig& c, const std::string& v, auto&) {
         try {
           c.guess.phase = parse_phase_profile(v);
         } catch (const InvalidArgument& e) {
           throw ConfigError(e.what());
         }
       }},
      {"amplitude", [=](RunConfig& c, const std::string& v, auto&) { c.guess.amplitude = num(v); }},
      {"omega_v", [=](RunConfig& c, const std::string& v, auto&) { c.omega_v = num(v); }},
      {"g_const", [=](RunConfig& c, const std::string& v, auto&) { c.guess.g_const = num(v); }},
      {"literal_g_trial",
       [](RunConfig& c, const std::string& v, auto&) { c.guess.literal_g_trial = to_bool(v, "literal_g_trial"); }},
      {"tol_rel", [=](RunConfig& c, const std::string& v, auto&) { c.optimizer.rtol = num(v); }},
      {"tol_abs", [=](RunConfig& c, const std::string& v, auto&) { c.optimizer.atol = num(v); }},
      {"max_steps",
       [=](RunConfig& c, const std::string& v, auto&) { c.optimizer.max_steps = to_count(num(v), "max_steps"); }},
      {"stop_p", [=](RunConfig& c, const std::string& v, auto&) { c.optimizer.stop_p = num(v); }},
      {"max_step_size", [=](RunConfig& c, const std::string& v, auto&) { c.optimizer.max_step = num(v); }},
      {"detect_stall",
       [](RunConfig& c, const std::string& v, auto&) { c.optimizer.detect_stall = to_bool(v, "detect_stall"); }},
      {"stall_window",
       [=](RunConfig& c, const std::string& v, auto&) {
         c.optimizer.stall_window = to_count(num(v), "stall_window");
       }},
      {"stall_tolerance", [=](RunConfig& c, const std::string& v, auto&) { c.optimizer.stall_tolerance = num(v); }},
      {"fixed_step_rk4",
       [](RunConfig& c, const std::string& v, auto&) { c.optimizer.fixed_step_rk4 = to_bool(v, "fixed_step_rk4"); }},
      {"rk4_step", [=](RunConfig& c, const std::string& v, auto&) { c.optimizer.rk4_step = num(v); }},
      {"noise_amp", [=](RunConfig& c, const std::string& v, auto&) { c.optimizer.noise_amplitude = num(v); }},
      {"seed",
       [=](RunConfig& c, const std::string& v, auto&) { c.optimizer.seed = to_count(num(v), "seed"); }},
      {"snapshot_every",
       [=](RunConfig& c, const std::string& v, auto&) {
         c.optimizer.snapshot_every = to_count(num(v), "snapshot_every");
       }},
      {"adjoint_scheme", [](RunConfig& c, const std::string& v, auto&) { c.adjoint_scheme = parse_scheme(v); }},
      {"record", [](RunConfig& c, const std::string& v, auto&) { c.record = to_bool(v, "record"); }},
      {"g0_list",
       [=](RunConfig& c, const std::string& v, auto&) {
         c.g0_list.clear();
         for (const auto& item : split_list(v)) c.g0_list.push_back(num(item));
       }},
      {"j_max", [=](RunConfig& c, const std::string& v, auto&) { c.j_max = to_int(num(v), "j_max"); }},
      {"dt_imag", [=](RunConfig& c, const std::string& v, auto&) { c.saitp.dt_imag = num(v); }},
      {"saitp_epsilon", [=](RunConfig& c, const std::string& v, auto&) { c.saitp.epsilon = num(v); }},
      {"saitp_residual_tol", [=](RunConfig& c, const std::string& v, auto&) { c.saitp.residual_tol = num(v); }},
      {"saitp_max_iters",
       [=](RunConfig& c, const std::string& v, auto&) {
         c.saitp.max_iters = to_count(num(v), "saitp_max_iters");
       }},
      {"stability_duration", [=](RunConfig& c, const std::string& v, auto&) { c.stability_duration = num(v); }},
      {"stability_steps",
       [=](RunConfig& c, const std::string& v, auto&) {
         c.stability_steps = to_count(num(v), "stability_steps");
       }},
      {"mode_dir",
       [](RunConfig& c, const std::string& v, const std::filesystem::path& base) { c.mode_dir = base / v; }},
      {"output_dir",
       [](RunConfig& c, const std::string& v, const std::filesystem::path& base) { c.output_dir = base / v; }},
      {"sweep_g0",
       [=](RunConfig& c, const std::string& v, auto&) {
         c.sweep_g0.clear();
         for (const auto& item : split_list(v)) c.sweep_g0.push_back(num(item));
       }},
      {"sweep_targets",
       [=](RunConfig& c, const std::string& v, auto&) {
         c.sweep_targets.clear();
         for (const auto& item : split_list(v)) c.sweep_targets.push_back(to_int(num(item), "sweep_targets"));
       }},
      {"sweep_scenarios",
       [](RunConfig& c, const std::string& v, auto&) {
         c.sweep_scenarios.clear();
         try {
           for (const auto& item : split_list(v)) c.sweep_scenarios.push_back(parse_scenario(item));
         } catch (const InvalidArgument& e) {
           throw ConfigError(e.what());
         }
       }},
      {"sweep_amplitudes",
       [=](RunConfig& c, const std::string& v, auto&) {
         c.sweep_amplitudes.clear();
         for (const auto& item : split_list(v)) c.sweep_amplitudes.push_back(num(item));
       }},
      {"sweep_phases",
       [](RunConfig& c, const std::string& v, auto&) {
         c.sweep_phases.clear();
         try {
           for (const auto& item : split_list(v)) c.sweep_phases.push_back(parse_phase_profile(item));
         } catch (const InvalidArgument& e) {
           throw ConfigError(e.what());
         }
       }},
      {"sweep_total_g",
       [=](RunConfig& c, const std::string& v, auto&) {
         c.sweep_total_g.clear();
         for (const auto& item : split_list(v)) c.sweep_total_g.push_back(num(item));
       }},
  };
  return table;
}

}  // namespace

double evaluate_expression(const std::string& text) { return ExpressionParser(text).parse(); }

InitialGuess RunConfig::resolved_guess() const {
  InitialGuess out = guess;
  out.omega_v = omega_v.value_or(constants.omega / 10.0);
  return out;
}

void RunConfig::validate() const {
  auto require = [](bool ok, const std::string& rule) {
    if (!ok) throw ConfigError(rule);
  };
  require(constants.hbar > 0.0 && constants.mass > 0.0 && constants.omega > 0.0,
          "hbar, mass and omega must be positive");
  require(std::isfinite(length) && length > 0.0, "length must be positive");
  require(points >= 8 && points % 2 == 0, "points must be even and at least 8");
  require(points <= std::uint32_t(-1), "points exceeds the field file limit");
  require(std::isfinite(duration) && duration > 0.0, "duration must be positive");
  require(steps >= 1 && steps <= std::uint32_t(-1), "steps must be at least 1");
  require(std::isfinite(g0), "g0 must be finite");
  require(target >= 0 && target <= 10, "target must be in 0..10");
  require(j_max >= 0 && j_max <= 10, "j_max must be in 0..10");
  require(!g0_list.empty(), "g0_list must not be empty");
  for (double g : g0_list) require(std::isfinite(g), "g0_list entries must be finite");
  require(std::isfinite(stability_duration) && stability_duration > 0.0, "stability_duration must be positive");
  require(stability_steps >= 1, "stability_steps must be at least 1");
  require(!omega_v || std::isfinite(*omega_v), "omega_v must be finite");
  try {
    resolved_guess().validate(g0, scenario);
    optimizer.validate();
    saitp.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  for (int t : sweep_targets) require(t >= 0 && t <= 10, "sweep_targets entries must be in 0..10");
  for (double g : sweep_total_g) require(g > 0.0, "sweep_total_g entries must be positive");
  for (double g : sweep_g0) require(std::isfinite(g), "sweep_g0 entries must be finite");
  for (double a : sweep_amplitudes) require(std::isfinite(a), "sweep_amplitudes entries must be finite");
  require(!sweep_g0.empty() && !sweep_targets.empty() && !sweep_scenarios.empty() && !sweep_amplitudes.empty() &&
              !sweep_phases.empty() && !sweep_total_g.empty(),
          "sweep axes must not be empty");
}

std::string RunConfig::to_text() const {
  auto d = [](double v) { return format_double(v); };
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  std::ostringstream out;
  out << "hbar = " << d(constants.hbar) << "\n"
      << "mass = " << d(constants.mass) << "\n"
      << "omega = " << d(constants.omega) << "\n"
      << "length = " << d(length) << "\n"
      << "points = " << points << "\n"
      << "duration = " << d(duration) << "\n"
      << "steps = " << steps << "\n"
      << "g0 = " << d(g0) << "\n"
      << "target = " << target << "\n"
      << "scenario = " << to_string(scenario) << "\n"
      << "phase = " << to_string(guess.phase) << "\n"
      << "amplitude = " << d(guess.amplitude) << "\n";
  if (omega_v) out << "omega_v = " << d(*omega_v) << "\n";
  out << "g_const = " << d(guess.g_const) << "\n"
      << "literal_g_trial = " << b(guess.literal_g_trial) << "\n"
      << "tol_rel = " << d(optimizer.rtol) << "\n"
      << "tol_abs = " << d(optimizer.atol) << "\n"
      << "max_steps = " << optimizer.max_steps << "\n"
      << "stop_p = " << d(optimizer.stop_p) << "\n"
      << "max_step_size = " << d(optimizer.max_step) << "\n"
      << "detect_stall = " << b(optimizer.detect_stall) << "\n"
      << "stall_window = " << optimizer.stall_window << "\n"
      << "stall_tolerance = " << d(optimizer.stall_tolerance) << "\n"
      << "fixed_step_rk4 = " << b(optimizer.fixed_step_rk4) << "\n"
      << "rk4_step = " << d(optimizer.rk4_step) << "\n"
      << "noise_amp = " << d(optimizer.noise_amplitude) << "\n"
      << "seed = " << optimizer.seed << "\n"
      << "snapshot_every = " << optimizer.snapshot_every << "\n"
      << "adjoint_scheme = " << (adjoint_scheme == AdjointScheme::exact_discrete ? "exact" : "frozen") << "\n"
      << "record = " << b(record) << "\n"
      << "g0_list = " << join(g0_list, d) << "\n"
      << "j_max = " << j_max << "\n"
      << "dt_imag = " << d(saitp.dt_imag) << "\n"
      << "saitp_epsilon = " << d(saitp.epsilon) << "\n"
      << "saitp_residual_tol = " << d(saitp.residual_tol) << "\n"
      << "saitp_max_iters = " << saitp.max_iters << "\n"
      << "stability_duration = " << d(stability_duration) << "\n"
      << "stability_steps = " << stability_steps << "\n"
      << "mode_dir = " << mode_dir.string() << "\n"
      << "output_dir = " << output_dir.string() << "\n"
      << "sweep_g0 = " << join(sweep_g0, d) << "\n"
      << "sweep_targets = " << join(sweep_targets, [](int t) { return std::to_string(t); }) << "\n"
      << "sweep_scenarios = " << join(sweep_scenarios, [](ScenarioKind k) { return std::string(to_string(k)); })
      << "\n"
      << "sweep_amplitudes = " << join(sweep_amplitudes, d) << "\n"
      << "sweep_phases = " << join(sweep_phases, [](PhaseProfile p) { return std::string(to_string(p)); }) << "\n"
      << "sweep_total_g = " << join(sweep_total_g, d) << "\n";
  return out.str();
}

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  RunConfig config;
  std::istringstream in(text);
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_number) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) {
      throw ConfigError("line " + std::to_string(line_number) + ": unknown key '" + key + "'");
    }
    if (value.empty()) {
      throw ConfigError("line " + std::to_string(line_number) + ": empty value for '" + key + "'");
    }
    try {
      it->second(config, value, base_dir);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_number) + " (" + key + "): " + e.what());
    }
  }
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = read_bytes(path);
  const std::filesystem::path base = path.parent_path();
  return parse_config(std::string(bytes.begin(), bytes.end()), base);
}

}  // namespace gpec
