#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gpec/config.hpp"
#include "gpec/error.hpp"

using namespace gpec;

namespace {

std::string rule_of(const std::string& text) {
  try {
    parse_config(text).validate();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("expressions") {
    CHECK(evaluate_expression("pi/50") == std::numbers::pi / 50);
    CHECK(evaluate_expression("1/(5*pi)") == 1.0 / (5 * std::numbers::pi));
    CHECK(evaluate_expression("-2 + 3 * (4 - 1)") == 7.0);
    CHECK(evaluate_expression("1e-3") == 1e-3);
    CHECK_THROWS_AS(evaluate_expression("2 +"), ConfigError);
    CHECK_THROWS_AS(evaluate_expression("(1"), ConfigError);
    CHECK_THROWS_AS(evaluate_expression("e"), ConfigError);
  }

  TEST_CASE("defaults") {
    const RunConfig c = parse_config("");
    CHECK(c.length == 20.0);
    CHECK(c.points == 300);
    CHECK(c.steps == 500);
    CHECK(c.duration == std::numbers::pi);
    CHECK(c.optimizer.stop_p == 0.99);
    CHECK(c.optimizer.max_steps == 200);
    CHECK(c.optimizer.rtol == 1e-3);
    CHECK(c.optimizer.atol == 1e-6);
    CHECK(c.resolved_guess().omega_v == doctest::Approx(0.1));
    CHECK(c.saitp.epsilon == 1e-10);
    CHECK(c.g0_list.size() == 5);
    CHECK(c.mode_dir == "modes");
    CHECK_NOTHROW(c.validate());
  }

  TEST_CASE("parsing values, comments and lists") {
    const RunConfig c = parse_config(
        "# comment line\n"
        "points = 150   # trailing comment\n"
        "omega = 2\n"
        "amplitude = 1/(5*pi)\n"
        "scenario = dual\n"
        "g_const = 4\n"
        "phase = symmetric\n"
        "g0_list = 0, 1, 5\n"
        "adjoint_scheme = frozen\n"
        "record = true\n"
        "mode_dir = fam\n",
        "/base");
    CHECK(c.points == 150);
    CHECK(c.resolved_guess().omega_v == doctest::Approx(0.2));
    CHECK(c.guess.amplitude == 1.0 / (5 * std::numbers::pi));
    CHECK(c.scenario == ScenarioKind::dual);
    CHECK(c.guess.phase == PhaseProfile::symmetric);
    CHECK(c.g0_list == std::vector<double>{0, 1, 5});
    CHECK(c.adjoint_scheme == AdjointScheme::frozen_exponential);
    CHECK(c.record);
    CHECK(c.mode_dir == std::filesystem::path("/base/fam"));
  }

  TEST_CASE("errors name the line and the rule") {
    try {
      parse_config("points = 100\nbogus = 3\n");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
      CHECK(std::string(e.what()).find("bogus") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config("points 100\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("points = -4\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("scenario = both\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("record = maybe\n"), ConfigError);
    CHECK(rule_of("points = 301\n").find("even") != std::string::npos);
    CHECK(rule_of("duration = 0\n").find("duration") != std::string::npos);
    CHECK(rule_of("scenario = dual\ng0 = 1\ng_const = -1\n").find("positive") != std::string::npos);
    CHECK(rule_of("g_const = 2\n").find("g_const") != std::string::npos);
    CHECK(rule_of("stop_p = 2\n").find("stop_p") != std::string::npos);
    CHECK(rule_of("dt_imag = 0\n").find("imaginary") != std::string::npos);
    CHECK(rule_of("target = 12\n").find("target") != std::string::npos);
  }

  TEST_CASE("canonical text round trips") {
    RunConfig c = parse_config(
        "points = 64\nduration = 10\nsteps = 1592\ng0 = 10\ntarget = 5\nomega_v = 0.3\n"
        "sweep_targets = 1, 3\nsweep_phases = symmetric\nnoise_amp = 1e-8\nseed = 7\n");
    const std::string text = c.to_text();
    const RunConfig back = parse_config(text);
    CHECK(back.to_text() == text);
    CHECK(back.duration == 10.0);
    CHECK(back.omega_v == 0.3);
    CHECK(back.optimizer.noise_amplitude == 1e-8);
    CHECK(back.optimizer.seed == 7);
    CHECK(back.sweep_targets == std::vector<int>{1, 3});
  }
}
