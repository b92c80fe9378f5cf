#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "ptmps/config.hpp"

using namespace ptmps;

namespace {

const char* kMinimalBuild = R"({
  "task": "build-pt",
  "system": {"d": 2, "coupling": [1.0, -1.0]},
  "bath": {"kind": "continuum", "amplitude": 0.1, "omega_c": 1.0, "beta": 1.0},
  "grid": {"dt": 0.1, "n_steps": 4, "n_mem": 2}
})";

const char* kPropagateFull = R"({
  "task": "propagate",
  "system": {
    "d": 2,
    "coupling": [1.0, -1.0],
    "hamiltonian": [[0.0, 0.5], [0.5, 0.0]],
    "rho0": [[1.0, 0.0], [0.0, 0.0]],
    "pulses": [{"t0": 0.0, "t1": 0.2, "h": [[0.0, [0.0, -1.0]], [[0.0, 1.0], 0.0]]}]
  },
  "bath": {"kind": "discrete", "modes": [{"g": [0.3, 0.1], "omega": 1.2}], "beta": 2.0},
  "grid": {"dt": 0.1, "n_steps": 10, "n_mem": 4, "tti": false},
  "truncation": {"rel_cutoff": 1e-9, "max_rank": 64, "conv_tol": 1e-6},
  "propagation": {
    "splitting": "symmetric",
    "observables": [{"name": "sz", "matrix": [[1.0, 0.0], [0.0, -1.0]]}]
  }
})";

bool has_issue(const config_error& e, const std::string& needle) {
    for (const auto& issue : e.issues)
        if (issue.find(needle) != std::string::npos) return true;
    return false;
}

} // namespace

TEST_CASE("minimal build description parses with defaults") {
    const RunConfig cfg = parse_config(kMinimalBuild);
    CHECK(cfg.task == RunConfig::Task::build_pt);
    CHECK(cfg.system.d == 2);
    CHECK(cfg.coupling.lambdas == std::vector<double>{1.0, -1.0});
    CHECK(cfg.bath.kind == BathSpec::Kind::continuum);
    CHECK(cfg.bath.amplitude == 0.1);
    CHECK(cfg.dt == 0.1);
    CHECK(cfg.n_steps == 4);
    CHECK(cfg.n_mem == 2);
    CHECK(cfg.tti == false);
    CHECK(cfg.splitting == Splitting::first_order);
    // implicit defaults
    CHECK(cfg.system.h0.isZero());
    CHECK(cfg.rho0(0, 0) == cd(1.0, 0.0));
    CHECK(cfg.truncation.rel_cutoff == 0.0);
}

TEST_CASE("full propagate description parses every block") {
    const RunConfig cfg = parse_config(kPropagateFull);
    CHECK(cfg.task == RunConfig::Task::propagate);
    CHECK(cfg.system.h0(0, 1) == cd(0.5, 0.0));
    REQUIRE(cfg.system.pulses.size() == 1);
    CHECK(cfg.system.pulses[0].h(0, 1) == cd(0.0, -1.0));
    CHECK(cfg.system.pulses[0].h(1, 0) == cd(0.0, 1.0));
    REQUIRE(cfg.bath.modes.size() == 1);
    CHECK(cfg.bath.modes[0].g == cd(0.3, 0.1));
    CHECK(cfg.bath.modes[0].omega == 1.2);
    CHECK(cfg.truncation.rel_cutoff == 1e-9);
    CHECK(cfg.truncation.max_rank == 64);
    CHECK(cfg.conv_tol == 1e-6);
    CHECK(cfg.splitting == Splitting::symmetric);
    REQUIRE(cfg.observables.size() == 1);
    CHECK(cfg.observables[0].name == "sz");
    CHECK(cfg.observables[0].matrix(1, 1) == cd(-1.0, 0.0));
}

TEST_CASE("malformed JSON is a configuration error") {
    CHECK_THROWS_AS(parse_config("{ not json"), config_error);
}

TEST_CASE("all problems are reported at once") {
    try {
        parse_config(R"({
          "task": "fly",
          "system": {"d": 1, "coupling": [1.0]},
          "bath": {"kind": "continuum", "amplitude": -0.5, "omega_c": 0.0, "beta": -1.0},
          "grid": {"dt": -0.1, "n_steps": 0, "n_mem": 2}
        })");
        FAIL("expected a config_error");
    } catch (const config_error& e) {
        CHECK(e.issues.size() >= 6);
        CHECK(has_issue(e, "task"));
        CHECK(has_issue(e, "'d' must be >= 2"));
        CHECK(has_issue(e, "amplitude"));
        CHECK(has_issue(e, "omega_c"));
        CHECK(has_issue(e, "dt"));
        CHECK(has_issue(e, "n_steps"));
    }
}

TEST_CASE("propagate requires a Hamiltonian and an initial state") {
    try {
        parse_config(R"({
          "task": "propagate",
          "system": {"d": 2, "coupling": [1.0, -1.0]},
          "bath": {"kind": "continuum", "amplitude": 0.1, "omega_c": 1.0, "beta": 1.0},
          "grid": {"dt": 0.1, "n_steps": 4, "n_mem": 2}
        })");
        FAIL("expected a config_error");
    } catch (const config_error& e) {
        CHECK(has_issue(e, "hamiltonian"));
        CHECK(has_issue(e, "rho0"));
    }
}

TEST_CASE("physicality checks on matrices") {
    // non-Hermitian Hamiltonian
    CHECK_THROWS_AS(parse_config(R"({
      "task": "propagate",
      "system": {"d": 2, "coupling": [1.0, -1.0],
                 "hamiltonian": [[0.0, 1.0], [0.5, 0.0]],
                 "rho0": [[1.0, 0.0], [0.0, 0.0]]},
      "bath": {"kind": "continuum", "amplitude": 0.1, "omega_c": 1.0, "beta": 1.0},
      "grid": {"dt": 0.1, "n_steps": 4, "n_mem": 2}
    })"),
                    config_error);
    // initial state without unit trace
    CHECK_THROWS_AS(parse_config(R"({
      "task": "propagate",
      "system": {"d": 2, "coupling": [1.0, -1.0],
                 "hamiltonian": [[0.0, 0.5], [0.5, 0.0]],
                 "rho0": [[1.0, 0.0], [0.0, 1.0]]},
      "bath": {"kind": "continuum", "amplitude": 0.1, "omega_c": 1.0, "beta": 1.0},
      "grid": {"dt": 0.1, "n_steps": 4, "n_mem": 2}
    })"),
                    config_error);
}

TEST_CASE("correlate and ttm tasks need their blocks") {
    CHECK_THROWS_AS(parse_config(R"({
      "task": "correlate",
      "system": {"d": 2, "coupling": [1.0, -1.0],
                 "hamiltonian": [[0.0, 0.5], [0.5, 0.0]],
                 "rho0": [[1.0, 0.0], [0.0, 0.0]]},
      "bath": {"kind": "continuum", "amplitude": 0.1, "omega_c": 1.0, "beta": 1.0},
      "grid": {"dt": 0.1, "n_steps": 4, "n_mem": 2}
    })"),
                    config_error);

    const RunConfig cfg = parse_config(R"({
      "task": "ttm",
      "system": {"d": 2, "coupling": [1.0, -1.0],
                 "hamiltonian": [[0.0, 0.5], [0.5, 0.0]],
                 "rho0": [[1.0, 0.0], [0.0, 0.0]]},
      "bath": {"kind": "continuum", "amplitude": 0.1, "omega_c": 1.0, "beta": 1.0},
      "grid": {"dt": 0.1, "n_steps": 8, "n_mem": 4},
      "ttm": {"memory_steps": 4, "extend_to": 16}
    })");
    CHECK(cfg.ttm_memory_steps == 4);
    CHECK(cfg.ttm_extend_to == 16);
}

TEST_CASE("zero-temperature flag lifts the beta requirement") {
    const RunConfig cfg = parse_config(R"({
      "task": "build-pt",
      "system": {"d": 2, "coupling": [1.0, -1.0]},
      "bath": {"kind": "continuum", "amplitude": 0.1, "omega_c": 1.0,
               "zero_temperature": true},
      "grid": {"dt": 0.1, "n_steps": 4, "n_mem": 2}
    })");
    CHECK(cfg.bath.zero_temperature);
}

TEST_CASE("missing config file is an i/o error") {
    CHECK_THROWS_AS(parse_config_file("/nonexistent/ptmps_config.json"), io_error);
}
