#include <catch2/catch_amalgamated.hpp>

#include <string>

#include "tictaq/quantity.hpp"
#include "tictaq/scenario.hpp"

using namespace tictaq;
using Catch::Approx;

namespace {

json minimal_scenario() {
    return json::parse(R"json({
      "schema": "tictaq-scenario/1",
      "name": "mini",
      "seed": 7,
      "device": {
        "qubits": [
          {
            "f01": "5 GHz",
            "gamma0": "16666.7 /s",
            "gamma_phi0": "10 /ms",
            "t_gate": "30 ns",
            "bath": [
              {
                "delta0": "4.995 GHz",
                "eps0": "-120 MHz",
                "sensitivity": ["40 MHz/V"],
                "coupling_g": "60 kHz",
                "gamma1_tls": "1e4 /s",
                "gamma2_tls": "1e6 /s",
                "drift": {
                  "theta": "4.6e-5 /s",
                  "sigma": "2 MHz/sqrt(s)",
                  "scramble_rate": "2e-5 /s",
                  "scramble_scale": "250 MHz"
                }
              }
            ]
          }
        ]
      },
      "schedule": {
        "iteration_period": "15 min",
        "total_duration": "1 h",
        "baseline_voltage": "0 V"
      }
    })json");
}

}  // namespace

TEST_CASE("parse_quantity converts units per dimension", "[scenario]") {
    REQUIRE(parse_quantity("5 GHz", Dimension::frequency, "t") == Approx(5e9));
    REQUIRE(parse_quantity("4 MHz/V", Dimension::sensitivity, "t") == Approx(4e6));
    REQUIRE(parse_quantity("20 us", Dimension::time, "t") == Approx(20e-6));
    REQUIRE(parse_quantity("75 min", Dimension::time, "t") == Approx(4500.0));
    REQUIRE(parse_quantity("-0.4 V", Dimension::voltage, "t") == Approx(-0.4));
    REQUIRE(parse_quantity("1e4 /s", Dimension::rate, "t") == Approx(1e4));
    REQUIRE(parse_quantity("2 /min", Dimension::rate, "t") == Approx(2.0 / 60.0));
    REQUIRE(parse_quantity("3 MHz/sqrt(s)", Dimension::diffusion, "t") == Approx(3e6));
    REQUIRE(parse_quantity("0.5 fF", Dimension::capacitance, "t") == Approx(0.5e-15));
    REQUIRE(parse_quantity("50 Ohm", Dimension::resistance, "t") == Approx(50.0));

    SECTION("missing unit") {
        REQUIRE_THROWS_WITH(parse_quantity("5", Dimension::frequency, "x"),
                            Catch::Matchers::ContainsSubstring("missing unit"));
    }
    SECTION("wrong dimension") {
        REQUIRE_THROWS_WITH(parse_quantity("5 V", Dimension::frequency, "x"),
                            Catch::Matchers::ContainsSubstring("not a frequency unit"));
    }
    SECTION("malformed number") {
        REQUIRE_THROWS_AS(parse_quantity("five GHz", Dimension::frequency, "x"),
                          std::invalid_argument);
    }
}

TEST_CASE("scenario parsing converts and validates", "[scenario]") {
    const Scenario sc = scenario_from_json(minimal_scenario());
    REQUIRE(sc.name == "mini");
    REQUIRE(sc.seed == 7);
    REQUIRE(sc.qubits.size() == 1);
    REQUIRE(sc.qubits[0].f01 == Approx(5e9));
    REQUIRE(sc.qubits[0].gamma_phi0 == Approx(1e4));
    REQUIRE(sc.baths[0][0].tls.eps0 == Approx(-120e6));
    REQUIRE(sc.baths[0][0].tls.sensitivity[0] == Approx(40e6));
    REQUIRE(sc.baths[0][0].drift.has_value());
    REQUIRE(sc.baths[0][0].drift->scramble_scale == Approx(250e6));
    REQUIRE(sc.iteration_period == Approx(900.0));
    REQUIRE(sc.total_duration == Approx(3600.0));
    // Defaults fill in when sections are omitted.
    REQUIRE(sc.optimizer.v_grid.size() == 51);
    REQUIRE(sc.optimizer.t_delay == Approx(20e-6));
    REQUIRE(sc.costs.spectroscopy_point == Approx(0.36));
    REQUIRE_FALSE(sc.noise.noiseless);

    DeviceModel dev = sc.build_device();
    REQUIRE(dev.qubit_count() == 1);
}

TEST_CASE("scenario rejects unknown keys and bad values", "[scenario]") {
    SECTION("unknown top-level key") {
        json j = minimal_scenario();
        j["extra"] = 1;
        REQUIRE_THROWS_WITH(scenario_from_json(j),
                            Catch::Matchers::ContainsSubstring("unknown key 'extra'"));
    }
    SECTION("unknown qubit key") {
        json j = minimal_scenario();
        j["device"]["qubits"][0]["frequency"] = "5 GHz";
        REQUIRE_THROWS_WITH(scenario_from_json(j),
                            Catch::Matchers::ContainsSubstring("unknown key 'frequency'"));
    }
    SECTION("unknown defect key") {
        json j = minimal_scenario();
        j["device"]["qubits"][0]["bath"][0]["color"] = "blue";
        REQUIRE_THROWS_WITH(scenario_from_json(j),
                            Catch::Matchers::ContainsSubstring("unknown key 'color'"));
    }
    SECTION("bare numbers are rejected for physical quantities") {
        json j = minimal_scenario();
        j["device"]["qubits"][0]["f01"] = 5e9;
        REQUIRE_THROWS_WITH(scenario_from_json(j),
                            Catch::Matchers::ContainsSubstring("explicit unit"));
    }
    SECTION("missing schedule") {
        json j = minimal_scenario();
        j.erase("schedule");
        REQUIRE_THROWS_WITH(scenario_from_json(j),
                            Catch::Matchers::ContainsSubstring("missing key 'schedule'"));
    }
    SECTION("wrong schema") {
        json j = minimal_scenario();
        j["schema"] = "something/2";
        REQUIRE_THROWS_AS(scenario_from_json(j), std::invalid_argument);
    }
    SECTION("duration shorter than one period") {
        json j = minimal_scenario();
        j["schedule"]["total_duration"] = "1 min";
        REQUIRE_THROWS_AS(scenario_from_json(j), std::invalid_argument);
    }
    SECTION("unphysical defect") {
        json j = minimal_scenario();
        j["device"]["qubits"][0]["bath"][0]["gamma2_tls"] = "1 /s";
        REQUIRE_THROWS_AS(scenario_from_json(j), std::invalid_argument);
    }
}

TEST_CASE("shipped scenarios load and build devices", "[scenario]") {
    const std::string dir = TICTAQ_SCENARIO_DIR;
    for (const char* name :
         {"single_qubit_stability.json", "six_qubit_parallel.json", "planted_crosstalk.json"}) {
        const Scenario sc = load_scenario(dir + "/" + name);
        REQUIRE_NOTHROW(sc.build_device());
    }
    const Scenario single = load_scenario(dir + "/single_qubit_stability.json");
    REQUIRE(single.qubits.size() == 1);
    REQUIRE(single.total_duration == Approx(38.0 * 3600.0));
    REQUIRE(single.circuit.has_value());
    const Scenario six = load_scenario(dir + "/six_qubit_parallel.json");
    REQUIRE(six.qubits.size() == 6);
    const Scenario planted = load_scenario(dir + "/planted_crosstalk.json");
    REQUIRE(planted.crosstalk[2][0] == Approx(0.30));
    REQUIRE(planted.crosstalk_scan.noiseless);
}
