#include <doctest.h>

#include <cmath>
#include <string>

#include "mgsim/config.hpp"
#include "mgsim/errors.hpp"
#include "mgsim/seeding.hpp"

using namespace mgsim;
using namespace mgsim::config;

namespace {

std::string error_of(const std::string& yaml) {
    try {
        (void)parse(yaml);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_SUITE_BEGIN("config");

TEST_CASE("the canonical rendering round-trips") {
    const std::string text = emit(defaults());
    CHECK(emit(parse(text)) == text);
    CHECK(emit(parse("")) == text);
    CHECK(config_hash(parse(text)) == config_hash(defaults()));
}

TEST_CASE("omitted keys keep their defaults") {
    const Config c = parse("seed: 7\nscenario:\n  horizon: 5\n");
    CHECK(c.seed == 7);
    CHECK(c.scenario.horizon == 5.0);
    CHECK(c.scenario.dt == 1e-3);
    CHECK(c.controllers.size() == 4);
    CHECK(c.scenario.events.size() == 1);
}

TEST_CASE("controller blocks fill in from their kind") {
    const Config c = parse(
        "controllers:\n"
        "  fast:\n"
        "    kind: pid\n"
        "    voltage: {kp: 9}\n");
    REQUIRE(c.controllers.size() == 1);
    const auto& pid = std::get<PidConfig>(c.controllers[0].config);
    CHECK(pid.voltage.kp == 9.0);
    CHECK(pid.voltage.ki == std::get<PidConfig>(default_controller(ControllerKind::pid)).voltage.ki);
}

TEST_CASE("errors name the key and the line") {
    const auto unknown = error_of("seed: 1\nscenario:\n  horizon: 2\n  horizn: 3\n");
    CHECK(unknown.find("line 4") != std::string::npos);
    CHECK(unknown.find("scenario.horizn") != std::string::npos);

    const auto bad = error_of("scenario:\n  dt: fast\n");
    CHECK(bad.find("line 2") != std::string::npos);
    CHECK(bad.find("scenario.dt") != std::string::npos);

    CHECK(error_of("scenario:\n  horizon: 0\n").find("horizon") != std::string::npos);
    CHECK(error_of("controllers:\n  x: {kind: fuzzy}\n").find("line 2") != std::string::npos);
    CHECK(error_of("scenario:\n  events:\n    - {time: 1, kind: meteor}\n").find("line 3") !=
          std::string::npos);
    CHECK_FALSE(error_of("sweep:\n  values: []\n").empty());
    CHECK_FALSE(error_of("sweep:\n  param: X\n").empty());
    CHECK_FALSE(error_of("tune:\n  controller: nobody\n").empty());
    CHECK_FALSE(error_of("tune:\n  bounds: {voltage.kp: [0, 1]}\n").empty());
    CHECK_FALSE(error_of("scenario: [1, 2]\n").empty());
    CHECK_FALSE(error_of("seed: [\n").empty());
}

TEST_CASE("events and plant fields parse") {
    const Config c = parse(
        "scenario:\n"
        "  events:\n"
        "    - {time: 0.5, kind: load_step, d_P: 0.1, d_Q: -0.05}\n"
        "    - {time: 0.7, kind: parameter_change, machine: sm2, field: K_a, value: 80}\n"
        "  plant:\n"
        "    sm1: {M: 8}\n"
        "    load: {P: 0.9}\n");
    REQUIRE(c.scenario.events.size() == 2);
    CHECK(c.scenario.events[0].kind == plant::EventKind::load_step);
    CHECK(c.scenario.events[0].d_load_Q == -0.05);
    CHECK(c.scenario.events[1].machine == 1);
    CHECK(c.scenario.events[1].field == "K_a");
    CHECK(c.scenario.plant.machines[0].M == 8.0);
    CHECK(c.scenario.plant.machines[1].P_dispatch == 0.3);
    CHECK(c.scenario.plant.load_P == 0.9);
    CHECK(emit(parse(emit(c))) == emit(c));
}

TEST_CASE("hash ignores the output directory only") {
    Config a = defaults();
    Config b = a;
    b.output_dir = "elsewhere";
    CHECK(config_hash(a) == config_hash(b));
    b.seed = 2;
    CHECK(config_hash(a) != config_hash(b));
    CHECK(hash_hex(0x1f).size() == 16);
}

TEST_CASE("NN seeds derive from the controller name") {
    const Config c = defaults();
    const auto* nn = c.find_controller("nn");
    REQUIRE(nn != nullptr);
    const auto sc = c.scenario_for(*nn);
    CHECK(std::get<NnConfig>(sc.controller).seed == derive_seed(c.seed, "controller/nn"));
    CHECK(c.find_controller("missing") == nullptr);
}

TEST_CASE("doubles render in shortest round-trip form") {
    for (double x : {0.1, 1e-7, 376.99111843077515, -2.5, 1.0 / 3.0, 1e300}) {
        CHECK(std::stod(format_double(x)) == x);
    }
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(20.0) == "20");
}

TEST_SUITE_END();
