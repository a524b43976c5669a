#include <doctest.h>

#include <fstream>

#include "threshold/config.hpp"

using namespace thr;
using thr::config::Json;

namespace {

Json parse(const char* text) { return Json::parse(text); }

}  // namespace

TEST_CASE("typed accessors name the offending path") {
    const Json j = parse(R"({"grid": {"n": "many", "rmin": 0.1}, "xs": [1, "a"]})");
    CHECK_THROWS_WITH_AS(config::integer(j["grid"], "n", "operator.grid"),
                         doctest::Contains("operator.grid.n"), ValidationError);
    CHECK_THROWS_WITH_AS(config::number(j["grid"], "rmax", "operator.grid"),
                         doctest::Contains("missing required key"), ValidationError);
    CHECK_THROWS_WITH_AS(config::numbers(j, "xs", "root"), doctest::Contains("xs[1]"), ValidationError);
    CHECK(config::number_or(j["grid"], "rmax", 7.0, "g") == 7.0);
    CHECK(config::number(j["grid"], "rmin", "g") == 0.1);
    CHECK_THROWS_AS(config::matrix(parse("[[1, 2], [3]]"), "m"), ValidationError);
    CHECK(config::matrix(parse("[[1, 2], [3, 4]]"), "m")(1, 0) == 3.0);
}

TEST_CASE("grids") {
    CHECK(config::parse_grid(Json(), "g").size() == RadialGrid::default_grid().size());
    const RadialGrid u = config::parse_grid(parse(R"({"type": "uniform", "n": 11, "rmin": 1, "rmax": 2})"), "g");
    CHECK(u.size() == 11);
    CHECK(u.r()[10] == doctest::Approx(2.0));
    const RadialGrid p =
        config::parse_grid(parse(R"({"type": "panels", "breaks": [0, 1], "rmax": 10, "weight_s": 1.4})"), "g");
    CHECK(p.weight_s == 1.4);
    CHECK(p.rmax() == doctest::Approx(10.0));
    CHECK_THROWS_WITH_AS(config::parse_grid(parse(R"({"type": "cubic"})"), "op.grid"),
                         doctest::Contains("op.grid.type"), ValidationError);
    CHECK_THROWS_WITH_AS(config::parse_grid(parse(R"({"weight_s": 0.5})"), "op.grid"),
                         doctest::Contains("op.grid.weight_s"), ValidationError);
    CHECK_THROWS_AS(config::parse_grid(parse(R"({"type": "log", "rmin": 2, "rmax": 1})"), "g"), ValidationError);
}

TEST_CASE("profiles") {
    const auto well = config::parse_profile(parse(R"({"profile": "square_well", "depth": 2, "radius": 1.5})"), "p");
    CHECK(well(1.0) == -2.0);
    CHECK(well(2.0) == 0.0);
    const auto gauss = config::parse_profile(parse(R"({"profile": "gaussian", "depth": 1, "width": 2})"), "p");
    CHECK(gauss(2.0) == doctest::Approx(-std::exp(-1.0)));
    const auto expo = config::parse_profile(parse(R"({"profile": "exponential", "depth": 3, "range": 0.5})"), "p");
    CHECK(expo(1.0) == doctest::Approx(-3.0 * std::exp(-2.0)));
    CHECK_THROWS_WITH_AS(config::parse_profile(parse(R"({"profile": "yukawa"})"), "op.local[0]"),
                         doctest::Contains("op.local[0].profile"), ValidationError);
    CHECK_THROWS_AS(config::parse_profile(parse(R"({"profile": "gaussian", "depth": 1, "width": -1})"), "p"),
                    ValidationError);
}

TEST_CASE("operators") {
    SUBCASE("critical coupling of a square well") {
        const EffectiveOperator op = config::parse_operator(parse(R"({
            "grid": {"type": "panels", "breaks": [0, 1], "rmax": 30},
            "local": [{"profile": "square_well", "depth": 1, "radius": 1}],
            "coupling": "critical"})"), "operator");
        CHECK(op.W[0](0, 0) == doctest::Approx(-kPi * kPi / 4.0).epsilon(1e-6));
        CHECK(classify(op).kase == ThresholdCase::Exceptional1);
    }
    SUBCASE("separable profile orthogonal to r") {
        const EffectiveOperator op = config::parse_operator(parse(R"({
            "grid": {"type": "panels", "breaks": [0, 1], "rmax": 30},
            "separable": [{"power": 2, "width": 1.0, "orthogonal_to_r": true}],
            "eigen_decay_t": 10})"), "operator");
        CHECK(op.profiles.cols() == 1);
        cdouble pr = 0.0;
        for (int i = 0; i < op.n(); ++i) pr += op.grid.w()[i] * op.grid.r()[i] * op.profiles(i, 0);
        CHECK(std::abs(pr) < 1e-13);
        CHECK(op.eigen_decay_t.value() == 10.0);
        CHECK(classify(op).kase == ThresholdCase::Exceptional2);
    }
    SUBCASE("two channels with a coupling matrix and U1") {
        const EffectiveOperator op = config::parse_operator(parse(R"({
            "channels": 2,
            "local": [{"profile": "gaussian", "depth": 1, "width": 1, "matrix": [[1, 0.5], [0.5, 2]]}],
            "U1": [{"profile": "gaussian", "depth": 0.1, "width": 1}],
            "decay_class": "critical", "rho0": 2})"), "operator");
        CHECK(op.m == 2);
        CHECK(op.has_U1());
        CHECK(op.decay == DecayClass::Critical);
        CHECK(op.W[0](0, 1) == doctest::Approx(0.5 * op.W[0](0, 0)));
    }
    SUBCASE("errors") {
        CHECK_THROWS_WITH_AS(config::parse_operator(parse(R"({"channels": 9})"), "operator"),
                             doctest::Contains("operator.channels"), ValidationError);
        CHECK_THROWS_WITH_AS(
            config::parse_operator(parse(R"({"channels": 2, "local": [{"profile": "gaussian", "depth": 1,
                "width": 1, "matrix": [[1, 0], [1, 1]]}]})"), "operator"),
            doctest::Contains("symmetric"), ValidationError);
        CHECK_THROWS_WITH_AS(config::parse_operator(parse(R"({"separable": [{"power": 1, "width": 1,
                "orthogonal_to_r": true}]})"), "operator"),
                             doctest::Contains("operator.separable[0].power"), ValidationError);
        CHECK_THROWS_AS(config::parse_operator(parse(R"({"decay_class": "slow"})"), "operator"), ValidationError);
        CHECK_THROWS_AS(config::parse_operator(parse(R"({"rho0": 1.5})"), "operator"), ValidationError);
    }
}

TEST_CASE("systems, bound states and channels") {
    const ParticleSystem sys = config::parse_system(parse(R"({"masses": [1, 2, 3], "charges": [1, -1, 0]})"), "system");
    CHECK(sys.masses.size() == 3);
    CHECK_FALSE(sys.nuclei.has_value());

    const BoundState h = config::parse_bound_state(
        parse(R"({"type": "hydrogenic", "bohr_radius": 0.5, "orbital": [{"n": 2, "l": 1, "m": 0}]})"), "b", ".");
    CHECK(h.kind == BoundState::Kind::Hydrogenic);
    CHECK(h.bohr_radius == 0.5);
    CHECK(h.orbital[0].l == 1);
    CHECK_THROWS_WITH_AS(config::parse_bound_state(
                             parse(R"({"type": "hydrogenic", "orbital": [{"n": 1, "l": 1, "m": 0}]})"), "b", "."),
                         doctest::Contains("l < n"), ValidationError);

    const BoundState t = config::parse_bound_state(
        parse(R"({"type": "tabulated", "orbital": [{"n": 1, "l": 0, "m": 0}], "r": [0, 1, 2], "R": [[2, 1, 0.5]]})"),
        "b", ".");
    CHECK(t.table_r.size() == 3);
    CHECK(t.table_R[0][1] == 1.0);
    CHECK_THROWS_AS(config::parse_bound_state(parse(R"({"type": "tabulated", "orbital": [{"n": 1, "l": 0, "m": 0}],
        "r": [0, 1], "R": [[2, "x"]]})"), "b", "."),
                    ValidationError);

    const BoundState mo = config::parse_bound_state(parse(R"({"type": "moments", "dipole": [0, 0, 1.5]})"), "b", ".");
    CHECK(mo.dipole.z() == 1.5);

    const auto chans = config::parse_channels(parse(R"([{"clusters": [[0, 1], [2]], "lambda0": -0.5,
        "bound_state": {"cluster1": [{"type": "hydrogenic", "orbital": [{"n": 1, "l": 0, "m": 0}]},
                                     {"type": "hydrogenic", "orbital": [{"n": 2, "l": 0, "m": 0}]}]}}])"),
                                              "channels", ".");
    REQUIRE(chans.size() == 1);
    CHECK(chans[0].multiplicity() == 2);
    CHECK(chans[0].states2[0].kind == BoundState::Kind::Point);
    CHECK(chans[0].states1[1].particles == std::vector<int>{0, 1});
    CHECK_THROWS_WITH_AS(config::parse_channels(parse(R"([{"clusters": [[0]], "lambda0": -1, "bound_state": {}}])"),
                                                "channels", "."),
                         doctest::Contains("channels[0].clusters"), ValidationError);
}

TEST_CASE("angular operators") {
    const AngularOperator f = config::parse_angular(parse(R"({"n": 4, "m": 2})"), "angular");
    CHECK(f.n == 4);
    CHECK(f.m == 2);
    CHECK(f.is_constant());
    const AngularOperator c = config::parse_angular(parse(R"({"q": {"constant": [[0.3]]}})"), "angular");
    CHECK(std::abs(c.coeffs[0](0, 0)) > 0.0);
    const AngularOperator d =
        config::parse_angular(parse(R"({"q": {"L": 1, "coefficients": [[[0]], [[0]], [[0.2]], [[0]]]}})"), "angular");
    CHECK_FALSE(d.is_constant());
    CHECK_THROWS_WITH_AS(config::parse_angular(parse(R"({"q": {"L": 1, "coefficients": [[[0]]]}})"), "angular"),
                         doctest::Contains("angular.q.coefficients"), ValidationError);
    CHECK_THROWS_AS(
        config::parse_angular(parse(R"({"n": 4, "q": {"L": 1, "coefficients": [[[0]], [[0]], [[0.2]], [[0]]]}})"),
                              "angular"),
        ValidationError);
}

TEST_CASE("load reports missing files and syntax errors") {
    CHECK_THROWS_WITH_AS(config::load("/nonexistent/scenario.json"), doctest::Contains("cannot open"), ValidationError);
    const auto tmp = std::filesystem::temp_directory_path() / "thr_config_bad.json";
    {
        std::ofstream out(tmp);
        out << "{\"command\": ";
    }
    CHECK_THROWS_AS(config::load(tmp), ValidationError);
    std::filesystem::remove(tmp);
}
