#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>

#include "drl/compiler.hpp"
#include "drl/csv.hpp"
#include "drl/errors.hpp"
#include "drl/serialize.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace drl;
using namespace drl::testing;

namespace {

VariableBinding names5() {
    return VariableBinding({"x1", "x2", "x3", "x4", "x5"}, VariableBinding::Source::declared);
}

}  // namespace

TEST_CASE("csv reading") {
    const CsvTable t = read_csv("\xEF\xBB\xBF" "a,\"b,c\",d\r\n1,\"say \"\"hi\"\"\",3\r\n\r\n4,5,6");
    CHECK(t.header_names() == std::vector<std::string>{"a", "b,c", "d"});
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0][1].value == "say \"hi\"");
    CHECK(t.rows[0][1].raw == "\"say \"\"hi\"\"\"");
    CHECK(t.rows[1][2].value == "6");

    const CsvTable multiline = read_csv("a,b\n\"x\ny\",2\n");
    CHECK(multiline.rows[0][0].value == "x\ny");

    try {
        read_csv("a,b\n1,2\n3\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(read_csv("a,b\n\"1,2\n"), ParseError);
    CHECK_THROWS_AS(read_csv(""), ParseError);
    CHECK_THROWS_AS(read_csv("a,b\n\"1\"x,2\n"), ParseError);
}

TEST_CASE("csv passthrough is byte identical") {
    const std::string text = "id,x,\"y, z\"\n7, 1.50 ,\"2\"\nq,1e3,-0.0\n";
    CHECK(write_csv(read_csv(text)) == text);
    CHECK(write_csv(read_csv("a,b\r\n1,2\r\n")) == "a,b\n1,2\n");
    CHECK(write_csv(read_csv("a,b\n1,2")) == "a,b\n1,2\n");
}

TEST_CASE("csv binding and numeric conversion") {
    CsvTable t = read_csv("id,x2,x1\nr1, 1.5 ,2\nr2,-3,1e-2\n");
    const VariableBinding b({"x1", "x2"}, VariableBinding::Source::declared);
    const auto cols = bind_columns(t, b);
    CHECK(cols == std::vector<std::size_t>{2, 1});
    const Matrix m = to_matrix(t, cols);
    CHECK(m.values == std::vector<double>{2, 1.5, 0.01, -3});

    Matrix updated = m;
    updated(0, 1) = 0.1;
    CHECK(apply_matrix(t, cols, m, updated) == 1);
    CHECK(write_csv(t) == "id,x2,x1\nr1,0.1,2\nr2,-3,1e-2\n");

    CHECK_THROWS_AS(bind_columns(t, VariableBinding({"x3"}, VariableBinding::Source::declared)), DimensionMismatch);
    CHECK_THROWS_AS(bind_columns(read_csv("x1,x1\n1,2\n"), b), ParseError);
    CHECK_THROWS_AS(to_matrix(read_csv("x1\nabc\n"), std::vector<std::size_t>{0}), ParseError);
    CHECK_THROWS_AS(to_matrix(read_csv("x1\n\n1\n\"\"\n"), std::vector<std::size_t>{0}), ParseError);
}

TEST_CASE("double formatting round-trips") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(4) == "4");
    CHECK(format_double(-2.5) == "-2.5");
    Rng rng(79);
    for (int i = 0; i < 10000; ++i) {
        const double v = std::ldexp(uniform_real(rng, -1, 1), uniform_int(rng, -60, 60));
        const double back = std::stod(format_double(v));
        CHECK(std::bit_cast<std::uint64_t>(back) == std::bit_cast<std::uint64_t>(v));
    }
    CHECK(csv_quote("a,b") == "\"a,b\"");
    CHECK(csv_quote("q\"") == "\"q\"\"\"");
    CHECK(csv_quote("plain") == "plain");
}

TEST_CASE("layer artifacts") {
    const CompiledLayer layer = compile(example3(), identity_ordering(5));
    const Json doc = layer_to_json(layer, names5(), Rational(1, 1000000));
    CHECK(doc["ordering"] == Json::array({"x1", "x2", "x3", "x4", "x5"}));
    CHECK(doc["epsilon"] == "1/1000000");
    CHECK(doc["verdict"] == "sat");
    CHECK(doc["unsat_witness"].is_null());
    REQUIRE(doc["chain"].size() == 5);
    CHECK(doc["chain"][4]["var"] == "x5");
    CHECK(doc["chain"][3]["constraints"].size() == 2);
    for (int i = 0; i < 3; ++i) CHECK(doc["chain"][i]["constraints"].empty());
    CHECK(doc["chain"][4]["constraints"][0]["disjuncts"][0]["bias"].is_string());

    SUBCASE("reload") {
        const LayerArtifact back = load_layer(dump_layer(layer, names5(), Rational(1, 1000000)));
        CHECK(back.binding == names5());
        CHECK(back.epsilon == Rational(1, 1000000));
        CHECK(back.layer.ordering() == layer.ordering());
        for (std::size_t i = 0; i < layer.level_count(); ++i) CHECK(back.layer.level(i) == layer.level(i));
        CHECK(dump_layer(back.layer, back.binding, back.epsilon) == dump_layer(layer, names5(), Rational(1, 1000000)));
    }
    SUBCASE("determinism") {
        Rng rng(83);
        SetShape shape;
        shape.dimension = 5;
        shape.max_vars_per_disjunct = 2;
        for (int i = 0; i < 50; ++i) {
            const ConstraintSet s = random_set(rng, shape);
            const std::vector<VarIndex> order = ordering_random(5, static_cast<std::uint64_t>(i)).permutation;
            const std::string a = dump_layer(compile(s, order), names5(), Rational(1, 1000000));
            const std::string b = dump_layer(compile(s, order), names5(), Rational(1, 1000000));
            CHECK(a == b);
            CHECK(dump_layer(load_layer(a).layer, names5(), Rational(1, 1000000)) == a);
        }
    }
    SUBCASE("unsat layers") {
        const ConstraintSet s = set_of(1, {clause({ge0(var(0) - constant(1))}), clause({ge0(-var(0))})});
        const VariableBinding b({"x"}, VariableBinding::Source::declared);
        const Json u = layer_to_json(compile(s, identity_ordering(1)), b, Rational(1, 1000000));
        CHECK(u["verdict"] == "unsat");
        CHECK(u["unsat_witness"]["disjuncts"][0]["bias"] == "-1/1");
        CHECK_FALSE(load_layer(u.dump()).layer.satisfiable());
    }
    SUBCASE("malformed documents") {
        Json bad = doc;
        bad["chain"][3]["constraints"][1]["disjuncts"][0]["bias"] = 0.5;
        CHECK_THROWS_AS(layer_from_json(bad), Error);
        Json unknown = doc;
        unknown["chain"][3]["constraints"][1]["disjuncts"][0]["coeffs"]["zz"] = "1/1";
        CHECK_THROWS_AS(layer_from_json(unknown), Error);
        Json leak = doc;
        leak["chain"][0]["constraints"] = doc["chain"][3]["constraints"];
        CHECK_THROWS(layer_from_json(leak));
        CHECK_THROWS(load_layer("{"));
        Json verdict = doc;
        verdict["verdict"] = "maybe";
        CHECK_THROWS_AS(layer_from_json(verdict), Error);
    }
}

TEST_CASE("ordering files") {
    const VariableBinding b = names5();
    const std::vector<VarIndex> p = {4, 0, 3, 1, 2};
    CHECK(ordering_to_text(p, b) == "x5\nx1\nx4\nx2\nx3\n");
    CHECK(ordering_from_text(ordering_to_text(p, b), b) == p);
    CHECK(ordering_from_text("x5, x1 x4\tx2,x3", b) == p);
    CHECK(ordering_from_text(R"(["x5","x1","x4","x2","x3"])", b) == p);
    CHECK_THROWS_AS(ordering_from_text("x5 x1 x4 x2", b), Error);
    CHECK_THROWS_AS(ordering_from_text("x5 x1 x4 x2 x2", b), Error);
    CHECK_THROWS_AS(ordering_from_text("x5 x1 x4 x2 x9", b), Error);
}

TEST_CASE("metrics and provenance documents") {
    MetricsReport m;
    m.cvr = 50;
    m.per_constraint_violation_counts = {1, 0};
    const Json j = metrics_to_json(m);
    CHECK(j["cvr"] == 50.0);
    CHECK(j["per_constraint_violation_counts"] == Json::array({1, 0}));

    const CompiledLayer layer = compile(example3(), identity_ordering(5));
    std::vector<std::vector<Provenance>> prov(2, std::vector<Provenance>(5, Provenance{Action::kept, {}, {}}));
    prov[1][4] = Provenance{Action::snapped_right, 0, 1};
    const Json p = provenance_to_json(prov, names5(), layer);
    REQUIRE(p.size() == 1);
    CHECK(p[0]["row"] == 1);
    CHECK(p[0]["var"] == "x5");
    CHECK(p[0]["action"] == "snapped_right");
    CHECK(p[0]["source_constraint_index"] == 0);
}
