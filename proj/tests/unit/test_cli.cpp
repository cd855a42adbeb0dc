#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <sys/wait.h>

#include "drl/cli.hpp"
#include "drl/serialize.hpp"

using namespace drl;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("drl_cli_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

const std::string data_dir = DRL_TEST_DATA;
const std::string example3 = data_dir + "/example3.drl";
const std::string example5 = data_dir + "/example5.csv";

int shell(const std::string& cmd) {
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("compile writes the chain") {
    TempDir dir;
    const Run r = run({"compile", "--constraints", example3, "--out", dir / "layer.json"});
    CHECK(r.code == 0);
    CHECK(r.out.find("sat\n") != std::string::npos);
    CHECK(r.out.find("resolvents") != std::string::npos);
    const Json doc = Json::parse(slurp(dir / "layer.json"));
    CHECK(doc["chain"][3]["constraints"].size() == 2);
    CHECK(doc["chain"][0]["constraints"].empty());
}

TEST_CASE("sat and unsat verdicts") {
    TempDir dir;
    const Run u = run({"sat", "--constraints", data_dir + "/contradictory.drl"});
    CHECK(u.code == 2);
    CHECK(u.out == "unsat\nwitness: -1 >= 0\n");
    CHECK(run({"compile", "--constraints", data_dir + "/contradictory.drl"}).code == 2);
    CHECK(run({"sat", "--constraints", example3}).out == "sat\n");

    spit(dir / "empty.drl", "");
    CHECK(run({"sat", "--constraints", dir / "empty.drl"}).code == 0);
    spit(dir / "taut.drl", "x1 >= x1\nx1 >= 0 or x1 <= 0\n");
    const Run t = run({"sat", "--constraints", dir / "taut.drl"});
    CHECK(t.code == 0);
    CHECK(t.out == "sat\n");
}

TEST_CASE("check reports metrics") {
    TempDir dir;
    spit(dir / "toy.drl", "a >= 0\nb >= 0\n");
    spit(dir / "toy.csv", "a,b\n-1,1\n1,1\n");
    const Run r = run({"check", "--constraints", dir / "toy.drl", "--data", dir / "toy.csv", "--report", dir / "m.json"});
    CHECK(r.code == 0);
    const Json m = Json::parse(slurp(dir / "m.json"));
    CHECK(m["cvr"] == 50.0);
    CHECK(m["scvc"] == 25.0);
    CHECK(m["cvc"] == 50.0);
    CHECK(r.out.find("CVR") != std::string::npos);
}

TEST_CASE("refine repairs the running example") {
    TempDir dir;
    const Run r = run({"refine", "--constraints", example3, "--data", example5, "--out", dir / "out.csv", "--report",
                       dir / "report.json", "--jacobian"});
    REQUIRE(r.code == 0);
    CHECK(slurp(dir / "out.csv") == "x1,x2,x3,x4,x5\n1,2,4,6,1\n1,2,4,6,1.5\n1,2,4,6,2\n1,2,4,6,4\n1,2,4,6,5\n1,2,4,6,6\n");
    const Json rep = Json::parse(slurp(dir / "report.json"));
    CHECK(rep["changed_rows"] == 4);
    CHECK(rep["provenance"].size() == 4);
    CHECK(rep["jacobians"].size() == 6);

    const Run check = run({"check", "--constraints", example3, "--data", dir / "out.csv", "--report", dir / "m.json"});
    CHECK(check.code == 0);
    CHECK(Json::parse(slurp(dir / "m.json"))["cvr"] == 0.0);

    SUBCASE("from a compiled artifact") {
        REQUIRE(run({"compile", "--constraints", example3, "--out", dir / "layer.json"}).code == 0);
        const Run c = run({"refine", "--compiled", dir / "layer.json", "--data", example5});
        CHECK(c.code == 0);
        CHECK(c.out == slurp(dir / "out.csv"));
    }
    SUBCASE("output is deterministic across parallelism") {
        const Run a = run({"refine", "--constraints", example3, "--data", example5, "--parallelism", "3"});
        CHECK(a.out == slurp(dir / "out.csv"));
    }
}

TEST_CASE("refine leaves valid data byte-identical") {
    TempDir dir;
    const std::string text = "id,x1,x2,x3,x4,x5,note\nr1,1.0,2,4,6,5.00,\"a, b\"\nr2,0,0,0,0,0,\n";
    spit(dir / "ok.csv", text);
    const Run r = run({"refine", "--constraints", example3, "--data", dir / "ok.csv"});
    CHECK(r.code == 0);
    CHECK(r.out == text);
    spit(dir / "crlf.csv", "x1,x2,x3,x4,x5\r\n1,2,4,6,5\r\n");
    CHECK(run({"refine", "--constraints", example3, "--data", dir / "crlf.csv"}).out == "x1,x2,x3,x4,x5\n1,2,4,6,5\n");
}

TEST_CASE("numeric failures and skipped rows") {
    TempDir dir;
    // A hand-edited artifact whose chain lost the contradiction x >= 1, x <= 0.
    const std::string artifact = R"({"variables":["x"],"ordering":["x"],"epsilon":"1/1000000","chain":[{"var":"x",
        "constraints":[{"disjuncts":[{"coeffs":{"x":"1/1"},"bias":"-1/1"}]},{"disjuncts":[{"coeffs":{"x":"-1/1"},"bias":"0/1"}]}]}],
        "verdict":"sat","unsat_witness":null})";
    spit(dir / "broken.json", artifact);
    spit(dir / "x.csv", "x\n0.5\n");
    const Run r = run({"refine", "--compiled", dir / "broken.json", "--data", dir / "x.csv"});
    CHECK(r.code == 3);
    CHECK(r.err.find("row 0") != std::string::npos);
    const Run s = run({"refine", "--compiled", dir / "broken.json", "--data", dir / "x.csv", "--skip-errors",
                       "--report", dir / "r.json"});
    CHECK(s.code == 0);
    CHECK(s.out == "x\n0.5\n");
    CHECK(Json::parse(slurp(dir / "r.json"))["failures"].size() == 1);
}

TEST_CASE("orderings") {
    TempDir dir;
    const Run a = run({"order", "--data", example5, "--order", "random:7"});
    CHECK(a.code == 0);
    CHECK(a.out == run({"order", "--data", example5, "--order", "random", "--seed", "7"}).out);
    spit(dir / "order.txt", a.out);
    const Run b = run({"order", "--data", example5, "--order", "file:" + dir / "order.txt"});
    CHECK(b.out == a.out);
    CHECK(run({"order", "--data", example5, "--order", "random"}).code == 1);
    CHECK(run({"order", "--data", example5, "--order", "corr", "--real", example5}).out == "x1\nx2\nx3\nx4\nx5\n");
    CHECK(run({"compile", "--constraints", example3, "--order", "file:" + dir / "order.txt"}).code == 0);
}

TEST_CASE("usage and parse errors") {
    TempDir dir;
    CHECK(run({}).code == 1);
    CHECK(run({"frobnicate"}).code == 1);
    CHECK(run({"refine", "--constraints", example3}).code == 1);
    CHECK(run({"sat", "--constraints", dir / "missing.drl"}).code == 1);
    spit(dir / "bad.drl", "x1 >= 0\nx1 * x2 >= 0\n");
    const Run p = run({"sat", "--constraints", dir / "bad.drl"});
    CHECK(p.code == 1);
    CHECK(p.err.find("bad.drl") != std::string::npos);
    CHECK(p.err.find("2:") != std::string::npos);
    CHECK(run({"refine", "--constraints", example3, "--data", example5, "--jacobian"}).code == 1);
    CHECK(run({"sat", "--constraints", example3, "--epsilon", "-1"}).code == 1);
    spit(dir / "nan.csv", "x1,x2,x3,x4,x5\n1,2,4,6,nan\n");
    CHECK(run({"refine", "--constraints", example3, "--data", dir / "nan.csv"}).code == 1);
}

TEST_CASE("exit codes of the installed binary") {
    TempDir dir;
    const std::string bin = DRL_BINARY;
    const std::string quiet = " >" + dir / "o.txt" + " 2>" + dir / "e.txt";
    CHECK(shell(bin + " sat --constraints " + example3 + quiet) == 0);
    CHECK(shell(bin + " sat --constraints " + data_dir + "/contradictory.drl" + quiet) == 2);
    CHECK(shell(bin + " bogus" + quiet) == 1);
    CHECK(shell(bin + " refine --constraints " + example3 + " --data " + example5 + " --out " + dir / "r.csv" + quiet) == 0);
    CHECK(slurp(dir / "r.csv").find("1,2,4,6,6\n") != std::string::npos);
}
