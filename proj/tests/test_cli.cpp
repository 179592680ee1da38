#include <doctest.h>

#include "heightlab/cli.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

using namespace heightlab;
using nlohmann::json;

namespace {

std::string family(const std::string& name) { return std::string(HEIGHTLAB_DATA) + "/families/" + name; }

std::string temp_file(const std::string& name, const std::string& text) {
    auto p = std::filesystem::temp_directory_path() / ("heightlab_test_" + name);
    std::ofstream(p) << text;
    return p.string();
}

RunConfig config(Command c, const std::string& fam) {
    RunConfig cfg;
    cfg.command = c;
    cfg.family_path = family(fam);
    return cfg;
}

// Every floating value sits in an object tagged exact or carrying an uncertainty.
bool floats_annotated(const json& j, bool covered = false) {
    if (j.is_object()) {
        bool here = (j.contains("tag") && j["tag"] == "exact") || j.contains("uncertainty");
        for (auto& [k, v] : j.items())
            if (!floats_annotated(v, covered || here)) return false;
        return true;
    }
    if (j.is_array()) {
        for (auto& v : j)
            if (!floats_annotated(v, covered)) return false;
        return true;
    }
    return !j.is_number_float() || covered;
}

int shell(const std::string& cmd) {
    int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("command names") {
    for (auto& n : command_names()) CHECK(command_name(parse_command(n)) == n);
    CHECK(command_names().size() == 9);
    CHECK_THROWS_AS(parse_command("plot"), std::invalid_argument);
}

TEST_CASE("lambda on the word [1,2,3] family") {
    auto r = evaluate(config(Command::Lambda, "seed7.json"));
    REQUIRE(r.exit_code == kExitOk);
    auto j = json::parse(r.text);
    CHECK(j["salem_factor"]["value"] == "x^2 - 18*x + 1");
    CHECK(j["lambda_plus"]["value"].get<double>() == doctest::Approx(9 + 4 * std::sqrt(5.0)).epsilon(1e-15));
    CHECK(j["lambda_plus"]["uncertainty"].get<double>() < 1e-29);
    CHECK(j["lambda_equal_exactly"] == true);
    CHECK(floats_annotated(j));
}

TEST_CASE("lambda on the word [1,2] family reports a unipotent map") {
    auto r = evaluate(config(Command::Lambda, "word12.json"));
    REQUIRE(r.exit_code == kExitOk);
    auto j = json::parse(r.text);
    CHECK(j["charpoly"]["value"] == "x^3 - 3*x^2 + 3*x - 1");
    CHECK(j["hyperbolic"] == false);
    // the height commands refuse it
    CHECK(evaluate(config(Command::Eigendivisors, "word12.json")).exit_code == kExitValidation);
}

TEST_CASE("eigendivisors") {
    auto r = evaluate(config(Command::Eigendivisors, "seed7.json"));
    REQUIRE(r.exit_code == kExitOk);
    auto j = json::parse(r.text);
    CHECK(j["d_plus_squared"]["algebraic"] == "0");
    CHECK(j["d_minus_squared"]["algebraic"] == "0");
    CHECK(j["certificate"]["big_and_nef"] == true);
    CHECK(j["certificate"]["self_intersection"]["value"].get<double>() > 0);
    CHECK(floats_annotated(j));
}

TEST_CASE("periodic-classes carries its label") {
    auto cfg = config(Command::PeriodicClasses, "seed7.json");
    cfg.max_n = 3;
    cfg.max_period = 4;
    auto j = json::parse(evaluate(cfg).text);
    CHECK(j["label"].get<std::string>().find("semi-decision") == 0);
    CHECK(j["orbits"].is_array());
}

TEST_CASE("classify the periodic family") {
    auto cfg = config(Command::Classify, "seed7.json");
    cfg.max_n = 3;
    auto r = evaluate(cfg);
    REQUIRE(r.exit_code == kExitOk);
    auto j = json::parse(r.text);
    CHECK(j["sections"][0]["verdict"]["tag"] == "periodic");
    CHECK(j["sections"][0]["verdict"]["period"] == 2);
    CHECK(j["sections"][1]["verdict"]["tag"] == "unstable");
    CHECK(floats_annotated(j));
}

TEST_CASE("height report shape") {
    auto cfg = config(Command::Height, "seed7.json");
    cfg.max_n = 2;
    auto j = json::parse(evaluate(cfg).text);
    auto& s0 = j["sections"][0];
    for (auto key : {"h_plus", "h_minus", "error_bound", "verdict", "alpha"}) CHECK(s0.contains(key));
    CHECK(s0["h_plus"]["value"] == 0.0);
    CHECK(s0["alpha"]["point"]["tag"] == "exact");
    CHECK(s0["alpha"]["point"]["value"] == 1.0);
    CHECK(j["sections"][1]["h_plus"]["sequence"].size() == 3);
    CHECK(floats_annotated(j));
}

TEST_CASE("iterate is deterministic and CSV-free") {
    auto cfg = config(Command::Iterate, "seed7.json");
    cfg.max_n = 2;
    auto a = evaluate(cfg), b = evaluate(cfg);
    CHECK(a.text == b.text);
    auto j = json::parse(a.text);
    CHECK(j["sections"][1]["forward"][2]["value"] == json({24, 64, 168}));
    CHECK(j["sections"][1]["forward"][2]["tag"] == "exact");
}

TEST_CASE("green command") {
    auto cfg = config(Command::Green, "seed7.json");
    cfg.grid = 16;
    cfg.depth = 12;
    auto r = evaluate(cfg);
    REQUIRE(r.exit_code == kExitOk);
    auto j = json::parse(r.text);
    CHECK(j["samples"] == 100);
    CHECK(j["fraction_ratio_within_10pct"]["value"].get<double>() >= 0.9);
    CHECK(j["fraction_invariance_below_1e-3"]["value"].get<double>() >= 0.95);
    CHECK(floats_annotated(j));
    cfg.output = "profile.csv";
    auto csv = evaluate(cfg).text;
    CHECK(csv.rfind("section,t_re,t_im,phi,tail\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 3 * 16);
}

TEST_CASE("validation exits") {
    SUBCASE("section off the surface") {
        std::ifstream in(family("seed7.json"));
        json j = json::parse(in);
        j["sections"][0] = json::parse(R"([["1", "1"], ["1", "1"], ["1", "1"]])");
        RunConfig cfg;
        cfg.command = Command::Height;
        cfg.family_path = temp_file("offsurface.json", j.dump());
        auto r = evaluate(cfg);
        CHECK(r.exit_code == kExitValidation);
        CHECK(r.message == "section 0 not on surface");
    }
    SUBCASE("malformed polynomial") {
        RunConfig cfg;
        cfg.family_path = temp_file("bad.json", R"({"coeffs":{"222":"1 + (t"},"word":[1,2,3],"sections":[]})");
        auto r = evaluate(cfg);
        CHECK(r.exit_code == kExitValidation);
        CHECK(r.message.find("position") != std::string::npos);
    }
    SUBCASE("missing file and bad bounds") {
        CHECK(evaluate(config(Command::Lambda, "nope.json")).exit_code == kExitValidation);
        auto cfg = config(Command::Height, "seed7.json");
        cfg.max_n = 0;
        CHECK(evaluate(cfg).exit_code == kExitValidation);
        cfg = config(Command::MassCheck, "seed7.json");
        cfg.r1 = 10;
        cfg.r2 = 5;
        CHECK(evaluate(cfg).exit_code == kExitValidation);
    }
}

TEST_CASE("degenerate iteration exits 3") {
    auto cfg = config(Command::Iterate, "degenerate.json");
    cfg.max_n = 2;
    auto r = evaluate(cfg);
    CHECK(r.exit_code == kExitDegenerate);
    CHECK(r.message.find("degenerate") != std::string::npos);
}

TEST_CASE("strict mode turns inconclusive reports into exit 4") {
    auto cfg = config(Command::MassCheck, "seed7.json");
    cfg.max_n = 2;
    cfg.depth = 1;
    cfg.grid = 64;
    auto r = evaluate(cfg);
    CHECK(r.exit_code == kExitOk);
    CHECK(json::parse(r.text)["inconclusive"] == true);
    cfg.strict = true;
    CHECK(evaluate(cfg).exit_code == kExitInconclusive);
}

TEST_CASE("binary front end") {
    std::string bin = HEIGHTLAB_CLI;
    auto out = (std::filesystem::temp_directory_path() / "heightlab_test_lambda.json").string();
    CHECK(shell(bin + " lambda --family " + family("seed7.json") + " --out " + out) == 0);
    std::ifstream in(out);
    CHECK(json::parse(in)["command"] == "lambda");
    CHECK(shell(bin + " nonsense --family x 2>/dev/null") == 2);
    CHECK(shell(bin + " lambda 2>/dev/null") == 2);
    CHECK(shell(bin + " mass-check --family " + family("seed7.json") + " --radii 5 2>/dev/null") == 2);
}
