#include <doctest.h>

#include "qlab/cli.hpp"
#include "qlab/io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using qlab::io::Json;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  Run r;
  r.code = qlab::cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string fixture(const std::string& name) { return std::string(QLAB_FIXTURES_DIR) + "/" + name; }

fs::path scratch() {
  const fs::path dir = fs::temp_directory_path() / "qlab_cli_tests";
  fs::create_directories(dir);
  return dir;
}

std::string write_file(const std::string& name, const std::string& text) {
  const fs::path p = scratch() / name;
  std::ofstream(p) << text;
  return p.string();
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json results(const Run& r) { return Json::parse(r.out).at("results"); }

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("fidelity on the orthonormal basis") {
    const Run r = run({"fidelity", fixture("basis2.json"), "--seed", "1"});
    REQUIRE(r.code == qlab::cli::kPass);
    const Json j = Json::parse(r.out);
    CHECK(j.at("tool") == "qlab");
    CHECK(j.at("seed") == 1);
    CHECK(j.at("results").at("lower").get<double>() >= 1.0 - 1e-9);
    CHECK(j.at("results").at("upper").get<double>() <= 1.0 + 5e-3);
    CHECK(r.err.find("wall time") != std::string::npos);
    CHECK(r.out.find("wall") == std::string::npos);
  }

  TEST_CASE("invalid input exits with 2") {
    CHECK(run({"fidelity", write_file("broken.json", "{\"dim\": 2, \"states\": [")}).code == qlab::cli::kInputError);
    CHECK(run({"fidelity", (scratch() / "missing.json").string()}).code == qlab::cli::kInputError);

    const Run norm = run({"fidelity", write_file("unnormalized.json", R"({"dim": 2, "states": [[[1, 0], [0, 0]], [[1, 0], [1, 0]]]})")});
    CHECK(norm.code == qlab::cli::kInputError);
    CHECK(norm.err.find("states[1]") != std::string::npos);

    const Run length = run({"fidelity", write_file("short.json", R"({"dim": 2, "states": [[[1, 0]]]})")});
    CHECK(length.code == qlab::cli::kInputError);
    CHECK(length.err.find("states[0]") != std::string::npos);

    CHECK(run({"fidelity", fixture("single_state.json")}).code == qlab::cli::kInputError);
    CHECK(run({"verify", "no-such-suite"}).code == qlab::cli::kInputError);
    CHECK(run({"verify", "thm1", "--tolerance", "1"}).code == qlab::cli::kInputError);
    CHECK(run({"frobnicate"}).code == qlab::cli::kInputError);
    CHECK(run({"fidelity"}).code == qlab::cli::kInputError);
    CHECK(run({"nu-inf", fixture("basis2.json")}).code == qlab::cli::kInputError);
    CHECK(run({"--help"}).code == qlab::cli::kPass);
    CHECK(run({"--version"}).code == qlab::cli::kPass);
  }

  TEST_CASE("failing trials exit with 1 and name their seeds") {
    const Run r = run({"verify", "lemma-eb", "--trials", "2", "--tolerance", "0"});
    CHECK(r.code == qlab::cli::kVerificationFailure);
    const Json j = results(r);
    CHECK(j.at("failed") == 2);
    CHECK(j.at("failing_seeds").size() == 2);

    const std::uint64_t seed = j.at("failing_seeds")[0].get<std::uint64_t>();
    const Run replay = run({"verify", "lemma-eb", "--replay", std::to_string(seed)});
    CHECK(replay.code == qlab::cli::kPass);
    CHECK(results(replay).at("trials")[0].at("seed") == seed);
  }

  TEST_CASE("numeric failure exits with 3") {
    const std::string huge = write_file(
        "huge.json", R"({"representation": "kraus", "in_dim": 2, "out_dim": 2,
                         "operators": [[[[1e200, 0], [0, 0]], [[0, 0], [1e200, 0]]]]})");
    const Run r = run({"nu-inf", huge, "--restarts", "2"});
    CHECK(r.code == qlab::cli::kNumericFailure);
    CHECK(r.err.find("numeric failure") != std::string::npos);
  }

  TEST_CASE("nu-inf on closed-form channels") {
    const Run id = run({"nu-inf", fixture("identity_channel.json")});
    REQUIRE(id.code == qlab::cli::kPass);
    CHECK(results(id).at("value").get<double>() == doctest::Approx(1.0).epsilon(1e-9));
    const Run dep = run({"nu-inf", fixture("depolarize_half.json")});
    REQUIRE(dep.code == qlab::cli::kPass);
    CHECK(results(dep).at("value").get<double>() == doctest::Approx(0.5).epsilon(1e-9));
  }

  TEST_CASE("quantumness command") {
    const Run basis = run({"quantumness", fixture("basis2.json"), "--starts", "1", "--max-evaluations", "10"});
    REQUIRE(basis.code == qlab::cli::kPass);
    CHECK(std::abs(results(basis).at("value_upper").get<double>() - 1.0) <= 5e-3);

    CHECK(run({"quantumness", fixture("single_state.json")}).code == qlab::cli::kInputError);
    const Run single = run({"quantumness", fixture("single_state.json"), "--allow-nonspanning", "--starts", "1"});
    REQUIRE(single.code == qlab::cli::kPass);
    CHECK(std::abs(results(single).at("value_lower").get<double>() - 1.0) <= 1e-9);

    const Run pair = run({"quantumness", fixture("pair_cos45.json")});
    REQUIRE(pair.code == qlab::cli::kPass);
    // Frozen at the first run of this build.
    CHECK(results(pair).at("value_lower").get<double>() == doctest::Approx(0.93301270189221919).epsilon(1e-6));
  }

  TEST_CASE("verify suites on bundled fixtures") {
    CHECK(run({"verify", "thm1", "--trials", "1", "--ensemble1", fixture("basis2.json"), "--ensemble2",
               fixture("basis3.json")})
              .code == qlab::cli::kPass);
    CHECK(run({"verify", "thm2", "--trials", "1", "--joint", fixture("correlated_joint.json")}).code == qlab::cli::kPass);
    CHECK(run({"verify", "appendix", "--trials", "5", "--seed", "3"}).code == qlab::cli::kPass);
    CHECK(run({"verify", "thm1", "--ensemble1", fixture("basis2.json")}).code == qlab::cli::kInputError);
  }

  TEST_CASE("json and csv outputs") {
    const fs::path json = scratch() / "report.json";
    const fs::path csv = scratch() / "trials.csv";
    const Run r = run({"verify", "appendix", "--trials", "3", "--json", json.string(), "--csv", csv.string()});
    REQUIRE(r.code == qlab::cli::kPass);
    CHECK(r.out.find("3/3 trials passed") != std::string::npos);
    const Json j = Json::parse(read_file(json));
    CHECK(j.at("results").at("passed") == 3);
    for (const Json& a : j.at("command")) CHECK(a.get<std::string>().find("trials.csv") == std::string::npos);

    std::istringstream lines(read_file(csv));
    std::string line;
    std::getline(lines, line);
    CHECK(line == "suite,trial,seed,lhs,rhs,gap,tolerance,pass");
    int rows = 0;
    while (std::getline(lines, line)) {
      CHECK(line.rfind("appendix,", 0) == 0);
      CHECK(line.substr(line.size() - 5) == ",true");
      ++rows;
    }
    CHECK(rows == 3);
  }

  TEST_CASE("reports are byte-identical on rerun") {
    const std::vector<std::vector<std::string>> commands{
        {"fidelity", fixture("trine.json"), "--seed", "7"},
        {"nu-inf", fixture("random_eb.json"), "--seed", "4"},
        {"verify", "lemma-eb", "--trials", "2", "--seed", "5"},
    };
    for (const auto& c : commands) {
      const Run a = run(c);
      const Run b = run(c);
      REQUIRE(a.code == qlab::cli::kPass);
      CHECK(a.out == b.out);
    }
    const fs::path j1 = scratch() / "a.json";
    const fs::path j2 = scratch() / "b.json";
    run({"nu-inf", fixture("random_eb.json"), "--json", j1.string()});
    run({"nu-inf", fixture("random_eb.json"), "--json", j2.string()});
    CHECK(read_file(j1) == read_file(j2));
  }
}
