#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <json.hpp>

#include "parrondo/cli.hpp"
#include "parrondo/errors.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace parrondo;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

json run_json(const std::vector<std::string>& args) {
  const Run r = run(args);
  REQUIRE(r.code == kExitOk);
  return json::parse(r.out);
}

}  // namespace

TEST_CASE("rational parsing") {
  const Rational a = parse_rational("4/25");
  CHECK(a.num == 4);
  CHECK(a.den == 25);
  const Rational b = parse_rational("0.16");
  CHECK(b.num == 4);
  CHECK(b.den == 25);
  CHECK(parse_rational("1").value() == 1.0);
  CHECK(parse_rational("-1/2").value() == -0.5);
  CHECK(parse_rational("3.5/7").value() == 0.5);
  CHECK(parse_rational("6/8").den == 4);
  CHECK_THROWS_AS((void)parse_rational("1/0"), UsageError);
  CHECK_THROWS_AS((void)parse_rational(""), UsageError);
  CHECK_THROWS_AS((void)parse_rational("abc"), UsageError);
  CHECK_THROWS_AS((void)parse_rational("1/2/3"), UsageError);
  CHECK_THROWS_AS((void)parse_rational("0.1.2"), UsageError);
}

TEST_CASE("mean of the xie mixture for N = 3") {
  const json j = run_json({"mean", "--N", "3", "--mix", "1/2"});
  CHECK(j["result"]["mu_sig6"] == "-0.0766158");
  CHECK(j["config"]["p_exact"][1] == "4/25");
  CHECK(j["config"]["group"] == "dihedral");
}

TEST_CASE("mean for pure B, patterns and groups") {
  const json b = run_json({"mean", "--N", "6", "--game", "B", "--variance"});
  CHECK(b["result"]["mu_sig6"] == "-0.0189247");
  CHECK(b["result"].contains("sigma2"));
  const json fair = run_json({"mean", "--N", "5", "--p", "1/2,1/2,1/2,1/2", "--pattern", "1,1"});
  CHECK(std::abs(fair["result"]["mu"].get<double>()) <= 1e-14);
  const json none = run_json({"mean", "--N", "6", "--mix", "1/2", "--group", "none"});
  const json cyc = run_json({"mean", "--N", "6", "--mix", "1/2", "--group", "cyclic"});
  CHECK(none["result"]["mu_sig6"] == "0.00671656");
  CHECK(cyc["result"]["mu_sig6"] == "0.00671656");
  CHECK(none["result"]["reduced_dim"] == 64);
  CHECK(cyc["result"]["reduced_dim"] == 14);
  const json toral = run_json({"mean", "--family", "toral", "--N", "6", "--pattern", "2,2"});
  CHECK(toral["result"]["mu_sig6"] == "0.00498178");
}

TEST_CASE("capital-dependent fixtures") {
  const json c = run_json({"mean", "--fixture", "capital-C", "--variance"});
  CHECK(c["result"]["mu_sig6"] == "0.0253879");
  CHECK(c["result"]["sigma2_sig6"] == "0.873492");
  const json p = run_json({"mean", "--fixture", "capital", "--pattern", "2,2", "--variance"});
  CHECK(p["result"]["mu_sig6"] == "0.0245399");
  CHECK(p["result"]["sigma2_sig6"] == "0.875824");
  CHECK(run({"mean", "--fixture", "capital-D"}).code == kExitUsage);
  CHECK(run({"mean", "--fixture", "capital", "--game", "A'"}).code == kExitUsage);
}

TEST_CASE("table command") {
  const json j = run_json({"table", "--family", "toral", "--Ns", "3,6,9"});
  const auto& rows = j["result"]["rows"];
  REQUIRE(rows.size() == 3);
  CHECK(rows[0]["N"] == 3);
  CHECK(rows[0]["cells"][0]["sig6"] == "-0.0909091");
  CHECK(rows[0]["cells"][0]["column"] == "B");
  CHECK(rows[1]["cells"][5]["column"] == "AABB");
  CHECK(rows[1]["cells"][5]["sig6"] == "0.00498178");
  CHECK(j["result"]["stabilization"]["B"]["stabilized"] == false);
  const Run csv = run({"table", "--family", "toral", "--Ns", "3", "--output", "csv"});
  CHECK(csv.out.rfind("# config ", 0) == 0);
  CHECK(csv.out.find("\nN,B,1/2(A+B),AB,ABB,AAB,AABB\n") != std::string::npos);
  CHECK(csv.out.find("3,-0.0909091,-0.0183774,-0.00695879,-0.0274821,0.000672486,-0.0148718") !=
        std::string::npos);
  CHECK(run({"table", "--Ns", "2"}).code == kExitUsage);
}

TEST_CASE("sweep command") {
  const json j = run_json({"sweep", "--N", "4", "--grid-step", "1/2"});
  CHECK(j["result"]["points"].size() == 27);
  const auto& counts = j["result"]["counts"];
  CHECK(counts["parrondo"].get<int>() + counts["anti_parrondo"].get<int>() +
            counts["neither"].get<int>() ==
        27);
  CHECK(j["result"]["flagged"].get<int>() > 0);
  const Run csv = run({"sweep", "--N", "4", "--grid-step", "0.5", "--output", "csv"});
  CHECK(csv.out.find("\np0,p1,p2,mu_B,mu_combined,class\n") != std::string::npos);
  CHECK(run({"sweep", "--N", "4"}).code == kExitUsage);
  CHECK(run({"sweep", "--N", "4", "--grid-step", "0.3"}).code == kExitUsage);
}

TEST_CASE("volume command") {
  const json j = run_json({"volume", "--gamma", "1/2", "--dims", "3", "--samples", "200000"});
  CHECK(std::abs(j["result"]["volume"].get<double>() - 0.75) <= 0.01);
  CHECK(j["config"]["seed"] == 1);
  CHECK(run({"volume", "--gamma", "1/2", "--samples", "10"}).code == kExitUsage);
}

TEST_CASE("simulate command") {
  const std::vector<std::string> args{"simulate", "--N", "3", "--game", "B",
                                      "--turns", "20000", "--seed", "4"};
  const Run a = run(args);
  const Run b = run(args);
  REQUIRE(a.code == kExitOk);
  CHECK(a.out == b.out);
  const json j = json::parse(a.out);
  CHECK(j["result"]["n"] == 20000);
  CHECK(j["result"]["seed"] == 4);
  CHECK(run({"simulate", "--N", "3", "--game", "B", "--turns", "100"}).code == kExitUsage);
  CHECK(run({"simulate", "--N", "3", "--game", "B", "--seed", "1"}).code == kExitUsage);
}

TEST_CASE("reduce-info command") {
  const json j = run_json({"reduce-info", "--N", "4"});
  CHECK(j["result"]["classes"] == 6);
  CHECK(j["result"]["counts_agree"] == true);
  const json d = run_json({"reduce-info", "--N", "18", "--group", "dihedral"});
  CHECK(d["result"]["classes"] == 7685);
  const json l = run_json({"reduce-info", "--N", "4", "--list"});
  CHECK(l["result"].contains("class_list"));
}

TEST_CASE("usage and solver exit codes") {
  CHECK(run({}).code == kExitUsage);
  CHECK(run({"bogus"}).code == kExitUsage);
  CHECK(run({"mean", "--p", "1,2"}).code == kExitUsage);
  CHECK(run({"mean", "--p", "1,0.5,0.5,1.5"}).code == kExitUsage);
  CHECK(run({"mean", "--N", "2"}).code == kExitUsage);
  CHECK(run({"mean", "--mix", "1/2", "--pattern", "1,1"}).code == kExitUsage);
  CHECK(run({"mean", "--output", "xml"}).code == kExitUsage);
  const Run r = run({"mean", "--N", "4", "--p", "0,1/2,1/2,1", "--game", "B"});
  CHECK(r.code == kExitSolver);
  CHECK(r.err.find("closed classes") != std::string::npos);
}

TEST_CASE("JSON output is canonical and deterministic") {
  for (const auto& args : std::vector<std::vector<std::string>>{
           {"mean", "--N", "5", "--pattern", "2,1", "--variance"},
           {"table", "--Ns", "3,4,5"},
           {"volume", "--gamma", "0.4", "--samples", "100000", "--seed", "9"},
           {"reduce-info", "--N", "7", "--group", "dihedral"}}) {
    const Run a = run(args);
    REQUIRE(a.code == kExitOk);
    CHECK(json::parse(a.out).dump(2) + "\n" == a.out);
    CHECK(run(args).out == a.out);
  }
}

TEST_CASE("pretty output and --out") {
  const Run pretty = run({"reduce-info", "--N", "4", "--output", "pretty"});
  CHECK(pretty.out.find("classes: 6") != std::string::npos);
  const auto path = std::filesystem::temp_directory_path() / "parrondo_cli_out.json";
  std::filesystem::remove(path);
  const Run r = run({"reduce-info", "--N", "4", "--out", path.string()});
  CHECK(r.code == kExitOk);
  CHECK(r.out.empty());
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  CHECK(json::parse(buf.str())["result"]["classes"] == 6);
  std::filesystem::remove(path);
}
