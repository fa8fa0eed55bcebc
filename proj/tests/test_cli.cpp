#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helfrich/cli.hpp"
#include "helfrich/mesh.hpp"
#include "support.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

using namespace helfrich;
using nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out, err;
  json report() const { return json::parse(out); }
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "helfrich");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(int(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("gen then energy") {
  std::string dir = test::scratch("cli_gen");
  Run g = cli({"gen", "--kind", "icosphere", "--level", "3", "-o", dir + "/s.obj"});
  REQUIRE(g.code == 0);
  json gj = g.report();
  CHECK(gj["schema"] == 1);
  CHECK(gj["command"] == "gen");
  CHECK(gj["pass"] == true);
  CHECK(gj["config"]["level"] == "3");

  Run e = cli({"energy", dir + "/s.obj", "--c0", "1"});
  REQUIRE(e.code == 0);
  json ej = e.report();
  CHECK(ej["result"]["energy"]["helfrich"].get<double>() < 0.1);
  CHECK(test::rel(ej["result"]["energy"]["area"].get<double>(), 12.506492733969928) <= 1e-12);
}

TEST_CASE("reports can go to a file") {
  std::string dir = test::scratch("cli_report");
  Run g = cli({"gen", "--kind", "ellipsoid", "--axes", "1.5,1,0.8", "--level", "2", "-o", dir + "/e.ply", "--report",
               dir + "/r.json"});
  REQUIRE(g.code == 0);
  CHECK(g.out.empty());
  json j = json::parse(slurp(dir + "/r.json"));
  CHECK(j["command"] == "gen");
  CHECK(load_mesh(dir + "/e.ply").vertices.size() == 162u);
}

TEST_CASE("verify passes and leaves the mesh alone") {
  std::string dir = test::scratch("cli_verify");
  REQUIRE(cli({"gen", "--kind", "ellipsoid", "--axes", "1.5,1,0.8", "--level", "3", "-o", dir + "/e.obj"}).code == 0);
  std::string before = slurp(dir + "/e.obj");
  Run v = cli({"verify", dir + "/e.obj", "--c0", "0.5", "--trials", "4"});
  INFO(v.out, v.err);
  CHECK(v.code == 0);
  CHECK(v.report()["pass"] == true);
  CHECK(slurp(dir + "/e.obj") == before);
}

TEST_CASE("verify flags a broken mesh") {
  std::string dir = test::scratch("cli_verify_bad");
  std::ofstream(dir + "/open.obj") << "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nf 1 2 3\nf 1 3 4\nf 1 4 2\n";
  Run v = cli({"verify", dir + "/open.obj"});
  CHECK(v.code == 1);
}

TEST_CASE("bubbles study") {
  std::string dir = test::scratch("cli_bubbles");
  Run b = cli({"bubbles", "--c0", "1", "--kmin", "2", "--kmax", "5", "--csv", dir + "/b.csv"});
  REQUIRE(b.code == 0);
  CHECK(b.report()["pass"] == true);
  std::string csv = slurp(dir + "/b.csv");
  CHECK(csv.rfind("k,helfrich,willmore,area,volume", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}

TEST_CASE("conservation subcommand") {
  Run c = cli({"conservation", "--c0", "1", "--alpha", "1", "--n-coarse", "33", "--n-fine", "65"});
  REQUIRE(c.code == 0);
  json j = c.report()["result"];
  CHECK(j["all_converged"] == true);
}

TEST_CASE("minimize writes history and mesh") {
  std::string dir = test::scratch("cli_minimize");
  REQUIRE(cli({"gen", "--kind", "icosphere", "--level", "2", "-o", dir + "/s.obj"}).code == 0);
  Run m = cli({"minimize", dir + "/s.obj", "--c0", "1", "--alpha", "1", "--max-iterations", "50", "-o", dir + "/out.obj",
               "--history", dir + "/h.csv"});
  INFO(m.err);
  REQUIRE(m.code == 0);
  CHECK(!slurp(dir + "/h.csv").empty());
  CHECK(load_mesh(dir + "/out.obj").vertices.size() == 162u);
}

TEST_CASE("exit codes for bad input") {
  CHECK(cli({}).code == 1);
  CHECK(cli({"energy"}).code == 1);
  CHECK(cli({"energy", "/nonexistent/mesh.obj"}).code == 1);
  CHECK(cli({"gen", "--kind", "torus", "-o", "/tmp/x.obj"}).code == 1);
  CHECK(cli({"energy", "x.obj", "--alpha", "-1"}).code == 1);
  CHECK(cli({"bogus"}).code == 1);
  Run v = cli({"--version"});
  CHECK(v.code == 0);
  CHECK(v.out.find('.') != std::string::npos);
}

TEST_CASE("INI config files") {
  std::string dir = test::scratch("cli_config");
  REQUIRE(cli({"gen", "--kind", "icosphere", "--level", "2", "-o", dir + "/s.obj"}).code == 0);
  std::ofstream(dir + "/ok.ini") << "[energy]\nc0 = 1\n";
  Run ok = cli({"--config", dir + "/ok.ini", "energy", dir + "/s.obj"});
  REQUIRE(ok.code == 0);
  CHECK(ok.report()["config"]["c0"] == "1");

  std::ofstream(dir + "/bad.ini") << "[energy]\nspontaneous = 1\n";
  CHECK(cli({"--config", dir + "/bad.ini", "energy", dir + "/s.obj"}).code == 1);
}
