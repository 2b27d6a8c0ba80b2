#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int exit_code = -1;
  std::string out;
  std::string err;
};

const fs::path kTmp = fs::temp_directory_path() / "odflow_cli_test";

Run run(const std::string& args) {
  fs::create_directories(kTmp);
  const fs::path err = kTmp / "stderr.txt";
  const std::string cmd = std::string(ODFLOW_CLI) + " " + args + " 2>" + err.string();
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe);
  char buf[4096];
  for (std::size_t n; (n = fread(buf, 1, sizeof buf, pipe)) > 0;) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = fixture::read(err.string());
  return r;
}

std::string data(const std::string& name) {
  const std::string dir = fixture::kDir + "/" + name;
  return "--flows " + dir + "/flows.csv --regions " + dir + "/regions.geojson";
}

}  // namespace

TEST_CASE("render matches the golden SVGs") {
  for (const char* kind : {"maptrix", "odmaps", "flowmap"}) {
    const std::string out = (kTmp / (std::string("au_") + kind + ".svg")).string();
    const Run r = run(std::string("render --kind ") + kind + " " + data("au") + " --grid " + fixture::kDir +
                      "/au/grid.json -o " + out);
    CHECK(r.exit_code == 0);
    CHECK(fixture::read(out) == fixture::read(std::string(ODFLOW_GOLDEN_DIR) + "/au_" + kind + ".svg"));
  }
}

TEST_CASE("validation errors exit with 2") {
  Run r = run("render --kind maptrix " + data("au") + " --filter 10:5");
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("InvalidRange") != std::string::npos);

  r = run("--json-errors render --kind odmaps " + data("au"));
  CHECK(r.exit_code == 2);
  const json e = json::parse(r.err);
  CHECK(e["error"]["code"] == "BadGridAssignment");

  r = run("--json-errors render --kind maptrix " + data("au") + " --groups 'A=NSW,VIC;B=VIC'");
  CHECK(r.exit_code == 2);
  CHECK(json::parse(r.err)["error"]["code"] == "OverlappingGroups");

  r = run("render --kind pie " + data("au"));
  CHECK(r.exit_code == 2);

  std::ofstream(kTmp / "empty.csv") << "origin,dest,magnitude\n";
  r = run("export3d --flows " + (kTmp / "empty.csv").string() + " --regions " + fixture::kDir +
          "/au/regions.geojson");
  CHECK(r.exit_code == 2);

  std::ofstream(kTmp / "bad.csv") << "origin,dest,magnitude\nACT,NSW,-4\n";
  r = run("--json-errors render --flows " + (kTmp / "bad.csv").string() + " --regions " + fixture::kDir +
          "/au/regions.geojson");
  CHECK(r.exit_code == 2);
  CHECK(json::parse(r.err)["error"]["code"] == "NegativeMagnitude");
}

TEST_CASE("export3d constant encoding and cross-format agreement") {
  const fs::path j = kTmp / "flows.json", o = kTmp / "flows.obj";
  REQUIRE(run("export3d --repr map --encoding constant " + data("au") + " -o " + j.string()).exit_code == 0);
  REQUIRE(run("export3d --repr map --encoding constant " + data("au") + " -o " + o.string()).exit_code == 0);
  const json doc = json::parse(fixture::read(j.string()));
  REQUIRE(!doc["curves"].empty());
  for (const json& c : doc["curves"]) {
    CHECK(c["height"] == 0.15);
    CHECK(c["samples"][32][2].get<double>() == doctest::Approx(0.15).epsilon(1e-9));
  }

  // The centroid of each OBJ ring of 8 vertices is the JSON sample point.
  std::istringstream obj(fixture::read(o.string()));
  std::vector<std::array<double, 3>> v;
  for (std::string line; std::getline(obj, line);) {
    if (line.rfind("v ", 0) == 0) {
      std::array<double, 3> p{};
      std::istringstream(line.substr(2)) >> p[0] >> p[1] >> p[2];
      v.push_back(p);
    }
  }
  std::size_t ring = 0;
  double worst = 0.0;
  for (const json& c : doc["curves"]) {
    for (const json& s : c["samples"]) {
      for (int k = 0; k < 3; ++k) {
        double mean = 0.0;
        for (int i = 0; i < 8; ++i) mean += v[ring * 8 + i][k] / 8.0;
        worst = std::max(worst, std::abs(mean - s[k].get<double>()));
      }
      ++ring;
    }
  }
  CHECK(ring * 8 == v.size());
  CHECK(worst < 2e-6);
}

TEST_CASE("artifacts are byte-identical across runs") {
  const std::map<std::string, std::string> commands{
      {"a.svg", "render --kind maptrix " + data("de")},
      {"a.json", "render --kind flowmap " + data("de")},
      {"a.obj", "export3d --repr mapslink --encoding quantity " + data("nz")},
  };
  for (const auto& [file, args] : commands) {
    const fs::path first = kTmp / ("1" + file), second = kTmp / ("2" + file);
    REQUIRE(run(args + " -o " + first.string()).exit_code == 0);
    REQUIRE(run(args + " -o " + second.string()).exit_code == 0);
    CHECK(fixture::read(first.string()) == fixture::read(second.string()));
  }
}

TEST_CASE("config file defaults") {
  std::ofstream(kTmp / "odflow.toml") << "# defaults for render\n[render]\nkind = \"flowmap\"\nwidth = 640\n";
  const Run r = run("--config " + (kTmp / "odflow.toml").string() + " render " + data("au"));
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("width=\"640\"") != std::string::npos);
  CHECK(r.out.find("id=\"flows\"") != std::string::npos);
}

TEST_CASE("bench-qp prints the median") {
  const Run r = run("bench-qp --regions " + fixture::kDir + "/au/regions.geojson --n 8 --trials 3 --json");
  CHECK(r.exit_code == 0);
  const json j = json::parse(r.out);
  CHECK(j["n"] == 8);
  CHECK(j["medianMs"].get<double>() > 0.0);
  CHECK(run("bench-qp --regions " + fixture::kDir + "/au/regions.geojson --n 80").exit_code == 2);
}
