#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(L1PRUNE_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

}  // namespace

TEST_CASE("cli end to end") {
  const fs::path dir = fs::temp_directory_path() / "l1prune_cli";
  fs::remove_all(dir);
  const std::string d = dir.string();

  REQUIRE(run("gen --out " + d + "/prob --seed 3 --units 2 --nodes 2 --m 8 --n 8 --p 24") == 0);
  CHECK(fs::exists(dir / "prob" / "manifest.json"));
  CHECK(fs::exists(dir / "prob" / "unit1.fc2.npy"));

  const std::string manifest = d + "/prob/manifest.json";
  REQUIRE(run("prune --manifest " + manifest + " --out " + d + "/out --parallel 2") == 0);
  const auto report = read_json(dir / "out" / "report.json");
  CHECK(report["status"] == "ok");
  CHECK(report["units"].size() == 2);
  CHECK(fs::exists(dir / "out" / "unit0.fc1.pruned.npy"));

  REQUIRE(run("eval --manifest " + manifest + " --pruned-dir " + d + "/out --report " + d + "/eval.json") == 0);
  CHECK(read_json(dir / "eval.json")["units"][1]["status"] == "ok");

  CHECK(run("eval --manifest " + manifest + " --pruned-dir " + d + "/nowhere") == 1);

  REQUIRE(run("sweep --manifest " + manifest + " --out " + d + "/sweep --rates 0.3,0.6") == 0);
  CHECK(read_json(dir / "sweep" / "sweep.json")["points"].size() == 2);

  REQUIRE(run("prune --manifest " + manifest + " --out " + d + "/semi --pattern semi:2:4 --K 10 --T 2") == 0);
  const auto semi = read_json(dir / "semi" / "report.json");
  CHECK(semi["pattern"] == "semi:2:4");
  CHECK(semi["tuner"]["K"] == 10);

  SUBCASE("invalid input exits with 2") {
    CHECK(run("prune --manifest " + manifest + " --pattern semi:4:2") == 2);
    CHECK(run("prune --manifest " + manifest + " --xi 1.5") == 2);
    CHECK(run("gen --out " + d + "/bad --topology ring") == 2);
    CHECK(run("prune") == 2);
    CHECK(run("prune --manifest " + d + "/missing.json") == 2);
    CHECK(run("--help") == 0);
  }
  fs::remove_all(dir);
}
