#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "auvmae/cli.hpp"
#include "auvmae/serialize.hpp"

using namespace auvmae;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("auvmae_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "auvmae");
  return cli::run(args);
}

}  // namespace

TEST_CASE("synth and estimate-knowledge produce valid artifacts") {
  const fs::path dir = scratch("synth");
  REQUIRE(run({"synth", "--out", dir.string(), "--frames", "320", "--clip-length", "16", "--seed", "4"}) == cli::kOk);
  CHECK(fs::exists(dir / "train.csv"));
  CHECK(fs::exists(dir / "test.vid"));
  CHECK(read_json_file(dir / "manifest.json")["seed"] == 4);
  REQUIRE(run({"estimate-knowledge", "--labels", (dir / "train.csv").string(), "--out", (dir / "priors.json").string(),
               "--seed", "4"}) == cli::kOk);
  const Json priors = read_json_file(dir / "priors.json");
  CHECK(check_knowledge_json(priors).empty());
  CHECK(priors["seed"] == 4);

  // Same seed, same bytes.
  const fs::path again = scratch("synth_again");
  REQUIRE(run({"synth", "--out", again.string(), "--frames", "320", "--seed", "4"}) == cli::kOk);
  std::ifstream a(dir / "train.csv"), b(again / "train.csv");
  CHECK(std::string(std::istreambuf_iterator<char>(a), {}) == std::string(std::istreambuf_iterator<char>(b), {}));
}

TEST_CASE("exit codes separate usage, data and numeric failures") {
  const fs::path dir = scratch("errors");
  CHECK(run({"estimate-knowledge", "--labels", "x.csv", "--out", "y.json", "--bogus"}) == cli::kUsage);
  CHECK(run({}) == cli::kUsage);
  CHECK(run({"estimate-knowledge", "--labels", (dir / "missing.csv").string(), "--out",
             (dir / "p.json").string()}) == cli::kData);
  {
    std::ofstream bad(dir / "bad.csv");
    bad << "clip_id,frame,au_1,au_2\na,0,1,7\na,1,0,0\n";
  }
  CHECK(run({"estimate-knowledge", "--labels", (dir / "bad.csv").string(), "--out", (dir / "p.json").string()}) ==
        cli::kData);
  CHECK(run({"pretrain", "--videos", "v.vid", "--out", "c.ckpt", "--level", "clip"}) == cli::kUsage);
}
