#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fair/io.hpp"

using namespace fair;
namespace fs = std::filesystem;

namespace {

const fs::path& workdir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "fair_cli_tests";
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = std::string(FAIR_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string p(const std::string& name) { return (workdir() / name).string(); }

fs::path write_regions(const std::string& name, int count) {
  std::vector<io::Region> regions;
  for (int i = 0; i < count; ++i) {
    const Polygon poly = random_polygon(static_cast<std::uint64_t>(i),
                                        {1.3 * (i % 4), 1.3 * (i / 4)}, {3, 8, 0.5, 0.3});
    regions.push_back({"id" + std::to_string(i), poly, std::sin(1.7 * i) + 0.1 * i});
  }
  const fs::path path = workdir() / name;
  io::write_regions(path, regions);
  return path;
}

const char* kSmallSearch =
    R"({"theta_min": 0.25, "theta_max": 1.0, "theta_count": 3, "ratio_min": 0.05, "ratio_max": 1.0, "ratio_count": 3})";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage and configuration errors exit with code 2") {
  CHECK(run("--help") == 0);
  CHECK(run("") == 2);
  CHECK(run("no-such-command") == 2);
  CHECK(run("compute-cov " + p("missing.json") + " --out " + p("x.csv")) == 2);
  const fs::path regions = write_regions("cfg_regions.json", 4);
  CHECK(run("compute-cov " + regions.string() + " --out " + p("x.csv") + " --resolution 100") == 2);
  CHECK(run("compute-cov " + regions.string() + " --out " + p("x.csv") + " --method simpson") == 2);
  std::ofstream(p("bad.json")) << "{ not json";
  CHECK(run("compute-cov " + regions.string() + " --out " + p("x.csv") + " --config " + p("bad.json")) == 2);
}

TEST_CASE("compute-cov writes the matrix and a resolved-config sidecar") {
  const fs::path regions = write_regions("cov_regions.json", 5);
  REQUIRE(run("compute-cov " + regions.string() + " --resolution 128 --kernel-family gaussian --theta 0.7 --out " +
              p("cov.csv")) == 0);
  const io::LoadedCovMatrix cov = io::read_cov_matrix(p("cov.csv"));
  CHECK(cov.ids.size() == 5);
  CHECK(cov.cov.kernel == CovarianceKernel::gaussian(1.0, 0.7));
  CHECK(cov.sidecar["config"]["resolution"] == 128);
  CHECK(cov.sidecar["config"]["supersample"] == 4);
  CHECK(cov.sidecar.contains("grid"));
}

TEST_CASE("consistency report is byte identical for the same seed") {
  const std::string args = "consistency-study --polygons 5 --resolution 64,128 --no-timing --seed 9 --out ";
  REQUIRE(run(args + p("c1.csv")) == 0);
  REQUIRE(run(args + p("c2.csv")) == 0);
  CHECK(slurp(p("c1.csv")) == slurp(p("c2.csv")));
  CHECK(slurp(p("c1.csv.json")) == slurp(p("c2.csv.json")));
  REQUIRE(run("consistency-study --polygons 5 --resolution 64,128 --no-timing --seed 10 --out " + p("c3.csv")) == 0);
  CHECK(slurp(p("c1.csv")) != slurp(p("c3.csv")));
}

TEST_CASE("accuracy study through the CLI") {
  REQUIRE(run("accuracy-study --min-power 4 --max-power 5 --deltas 0.3,0.9 --out " + p("acc.csv")) == 0);
  std::istringstream rows(slurp(p("acc.csv")));
  std::string line;
  int count = 0;
  while (std::getline(rows, line)) ++count;
  CHECK(count == 5);
  CHECK(run("accuracy-study --extent-mode sideways") == 2);
}

TEST_CASE("estimate then predict") {
  const fs::path regions = write_regions("est_regions.json", 8);
  std::ofstream(p("search.json")) << kSmallSearch;
  REQUIRE(run("estimate " + regions.string() + " --config " + p("search.json") +
              " --resolution 128 --out " + p("mle.json")) == 0);
  const io::json mle = io::read_json(p("mle.json"));
  CHECK(mle["candidates"].size() == 9);
  CHECK(mle["config"]["resolution"] == 128);
  CHECK(mle["warnings"].empty());

  REQUIRE(run("predict " + regions.string() + " " + p("mle.json") + " --format binary --out " +
              p("surface.bin")) == 0);
  const io::LoadedSurface surface = io::read_surface_binary(p("surface.bin"));
  CHECK(surface.grid.nx() == 128);
  REQUIRE(run("predict " + regions.string() + " " + p("mle.json") + " --out " + p("surface.csv")) == 0);
  CHECK(fs::file_size(p("surface.csv")) > 128 * 128 * 6);

  CHECK(run("predict " + regions.string() + " " + p("mle.json") + " --resolution 256 --out " +
            p("mismatch.csv")) == 2);
  CHECK(run("predict " + regions.string() + " " + p("mle.json") + " --format tiff --out " +
            p("t.tif")) == 2);
}

TEST_CASE("estimation with a single region reports insufficient data") {
  const fs::path regions = write_regions("one_region.json", 1);
  std::ofstream(p("search1.json")) << kSmallSearch;
  CHECK(run("estimate " + regions.string() + " --config " + p("search1.json") +
            " --resolution 64 --out " + p("mle1.json")) == 2);
  const io::json mle = io::read_json(p("mle1.json"));
  CHECK(mle["warnings"][0] == "insufficient_data");
}

}  // TEST_SUITE
