// Drives the installed command-line binary end to end via std::system.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "cavrec/formats.hpp"
#include "helpers.hpp"

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("cavrec_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

int run(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(CAVREC_TOOL_PATH) + " " + args + " >" +
                          log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string synth_args(const fs::path& out, int frames, unsigned seed) {
  return "synth --out " + out.string() + " --frames " +
         std::to_string(frames) +
         " --seed " + std::to_string(seed) +
         " --width 80 --height 64 --fx 48 --fy 48 --cx 39.5 --cy 31.5"
         " --phantom-length 60 --radii 9,12,8 --bump-amplitude 0.8"
         " --bend 4 --axial-segments 48 --angular-segments 32"
         " --sparse-points 250";
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("help exits zero and documents subcommands") {
  TempDir tmp;
  CHECK(run("--help", tmp.path / "log.txt") == 0);
  const std::string text = cavrec::test::read_file_bytes(tmp.path / "log.txt");
  for (const char* name :
       {"synth", "reconstruct", "evaluate", "match", "consistency"})
    CHECK(text.find(name) != std::string::npos);
}

TEST_CASE("unknown flags are usage errors") {
  TempDir tmp;
  CHECK(run("synth --does-not-exist 1", tmp.path / "log.txt") == 1);
  CHECK(run("frobnicate", tmp.path / "log.txt") == 1);
}

TEST_CASE("synth, reconstruct, evaluate, consistency round trip") {
  TempDir tmp;
  const fs::path ds = tmp.path / "ds";
  REQUIRE(run(synth_args(ds, 20, 5), tmp.path / "synth.log") == 0);
  CHECK(fs::exists(ds / "phantom.ply"));
  CHECK(fs::exists(ds / "frames" / "frame_000019.dpth"));

  REQUIRE(run("reconstruct --dataset " + ds.string() + " --out " +
                  (tmp.path / "recon").string() +
                  " --voxel-size 1.5 --dump-volume",
              tmp.path / "recon.log") == 0);
  CHECK(fs::exists(tmp.path / "recon" / "mesh.ply"));
  CHECK(fs::exists(tmp.path / "recon" / "watertight.txt"));
  CHECK(fs::exists(tmp.path / "recon" / "scales.txt"));
  CHECK(fs::exists(tmp.path / "recon" / "volume.tsdf"));

  REQUIRE(run("evaluate --recon " + (tmp.path / "recon" / "mesh.ply").string() +
                  " --reference " + (ds / "phantom.ply").string() +
                  " --trajectory " + (ds / "trajectory.txt").string() +
                  " --cloud " + (ds / "cloud.ply").string() + " --out " +
                  (tmp.path / "eval").string() + " --sample-points 1500",
              tmp.path / "eval.log") == 0);
  CHECK(fs::exists(tmp.path / "eval" / "metrics.txt"));
  CHECK(fs::exists(tmp.path / "eval" / "metrics.json"));

  REQUIRE(run("consistency --dataset " + ds.string() + " --out " +
                  (tmp.path / "cons").string() +
                  " --voxel-size 1.5 --keep 7 --of 10 --seed 3"
                  " --register-samples 1200",
              tmp.path / "cons.log") == 0);
  CHECK(fs::exists(tmp.path / "cons" / "metrics.json"));
  CHECK(fs::exists(tmp.path / "cons" / "subset_a" / "mesh.ply"));
}

TEST_CASE("missing reference file exits with the data code and names it") {
  TempDir tmp;
  const fs::path ds = tmp.path / "ds";
  REQUIRE(run(synth_args(ds, 4, 6), tmp.path / "synth.log") == 0);
  const int code =
      run("evaluate --recon " + (ds / "phantom.ply").string() +
              " --reference " + (tmp.path / "nowhere.ply").string() +
              " --trajectory " + (ds / "trajectory.txt").string() +
              " --cloud " + (ds / "cloud.ply").string() + " --out " +
              (tmp.path / "eval").string(),
          tmp.path / "eval.log");
  CHECK(code == 2);
  const std::string log = cavrec::test::read_file_bytes(tmp.path / "eval.log");
  CHECK(log.find("nowhere.ply") != std::string::npos);
}

TEST_CASE("all-invalid depths exit with the numerical code") {
  TempDir tmp;
  const fs::path ds = tmp.path / "ds";
  REQUIRE(run(synth_args(ds, 4, 7), tmp.path / "synth.log") == 0);
  // Zero out every depth map.
  const cavrec::CameraIntrinsics k =
      cavrec::read_intrinsics(ds / "intrinsics.txt");
  for (const auto& entry : fs::directory_iterator(ds / "frames")) {
    if (entry.path().extension() != ".dpth") continue;
    cavrec::DepthFrame blank = cavrec::DepthFrame::allocate(k, 0);
    cavrec::write_depth(entry.path(), blank);
  }
  const int code = run("reconstruct --dataset " + ds.string() + " --out " +
                           (tmp.path / "recon").string(),
                       tmp.path / "recon.log");
  CHECK(code == 3);
}

TEST_CASE("match on identical maps, plus the empty query list") {
  TempDir tmp;
  const cavrec::AnalyticDescriptorField field(16, 3);
  const cavrec::DescriptorMap map = cavrec::sample_field(field, 24, 20);
  cavrec::write_descriptor_map(tmp.path / "a.desc", map);
  cavrec::write_descriptor_map(tmp.path / "b.desc", map);
  std::ofstream(tmp.path / "q.txt") << "4 5\n10 12\n";

  REQUIRE(run("match --source " + (tmp.path / "a.desc").string() +
                  " --target " + (tmp.path / "b.desc").string() +
                  " --queries " + (tmp.path / "q.txt").string() + " --out " +
                  (tmp.path / "m.txt").string(),
              tmp.path / "match.log") == 0);
  std::ifstream matches(tmp.path / "m.txt");
  double u, v, mu, mv, score;
  REQUIRE(static_cast<bool>(matches >> u >> v >> mu >> mv >> score));
  CHECK(mu == doctest::Approx(4.0));
  CHECK(mv == doctest::Approx(5.0));
  CHECK(score == doctest::Approx(1.0).epsilon(1e-5));

  std::ofstream(tmp.path / "empty.txt").close();
  REQUIRE(run("match --source " + (tmp.path / "a.desc").string() +
                  " --target " + (tmp.path / "b.desc").string() +
                  " --queries " + (tmp.path / "empty.txt").string() +
                  " --out " + (tmp.path / "e.txt").string(),
              tmp.path / "match2.log") == 0);
  CHECK(cavrec::test::read_file_bytes(tmp.path / "e.txt").empty());
}

TEST_CASE("config file keys are honored with flag overrides") {
  TempDir tmp;
  std::ofstream(tmp.path / "synth.cfg")
      << "frames=6\nseed=11\nwidth=80\nheight=64\nfx=48\nfy=48\n"
      << "cx=39.5\ncy=31.5\nphantom-length=60\nbump-amplitude=0.5\n"
      << "axial-segments=48\nangular-segments=32\nsparse-points=200\n";
  REQUIRE(run("synth --out " + (tmp.path / "ds").string() + " --config " +
                  (tmp.path / "synth.cfg").string() + " --frames 5",
              tmp.path / "synth.log") == 0);
  // The flag wins over the config file.
  int depth_files = 0;
  for (const auto& entry : fs::directory_iterator(tmp.path / "ds" / "frames"))
    if (entry.path().extension() == ".dpth") ++depth_files;
  CHECK(depth_files == 5);
  const std::string echo =
      cavrec::test::read_file_bytes(tmp.path / "ds" / "synth_config.txt");
  CHECK(echo.find("frames=5") != std::string::npos);
  CHECK(echo.find("seed=11") != std::string::npos);
}

}  // TEST_SUITE
