#include <filesystem>
#include <set>
#include <sstream>

#include "doctest.h"
#include "evtrack/cli.hpp"
#include "evtrack/config.hpp"
#include "evtrack/evaluation.hpp"
#include "evtrack/event_io.hpp"
#include "support.hpp"

using namespace evtrack;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "evtrack");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::set<std::string> listing(const std::filesystem::path& dir) {
  std::set<std::string> names;
  for (const auto& e : std::filesystem::directory_iterator(dir)) names.insert(e.path().filename().string());
  return names;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage errors exit with 1") {
    CHECK(run_cli({}).code == cli::kExitUsage);
    CHECK(run_cli({"frobnicate"}).code == cli::kExitUsage);
    CHECK(run_cli({"track", "x.evs"}).code == cli::kExitUsage);
    CHECK(run_cli({"track", "--algo", "kalman", "x.evs"}).code == cli::kExitUsage);
    CHECK(run_cli({"synth", "-o", "x.evs"}).code == cli::kExitUsage);
    CHECK(run_cli({"interp", "x.csv"}).code == cli::kExitUsage);
    CHECK(run_cli({"--help"}).code == cli::kExitOk);
  }

  TEST_CASE("input errors exit with 2") {
    evtest::TempDir dir("cli-input");
    const auto missing = (dir / "missing.evs").string();
    CHECK(run_cli({"track", "--algo", "eot", missing}).code == cli::kExitInput);
    const auto bad = (dir / "bad.csv").string();
    {
      std::ofstream f(bad);
      f << "t_us,x,y,p\n5,1,1,0\n4,1,1,0\n";
    }
    const Result r = run_cli({"convert", bad, "-o", (dir / "out.evs").string(), "--width", "8", "--height", "8"});
    CHECK(r.code == cli::kExitInput);
    CHECK(r.err.find("error") != std::string::npos);
    const auto cfg = (dir / "cfg.json").string();
    {
      std::ofstream f(cfg);
      f << R"({"eot": {"bogus": true}})";
    }
    CHECK(run_cli({"eval", "--config", cfg, "a.csv", "b.csv"}).code == cli::kExitInput);
  }

  TEST_CASE("print-default-config") {
    const Result r = run_cli({"--print-default-config"});
    CHECK(r.code == 0);
    CHECK(r.out == default_config_text());
  }

  TEST_CASE("convert round trip") {
    evtest::TempDir dir("cli-convert");
    const auto csv = (dir / "in.csv").string();
    {
      std::ofstream f(csv);
      f << "t_us,x,y,p\n10,1,2,0\n20,3,4,1\n20,5,0,1\n";
    }
    const auto evs = (dir / "mid.evs").string();
    const auto back = (dir / "back.csv").string();
    CHECK(run_cli({"convert", csv, "-o", evs, "--width", "16", "--height", "8"}).code == 0);
    CHECK(run_cli({"convert", evs, "-o", back}).code == 0);
    CHECK(evtest::slurp(back) == evtest::slurp(csv));
    CHECK(listing(dir.path()) == std::set<std::string>{"in.csv", "mid.evs", "back.csv"});

    const Result inferred = run_cli({"convert", csv, "-o", (dir / "inferred.evs").string()});
    CHECK(inferred.code == 0);
    CHECK(inferred.err.find("6x5") != std::string::npos);
  }

  TEST_CASE("synth, track and eval pipeline") {
    evtest::TempDir dir("cli-pipeline");
    const auto evs = (dir / "s1.evs").string();
    const auto gt = (dir / "gt.csv").string();
    const auto tracks = (dir / "tracks.csv").string();
    const auto report = (dir / "report.csv").string();
    REQUIRE(run_cli({"synth", "--scene", "S1", "-o", evs, "--gt", gt}).code == 0);
    REQUIRE(run_cli({"track", "--algo", "eot", evs, "-o", tracks}).code == 0);

    std::set<std::int64_t> ids;
    for (const auto& s : read_tracks_file(tracks)) ids.insert(s.id);
    CHECK(ids.size() == 1);

    const Result e = run_cli({"eval", tracks, gt, "-o", report});
    CHECK(e.code == 0);
    CHECK(e.out.empty());
    CHECK(e.err.find("theta") != std::string::npos);
    CHECK(evtest::slurp(report).rfind(std::string(kReportCsvHeader), 0) == 0);
    CHECK(listing(dir.path()) == std::set<std::string>{"s1.evs", "gt.csv", "tracks.csv", "report.csv"});

    // Tracks on stdout when -o is omitted; progress only on stderr.
    const Result quiet = run_cli({"track", "--algo", "eot", evs});
    const Result loud = run_cli({"track", "--algo", "eot", evs, "--verbose"});
    CHECK(quiet.out == evtest::slurp(tracks));
    CHECK(loud.out == quiet.out);
    CHECK(quiet.err.empty());
    CHECK(loud.err.find("frame t=") != std::string::npos);
  }

  TEST_CASE("ground truth scored against itself") {
    evtest::TempDir dir("cli-self");
    const auto evs = (dir / "s2.evs").string();
    const auto gt = (dir / "gt.csv").string();
    const auto as_tracks = (dir / "gt-tracks.csv").string();
    REQUIRE(run_cli({"synth", "--scene", "S2", "-o", evs, "--gt", gt}).code == 0);
    write_tracks_file(ground_truth_as_tracks(read_ground_truth_file(gt)), as_tracks);
    const Result r = run_cli({"eval", as_tracks, gt});
    REQUIRE(r.code == 0);
    std::istringstream lines(r.out);
    std::string line;
    std::getline(lines, line);
    int rows = 0;
    while (std::getline(lines, line)) {
      CHECK(line.substr(line.find(',')) == ",1.000000,1.000000,1.000000,1.000000");
      ++rows;
    }
    CHECK(rows == 19);
  }

  TEST_CASE("seed defaults to 7 and can be overridden") {
    evtest::TempDir dir("cli-seed");
    const auto evs = (dir / "s1.evs").string();
    REQUIRE(run_cli({"synth", "--scene", "S1", "-o", evs}).code == 0);
    const Result plain = run_cli({"track", "--algo", "ceot", evs});
    const Result seven = run_cli({"track", "--algo", "ceot", evs, "--seed", "7"});
    REQUIRE(plain.code == 0);
    CHECK(plain.out == seven.out);
    CHECK(run_cli({"track", "--algo", "ceot", evs}).out == plain.out);

    const auto other = (dir / "s1-seed8.evs").string();
    REQUIRE(run_cli({"synth", "--scene", "S1", "-o", other, "--seed", "8"}).code == 0);
    CHECK(evtest::slurp(other) != evtest::slurp(evs));
  }

  TEST_CASE("interp") {
    evtest::TempDir dir("cli-interp");
    const auto tracks = (dir / "t.csv").string();
    write_tracks_file(std::vector<TrackSnapshot>{{1, 1000, BoxF{0, 0, 10, 10}, TrackState::locked, 0, 0},
                                                 {1, 2000, BoxF{10, 20, 10, 10}, TrackState::locked, 0, 0}},
                      tracks);
    const Result mid = run_cli({"interp", tracks, "--t", "1500"});
    CHECK(mid.code == 0);
    CHECK(mid.out == std::string(kTrackCsvHeader) + "\n1,1500,5.0000,10.0000,10.0000,10.0000,locked,0.0000,0.0000\n");
    const Result outside = run_cli({"interp", tracks, "--t", "5000"});
    CHECK(outside.code == 0);
    CHECK(outside.out == std::string(kTrackCsvHeader) + "\n");
    CHECK(outside.err.find("no track") != std::string::npos);
  }
}
