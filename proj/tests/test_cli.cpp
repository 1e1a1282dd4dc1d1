#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace {

namespace fs = std::filesystem;

const char* kCli = MOSUM_CLI_PATH;

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path tmpdir() {
  fs::path dir(MOSUM_TEST_TMPDIR);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunResult run(const std::string& args) {
  fs::path out = tmpdir() / "stdout.txt";
  fs::path err = tmpdir() / "stderr.txt";
  std::string cmd = std::string(kCli) + " " + args + " > " + out.string() + " 2> " + err.string();
  int rc = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

fs::path make_panel(const std::string& name, int tau, double jump, std::uint64_t seed) {
  fs::path csv = tmpdir() / name;
  RunResult r = run("simulate --model iid --n 150 --p 20 --seed " + std::to_string(seed) +
                    " --break " + std::to_string(tau) + ":" + std::to_string(jump) +
                    " --out-csv " + csv.string());
  REQUIRE(r.code == 0);
  REQUIRE(fs::exists(csv));
  return csv;
}

}  // namespace

TEST_CASE("simulate writes a loadable panel and a truth file") {
  fs::path csv = tmpdir() / "sim.csv";
  fs::path truth = tmpdir() / "truth.json";
  RunResult r = run("simulate --model ar1 --n 80 --p 6 --seed 3 --break 40:1.25:2-4 --out-csv " +
                    csv.string() + " --truth " + truth.string());
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["n"] == 80);
  CHECK(j["p"] == 6);
  CHECK(j["breaks"][0]["tau"] == 40);
  auto t = nlohmann::json::parse(slurp(truth));
  CHECK(t[0]["jump"].get<double>() == doctest::Approx(1.25));
  CHECK(t[0]["members"].size() == 3);

  std::string header;
  std::ifstream in(csv);
  std::getline(in, header);
  CHECK(header.rfind("time,", 0) == 0);
}

TEST_CASE("detect finds an injected break and writes artifacts") {
  fs::path csv = make_panel("strong.csv", 75, 2.0, 11);
  fs::path outdir = tmpdir() / "det_out";
  RunResult r = run("detect --input " + csv.string() +
                    " --bn 15 --alpha 0.05 --reps 400 --seed 5 --out " + outdir.string());
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["mode"] == "global");
  REQUIRE(j["k_hat"].get<int>() >= 1);
  int tau = j["breaks"][0]["tau"].get<int>();
  CHECK(std::abs(tau - 75) <= 4);

  CHECK(fs::exists(outdir / "detection.json"));
  CHECK(fs::exists(outdir / "threshold.json"));
  CHECK(fs::exists(outdir / "lrv.json"));
  CHECK(fs::exists(outdir / "stat_profile.csv"));
  CHECK(fs::exists(outdir / "run_manifest.json"));
  auto manifest = nlohmann::json::parse(slurp(outdir / "run_manifest.json"));
  CHECK(manifest["command"] == "detect");
  CHECK(manifest["outputs"].size() >= 4);
  // artifact agrees with stdout
  auto saved = nlohmann::json::parse(slurp(outdir / "detection.json"));
  CHECK(saved["k_hat"] == j["k_hat"]);
}

TEST_CASE("detect honors a precomputed threshold file") {
  fs::path csv = make_panel("reuse.csv", 75, 2.0, 12);
  fs::path thr = tmpdir() / "thr.json";
  {
    std::ofstream out(thr);
    out << R"({"alpha": 0.05, "omega": 3.5})";
  }
  RunResult r =
      run("detect --input " + csv.string() + " --bn 15 --omega-file " + thr.string());
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["omega_used"].get<double>() == doctest::Approx(3.5));
}

TEST_CASE("threshold output is reproducible and thread-count independent") {
  std::string args = "threshold --mode global --n 100 --bn 10 --p 15 --reps 300 --seed 21";
  RunResult a = run(args + " --threads 1");
  RunResult b = run(args + " --threads 4");
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(a.out == b.out);
  auto j = nlohmann::json::parse(a.out);
  CHECK(j["alpha"].get<double>() == doctest::Approx(0.05));
  CHECK(j["omega"].is_number());
  CHECK(j["reps"] == 300);
  CHECK(j["quantiles"].contains("95"));
  CHECK(j["quantiles"]["95"].get<double>() <= j["quantiles"]["99"].get<double>());
}

TEST_CASE("detect2w reports the responsible group") {
  // groups need enough members for the calibrated level to be meaningful, so
  // split p=60 into three groups of twenty and break the first one
  fs::path csv = tmpdir() / "grouped.csv";
  RunResult sim = run("simulate --model iid --n 150 --p 60 --seed 31 --break 75:2.5:1-20 --out-csv " +
                      csv.string());
  REQUIRE(sim.code == 0);
  fs::path nb = tmpdir() / "nb.json";
  {
    std::ofstream out(nb);
    nlohmann::json groups = nlohmann::json::array();
    for (int g = 0; g < 3; ++g) {
      nlohmann::json item;
      item["id"] = g + 1;
      std::vector<int> members;
      for (int j = 20 * g + 1; j <= 20 * (g + 1); ++j) members.push_back(j);
      item["members"] = members;
      groups.push_back(item);
    }
    out << groups.dump();
  }
  RunResult r = run("detect2w --input " + csv.string() + " --nbhds " + nb.string() +
                    " --bn 15 --reps 400 --seed 8");
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["mode"] == "twoway");
  REQUIRE(j["k_hat"].get<int>() >= 1);
  // the strongest accepted break carries the injected jump
  nlohmann::json top;
  double best = -1e300;
  for (const auto& br : j["breaks"]) {
    if (br["stat_value"].get<double>() > best) {
      best = br["stat_value"].get<double>();
      top = br;
    }
  }
  CHECK(top["s"] == 1);
  CHECK(std::abs(top["tau"].get<int>() - 75) <= 4);
}

TEST_CASE("lrv subcommand reports per-series scales near truth") {
  fs::path csv = tmpdir() / "lrv_panel.csv";
  RunResult sim =
      run("simulate --model iid --n 2000 --p 4 --seed 41 --out-csv " + csv.string());
  REQUIRE(sim.code == 0);
  RunResult r = run("lrv --input " + csv.string());
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  REQUIRE(j["sigma"].size() == 4);
  for (const auto& s : j["sigma"]) {
    CHECK(s.get<double>() == doctest::Approx(1.0).epsilon(0.35));
  }
  CHECK(j["m"].get<int>() >= 2);
}

TEST_CASE("scan-bn sweeps bandwidths and reports the first count drop") {
  fs::path csv = make_panel("scan.csv", 75, 2.0, 51);
  RunResult r = run("scan-bn --input " + csv.string() +
                    " --bn 10 --bn 20 --bn 30 --reps 300 --seed 9");
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  REQUIRE(j["results"].size() == 3);
  CHECK(j["results"][0]["bn"] == 10);
  CHECK(j["results"][2]["bn"] == 30);
  for (const auto& e : j["results"]) CHECK(e["k_hat"].get<int>() >= 0);
  CHECK((j["first_drop_bn"].is_null() || j["first_drop_bn"].is_number()));
}

TEST_CASE("exit codes distinguish usage, io and validation errors") {
  RunResult usage = run("detect --bn 10");  // missing --input
  CHECK(usage.code == 2);
  RunResult missing = run("detect --input /nonexistent/panel.csv --bn 10");
  CHECK(missing.code == 3);
  {
    // failures report a machine-readable JSON line on stderr
    auto pos = missing.err.find('{');
    REQUIRE(pos != std::string::npos);
    auto j = nlohmann::json::parse(missing.err.substr(pos));
    CHECK(j["error"] == true);
    CHECK(j["code"] == 3);
    CHECK(j["message"].is_string());
  }

  fs::path bad = tmpdir() / "bad.csv";
  {
    std::ofstream out(bad);
    out << "time,a\n1,1.0\n2,not_a_number\n";
  }
  RunResult invalid = run("detect --input " + bad.string() + " --bn 10");
  CHECK(invalid.code == 5);

  RunResult badmode = run("threshold --mode nope --n 50 --bn 5 --p 3");
  CHECK(badmode.code == 2);
}

TEST_CASE("student tails and the ma model run end to end") {
  fs::path csv = tmpdir() / "heavy.csv";
  RunResult sim = run(
      "simulate --model ma --tail student --df 9 --beta 2 --trunc 80 --n 120 --p 8 --seed 61 "
      "--out-csv " +
      csv.string());
  REQUIRE(sim.code == 0);
  RunResult det = run("detect --input " + csv.string() + " --bn 12 --reps 300 --seed 6");
  REQUIRE(det.code == 0);
  auto j = nlohmann::json::parse(det.out);
  CHECK(j["k_hat"].get<int>() >= 0);
}
