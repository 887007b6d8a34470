#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "quasispec/cli.hpp"
#include "quasispec/dos.hpp"
#include "quasispec/eigensolve.hpp"
#include "quasispec/io.hpp"
#include "quasispec/tracemap.hpp"

using namespace quasispec;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "quasispec");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("quasispec_cli_" + name);
  fs::remove_all(p);
  return p;
}

nlohmann::json manifest(const fs::path& dir) { return nlohmann::json::parse(read_file(dir / "manifest.json")); }

}  // namespace

TEST_CASE("spectrum1d writes the free spectrum") {
  const auto dir = scratch("s1");
  const auto r = run({"spectrum1d", "--lambda", "0", "--n", "100", "--out", dir.string()});
  REQUIRE(r.code == 0);
  const auto rows = parse_numeric_csv(read_file(dir / "eigenvalues.csv"));
  REQUIRE(rows.size() == 100);
  for (int k = 1; k <= 100; ++k) {
    CHECK(std::abs(rows[100 - k][0] - 2 * std::cos(k * std::numbers::pi / 101)) < 1e-10);
  }
  fs::remove_all(dir);
}

TEST_CASE("repeated runs are byte-identical and hit the cache") {
  const auto a = scratch("det_a"), b = scratch("det_b"), cache = scratch("det_cache");
  const auto r1 = run({"spectrum1d", "--lambda", "1", "--n", "1000", "--out", a.string(), "--cache", cache.string()});
  const auto r2 = run({"spectrum1d", "--lambda", "1", "--n", "1000", "--out", b.string(), "--cache", cache.string()});
  REQUIRE(r1.code == 0);
  REQUIRE(r2.code == 0);
  CHECK(r1.out.find("computed") != std::string::npos);
  CHECK(r2.out.find("cache hit") != std::string::npos);
  for (const std::string f : {"eigenvalues.csv", "eigenvalues.csv.json"}) {
    CHECK(read_file(a / f) == read_file(b / f));
  }
  const auto rows = parse_numeric_csv(read_file(a / "eigenvalues.csv"));
  CHECK(rows.size() == 1000);
  CHECK(std::is_sorted(rows.begin(), rows.end()));
  CHECK(manifest(a)["manifest_hash"] == manifest(b)["manifest_hash"]);
  for (auto d : {a, b, cache}) fs::remove_all(d);
}

TEST_CASE("every output has a sidecar that round-trips") {
  const auto dir = scratch("side");
  REQUIRE(run({"dos2d", "--lambda", "1", "--lambda2", "2", "--n", "50", "--out", dir.string()}).code == 0);
  const auto m = manifest(dir);
  CHECK(m["outputs"].size() == 5);
  for (const auto& name : m["outputs"]) {
    const std::string f = name.get<std::string>();
    REQUIRE(fs::exists(dir / f));
    const auto side = nlohmann::json::parse(read_file(dir / (f + ".json")));
    CHECK(side["manifest_hash"] == m["manifest_hash"]);
    CHECK(side["file_sha256"] == sha256_hex(read_file(dir / f)));
    CHECK(nlohmann::json::parse(side.dump()) == side);
  }
  CHECK(m["params"]["lambda2"] == "2");
  fs::remove_all(dir);
}

TEST_CASE("dos2d convolution matches the 2D sums") {
  const auto d2 = scratch("dos2d");
  REQUIRE(run({"dos2d", "--lambda", "1", "--lambda2", "2", "--n", "50", "--out", d2.string()}).code == 0);
  const auto conv = parse_measure_csv(read_file(d2 / "convolution.csv"));
  ModelParams p1, p2;
  p1.lambda = 1;
  p2.lambda = 2;
  p1.n_sites = p2.n_sites = 50;
  std::vector<double> sums;
  const auto s1 = fibonacci_spectrum(p1), s2 = fibonacci_spectrum(p2);
  for (double a : s1.eigenvalues)
    for (double b : s2.eigenvalues) sums.push_back(a + b);
  CHECK(sup_cdf_distance(conv, empirical_measure(sums)) <= 1e-12);

  const auto free = scratch("dos2d_free");
  REQUIRE(run({"dos2d", "--lambda", "0", "--lambda2", "0", "--n", "200", "--out", free.string()}).code == 0);
  CHECK(manifest(free)["results"]["l2_trend"] == "stable");
  const auto rows = parse_numeric_csv(read_file(free / "density_0.csv"));
  CHECK(rows.front()[0] >= -4.1);
  CHECK(rows.back()[0] <= 4.1);
  for (auto d : {d2, free}) fs::remove_all(d);
}

TEST_CASE("tracemap runs") {
  const auto a = scratch("tm0"), b = scratch("tm4"), c = scratch("tm_deep");
  REQUIRE(run({"tracemap", "--lambda", "0", "--depth", "12", "--out", a.string()}).code == 0);
  REQUIRE(run({"tracemap", "--lambda", "4", "--depth", "12", "--out", b.string()}).code == 0);
  const double l0 = manifest(a)["results"]["length"], l4 = manifest(b)["results"]["length"];
  CHECK(std::abs(l0 - 4.0) <= 0.2);
  CHECK(l4 < l0);

  // a deeper grid with the same horizon refines the cover
  REQUIRE(run({"tracemap", "--lambda", "1", "--depth", "10", "--max-iter", "12", "--out", a.string()}).code == 0);
  REQUIRE(run({"tracemap", "--lambda", "1", "--depth", "13", "--max-iter", "12", "--out", c.string()}).code == 0);
  const auto coarse = parse_interval_csv(read_file(a / "cover.csv"));
  const auto fine = parse_interval_csv(read_file(c / "cover.csv"));
  CHECK(fine.subset_of(coarse));
  for (auto d : {a, b, c}) fs::remove_all(d);
}

TEST_CASE("regularity presets") {
  const auto a = scratch("reg_a"), b = scratch("reg_b"), l = scratch("reg_l");
  REQUIRE(run({"regularity", "--preset", "middle-thirds", "--out", a.string()}).code == 0);
  REQUIRE(run({"regularity", "--preset", "middle-thirds", "--out", b.string()}).code == 0);
  CHECK(read_file(a / "report.json") == read_file(b / "report.json"));
  const auto rep = nlohmann::json::parse(read_file(a / "report.json"));
  const double closed = std::log(1 / 0.35) / std::log(2.0);
  CHECK(std::abs(rep["alpha_hat"].get<double>() - closed) < 0.1 * closed);
  CHECK(rep["label"] == "diagnostic");

  REQUIRE(run({"regularity", "--preset", "lebesgue", "--out", l.string()}).code == 0);
  CHECK(nlohmann::json::parse(read_file(l / "report.json"))["gamma_hat"].get<double>() == doctest::Approx(1.0));
  for (auto d : {a, b, l}) fs::remove_all(d);
}

TEST_CASE("regularity from a system file") {
  const auto dir = scratch("sysfile");
  fs::create_directories(dir);
  write_file_atomic(dir / "golden.json",
                    R"({"transition": [[1,1],[1,0]], "digits": [0, 0.6], "weights": [0.5, 0.5], "projection_lambda": 0.3})");
  const auto out = dir / "out";
  REQUIRE(run({"regularity", "--system", (dir / "golden.json").string(), "--out", out.string()}).code == 0);
  CHECK(manifest(out)["input_hashes"].size() == 1);

  write_file_atomic(dir / "bad.json", R"({"transition": [[1,0],[0,1]], "digits": [0, 1], "weights": [0.5, 0.5]})");
  const auto r = run({"regularity", "--system", (dir / "bad.json").string(), "--out", (dir / "o2").string()});
  CHECK(r.code == 2);
  CHECK_FALSE(fs::exists(dir / "o2"));
  fs::remove_all(dir);
}

TEST_CASE("config files and flag precedence") {
  const auto dir = scratch("cfg");
  fs::create_directories(dir);
  write_file_atomic(dir / "run.cfg", "# replay\nlambda = 0\nn = 50\n");
  const auto out = dir / "out";
  REQUIRE(run({"spectrum1d", "--config", (dir / "run.cfg").string(), "--n", "20", "--out", out.string()}).code == 0);
  const auto m = manifest(out);
  CHECK(m["params"]["n"] == "20");
  CHECK(m["params"]["lambda"] == "0");

  write_file_atomic(dir / "bad.cfg", "colour = red\n");
  CHECK(run({"spectrum1d", "--config", (dir / "bad.cfg").string(), "--out", (dir / "o2").string()}).code == 2);
  CHECK_FALSE(fs::exists(dir / "o2"));
  fs::remove_all(dir);
}

TEST_CASE("errors fail fast without outputs") {
  const auto dir = scratch("err");
  CHECK(run({"spectrum1d", "--bogus", "1", "--out", dir.string()}).code == 2);
  CHECK(run({"nonsense"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"tracemap", "--lambda", "-1", "--out", dir.string()}).code == 2);
  CHECK(run({"verify-tensor", "--n", "17", "--out", dir.string()}).code == 2);
  CHECK(run({"dimension", "--rmax-exp", "4", "--rmin-exp", "5", "--out", dir.string()}).code == 2);
  CHECK_FALSE(fs::exists(dir));
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("remaining subcommands") {
  const auto dir = scratch("misc");
  auto results = [&](std::vector<std::string> args) {
    args.push_back("--out");
    args.push_back(dir.string());
    const auto r = run(args);
    REQUIRE(r.code == 0);
    return manifest(dir)["results"];
  };
  const auto ids = results({"ids", "--lambda", "0", "--n", "100", "--emin", "-3", "--emax", "3", "--points", "7"});
  CHECK(ids["emin"] == -3.0);
  const auto rows = parse_numeric_csv(read_file(dir / "ids.csv"));
  CHECK(rows[3][1] == doctest::Approx(0.5));
  CHECK(rows[0][1] == 0.0);

  CHECK(results({"verify-tensor", "--lambda", "4", "--lambda2", "1", "--n", "6"})["agree"] == true);
  CHECK(results({"sumset2d", "--lambda", "4", "--lambda2", "4", "--depth", "12"})["gaps"].get<int>() >= 1);
  const double d = results({"dimension", "--lambda", "0.2", "--n", "2000"})["local_dimension"]["slope"];
  CHECK(d > 0.5);
  CHECK(d <= 1.0);
  const auto ly = results({"lyapunov", "--lambdas", "0.5,1", "--e-samples", "16"});
  CHECK(ly["rows"].size() == 2);
  fs::remove_all(dir);
}
