#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>

#include "bbp/commands.hpp"
#include "bbp/error.hpp"

using namespace bbp;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("bbp_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_config(const fs::path& dir, const json& j) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << j.dump(2);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int call(const std::function<int(std::ostream&)>& f, std::string* out = nullptr) {
  std::ostringstream o, e;
  const int code = cli::guarded([&] { return f(o); }, e);
  if (out) *out = o.str() + e.str();
  return code;
}

const json kMixture = {{"N", 96},
                       {"trials", 16},
                       {"lambda", 0.8},
                       {"noise", {{"type", "mixture"}}},
                       {"transform", {{"type", "optimal"}}},
                       {"master_seed", 7}};

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("predict for the mixture example") {
    const fs::path dir = scratch("predict");
    cli::Options opt;
    std::string text;
    REQUIRE(call([&](std::ostream& o) { return cli::predict(write_config(dir, kMixture), opt, o); }, &text) == 0);
    const json j = json::parse(text);
    CHECK(std::abs(j["effective_snr"].get<double>() - 2.902) < 5e-4);
    CHECK(std::abs(j["location"].get<double>() - 2.2905) < 2e-4);
    CHECK(j["regime"] == "supercritical");
    CHECK(j["reference"]["name"] == "gaussian");
    CHECK(std::abs(j["detection_threshold"].get<double>() - 0.276) < 0.002);
  }

  TEST_CASE("predict identity gaussian subcritical") {
    cli::Options opt;
    opt.overrides = {"lambda=0.5"};
    std::string text;
    REQUIRE(call([&](std::ostream& o) { return cli::predict("", opt, o); }, &text) == 0);
    const json j = json::parse(text);
    CHECK(j["regime"] == "subcritical");
    CHECK(j["location"] == 2.0);
  }

  TEST_CASE("predict in scaled mode prints the shift") {
    cli::Options opt;
    opt.overrides = {"transform.type=preset", "transform.name=hermite2", "scaled=true", "lambda0=2.8284271247461903"};
    std::string text;
    REQUIRE(call([&](std::ostream& o) { return cli::predict("", opt, o); }, &text) == 0);
    const json j = json::parse(text);
    CHECK(j["regime"] == "scaled-k2");
    CHECK(std::abs(j["shift"].get<double>() - 1.25) < 1e-8);
  }

  TEST_CASE("exit codes") {
    cli::Options opt;
    opt.overrides = {"bogus=1"};
    CHECK(call([&](std::ostream& o) { return cli::predict("", opt, o); }) == cli::config_error);
    opt.overrides = {"noise.type=mixture", "transform.type=optimal", "lambda=0.28"};
    std::string text;
    CHECK(call([&](std::ostream& o) { return cli::predict("", opt, o); }, &text) == cli::numerical_failure);
    CHECK(text.find("near-critical") != std::string::npos);
    CHECK(call([&](std::ostream& o) { return cli::predict("/nonexistent/config.json", {}, o); }) ==
          cli::config_error);
    CHECK(call([&](std::ostream& o) { return cli::validate("everything", {}, o); }) == cli::config_error);
  }

  TEST_CASE("simulate writes results, summary, histogram and the config echo") {
    const fs::path dir = scratch("simulate");
    cli::Options opt;
    opt.out = dir / "out";
    opt.canonical = true;
    std::string text;
    REQUIRE(call([&](std::ostream& o) { return cli::simulate(write_config(dir, kMixture), opt, o); }, &text) == 0);
    for (const char* f : {"results.csv", "summary.json", "histogram.csv", "effective_config.json"})
      CHECK(fs::exists(*opt.out / f));
    CHECK(slurp(*opt.out / "results.csv").rfind("trial,mu1,mu2,rescaled,seed,wall_ms\n", 0) == 0);
    CHECK(slurp(*opt.out / "histogram.csv").rfind("bin_left,bin_right,count,ref_density\n", 0) == 0);
    const json echo = json::parse(slurp(*opt.out / "effective_config.json"));
    CHECK(echo["N"] == 96);
    CHECK(echo["outputs"]["path"] == opt.out->string());

    // analyze on the simulate output gives the same summary
    std::string again;
    cli::Options plain;
    REQUIRE(call([&](std::ostream& o) {
              return cli::analyze(*opt.out / "results.csv", dir / "config.json", plain, o);
            },
            &again) == 0);
    CHECK(json::parse(again) == json::parse(slurp(*opt.out / "summary.json")));
  }

  TEST_CASE("canonical outputs are byte identical across worker counts") {
    const fs::path dir = scratch("canonical");
    const fs::path cfg = write_config(dir, kMixture);
    std::vector<std::string> files;
    for (int w : {1, 3}) {
      cli::Options opt;
      opt.out = dir / ("w" + std::to_string(w));
      opt.workers = w;
      opt.canonical = true;
      REQUIRE(call([&](std::ostream& o) { return cli::simulate(cfg, opt, o); }) == 0);
      files.push_back(slurp(*opt.out / "results.csv") + slurp(*opt.out / "summary.json") +
                      slurp(*opt.out / "histogram.csv"));
    }
    CHECK(files[0] == files[1]);
  }

  TEST_CASE("json output format") {
    const fs::path dir = scratch("jsonfmt");
    json cfg = kMixture;
    cfg["outputs"] = {{"path", (dir / "o").string()}, {"format", "json"}};
    REQUIRE(call([&](std::ostream& o) { return cli::simulate(write_config(dir, cfg), {}, o); }) == 0);
    const json rows = json::parse(slurp(dir / "o" / "results.json"));
    CHECK(rows.size() == 16);
    CHECK(rows[0].contains("rescaled"));
  }

  TEST_CASE("figure presets") {
    const auto a = cli::figure_preset("2a");
    CHECK(a.N == 1024);
    CHECK(a.trials == 5000);
    CHECK(a.lambda == 0.8);
    CHECK(a.noise.type == "mixture");
    CHECK(a.transform.type == "optimal");
    CHECK(cli::figure_preset("2b").lambda == 0.1);
    const auto c = cli::figure_preset("3a");
    CHECK(c.lambda == 2.5);
    CHECK(c.noise.type == "gaussian");
    CHECK(c.transform.name == "quadratic");
    CHECK(cli::figure_preset("3b").lambda == 0.1);
    CHECK_THROWS_AS(cli::figure_preset("4"), ConfigError);

    cli::Options opt;
    opt.overrides = {"trials=10"};
    CHECK(call([&](std::ostream& o) { return cli::figure("2a", opt, o); }) == cli::config_error);
  }

  TEST_CASE("figure 2b predicts a subcritical Tracy-Widom overlay") {
    const json p = cli::predict_report(cli::figure_preset("2b"));
    CHECK(p["regime"] == "subcritical");
    CHECK(p["reference"]["name"] == "tracy-widom-goe");
  }

  TEST_CASE("validate rank2") {
    std::string text;
    CHECK(call([&](std::ostream& o) { return cli::validate("rank2", {}, o); }, &text) == 0);
    const json j = json::parse(text);
    CHECK(j["rank2"]["max_error"].get<double>() < 1e-10);
  }

  TEST_CASE("tw-table check") {
    std::string text;
    CHECK(call([&](std::ostream& o) { return cli::tw_table("check", {}, o); }, &text) == 0);
    CHECK(json::parse(text)["pass"] == true);
  }
}
