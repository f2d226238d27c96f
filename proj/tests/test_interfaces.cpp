#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "nmh/presets.hpp"
#include "nmh/verify.hpp"

using namespace nmh;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag)
      : path(fs::temp_directory_path() / ("nmh_test_" + tag)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("sequence tags parse and evaluate") {
  auto eq14 = Sequence::from_json(json("eq14"));
  CHECK(eq14(6) == doctest::Approx(std::pow(6.0, -3.0)).epsilon(1e-14));
  CHECK(eq14(7) == doctest::Approx(std::pow(7.0, -2.0)).epsilon(1e-14));
  CHECK(eq14(8) == doctest::Approx(std::pow(8.0, -1.0)).epsilon(1e-14));
  auto rec = Sequence::from_json(json("reciprocal"));
  CHECK(rec(4) == 0.25);
  auto tab = Sequence::from_json(json{{"table", {0.5, 0.25}}});
  CHECK(tab(2) == 0.25);
  CHECK_THROWS(tab(3));
  CHECK_THROWS(Sequence::from_json(json("nope")));
}

TEST_CASE("experiment config JSON round trip") {
  ExperimentConfig cfg = preset("fig1");
  auto back = ExperimentConfig::from_json(cfg.to_json());
  CHECK(back.to_json() == cfg.to_json());

  ExperimentConfig pm = preset("pmmh");
  auto back2 = ExperimentConfig::from_json(pm.to_json());
  CHECK(back2.to_json() == pm.to_json());
}

TEST_CASE("every advertised preset resolves") {
  for (const auto& name : preset_names()) CHECK_NOTHROW(preset(name));
  for (const auto& name : classify_preset_names())
    CHECK_NOTHROW(classify_preset(name, 1));
  CHECK_THROWS(preset("not-a-preset"));
  CHECK_THROWS(classify_preset("not-a-preset", 1));
}

TEST_CASE("classify presets give the expected verdicts") {
  CHECK(classify(classify_preset("prop2", 1).spec, 30000, 1e-12).verdict ==
        WalkClassification::Verdict::transient);
  CHECK(classify(classify_preset("prop2-proof", 1).spec, 30000, 1e-12).verdict ==
        WalkClassification::Verdict::transient);
  CHECK(classify(classify_preset("prop3", 1).spec, 30000, 1e-12).verdict ==
        WalkClassification::Verdict::transient);
  CHECK(classify(classify_preset("prop7", 3).spec, 30000, 1e-12).verdict ==
        WalkClassification::Verdict::transient);
  CHECK(classify(classify_preset("prop6", 3).spec, 30000, 1e-12).verdict ==
        WalkClassification::Verdict::geometrically_ergodic);
  CHECK(classify(classify_preset("marginal-geometric", 1).spec, 30000,
                 1e-12).verdict ==
        WalkClassification::Verdict::geometrically_ergodic);
}

TEST_CASE("manifest round trip reproduces byte-identical CSV outputs") {
  ExperimentConfig cfg;
  cfg.id = "roundtrip";
  cfg.target = "geometric";
  cfg.theta = 0.5;
  cfg.weights = json{{"family", "two_point_homogeneous"},
                     {"params", {{"b", 1.6}, {"eps", 0.4}}}};
  cfg.kernels = {"marginal", "noisy", "pseudo_marginal"};
  cfg.N_values = {1, 2};
  cfg.iterations = 2000;
  cfg.burnin = 100;
  cfg.thin = 10;
  cfg.replicates = 2;
  cfg.workers = 3;
  cfg.x0 = 3.0;
  cfg.diagnostics = {"acceptance", "tv", "acf"};

  TempDir d1("rt1"), d2("rt2");
  auto out1 = run_experiment(cfg, d1.path);
  auto cfg2 = ExperimentConfig::from_json(out1.manifest.at("config"));
  auto out2 = run_experiment(cfg2, d2.path);

  REQUIRE(out1.files.size() == out2.files.size());
  int csvs = 0;
  for (std::size_t i = 0; i < out1.files.size(); ++i) {
    if (out1.files[i].extension() != ".csv") continue;
    ++csvs;
    CHECK(out1.files[i].filename() == out2.files[i].filename());
    CHECK(slurp(out1.files[i]) == slurp(out2.files[i]));
  }
  CHECK(csvs > 0);
}

TEST_CASE("continuous-target run emits histogram and tv tables") {
  ExperimentConfig cfg = preset("fig1");
  cfg.id = "fig1-tiny";
  cfg.N_values = {5};
  cfg.iterations = 3000;
  TempDir d("fig1");
  auto out = run_experiment(cfg, d.path);
  bool has_hist = false, has_tv = false, has_manifest = false;
  for (const auto& f : out.files) {
    auto name = f.filename().string();
    if (name.find("hist") != std::string::npos) has_hist = true;
    if (name.find("_tv.csv") != std::string::npos) has_tv = true;
    if (name.find("manifest") != std::string::npos) has_manifest = true;
  }
  CHECK(has_hist);
  CHECK(has_tv);
  CHECK(has_manifest);
  CHECK(out.manifest.at("version").is_string());
}

TEST_CASE("verify registry covers the advertised ids") {
  for (const auto& id : verify_ids()) CHECK(is_verify_id(id));
  CHECK(is_verify_id("prop11"));
  CHECK(is_verify_id("prop12"));
  CHECK(!is_verify_id("prop99"));
  CHECK_THROWS(run_verify("prop99"));
}

TEST_CASE("fast verify ids produce reports with evidence") {
  auto rep = run_verify("rate-bound");
  CHECK(rep.pass);
  CHECK(!rep.checks.empty());
  auto j = rep.to_json();
  CHECK(j.at("id") == "rate-bound");
  CHECK(j.at("checks").size() == rep.checks.size());
}
