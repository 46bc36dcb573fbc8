#include <doctest.h>

#include "support.hpp"

#include "pcmlab/config.hpp"
#include "pcmlab/error.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>

using namespace pcmlab;
using namespace testsupport;
using nlohmann::json;

namespace {

json low_loss_json() { return json::parse(read_file(config_path("low_loss"))); }

std::string error_of(const std::string& text) {
  try {
    parse_config(text, "cfg.json");
  } catch (const ValidationError& e) {
    return e.what();
  }
  return {};
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(read_file(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("bundled configs parse and validate") {
  for (const char* name : {"low_loss", "moderate_loss", "heavy_loss", "full_scale"}) {
    CAPTURE(name);
    ExperimentConfig cfg = load_bundled(name);
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.master_seed.has_value());
    CHECK(cfg.base == LogBase::decimal);
    CHECK_NOTHROW(prepare_model(cfg.plant));
  }
  const ExperimentConfig low = load_bundled("low_loss");
  CHECK(low.trials == 5000);
  CHECK(low.horizon == 400);
  CHECK(low.channel.alpha == 0.95);
  CHECK(low.n_d == 5);
  CHECK(low.plant.mu == 0.8);
  const ExperimentConfig big = load_bundled("full_scale");
  CHECK(big.trials == 50000);
  CHECK(big.horizon == 1000);
  const ExperimentConfig heavy = load_bundled("heavy_loss");
  CHECK(heavy.n_d == 40);
  CHECK(heavy.n_s == 2);
  CHECK(heavy.n_e_bins == 2000);
}

TEST_CASE("bundled plant matches the reference plant") {
  const ExperimentConfig cfg = load_bundled("low_loss");
  const NominalPlant ref = reference_plant();
  CHECK((cfg.plant.a - ref.a).norm() == 0.0);
  CHECK((cfg.plant.q.matrix() - ref.q.matrix()).norm() == 0.0);
  CHECK((cfg.plant.d_a[0] - ref.d_a[0]).norm() < 1e-15);
}

TEST_CASE("missing and out-of-range channel parameters are rejected") {
  json j = low_loss_json();
  j["channel"].erase("alpha");
  const std::string e1 = error_of(j.dump());
  CHECK(e1.find("channel.alpha") != std::string::npos);

  j = low_loss_json();
  j["channel"]["alpha"] = 1.0;
  const std::string e2 = error_of(j.dump());
  CHECK(e2.find("alpha") != std::string::npos);

  j = low_loss_json();
  j["channel"]["beta"] = 0.0;
  CHECK_FALSE(error_of(j.dump()).empty());
}

TEST_CASE("unknown keys are rejected with their path") {
  json j = low_loss_json();
  j["simulation"]["trails"] = 10;
  const std::string e = error_of(j.dump());
  CHECK(e.find("simulation.trails") != std::string::npos);

  j = low_loss_json();
  j["extra"] = true;
  CHECK(error_of(j.dump()).find("extra") != std::string::npos);
}

TEST_CASE("syntax errors report line and column") {
  const std::string text = "{\n  \"plant\": {\n    \"a\": [[1, 2],, [3, 4]]\n  }\n}\n";
  const std::string e = error_of(text);
  CHECK(e.find("cfg.json:3:") == 0);
}

TEST_CASE("malformed plant entries") {
  json j = low_loss_json();
  j["plant"]["a"] = json::array({json::array({1.0, 2.0}), json::array({3.0})});
  CHECK(error_of(j.dump()).find("plant.a") != std::string::npos);

  j = low_loss_json();
  j["plant"]["q"] = json::array({json::array({1.0, 0.0}), json::array({0.0, -1.0})});
  CHECK_FALSE(error_of(j.dump()).empty());

  j = low_loss_json();
  j["plant"]["mu"] = 0.0;
  CHECK(error_of(j.dump()).find("mu") != std::string::npos);

  j = low_loss_json();
  j["simulation"]["trials"] = -3;
  CHECK(error_of(j.dump()).find("simulation.trials") != std::string::npos);

  j = low_loss_json();
  j["distance_log_base"] = 2;
  CHECK(error_of(j.dump()).find("distance_log_base") != std::string::npos);
}

TEST_CASE("defaults and scalar shorthands") {
  const std::string text = R"({
    "plant": {"a": 1.5, "b": 1, "c": 1, "q": 1, "r": 1},
    "channel": {"alpha": 0.9, "beta": 0.2}
  })";
  const ExperimentConfig cfg = parse_config(text);
  CHECK(cfg.plant.n() == 1);
  CHECK(cfg.plant.mu == 1.0);
  CHECK(cfg.plant.n_e() == 0);
  CHECK(cfg.trials == 5000);
  CHECK(cfg.base == LogBase::decimal);
  CHECK_FALSE(cfg.master_seed.has_value());
  CHECK_THROWS_AS(cfg.seed(), ValidationError);

  json j = json::parse(text);
  j["distance_log_base"] = "e";
  j["plant"]["dA"] = json::array({0.1});
  const ExperimentConfig c2 = parse_config(j.dump());
  CHECK(c2.base == LogBase::natural);
  REQUIRE(c2.plant.n_e() == 1);
  CHECK(c2.plant.d_b[0].norm() == 0.0);
  CHECK(c2.plant.d_c[0].norm() == 0.0);
}

TEST_CASE("config digest is stable and sensitive") {
  const ExperimentConfig a = load_bundled("low_loss");
  const ExperimentConfig b = parse_config(read_file(config_path("low_loss")));
  CHECK(config_digest(a) == config_digest(b));
  CHECK(config_digest(a).size() == 16);
  // The canonical form is a fixed point of parse + canonicalise.
  const ExperimentConfig c = parse_config(canonical_config(a));
  CHECK(canonical_config(c) == canonical_config(a));

  ExperimentConfig d = a;
  d.master_seed = 43;
  CHECK(config_digest(d) != config_digest(a));
  ExperimentConfig e = a;
  e.threads = 7;
  CHECK(config_digest(e) == config_digest(a));
}

TEST_CASE("number formatting round-trips") {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double x = std::ldexp(rng.uniform() - 0.5, static_cast<int>(rng.next_u64() % 200) - 100);
    CHECK(std::strtod(format_double(x).c_str(), nullptr) == x);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(word_to_string(Word{0, 1, 1}) == "011");
}

TEST_CASE("CSV writers round-trip values") {
  const auto dir = scratch_dir("csv");
  Histogram h = make_histogram(std::vector<double>{0.05, 0.15, 0.3, 5.0}, 0.4, 4);
  write_histogram_csv(dir / "h.csv", h);
  const auto hr = read_csv(dir / "h.csv");
  REQUIRE(hr.size() == 6);
  CHECK(hr[0] == std::vector<std::string>{"bin_lo", "bin_hi", "count", "fraction"});
  CHECK(std::strtod(hr[1][3].c_str(), nullptr) == h.normalized[0]);
  CHECK(hr[5][1] == "inf");
  CHECK(hr[5][2] == "1");

  Matrix m(2, 2);
  m << 1.0 / 3.0, 2e-300, -7.25, 1e300;
  write_matrix_csv(dir / "m.csv", m);
  const auto mr = read_csv(dir / "m.csv");
  REQUIRE(mr.size() == 5);
  for (std::size_t k = 1; k < mr.size(); ++k) {
    const auto i = static_cast<Index>(std::stoi(mr[k][0]));
    const auto j = static_cast<Index>(std::stoi(mr[k][1]));
    CHECK(std::strtod(mr[k][2].c_str(), nullptr) == m(i, j));
  }

  ClusterTable t;
  t.distances = {0.0, 0.8};
  t.delta_approx = {0.9, 0.09};
  t.ergodic = {0.91, 0.08};
  t.empirical = {0.92, 0.07};
  t.unassigned_delta = 0.01;
  t.unassigned_ergodic = 0.01;
  t.unassigned_empirical = 0.01;
  write_clusters_csv(dir / "c.csv", t);
  const auto cr = read_csv(dir / "c.csv");
  REQUIRE(cr.size() == 4);
  CHECK(cr[2][0] == "0.8");
  CHECK(cr[2][3] == "0.07");
  CHECK(cr[3][0] == "nan");
  CHECK(cr[3][4] == "1");

  AtomicDistribution dist;
  dist.atoms.push_back(Atom{PDMatrix::identity(1), 0.0, 0.5, {}});
  dist.atoms.push_back(Atom{PDMatrix::identity(1), 0.25, 0.5, {0, 1}});
  write_atoms_csv(dir / "a.csv", dist);
  const auto ar = read_csv(dir / "a.csv");
  REQUIRE(ar.size() == 3);
  CHECK(ar[2] == std::vector<std::string>{"1", "0.25", "0.5", "01"});
}

TEST_CASE("manifest") {
  const auto dir = scratch_dir("manifest");
  RunManifest m;
  m.command = "solve";
  m.config_digest = "0123456789abcdef";
  m.tool_version = "0.1.0";
  m.timestamp = "2020-01-01T00:00:00Z";
  m.output_paths = {"pstar.csv"};
  write_manifest(dir / "manifest.json", m);
  const json j = json::parse(read_file(dir / "manifest.json"));
  CHECK(j["command"] == "solve");
  CHECK(j["seed"].is_null());
  CHECK(j["output_paths"][0] == "pstar.csv");

  ::setenv("SOURCE_DATE_EPOCH", "86400", 1);
  CHECK(current_timestamp() == "1970-01-02T00:00:00Z");
  ::unsetenv("SOURCE_DATE_EPOCH");
}

}  // TEST_SUITE
