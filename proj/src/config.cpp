#include "pcmlab/config.hpp"

#include "pcmlab/error.hpp"

#include <json.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace pcmlab {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ValidationError(field + ": " + what);
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) fail(where, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) {
      fail(where.empty() ? key : where + "." + key, "unknown key");
    }
  }
}

std::string join(const std::string& a, const std::string& b) { return a.empty() ? b : a + "." + b; }

const json& require(const json& obj, const std::string& key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(join(where, key), "required field is missing");
  return *it;
}

double as_real(const json& v, const std::string& field) {
  if (!v.is_number()) fail(field, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(field, "must be finite");
  return x;
}

std::uint64_t as_count(const json& v, const std::string& field) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) fail(field, "must be non-negative");
  if (v.is_number_float()) {
    const double x = v.get<double>();
    if (x >= 0.0 && x == std::floor(x) && x < 9.0e18) return static_cast<std::uint64_t>(x);
    fail(field, "expected a non-negative integer");
  }
  fail(field, "expected a non-negative integer");
}

int as_int(const json& v, const std::string& field) {
  const std::uint64_t x = as_count(v, field);
  if (x > 1000000000ULL) fail(field, "value too large");
  return static_cast<int>(x);
}

Matrix as_matrix(const json& v, const std::string& field) {
  if (v.is_number()) return Matrix::Constant(1, 1, as_real(v, field));
  if (!v.is_array() || v.empty()) fail(field, "expected a non-empty array of rows");
  const auto rows = static_cast<Index>(v.size());
  Index cols = -1;
  Matrix m;
  for (Index i = 0; i < rows; ++i) {
    const json& row = v[static_cast<std::size_t>(i)];
    const std::string rf = field + "[" + std::to_string(i) + "]";
    if (!row.is_array() || row.empty()) fail(rf, "expected a non-empty array of numbers");
    if (cols < 0) {
      cols = static_cast<Index>(row.size());
      m.resize(rows, cols);
    } else if (static_cast<Index>(row.size()) != cols) {
      fail(field, "rows have different lengths");
    }
    for (Index j = 0; j < cols; ++j) {
      m(i, j) = as_real(row[static_cast<std::size_t>(j)], rf + "[" + std::to_string(j) + "]");
    }
  }
  return m;
}

std::vector<Matrix> as_matrix_list(const json& v, const std::string& field) {
  if (!v.is_array()) fail(field, "expected an array of matrices");
  std::vector<Matrix> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(as_matrix(v[i], field + "[" + std::to_string(i) + "]"));
  }
  return out;
}

PDMatrix as_pd(const json& v, const std::string& field) {
  try {
    return PDMatrix(as_matrix(v, field));
  } catch (const ValidationError& e) {
    fail(field, e.what());
  }
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

void line_column(const std::string& text, std::size_t byte, std::size_t& line, std::size_t& col) {
  line = 1;
  col = 1;
  const std::size_t end = std::min(byte > 0 ? byte - 1 : 0, text.size());
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
}

NominalPlant parse_plant(const json& p) {
  check_keys(p, {"a", "b", "c", "q", "r", "dA", "dB", "dC", "mu"}, "plant");
  NominalPlant plant{as_matrix(require(p, "a", "plant"), "plant.a"),
                     as_matrix(require(p, "b", "plant"), "plant.b"),
                     as_matrix(require(p, "c", "plant"), "plant.c"),
                     as_pd(require(p, "q", "plant"), "plant.q"),
                     as_pd(require(p, "r", "plant"), "plant.r"),
                     {},
                     {},
                     {},
                     1.0};
  if (p.contains("dA")) plant.d_a = as_matrix_list(p["dA"], "plant.dA");
  if (p.contains("dB")) plant.d_b = as_matrix_list(p["dB"], "plant.dB");
  if (p.contains("dC")) plant.d_c = as_matrix_list(p["dC"], "plant.dC");
  // Missing derivative lists default to zeros of the right shape.
  const std::size_t ne = std::max({plant.d_a.size(), plant.d_b.size(), plant.d_c.size()});
  auto fill = [&](std::vector<Matrix>& list, const char* name, Index r, Index c) {
    if (list.empty() && ne > 0 && !p.contains(name)) list.assign(ne, Matrix::Zero(r, c));
  };
  fill(plant.d_a, "dA", plant.a.rows(), plant.a.rows());
  fill(plant.d_b, "dB", plant.a.rows(), plant.b.cols());
  fill(plant.d_c, "dC", plant.c.rows(), plant.a.rows());
  if (p.contains("mu")) plant.mu = as_real(p["mu"], "plant.mu");
  plant.validate();
  return plant;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 0, col = 0;
    line_column(text, e.byte, line, col);
    std::ostringstream os;
    os << origin << ":" << line << ":" << col << ": JSON parse error: " << e.what();
    throw ValidationError(os.str());
  }
  check_keys(root, {"plant", "channel", "simulation", "binning", "approx", "rate", "distance_log_base"},
             "");

  NominalPlant plant = parse_plant(require(root, "plant", ""));
  const json& ch = require(root, "channel", "");
  check_keys(ch, {"alpha", "beta"}, "channel");
  ChannelParams channel(as_real(require(ch, "alpha", "channel"), "channel.alpha"),
                        as_real(require(ch, "beta", "channel"), "channel.beta"));

  ExperimentConfig cfg{std::move(plant), channel};
  if (root.contains("simulation")) {
    const json& s = root["simulation"];
    check_keys(s, {"trials", "horizon", "init_p1", "init_pcm_scale", "ergodic_length", "burn_in",
                   "seed", "threads"},
               "simulation");
    if (s.contains("trials")) cfg.trials = as_count(s["trials"], "simulation.trials");
    if (s.contains("horizon")) cfg.horizon = as_count(s["horizon"], "simulation.horizon");
    if (s.contains("init_p1")) cfg.init_p1 = as_real(s["init_p1"], "simulation.init_p1");
    if (s.contains("init_pcm_scale")) {
      cfg.init_pcm_scale = as_real(s["init_pcm_scale"], "simulation.init_pcm_scale");
    }
    if (s.contains("ergodic_length")) {
      cfg.ergodic_length = as_count(s["ergodic_length"], "simulation.ergodic_length");
    }
    if (s.contains("burn_in")) cfg.burn_in = as_count(s["burn_in"], "simulation.burn_in");
    if (s.contains("seed")) cfg.master_seed = as_count(s["seed"], "simulation.seed");
    if (s.contains("threads")) cfg.threads = static_cast<unsigned>(as_int(s["threads"], "simulation.threads"));
  }
  if (root.contains("binning")) {
    const json& b = root["binning"];
    check_keys(b, {"n_e", "delta_max", "n_d", "n_s"}, "binning");
    if (b.contains("n_e")) cfg.n_e_bins = as_int(b["n_e"], "binning.n_e");
    if (b.contains("delta_max")) cfg.delta_max = as_real(b["delta_max"], "binning.delta_max");
    if (b.contains("n_d")) cfg.n_d = as_int(b["n_d"], "binning.n_d");
    if (b.contains("n_s")) cfg.n_s = as_int(b["n_s"], "binning.n_s");
  }
  if (root.contains("approx")) {
    const json& a = root["approx"];
    check_keys(a, {"max_len", "eps_p"}, "approx");
    if (a.contains("max_len")) cfg.max_len = as_int(a["max_len"], "approx.max_len");
    if (a.contains("eps_p")) cfg.eps_p = as_real(a["eps_p"], "approx.eps_p");
  }
  if (root.contains("rate")) {
    const json& r = root["rate"];
    check_keys(r, {"checkpoints", "reference_length"}, "rate");
    if (r.contains("checkpoints")) {
      const json& c = r["checkpoints"];
      if (!c.is_array()) fail("rate.checkpoints", "expected an array of integers");
      cfg.checkpoints.clear();
      for (std::size_t i = 0; i < c.size(); ++i) {
        cfg.checkpoints.push_back(as_count(c[i], "rate.checkpoints[" + std::to_string(i) + "]"));
      }
    }
    if (r.contains("reference_length")) {
      cfg.reference_length = as_count(r["reference_length"], "rate.reference_length");
    }
  }
  if (root.contains("distance_log_base")) {
    const json& lb = root["distance_log_base"];
    if (lb.is_number() && lb.get<double>() == 10.0) {
      cfg.base = LogBase::decimal;
    } else if (lb.is_string() && lb.get<std::string>() == "e") {
      cfg.base = LogBase::natural;
    } else {
      fail("distance_log_base", "must be 10 or \"e\"");
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

std::string canonical_config(const ExperimentConfig& cfg) {
  json plant;
  plant["a"] = matrix_json(cfg.plant.a);
  plant["b"] = matrix_json(cfg.plant.b);
  plant["c"] = matrix_json(cfg.plant.c);
  plant["q"] = matrix_json(cfg.plant.q.matrix());
  plant["r"] = matrix_json(cfg.plant.r.matrix());
  plant["mu"] = cfg.plant.mu;
  auto list = [](const std::vector<Matrix>& l) {
    json arr = json::array();
    for (const auto& m : l) arr.push_back(matrix_json(m));
    return arr;
  };
  plant["dA"] = list(cfg.plant.d_a);
  plant["dB"] = list(cfg.plant.d_b);
  plant["dC"] = list(cfg.plant.d_c);

  json root;
  root["plant"] = std::move(plant);
  root["channel"] = {{"alpha", cfg.channel.alpha}, {"beta", cfg.channel.beta}};
  json sim = {{"trials", cfg.trials},
              {"horizon", cfg.horizon},
              {"init_p1", cfg.init_p1},
              {"init_pcm_scale", cfg.init_pcm_scale},
              {"ergodic_length", cfg.ergodic_length},
              {"burn_in", cfg.burn_in}};
  sim["seed"] = cfg.master_seed ? json(*cfg.master_seed) : json(nullptr);
  root["simulation"] = std::move(sim);
  root["binning"] = {{"n_e", cfg.n_e_bins}, {"delta_max", cfg.delta_max}, {"n_d", cfg.n_d}, {"n_s", cfg.n_s}};
  root["approx"] = {{"max_len", cfg.max_len}, {"eps_p", cfg.eps_p}};
  root["rate"] = {{"checkpoints", cfg.checkpoints}, {"reference_length", cfg.reference_length}};
  root["distance_log_base"] = cfg.base == LogBase::decimal ? json(10) : json("e");
  return root.dump();
}

std::string config_digest(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : canonical_config(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string word_to_string(const Word& w) {
  std::string s;
  s.reserve(w.size());
  for (const auto g : w) s.push_back(g ? '1' : '0');
  return s;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw NumericalError("write failed for " + path.string());
}

}  // namespace

void write_atoms_csv(const std::filesystem::path& path, const AtomicDistribution& dist) {
  auto out = open_out(path);
  out << "index,distance,mass,code\n";
  for (std::size_t i = 0; i < dist.atoms.size(); ++i) {
    const auto& a = dist.atoms[i];
    out << i << ',' << format_double(a.distance) << ',' << format_double(a.mass) << ','
        << word_to_string(a.code) << '\n';
  }
  finish(out, path);
}

void write_clusters_csv(const std::filesystem::path& path, const ClusterTable& t) {
  auto out = open_out(path);
  out << "distance,mass_delta,mass_ergodic,mass_empirical,unassigned\n";
  for (std::size_t i = 0; i < t.distances.size(); ++i) {
    out << format_double(t.distances[i]) << ',' << format_double(t.delta_approx[i]) << ','
        << format_double(t.ergodic[i]) << ',' << format_double(t.empirical[i]) << ",0\n";
  }
  out << "nan," << format_double(t.unassigned_delta) << ',' << format_double(t.unassigned_ergodic)
      << ',' << format_double(t.unassigned_empirical) << ",1\n";
  finish(out, path);
}

void write_histogram_csv(const std::filesystem::path& path, const Histogram& h) {
  auto out = open_out(path);
  out << "bin_lo,bin_hi,count,fraction\n";
  for (int i = 0; i < h.n_bins; ++i) {
    const auto u = static_cast<std::size_t>(i);
    out << format_double(h.bin_lo(i)) << ',' << format_double(h.bin_hi(i)) << ',' << h.counts[u]
        << ',' << format_double(h.normalized[u]) << '\n';
  }
  const double frac = h.total ? static_cast<double>(h.overflow) / static_cast<double>(h.total) : 0.0;
  out << format_double(h.delta_max) << ",inf," << h.overflow << ',' << format_double(frac) << '\n';
  finish(out, path);
}

void write_rate_csv(const std::filesystem::path& path, const std::vector<RatePoint>& rate) {
  auto out = open_out(path);
  out << "n,sup_gap,envelope_ratio\n";
  for (const auto& r : rate) {
    out << r.n << ',' << format_double(r.sup_gap) << ',' << format_double(r.envelope_ratio) << '\n';
  }
  finish(out, path);
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
  auto out = open_out(path);
  out << "row,col,value\n";
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) out << i << ',' << j << ',' << format_double(m(i, j)) << '\n';
  }
  finish(out, path);
}

void write_ladder_csv(const std::filesystem::path& path, const std::vector<double>& ladder) {
  auto out = open_out(path);
  out << "i,distance\n";
  for (std::size_t i = 0; i < ladder.size(); ++i) out << i << ',' << format_double(ladder[i]) << '\n';
  finish(out, path);
}

void write_samples_csv(const std::filesystem::path& path, const std::vector<double>& samples) {
  auto out = open_out(path);
  out << "index,distance\n";
  for (std::size_t i = 0; i < samples.size(); ++i) out << i << ',' << format_double(samples[i]) << '\n';
  finish(out, path);
}

std::string current_timestamp() {
  std::time_t t = 0;
  if (const char* sde = std::getenv("SOURCE_DATE_EPOCH"); sde && *sde) {
    t = static_cast<std::time_t>(std::strtoll(sde, nullptr, 10));
  } else {
    t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
  json j;
  j["command"] = m.command;
  j["config_digest"] = m.config_digest;
  j["tool_version"] = m.tool_version;
  j["timestamp"] = m.timestamp;
  j["seed"] = m.has_seed ? json(m.seed) : json(nullptr);
  j["output_paths"] = m.output_paths;
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  finish(out, path);
}

}  // namespace pcmlab
