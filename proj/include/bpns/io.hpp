#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bpns/dynamics.hpp"
#include "bpns/forcing.hpp"
#include "bpns/thresholds.hpp"

namespace bpns {

using json = nlohmann::json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Config file: sectioned, line-oriented key = value text. '#' starts a
// comment. Unknown keys, duplicates and type mismatches are rejected with
// the offending line number.

namespace detail {

struct RawConfig {
  struct Entry {
    std::string value;
    int line;
    mutable bool used = false;
  };
  std::map<std::string, Entry> kv;  // "section.key" -> entry

  static RawConfig parse(const std::string& text) {
    RawConfig rc;
    std::istringstream in(text);
    std::string line, section;
    int ln = 0;
    auto trim = [](std::string s) {
      const char* ws = " \t\r";
      const auto b = s.find_first_not_of(ws);
      if (b == std::string::npos) return std::string{};
      return s.substr(b, s.find_last_not_of(ws) - b + 1);
    };
    while (std::getline(in, line)) {
      ++ln;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']')
          throw ConfigError("config line " + std::to_string(ln) + ": malformed section");
        section = trim(line.substr(1, line.size() - 2));
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError("config line " + std::to_string(ln) + ": expected key = value");
      const std::string key = section + "." + trim(line.substr(0, eq));
      if (rc.kv.count(key))
        throw ConfigError("config line " + std::to_string(ln) + ": duplicate key '" +
                          key + "'");
      rc.kv[key] = Entry{trim(line.substr(eq + 1)), ln};
    }
    return rc;
  }

  const Entry* find(const std::string& key) const {
    auto it = kv.find(key);
    if (it == kv.end()) return nullptr;
    it->second.used = true;
    return &it->second;
  }

  double get_double(const std::string& key, std::optional<double> def = {}) const {
    const Entry* e = find(key);
    if (!e) {
      if (def) return *def;
      throw ConfigError("config: missing required key '" + key + "'");
    }
    try {
      size_t pos = 0;
      double v = std::stod(e->value, &pos);
      if (pos != e->value.size()) throw std::invalid_argument("");
      return v;
    } catch (...) {
      throw ConfigError("config line " + std::to_string(e->line) + ": '" + key +
                        "' expects a number, got '" + e->value + "'");
    }
  }

  int get_int(const std::string& key, std::optional<int> def = {}) const {
    const Entry* e = find(key);
    if (!e) {
      if (def) return *def;
      throw ConfigError("config: missing required key '" + key + "'");
    }
    try {
      size_t pos = 0;
      int v = std::stoi(e->value, &pos);
      if (pos != e->value.size()) throw std::invalid_argument("");
      return v;
    } catch (...) {
      throw ConfigError("config line " + std::to_string(e->line) + ": '" + key +
                        "' expects an integer, got '" + e->value + "'");
    }
  }

  uint64_t get_u64(const std::string& key, std::optional<uint64_t> def = {}) const {
    const Entry* e = find(key);
    if (!e) {
      if (def) return *def;
      throw ConfigError("config: missing required key '" + key + "'");
    }
    try {
      size_t pos = 0;
      uint64_t v = std::stoull(e->value, &pos);
      if (pos != e->value.size()) throw std::invalid_argument("");
      return v;
    } catch (...) {
      throw ConfigError("config line " + std::to_string(e->line) + ": '" + key +
                        "' expects an unsigned integer, got '" + e->value + "'");
    }
  }

  bool get_bool(const std::string& key, std::optional<bool> def = {}) const {
    const Entry* e = find(key);
    if (!e) {
      if (def) return *def;
      throw ConfigError("config: missing required key '" + key + "'");
    }
    if (e->value == "true" || e->value == "1") return true;
    if (e->value == "false" || e->value == "0") return false;
    throw ConfigError("config line " + std::to_string(e->line) + ": '" + key +
                      "' expects true/false");
  }

  std::string get_string(const std::string& key,
                         std::optional<std::string> def = {}) const {
    const Entry* e = find(key);
    if (!e) {
      if (def) return *def;
      throw ConfigError("config: missing required key '" + key + "'");
    }
    return e->value;
  }

  std::vector<double> get_double_list(const std::string& key,
                                      std::vector<double> def) const {
    const Entry* e = find(key);
    if (!e) return def;
    std::vector<double> out;
    std::istringstream ss(e->value);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        out.push_back(std::stod(tok));
      } catch (...) {
        throw ConfigError("config line " + std::to_string(e->line) + ": '" + key +
                          "' expects a comma-separated number list");
      }
    }
    return out;
  }

  void reject_unused() const {
    for (const auto& [key, e] : kv)
      if (!e.used)
        throw ConfigError("config line " + std::to_string(e.line) + ": unknown key '" +
                          key + "'");
  }
};

}  // namespace detail

struct ExperimentBlock {
  std::string type;  // simulate | sync-modes | sync-nodes | thresholds | sweep | check-bounds
  double T = 10.0;
  double burn_in = -1.0;  // -1: default 5/nu0
  double cadence = 0.5;
  uint64_t ic_seed = 1, ic_seed2 = 2;
  double ic_amplitude = 1.0, ic_kmin = 1.0, ic_kmax = 4.0;
  double kappa = 0.0;
  std::string coupling = "replace";
  double lambda = 0.0;
  int N = 16;
  std::string sweep_family = "modes";
  std::vector<double> sweep_values;
  std::vector<double> eps_list;
  std::string threshold_kind = "modes";  // thresholds subcommand: modes | nodes
};

struct OutputBlock {
  std::string series = "series.ndjson";
  bool snapshot_final = false;
};

struct RunConfig {
  GridSpec grid;
  PhysicalParams params;
  ForcingSpec forcing;
  IntegratorConfig integrator;
  Constants consts;
  ExperimentBlock exp;
  OutputBlock output;

  double burn_in_resolved() const {
    return exp.burn_in >= 0.0 ? exp.burn_in : 5.0 / params.nu0;
  }
};

inline RunConfig parse_config(const std::string& text) {
  const auto rc = detail::RawConfig::parse(text);
  RunConfig cfg;

  cfg.grid = GridSpec::make(rc.get_double("grid.L", 2.0 * std::numbers::pi),
                            rc.get_int("grid.n", 64));
  cfg.params = PhysicalParams::make(rc.get_double("params.mu"),
                                    rc.get_double("params.epsilon", 1.0),
                                    cfg.grid.kappa0);

  const std::string cls = rc.get_string("forcing.class");
  const double g0 = rc.get_double("forcing.g0", 1.0);
  if (cls == "band") {
    cfg.forcing.zonal_class = BandLimited{rc.get_double("forcing.kappa_f") * cfg.grid.kappa0};
  } else if (cls == "algebraic") {
    const double s = rc.get_double("forcing.s");
    if (!(s > 2.5)) throw ConfigError("config: forcing.s must exceed 5/2");
    cfg.forcing.zonal_class = Algebraic{s};
  } else if (cls == "analytic") {
    const double alpha = rc.get_double("forcing.alpha");
    if (!(alpha > 0.0)) throw ConfigError("config: forcing.alpha must be positive");
    cfg.forcing.zonal_class = Analytic{alpha};
  } else {
    throw ConfigError("config: forcing.class must be band, algebraic or analytic");
  }
  cfg.forcing.G0_target = g0;
  cfg.forcing.grid = cfg.grid;
  cfg.forcing.params = cfg.params;
  const double nz_amp = rc.get_double("forcing.nonzonal_amplitude", 0.0);
  if (nz_amp != 0.0) {
    NonZonalSpec nz;
    nz.amplitude = nz_amp;
    nz.kmin = rc.get_double("forcing.nonzonal_kmin", 1.0);
    nz.kmax = rc.get_double("forcing.nonzonal_kmax", 3.0);
    nz.seed = rc.get_u64("forcing.nonzonal_seed", 0);
    cfg.forcing.nonzonal = nz;
  } else {
    rc.get_double("forcing.nonzonal_kmin", 1.0);
    rc.get_double("forcing.nonzonal_kmax", 3.0);
    rc.get_u64("forcing.nonzonal_seed", 0);
  }

  cfg.integrator.dt = rc.get_double("integrator.dt", 0.0);
  cfg.integrator.enforce_symmetry = rc.get_bool("integrator.enforce_symmetry", false);
  cfg.integrator.dealias = rc.get_bool("integrator.dealias", true);

  cfg.consts.c1 = rc.get_double("constants.c1", 1.0);
  cfg.consts.c2 = rc.get_double("constants.c2", 1.0);
  cfg.consts.c3 = rc.get_double("constants.c3", 1.0);
  cfg.consts.c4 = rc.get_double("constants.c4", 1.0);
  cfg.consts.c5 = rc.get_double("constants.c5", 1.0);
  cfg.consts.c6 = rc.get_double("constants.c6", 1.0);
  cfg.consts.c7 = rc.get_double("constants.c7", 1.0);
  cfg.consts.c8 = rc.get_double("constants.c8", 1.0);
  cfg.consts.c9 = rc.get_double("constants.c9", 1.0);
  cfg.consts.c_star = rc.get_double("constants.c_star", 1.0);
  cfg.consts.c_alpha = rc.get_double("constants.c_alpha", 1.0);
  cfg.consts.c_eta = rc.get_double("constants.c_eta", 1.0);
  cfg.consts.validate();

  cfg.exp.type = rc.get_string("experiment.type");
  const bool known_type =
      cfg.exp.type == "simulate" || cfg.exp.type == "sync-modes" ||
      cfg.exp.type == "sync-nodes" || cfg.exp.type == "thresholds" ||
      cfg.exp.type == "sweep" || cfg.exp.type == "check-bounds";
  if (!known_type) throw ConfigError("config: unknown experiment.type '" + cfg.exp.type + "'");
  cfg.exp.T = rc.get_double("experiment.T", 10.0);
  cfg.exp.burn_in = rc.get_double("experiment.burn_in", -1.0);
  cfg.exp.cadence = rc.get_double("experiment.cadence", 0.5);
  cfg.exp.ic_seed = rc.get_u64("experiment.ic_seed", 1);
  cfg.exp.ic_seed2 = rc.get_u64("experiment.ic_seed2", 2);
  cfg.exp.ic_amplitude = rc.get_double("experiment.ic_amplitude", 1.0);
  cfg.exp.ic_kmin = rc.get_double("experiment.ic_kmin", 1.0);
  cfg.exp.ic_kmax = rc.get_double("experiment.ic_kmax", 4.0);
  cfg.exp.kappa = rc.get_double("experiment.kappa", 0.0);
  cfg.exp.coupling = rc.get_string("experiment.coupling", "replace");
  if (cfg.exp.coupling != "replace" && cfg.exp.coupling != "nudge")
    throw ConfigError("config: experiment.coupling must be replace or nudge");
  cfg.exp.lambda = rc.get_double("experiment.lambda", 0.0);
  cfg.exp.N = rc.get_int("experiment.N", 16);
  cfg.exp.sweep_family = rc.get_string("experiment.sweep_family", "modes");
  cfg.exp.sweep_values = rc.get_double_list("experiment.sweep_values", {});
  cfg.exp.eps_list = rc.get_double_list("experiment.eps_list", {});
  cfg.exp.threshold_kind = rc.get_string("experiment.threshold_kind", "modes");

  cfg.output.series = rc.get_string("output.series", "series.ndjson");
  cfg.output.snapshot_final = rc.get_bool("output.snapshot_final", false);

  rc.reject_unused();
  return cfg;
}

// ---------------------------------------------------------------------------
// Manifest and NDJSON series output

inline json config_to_json(const RunConfig& cfg) {
  json j;
  j["grid"] = {{"L", cfg.grid.L}, {"n", cfg.grid.n}, {"kappa0", cfg.grid.kappa0}};
  j["params"] = {{"mu", cfg.params.mu},
                 {"epsilon", cfg.params.epsilon},
                 {"nu0", cfg.params.nu0}};
  json fj;
  if (const auto* b = std::get_if<BandLimited>(&cfg.forcing.zonal_class))
    fj = {{"class", "band"}, {"kappa_f", b->kappa_f}};
  else if (const auto* a = std::get_if<Algebraic>(&cfg.forcing.zonal_class))
    fj = {{"class", "algebraic"}, {"s", a->s}};
  else
    fj = {{"class", "analytic"}, {"alpha", std::get<Analytic>(cfg.forcing.zonal_class).alpha}};
  fj["g0"] = cfg.forcing.G0_target;
  if (cfg.forcing.nonzonal) {
    fj["nonzonal"] = {{"amplitude", cfg.forcing.nonzonal->amplitude},
                      {"kmin", cfg.forcing.nonzonal->kmin},
                      {"kmax", cfg.forcing.nonzonal->kmax},
                      {"seed", cfg.forcing.nonzonal->seed}};
  }
  j["forcing"] = fj;
  j["integrator"] = {{"dt", cfg.integrator.dt},
                     {"enforce_symmetry", cfg.integrator.enforce_symmetry},
                     {"dealias", cfg.integrator.dealias}};
  j["constants"] = {{"c1", cfg.consts.c1},  {"c2", cfg.consts.c2},
                    {"c3", cfg.consts.c3},  {"c4", cfg.consts.c4},
                    {"c5", cfg.consts.c5},  {"c6", cfg.consts.c6},
                    {"c7", cfg.consts.c7},  {"c8", cfg.consts.c8},
                    {"c9", cfg.consts.c9},  {"c_star", cfg.consts.c_star},
                    {"c_alpha", cfg.consts.c_alpha}, {"c_eta", cfg.consts.c_eta}};
  j["experiment"] = {{"type", cfg.exp.type},
                     {"T", cfg.exp.T},
                     {"burn_in", cfg.exp.burn_in},
                     {"cadence", cfg.exp.cadence},
                     {"ic_seed", cfg.exp.ic_seed},
                     {"ic_seed2", cfg.exp.ic_seed2},
                     {"ic_amplitude", cfg.exp.ic_amplitude},
                     {"ic_kmin", cfg.exp.ic_kmin},
                     {"ic_kmax", cfg.exp.ic_kmax},
                     {"kappa", cfg.exp.kappa},
                     {"coupling", cfg.exp.coupling},
                     {"lambda", cfg.exp.lambda},
                     {"N", cfg.exp.N},
                     {"sweep_family", cfg.exp.sweep_family},
                     {"sweep_values", cfg.exp.sweep_values},
                     {"eps_list", cfg.exp.eps_list},
                     {"threshold_kind", cfg.exp.threshold_kind}};
  j["output"] = {{"series", cfg.output.series},
                 {"snapshot_final", cfg.output.snapshot_final}};
  return j;
}

inline uint64_t fnv1a_hash(const std::string& s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// NDJSON time-series writer: first line is the run manifest (resolved config
/// plus content hash), then one record per line, closed by a summary record.
/// An abort marks the file as partial in a final record.
class SeriesWriter {
 public:
  SeriesWriter(const std::string& path, const RunConfig& cfg) : path_(path) {
    out_.open(path, std::ios::trunc);
    if (!out_) throw std::runtime_error("SeriesWriter: cannot open " + path);
    json manifest;
    manifest["record"] = "manifest";
    manifest["config"] = config_to_json(cfg);
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx",
                  (unsigned long long)fnv1a_hash(manifest["config"].dump()));
    manifest["config_hash"] = hash;
    write_line(manifest);
  }

  ~SeriesWriter() {
    if (out_.is_open() && !closed_) {
      json j;
      j["record"] = "partial";
      write_line(j);
    }
  }

  void record(json j) {
    j["record"] = j.value("record", "sample");
    write_line(j);
  }

  void summary(json j) {
    j["record"] = "summary";
    write_line(j);
    closed_ = true;
    out_.close();
  }

 private:
  void write_line(const json& j) {
    out_ << j.dump() << "\n";
    out_.flush();
    if (!out_) throw std::runtime_error("SeriesWriter: write failed on " + path_);
  }
  std::string path_;
  std::ofstream out_;
  bool closed_ = false;
};

// ---------------------------------------------------------------------------
// Binary snapshot: header {magic "BPNS", version u32, n u32, L f64, t f64,
// kind u32}, then n*n row-major little-endian f64 physical values.

enum class SnapshotKind : uint32_t { vorticity = 0, streamfunction = 1, forcing = 2 };

inline void write_snapshot(const std::string& path, const SimState& state,
                           SnapshotKind kind = SnapshotKind::vorticity) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("snapshot: cannot open " + path);
  const PhysicalField p = to_physical(state.omega);
  const uint32_t version = 1, n = uint32_t(state.omega.grid.n), k = uint32_t(kind);
  const double L = state.omega.grid.L, t = state.t;
  out.write("BPNS", 4);
  out.write(reinterpret_cast<const char*>(&version), 4);
  out.write(reinterpret_cast<const char*>(&n), 4);
  out.write(reinterpret_cast<const char*>(&L), 8);
  out.write(reinterpret_cast<const char*>(&t), 8);
  out.write(reinterpret_cast<const char*>(&k), 4);
  out.write(reinterpret_cast<const char*>(p.values.data()),
            std::streamsize(p.values.size() * 8));
  if (!out) throw std::runtime_error("snapshot: write failed on " + path);
}

struct SnapshotData {
  double t = 0.0;
  SnapshotKind kind = SnapshotKind::vorticity;
  PhysicalField field;
};

inline SnapshotData read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("snapshot: cannot open " + path);
  char magic[5] = {0};
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != "BPNS")
    throw std::runtime_error(std::string("snapshot: bad magic '") + magic + "' in " + path);
  uint32_t version = 0, n = 0, kind = 0;
  double L = 0.0, t = 0.0;
  in.read(reinterpret_cast<char*>(&version), 4);
  in.read(reinterpret_cast<char*>(&n), 4);
  in.read(reinterpret_cast<char*>(&L), 8);
  in.read(reinterpret_cast<char*>(&t), 8);
  in.read(reinterpret_cast<char*>(&kind), 4);
  if (!in || version != 1)
    throw std::runtime_error("snapshot: unsupported version in " + path);
  SnapshotData snap;
  snap.t = t;
  snap.kind = SnapshotKind(kind);
  snap.field = PhysicalField(GridSpec::make(L, int(n)));
  in.read(reinterpret_cast<char*>(snap.field.values.data()),
          std::streamsize(snap.field.values.size() * 8));
  if (!in || in.gcount() != std::streamsize(snap.field.values.size() * 8))
    throw std::runtime_error("snapshot: truncated payload in " + path);
  return snap;
}

/// Rebuild a spectral state from a snapshot (mean re-zeroed).
inline SimState snapshot_to_state(const SnapshotData& snap) {
  SimState s;
  s.t = snap.t;
  s.omega = to_spectral(snap.field);
  s.omega.at(0, 0) = Complex{0.0, 0.0};
  s.omega.mean_zero = true;
  return s;
}

}  // namespace bpns
