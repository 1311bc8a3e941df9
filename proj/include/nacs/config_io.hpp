#pragma once

// JSON configuration and result serialization. Configs are schema-versioned
// and strict: unknown keys are rejected, every error message carries the
// JSON pointer of the offending value (parse errors carry line numbers).
// Result JSON keeps insertion order; floats in CSV are printed with 17
// significant digits so traces replay exactly.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nacs/accel_search.hpp"
#include "nacs/accel_space.hpp"
#include "nacs/cosearch.hpp"
#include "nacs/cost_tables.hpp"
#include "nacs/costmodel.hpp"
#include "nacs/oracle_sweep.hpp"
#include "nacs/supernet.hpp"
#include "nacs/workload.hpp"

namespace nacs {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// %.17g, the shortest format guaranteed to round-trip any double.
inline std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ------------------------------------------------------------ strict view

// Wrapper over a JSON object that tracks key consumption; close() rejects
// anything the schema never asked for.
class StrictObject {
 public:
  StrictObject(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& get(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) throw ConfigError(path_ + ": missing required key '" + key + "'");
    return *it;
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string path_of(const std::string& key) const { return path_ + "/" + key; }

  void close() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key()))
        throw ConfigError(path_ + ": unknown key '" + it.key() + "'");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

namespace jio {

inline std::int64_t as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError(path + ": expected an integer");
  return j.get<std::int64_t>();
}

inline double as_double(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path + ": expected a number");
  return j.get<double>();
}

inline bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw ConfigError(path + ": expected a boolean");
  return j.get<bool>();
}

inline std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path + ": expected a string");
  return j.get<std::string>();
}

inline const json& as_array(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path + ": expected an array");
  return j;
}

template <class T, class F>
inline T opt(StrictObject& o, const std::string& key, T fallback, F&& read) {
  const json* j = o.find(key);
  return j ? read(*j, o.path_of(key)) : fallback;
}

inline std::int64_t opt_int(StrictObject& o, const std::string& key, std::int64_t fb) {
  return opt<std::int64_t>(o, key, fb, as_int);
}
inline double opt_double(StrictObject& o, const std::string& key, double fb) {
  return opt<double>(o, key, fb, as_double);
}
inline bool opt_bool(StrictObject& o, const std::string& key, bool fb) {
  return opt<bool>(o, key, fb, as_bool);
}

inline void require_schema(StrictObject& o) {
  if (as_int(o.get("schema_version"), o.path_of("schema_version")) != kSchemaVersion)
    throw ConfigError(o.path_of("schema_version") + ": unsupported version (expected " +
                      std::to_string(kSchemaVersion) + ")");
}

}  // namespace jio

// ------------------------------------------------------------- enum names

inline std::string noc_to_string(NocKind n) { return noc_name(n); }

inline NocKind noc_from_string(const std::string& s, const std::string& path) {
  for (NocKind n : {NocKind::OutputParallel, NocKind::KernelParallel,
                    NocKind::KernelOutputParallel})
    if (s == noc_name(n)) return n;
  throw ConfigError(path + ": unknown NoC kind '" + s + "'");
}

inline std::string mode_to_string(ExecMode m) { return mode_name(m); }

inline ExecMode mode_from_string(const std::string& s, const std::string& path) {
  for (ExecMode m : {ExecMode::MultiCycle, ExecMode::Pipeline})
    if (s == mode_name(m)) return m;
  throw ConfigError(path + ": unknown execution mode '" + s + "'");
}

inline std::string objective_to_string(Objective o) { return objective_name(o); }

inline Objective objective_from_string(const std::string& s, const std::string& path) {
  for (Objective o : {Objective::Edp, Objective::Fps, Objective::Latency})
    if (s == objective_name(o)) return o;
  throw ConfigError(path + ": unknown objective '" + s + "'");
}

inline int dim_from_string(const std::string& s, const std::string& path) {
  const int d = dim_from_name(s);
  if (d < 0) throw ConfigError(path + ": unknown dimension '" + s + "'");
  return d;
}

// ---------------------------------------------------------------- layers

inline json layer_to_json(const ConvLayerDesc& l) {
  return json{{"x", l.x},           {"y", l.y},      {"r", l.r},
              {"s", l.s},           {"c", l.c},      {"k", l.k},
              {"stride", l.stride}, {"groups", l.groups}};
}

inline ConvLayerDesc layer_from_json(const json& j, const std::string& path) {
  StrictObject o(j, path);
  ConvLayerDesc l;
  l.x = jio::as_int(o.get("x"), o.path_of("x"));
  l.y = jio::as_int(o.get("y"), o.path_of("y"));
  l.r = jio::as_int(o.get("r"), o.path_of("r"));
  l.s = jio::as_int(o.get("s"), o.path_of("s"));
  l.c = jio::as_int(o.get("c"), o.path_of("c"));
  l.k = jio::as_int(o.get("k"), o.path_of("k"));
  l.stride = jio::opt_int(o, "stride", 1);
  l.groups = jio::opt_int(o, "groups", 1);
  o.close();
  try {
    l.check();
  } catch (const std::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return l;
}

inline json network_to_json(const NetworkDesc& net) {
  json layers = json::array();
  for (const auto& l : net.layers) layers.push_back(layer_to_json(l));
  return json{{"schema_version", kSchemaVersion}, {"layers", std::move(layers)}};
}

inline NetworkDesc network_from_json(const json& j, const std::string& path) {
  StrictObject o(j, path);
  jio::require_schema(o);
  NetworkDesc net;
  const json& arr = jio::as_array(o.get("layers"), o.path_of("layers"));
  for (std::size_t i = 0; i < arr.size(); ++i)
    net.layers.push_back(layer_from_json(arr[i], o.path_of("layers") + "[" + std::to_string(i) + "]"));
  o.close();
  return net;
}

// --------------------------------------------------------- mapping groups

inline json order_to_json(const std::array<int, kDims>& order) {
  json a = json::array();
  for (int d : order) a.push_back(dim_name(d));
  return a;
}

inline std::array<int, kDims> order_from_json(const json& j, const std::string& path) {
  const json& arr = jio::as_array(j, path);
  if (arr.size() != kDims) throw ConfigError(path + ": loop order needs all 6 dimensions");
  std::array<int, kDims> order{};
  std::array<bool, kDims> seen{};
  for (int i = 0; i < kDims; ++i) {
    const int d = dim_from_string(jio::as_string(arr[i], path), path);
    if (seen[d]) throw ConfigError(path + ": dimension '" + dim_name(d) + "' repeated");
    seen[d] = true;
    order[i] = d;
  }
  return order;
}

inline json tiles_to_json(const std::array<std::int64_t, kDims>& t) {
  json o = json::object();
  for (int d = 0; d < kDims; ++d) o[dim_name(d)] = t[d];
  return o;
}

inline std::array<std::int64_t, kDims> tiles_from_json(const json& j, const std::string& path) {
  StrictObject o(j, path);
  std::array<std::int64_t, kDims> t;
  t.fill(1);
  for (int d = 0; d < kDims; ++d)
    t[d] = jio::opt_int(o, dim_name(d), 1);
  o.close();
  return t;
}

inline json group_to_json(const MappingGroup& g) {
  return json{{"loop_order",
               {{"dram", order_to_json(g.loop_order[OrderDram])},
                {"gb", order_to_json(g.loop_order[OrderGb])},
                {"rf", order_to_json(g.loop_order[OrderRf])}}},
              {"tiles",
               {{"gb", tiles_to_json(g.tile[TileGb])},
                {"pe", tiles_to_json(g.tile[TilePe])},
                {"rf", tiles_to_json(g.tile[TileRf])}}}};
}

inline MappingGroup group_from_json(const json& j, const std::string& path) {
  StrictObject o(j, path);
  MappingGroup g;
  if (const json* lo = o.find("loop_order")) {
    StrictObject oo(*lo, o.path_of("loop_order"));
    if (const json* v = oo.find("dram")) g.loop_order[OrderDram] = order_from_json(*v, oo.path_of("dram"));
    if (const json* v = oo.find("gb")) g.loop_order[OrderGb] = order_from_json(*v, oo.path_of("gb"));
    if (const json* v = oo.find("rf")) g.loop_order[OrderRf] = order_from_json(*v, oo.path_of("rf"));
    oo.close();
  }
  if (const json* ti = o.find("tiles")) {
    StrictObject oo(*ti, o.path_of("tiles"));
    if (const json* v = oo.find("gb")) g.tile[TileGb] = tiles_from_json(*v, oo.path_of("gb"));
    if (const json* v = oo.find("pe")) g.tile[TilePe] = tiles_from_json(*v, oo.path_of("pe"));
    if (const json* v = oo.find("rf")) g.tile[TileRf] = tiles_from_json(*v, oo.path_of("rf"));
    oo.close();
  }
  o.close();
  return g;
}

// ----------------------------------------------------- accelerator config

inline json accel_config_to_json(const AcceleratorConfig& cfg) {
  json j{{"schema_version", kSchemaVersion},
         {"noc", noc_to_string(cfg.noc)},
         {"max_pes", cfg.max_pes},
         {"mode", mode_to_string(cfg.mode)}};
  if (cfg.mode == ExecMode::MultiCycle) {
    j["mapping"] = group_to_json(cfg.global);
  } else {
    j["num_chunks"] = cfg.num_chunks;
    j["chunk_of_layer"] = cfg.chunk_of_layer;
    json groups = json::array();
    for (const auto& g : cfg.chunk_groups) groups.push_back(group_to_json(g));
    j["chunk_mappings"] = std::move(groups);
  }
  return j;
}

inline AcceleratorConfig accel_config_from_json(const json& j, const std::string& path) {
  StrictObject o(j, path);
  jio::require_schema(o);
  AcceleratorConfig cfg;
  cfg.noc = noc_from_string(jio::as_string(o.get("noc"), o.path_of("noc")), o.path_of("noc"));
  cfg.max_pes = jio::as_int(o.get("max_pes"), o.path_of("max_pes"));
  cfg.mode = mode_from_string(jio::as_string(o.get("mode"), o.path_of("mode")), o.path_of("mode"));
  if (cfg.mode == ExecMode::MultiCycle) {
    cfg.num_chunks = 1;
    if (const json* m = o.find("mapping")) cfg.global = group_from_json(*m, o.path_of("mapping"));
  } else {
    cfg.num_chunks = static_cast<int>(jio::as_int(o.get("num_chunks"), o.path_of("num_chunks")));
    const json& col = jio::as_array(o.get("chunk_of_layer"), o.path_of("chunk_of_layer"));
    for (std::size_t i = 0; i < col.size(); ++i)
      cfg.chunk_of_layer.push_back(static_cast<int>(
          jio::as_int(col[i], o.path_of("chunk_of_layer") + "[" + std::to_string(i) + "]")));
    const json& gr = jio::as_array(o.get("chunk_mappings"), o.path_of("chunk_mappings"));
    for (std::size_t i = 0; i < gr.size(); ++i)
      cfg.chunk_groups.push_back(
          group_from_json(gr[i], o.path_of("chunk_mappings") + "[" + std::to_string(i) + "]"));
    if (static_cast<int>(cfg.chunk_groups.size()) != cfg.num_chunks)
      throw ConfigError(o.path_of("chunk_mappings") + ": need one mapping per chunk");
  }
  o.close();
  return cfg;
}

// ----------------------------------------------------------------- spaces

inline json network_space_to_json(const NetworkSpace& space) {
  json blocks = json::array();
  for (const auto& site : space.blocks) {
    json cands = json::array();
    for (const auto& c : site.candidates) {
      if (c.is_skip)
        cands.push_back(json{{"skip", true}});
      else
        cands.push_back(json{{"kernel", c.kernel}, {"expansion", c.expansion}, {"group", c.group}});
    }
    blocks.push_back(json{{"in_channels", site.in_channels},
                          {"out_channels", site.out_channels},
                          {"spatial", site.spatial},
                          {"stride", site.stride},
                          {"candidates", std::move(cands)}});
  }
  return json{{"blocks", std::move(blocks)}};
}

inline NetworkSpace network_space_from_json(const json& j, const std::string& path) {
  StrictObject o(j, path);
  NetworkSpace space;
  const json& blocks = jio::as_array(o.get("blocks"), o.path_of("blocks"));
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const std::string bpath = o.path_of("blocks") + "[" + std::to_string(b) + "]";
    StrictObject ob(blocks[b], bpath);
    BlockSite site;
    site.in_channels = jio::as_int(ob.get("in_channels"), ob.path_of("in_channels"));
    site.out_channels = jio::as_int(ob.get("out_channels"), ob.path_of("out_channels"));
    site.spatial = jio::as_int(ob.get("spatial"), ob.path_of("spatial"));
    site.stride = jio::opt_int(ob, "stride", 1);
    const json& cands = jio::as_array(ob.get("candidates"), ob.path_of("candidates"));
    for (std::size_t c = 0; c < cands.size(); ++c) {
      const std::string cpath = ob.path_of("candidates") + "[" + std::to_string(c) + "]";
      StrictObject oc(cands[c], cpath);
      BlockChoice bc;
      if (oc.has("skip")) {
        bc.is_skip = jio::as_bool(oc.get("skip"), oc.path_of("skip"));
        if (!bc.is_skip) throw ConfigError(cpath + ": 'skip' may only be true");
      } else {
        bc.kernel = jio::as_int(oc.get("kernel"), oc.path_of("kernel"));
        bc.expansion = jio::opt_int(oc, "expansion", 1);
        bc.group = jio::opt_int(oc, "group", 1);
      }
      oc.close();
      site.candidates.push_back(bc);
    }
    ob.close();
    space.blocks.push_back(std::move(site));
  }
  o.close();
  try {
    space.check();
  } catch (const std::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return space;
}

inline AcceleratorSpace accel_space_from_json(const json& j, const std::string& path,
                                              const std::array<std::int64_t, kDims>& default_ref) {
  StrictObject o(j, path);
  AcceleratorSpace sp;
  sp.ref_dims = default_ref;
  if (const json* rd = o.find("ref_dims")) sp.ref_dims = tiles_from_json(*rd, o.path_of("ref_dims"));
  if (const json* v = o.find("noc_options")) {
    sp.noc_options.clear();
    const json& arr = jio::as_array(*v, o.path_of("noc_options"));
    for (const auto& e : arr)
      sp.noc_options.push_back(
          noc_from_string(jio::as_string(e, o.path_of("noc_options")), o.path_of("noc_options")));
  }
  if (const json* v = o.find("pe_count_options")) {
    sp.pe_count_options.clear();
    const json& arr = jio::as_array(*v, o.path_of("pe_count_options"));
    for (const auto& e : arr)
      sp.pe_count_options.push_back(jio::as_int(e, o.path_of("pe_count_options")));
  }
  if (const json* v = o.find("mode_options")) {
    sp.mode_options.clear();
    const json& arr = jio::as_array(*v, o.path_of("mode_options"));
    for (const auto& e : arr)
      sp.mode_options.push_back(
          mode_from_string(jio::as_string(e, o.path_of("mode_options")), o.path_of("mode_options")));
  }
  sp.num_chunks = static_cast<int>(jio::opt_int(o, "num_chunks", 1));
  if (const json* v = o.find("dw_chunks")) {
    const json& arr = jio::as_array(*v, o.path_of("dw_chunks"));
    for (const auto& e : arr)
      sp.dw_chunks.push_back(static_cast<int>(jio::as_int(e, o.path_of("dw_chunks"))));
  }
  sp.search_loop_order = jio::opt_bool(o, "search_loop_order", true);
  if (const json* v = o.find("fixed_order")) {
    StrictObject oo(*v, o.path_of("fixed_order"));
    if (const json* w = oo.find("dram"))
      sp.fixed_order[OrderDram] = order_from_json(*w, oo.path_of("dram"));
    if (const json* w = oo.find("gb")) sp.fixed_order[OrderGb] = order_from_json(*w, oo.path_of("gb"));
    if (const json* w = oo.find("rf")) sp.fixed_order[OrderRf] = order_from_json(*w, oo.path_of("rf"));
    oo.close();
  }
  if (const json* v = o.find("dsp_limit")) sp.dsp_limit = jio::as_double(*v, o.path_of("dsp_limit"));
  if (const json* v = o.find("area_limit"))
    sp.area_limit = jio::as_double(*v, o.path_of("area_limit"));
  o.close();
  try {
    sp.check();
  } catch (const std::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return sp;
}

inline HardwareCostTables tables_from_json(const json& j, const std::string& path) {
  StrictObject o(j, path);
  HardwareCostTables t;
  t.e_rf = jio::opt_double(o, "e_rf", t.e_rf);
  t.e_noc = jio::opt_double(o, "e_noc", t.e_noc);
  t.e_gb = jio::opt_double(o, "e_gb", t.e_gb);
  t.e_dram = jio::opt_double(o, "e_dram", t.e_dram);
  t.e_mac = jio::opt_double(o, "e_mac", t.e_mac);
  t.bw_rf = jio::opt_double(o, "bw_rf", t.bw_rf);
  t.bw_noc = jio::opt_double(o, "bw_noc", t.bw_noc);
  t.bw_gb = jio::opt_double(o, "bw_gb", t.bw_gb);
  t.bw_dram = jio::opt_double(o, "bw_dram", t.bw_dram);
  t.gb_capacity = jio::opt_double(o, "gb_capacity", t.gb_capacity);
  t.rf_capacity = jio::opt_double(o, "rf_capacity", t.rf_capacity);
  t.clock_hz = jio::opt_double(o, "clock_hz", t.clock_hz);
  t.dsp_per_pe = jio::opt_double(o, "dsp_per_pe", t.dsp_per_pe);
  t.area_per_pe = jio::opt_double(o, "area_per_pe", t.area_per_pe);
  t.area_per_word = jio::opt_double(o, "area_per_word", t.area_per_word);
  o.close();
  try {
    t.check();
  } catch (const std::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return t;
}

// ------------------------------------------------------------ run config

struct RunConfig {
  Objective objective = Objective::Edp;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string output_dir = "out";
  NetworkSpace network_space;
  AcceleratorSpace accel_space;
  HardwareCostTables tables;
  AccelSearchConfig das;
  DnsConfig dns;
  SyntheticTaskSpec task;
  CoSearchConfig cosearch;
  int random_n_nets = 300;
  int random_n_accels = 300;
  int random_proxy_steps = 200;
  SweepConfig oracle;
  // optional concrete workload: explicit layers, or choices into network_space
  std::optional<NetworkDesc> network;
  std::optional<std::vector<int>> network_choices;

  NetworkDesc resolve_network() const {
    if (network) return *network;
    if (network_choices) return assemble_network(network_space, *network_choices);
    throw ConfigError("config: no concrete network; add a 'network' section with 'layers' or 'choices'");
  }
};

inline AccelSearchConfig das_from_json(const json& j, const std::string& path) {
  StrictObject o(j, path);
  AccelSearchConfig c;
  c.steps = static_cast<int>(jio::opt_int(o, "steps", c.steps));
  c.learning_rate = jio::opt_double(o, "learning_rate", c.learning_rate);
  if (const json* v = o.find("lr_mode")) {
    const std::string m = jio::as_string(*v, o.path_of("lr_mode"));
    if (m == "normalized")
      c.raw_scale = false;
    else if (m == "raw")
      c.raw_scale = true;
    else
      throw ConfigError(o.path_of("lr_mode") + ": expected 'normalized' or 'raw'");
  }
  c.momentum = jio::opt_double(o, "momentum", c.momentum);
  c.temp_init = jio::opt_double(o, "temp_init", c.temp_init);
  c.temp_decay = jio::opt_double(o, "temp_decay", c.temp_decay);
  c.steps_per_epoch = static_cast<int>(jio::opt_int(o, "steps_per_epoch", c.steps_per_epoch));
  c.penalty_multiplier = jio::opt_double(o, "penalty_multiplier", c.penalty_multiplier);
  o.close();
  if (c.steps < 1) throw ConfigError(path + "/steps: must be >= 1");
  if (!(c.temp_init > 0.0) || !(c.temp_decay > 0.0) || c.temp_decay > 1.0)
    throw ConfigError(path + ": temperature schedule must satisfy init > 0, 0 < decay <= 1");
  return c;
}

inline DnsConfig dns_from_json(const json& j, const std::string& path) {
  StrictObject o(j, path);
  DnsConfig c;
  c.lr_omega = jio::opt_double(o, "lr_omega", c.lr_omega);
  c.momentum = jio::opt_double(o, "momentum", c.momentum);
  c.lr_alpha = jio::opt_double(o, "lr_alpha", c.lr_alpha);
  c.adam_beta1 = jio::opt_double(o, "adam_beta1", c.adam_beta1);
  c.adam_beta2 = jio::opt_double(o, "adam_beta2", c.adam_beta2);
  c.adam_eps = jio::opt_double(o, "adam_eps", c.adam_eps);
  c.hard = jio::opt_bool(o, "hard", c.hard);
  c.batch = static_cast<int>(jio::opt_int(o, "batch", c.batch));
  o.close();
  if (c.batch < 1) throw ConfigError(path + "/batch: must be >= 1");
  return c;
}

inline SyntheticTaskSpec task_from_json(const json& j, const std::string& path) {
  StrictObject o(j, path);
  SyntheticTaskSpec t;
  t.input_dim = static_cast<int>(jio::opt_int(o, "input_dim", t.input_dim));
  t.classes = static_cast<int>(jio::opt_int(o, "classes", t.classes));
  t.train_size = static_cast<int>(jio::opt_int(o, "train_size", t.train_size));
  t.val_size = static_cast<int>(jio::opt_int(o, "val_size", t.val_size));
  t.center_scale = jio::opt_double(o, "center_scale", t.center_scale);
  t.noise_sigma = jio::opt_double(o, "noise_sigma", t.noise_sigma);
  t.xor_pairs = jio::opt_bool(o, "xor_pairs", t.xor_pairs);
  t.seed = static_cast<std::uint64_t>(jio::opt_int(o, "seed", static_cast<std::int64_t>(t.seed)));
  o.close();
  try {
    t.check();
  } catch (const std::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return t;
}

inline RunConfig run_config_from_json(const json& j, const std::string& path) {
  StrictObject o(j, path);
  jio::require_schema(o);
  RunConfig rc;
  if (const json* v = o.find("objective"))
    rc.objective = objective_from_string(jio::as_string(*v, o.path_of("objective")),
                                         o.path_of("objective"));
  rc.seed = static_cast<std::uint64_t>(jio::opt_int(o, "seed", 1));
  rc.threads = static_cast<int>(jio::opt_int(o, "threads", 1));
  if (rc.threads < 1) throw ConfigError(o.path_of("threads") + ": must be >= 1");
  if (const json* v = o.find("output"))
    rc.output_dir = jio::as_string(StrictObject(*v, o.path_of("output")).get("dir"),
                                   o.path_of("output") + "/dir");

  rc.network_space =
      network_space_from_json(o.get("network_space"), o.path_of("network_space"));
  const auto default_ref = reference_dims(rc.network_space);
  if (const json* v = o.find("accel_space"))
    rc.accel_space = accel_space_from_json(*v, o.path_of("accel_space"), default_ref);
  else
    rc.accel_space.ref_dims = default_ref;
  if (const json* v = o.find("cost_tables"))
    rc.tables = tables_from_json(*v, o.path_of("cost_tables"));
  if (const json* v = o.find("das")) rc.das = das_from_json(*v, o.path_of("das"));
  if (const json* v = o.find("dns")) rc.dns = dns_from_json(*v, o.path_of("dns"));
  if (const json* v = o.find("task")) rc.task = task_from_json(*v, o.path_of("task"));

  rc.cosearch.das = rc.das;
  rc.cosearch.dns = rc.dns;
  rc.cosearch.objective = rc.objective;
  rc.cosearch.seed = rc.seed;
  rc.cosearch.threads = rc.threads;
  if (const json* v = o.find("cosearch")) {
    StrictObject oc(*v, o.path_of("cosearch"));
    rc.cosearch.max_epoch = static_cast<int>(jio::opt_int(oc, "max_epoch", rc.cosearch.max_epoch));
    rc.cosearch.m_samples = static_cast<int>(jio::opt_int(oc, "m_samples", rc.cosearch.m_samples));
    rc.cosearch.steps_per_epoch =
        static_cast<int>(jio::opt_int(oc, "steps_per_epoch", rc.cosearch.steps_per_epoch));
    if (const json* lv = oc.find("lambda")) {
      if (lv->is_string()) {
        if (lv->get<std::string>() != "auto")
          throw ConfigError(oc.path_of("lambda") + ": expected a number or 'auto'");
        rc.cosearch.lambda = -1.0;
      } else {
        rc.cosearch.lambda = jio::as_double(*lv, oc.path_of("lambda"));
        if (rc.cosearch.lambda < 0.0)
          throw ConfigError(oc.path_of("lambda") + ": must be >= 0 (or 'auto')");
      }
    }
    rc.cosearch.warm_start = jio::opt_bool(oc, "warm_start", rc.cosearch.warm_start);
    rc.cosearch.temp_init = jio::opt_double(oc, "temp_init", rc.cosearch.temp_init);
    rc.cosearch.temp_decay = jio::opt_double(oc, "temp_decay", rc.cosearch.temp_decay);
    oc.close();
    if (rc.cosearch.max_epoch < 1 || rc.cosearch.m_samples < 1 || rc.cosearch.steps_per_epoch < 1)
      throw ConfigError(o.path_of("cosearch") + ": counts must be >= 1");
  }
  if (const json* v = o.find("network")) {
    StrictObject on(*v, o.path_of("network"));
    if (on.has("layers")) {
      NetworkDesc net;
      const json& arr = jio::as_array(on.get("layers"), on.path_of("layers"));
      for (std::size_t i = 0; i < arr.size(); ++i)
        net.layers.push_back(
            layer_from_json(arr[i], on.path_of("layers") + "[" + std::to_string(i) + "]"));
      rc.network = std::move(net);
    } else if (on.has("choices")) {
      std::vector<int> ch;
      const json& arr = jio::as_array(on.get("choices"), on.path_of("choices"));
      for (std::size_t i = 0; i < arr.size(); ++i)
        ch.push_back(static_cast<int>(
            jio::as_int(arr[i], on.path_of("choices") + "[" + std::to_string(i) + "]")));
      rc.network_choices = std::move(ch);
      try {
        assemble_network(rc.network_space, *rc.network_choices);
      } catch (const std::exception& e) {
        throw ConfigError(on.path_of("choices") + std::string(": ") + e.what());
      }
    } else {
      throw ConfigError(o.path_of("network") + ": needs 'layers' or 'choices'");
    }
    on.close();
  }
  if (const json* v = o.find("random")) {
    StrictObject orr(*v, o.path_of("random"));
    rc.random_n_nets = static_cast<int>(jio::opt_int(orr, "n_nets", rc.random_n_nets));
    rc.random_n_accels =
        static_cast<int>(jio::opt_int(orr, "n_accels_per_net", rc.random_n_accels));
    rc.random_proxy_steps =
        static_cast<int>(jio::opt_int(orr, "proxy_train_steps", rc.random_proxy_steps));
    orr.close();
    if (rc.random_n_nets < 1 || rc.random_n_accels < 1 || rc.random_proxy_steps < 1)
      throw ConfigError(o.path_of("random") + ": counts must be >= 1");
  }
  if (const json* v = o.find("oracle_check")) {
    StrictObject oo(*v, o.path_of("oracle_check"));
    rc.oracle.min_configs =
        static_cast<int>(jio::opt_int(oo, "min_configs", rc.oracle.min_configs));
    rc.oracle.max_dim = jio::opt_int(oo, "max_dim", rc.oracle.max_dim);
    rc.oracle.mac_cap = jio::opt_int(oo, "mac_cap", rc.oracle.mac_cap);
    rc.oracle.seed =
        static_cast<std::uint64_t>(jio::opt_int(oo, "seed", static_cast<std::int64_t>(rc.oracle.seed)));
    oo.close();
    if (rc.oracle.min_configs < 0 || rc.oracle.max_dim < 1 || rc.oracle.mac_cap < 1)
      throw ConfigError(o.path_of("oracle_check") + ": bad sweep bounds");
  }
  o.close();
  return rc;
}

// ------------------------------------------------------------- file I/O

inline json parse_json_file(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError(file + ": cannot open");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  try {
    return json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // byte offset -> line/column for a message an editor can jump to
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(file + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " +
                      e.what());
  }
}

inline void write_text_file(const std::string& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error(file + ": cannot open for writing");
  out << text;
  if (!out) throw std::runtime_error(file + ": write failed");
}

// ------------------------------------------------------------ result JSON

inline json counts_to_json(const AccessCounts& c) {
  json out = json::object();
  for (int lvl = 0; lvl < kLevels; ++lvl) {
    json per = json::object();
    for (int t = 0; t < kTensors; ++t)
      per[tensor_name(t)] = json{{"reads", c.at[lvl][t].reads}, {"writes", c.at[lvl][t].writes}};
    out[level_name(lvl)] = std::move(per);
  }
  return out;
}

inline json report_to_json(const CostReport& rep, bool with_layers = true) {
  json j{{"cycles_per_image", rep.cycles_per_image},
         {"energy_per_image", rep.energy_per_image},
         {"edp", rep.edp},
         {"fps", rep.fps},
         {"dsp", rep.dsp},
         {"area", rep.area},
         {"peak_lanes", rep.peak_lanes},
         {"stage_cycles", rep.stage_cycles}};
  if (with_layers) {
    json layers = json::array();
    for (const auto& lc : rep.layers)
      layers.push_back(json{{"macs", lc.mac_count},
                            {"lanes", lc.lanes},
                            {"compute_cycles", lc.compute_cyc},
                            {"cycles", lc.cycles},
                            {"energy", lc.energy},
                            {"accesses", counts_to_json(lc.counts)}});
    j["layers"] = std::move(layers);
  }
  return j;
}

inline json violations_to_json(const LegalityReport& leg) {
  json arr = json::array();
  for (const auto& v : leg.violations) {
    json e{{"code", v.code}, {"message", v.message}};
    if (v.layer >= 0) e["layer"] = v.layer;
    if (v.overflow > 0.0) e["overflow"] = v.overflow;
    arr.push_back(std::move(e));
  }
  return arr;
}

// ------------------------------------------------------------- CSV traces

inline std::string search_trace_csv(const std::vector<SearchTraceRow>& trace) {
  std::string out = "step,temp,sampled_cost,incumbent_cost,legality\n";
  for (const auto& r : trace) {
    out += std::to_string(r.step);
    out += ',';
    out += fmt_g17(r.temp);
    out += ',';
    out += fmt_g17(r.sampled_cost);
    out += ',';
    out += fmt_g17(r.incumbent_cost);
    out += ',';
    out += r.legal ? '1' : '0';
    out += '\n';
  }
  return out;
}

inline std::string epoch_trace_csv(const std::vector<EpochTraceRow>& trace) {
  std::string out = "epoch,val_loss,hw_loss,mean_das_cost,incumbent\n";
  for (const auto& r : trace) {
    out += std::to_string(r.epoch);
    out += ',';
    out += fmt_g17(r.val_loss);
    out += ',';
    out += fmt_g17(r.hw_loss);
    out += ',';
    out += fmt_g17(r.mean_das_cost);
    out += ',';
    out += fmt_g17(r.incumbent);
    out += '\n';
  }
  return out;
}

inline std::string breakdown_csv(const CostReport& rep) {
  std::string out = "layer,level,tensor,reads,writes\n";
  for (std::size_t i = 0; i < rep.layers.size(); ++i)
    for (int lvl = 0; lvl < kLevels; ++lvl)
      for (int t = 0; t < kTensors; ++t) {
        const auto& c = rep.layers[i].counts.at[lvl][t];
        out += std::to_string(i);
        out += ',';
        out += level_name(lvl);
        out += ',';
        out += tensor_name(t);
        out += ',';
        out += std::to_string(c.reads);
        out += ',';
        out += std::to_string(c.writes);
        out += '\n';
      }
  return out;
}

inline std::string random_points_csv(const RandomBaselineResult& res) {
  std::string out = "net_index,accuracy,cost,legal,on_pareto\n";
  for (std::size_t i = 0; i < res.points.size(); ++i) {
    const auto& p = res.points[i];
    bool on_front = false;
    for (const auto& q : res.pareto)
      if (q.choices == p.choices && q.cost == p.cost && q.accuracy == p.accuracy) {
        on_front = true;
        break;
      }
    out += std::to_string(i);
    out += ',';
    out += fmt_g17(p.accuracy);
    out += ',';
    out += fmt_g17(p.cost);
    out += ',';
    out += p.legal ? '1' : '0';
    out += ',';
    out += on_front ? '1' : '0';
    out += '\n';
  }
  return out;
}

}  // namespace nacs
