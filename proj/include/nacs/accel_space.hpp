#pragma once

// Accelerator design space and concrete configurations.
//
// Memory hierarchy, outermost to innermost: DRAM -> global buffer -> PE array
// (spatial, NoC) -> per-PE register file. Temporal loop levels carry a
// searchable order (DRAM, GB, RF) and searchable tile factors (GB, PE, RF);
// the DRAM trip count per dimension is the residual, so the per-dimension
// product over all levels equals the layer dimension exactly.
//
// Key invariants kept by construction:
//   dram(d) * gb(d) * pe(d) * rf(d) == dim(d)      for every layer dimension
//   prod_d pe(d) <= pe budget of the executing stage
//   pe(d) == 1 for dimensions the chosen NoC cannot parallelize

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nacs/cost_tables.hpp"
#include "nacs/workload.hpp"

namespace nacs {

// ---------------------------------------------------------------- dimensions

inline constexpr int kDims = 6;
enum Dim : int { DimX = 0, DimY, DimR, DimS, DimC, DimK };

inline const char* dim_name(int d) {
  static const char* names[kDims] = {"X", "Y", "R", "S", "C", "K"};
  return names[d];
}

inline int dim_from_name(const std::string& s) {
  for (int d = 0; d < kDims; ++d)
    if (s == dim_name(d)) return d;
  throw std::invalid_argument("unknown dimension name: " + s);
}

// Loop dimension sizes of a layer. C is the per-group input channel count, so
// depthwise layers have a unit C trip everywhere by construction.
inline std::array<std::int64_t, kDims> loop_dims(const ConvLayerDesc& l) {
  return {l.x, l.y, l.r, l.s, l.c / l.groups, l.k};
}

// ------------------------------------------------------------------- choices

enum class NocKind : int { OutputParallel = 0, KernelParallel, KernelOutputParallel };
enum class ExecMode : int { MultiCycle = 0, Pipeline };

inline const char* noc_name(NocKind n) {
  switch (n) {
    case NocKind::OutputParallel: return "output_parallel";
    case NocKind::KernelParallel: return "kernel_parallel";
    case NocKind::KernelOutputParallel: return "kernel_output_parallel";
  }
  return "?";
}

inline const char* mode_name(ExecMode m) {
  return m == ExecMode::MultiCycle ? "multi_cycle" : "pipeline";
}

// Dimensions a NoC option can spread across PEs.
inline const std::array<bool, kDims>& noc_parallel_dims(NocKind n) {
  //                                             X      Y      R      S      C      K
  static const std::array<bool, kDims> out = {true, true, false, false, false, true};
  static const std::array<bool, kDims> ker = {false, false, true, true, true, true};
  static const std::array<bool, kDims> ko = {true, false, true, false, false, true};
  switch (n) {
    case NocKind::OutputParallel: return out;
    case NocKind::KernelParallel: return ker;
    case NocKind::KernelOutputParallel: return ko;
  }
  return out;
}

// --------------------------------------------------------------- arithmetic

inline std::vector<std::int64_t> divisors(std::int64_t n) {
  if (n < 1) throw std::invalid_argument("divisors: n must be >= 1");
  std::vector<std::int64_t> out;
  for (std::int64_t d = 1; d * d <= n; ++d) {
    if (n % d == 0) {
      out.push_back(d);
      if (d != n / d) out.push_back(n / d);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// All ordered factorizations of dim into `levels` positive factors.
inline std::vector<std::vector<std::int64_t>> enumerate_tilings(std::int64_t dim, int levels) {
  if (levels < 1) throw std::invalid_argument("enumerate_tilings: levels must be >= 1");
  std::vector<std::vector<std::int64_t>> out;
  std::vector<std::int64_t> cur(levels, 1);
  auto rec = [&](auto&& self, int slot, std::int64_t rest) -> void {
    if (slot == levels - 1) {
      cur[slot] = rest;
      out.push_back(cur);
      return;
    }
    for (std::int64_t f : divisors(rest)) {
      cur[slot] = f;
      self(self, slot + 1, rest / f);
    }
  };
  rec(rec, 0, dim);
  return out;
}

// ----------------------------------------------------------- configurations

inline constexpr int kOrderLevels = 3;  // searched loop orders
enum OrderLevel : int { OrderDram = 0, OrderGb, OrderRf };

inline constexpr int kTileLevels = 3;  // searched tile factors
enum TileLevel : int { TileGb = 0, TilePe, TileRf };

// One complete set of mapping decisions (loop orders + tile factors). A
// multi-cycle accelerator has one; a pipelined one has one per chunk.
struct MappingGroup {
  // loop_order[level][i] = dimension id at nest position i, outermost first
  std::array<std::array<int, kDims>, kOrderLevels> loop_order{};
  std::array<std::array<std::int64_t, kDims>, kTileLevels> tile{};

  MappingGroup() {
    for (auto& ord : loop_order)
      for (int i = 0; i < kDims; ++i) ord[i] = i;
    for (auto& t : tile) t.fill(1);
  }
};

struct AcceleratorConfig {
  NocKind noc = NocKind::OutputParallel;
  std::int64_t max_pes = 1;
  ExecMode mode = ExecMode::MultiCycle;
  MappingGroup global;                    // used in multi-cycle mode
  int num_chunks = 1;                     // pipeline only
  std::vector<int> chunk_of_layer;        // pipeline only, one id per layer
  std::vector<MappingGroup> chunk_groups; // pipeline only, size num_chunks
};

// ------------------------------------------------------------------- space

struct AcceleratorSpace {
  std::array<std::int64_t, kDims> ref_dims = {1, 1, 1, 1, 1, 1};
  std::vector<NocKind> noc_options = {NocKind::OutputParallel, NocKind::KernelParallel,
                                      NocKind::KernelOutputParallel};
  std::vector<std::int64_t> pe_count_options = {16};
  std::vector<ExecMode> mode_options = {ExecMode::MultiCycle};
  int num_chunks = 1;
  std::vector<int> dw_chunks;        // chunk ids reserved for depthwise layers
  bool search_loop_order = true;
  std::array<std::array<int, kDims>, kOrderLevels> fixed_order =
      MappingGroup().loop_order;     // used when !search_loop_order
  std::optional<double> dsp_limit;
  std::optional<double> area_limit;

  void check() const {
    for (auto d : ref_dims)
      if (d < 1) throw std::invalid_argument("space: ref_dims must be >= 1");
    if (noc_options.empty() || pe_count_options.empty() || mode_options.empty())
      throw std::invalid_argument("space: empty option list");
    for (auto p : pe_count_options)
      if (p < 1) throw std::invalid_argument("space: pe counts must be >= 1");
    if (num_chunks < 1) throw std::invalid_argument("space: num_chunks must be >= 1");
    for (int c : dw_chunks)
      if (c < 0 || c >= num_chunks) throw std::invalid_argument("space: dw chunk id out of range");
  }

  bool has_mode(ExecMode m) const {
    return std::find(mode_options.begin(), mode_options.end(), m) != mode_options.end();
  }

  // Chunk menu for a layer: depthwise layers go to the reserved chunks when
  // any are declared, everything else to the remaining ones.
  std::vector<int> chunk_menu(bool depthwise) const {
    std::vector<int> menu;
    for (int c = 0; c < num_chunks; ++c) {
      bool reserved = std::find(dw_chunks.begin(), dw_chunks.end(), c) != dw_chunks.end();
      if (dw_chunks.empty() || reserved == depthwise) menu.push_back(c);
    }
    if (menu.empty()) menu.push_back(0);
    return menu;
  }
};

// Per-dimension menu reference sizes covering every layer any block choice
// can produce, so one logit bank fits all sampled networks.
inline std::array<std::int64_t, kDims> reference_dims(const NetworkSpace& space) {
  std::array<std::int64_t, kDims> ref;
  ref.fill(1);
  for (const auto& site : space.blocks)
    for (const auto& cand : site.candidates) {
      auto layers = expand_block(cand, site.in_channels, site.out_channels, site.spatial, site.stride);
      for (const auto& l : layers) {
        auto dims = loop_dims(l);
        for (int d = 0; d < kDims; ++d) ref[d] = std::max(ref[d], dims[d]);
      }
    }
  return ref;
}

inline std::array<std::int64_t, kDims> reference_dims(const NetworkDesc& net) {
  std::array<std::int64_t, kDims> ref;
  ref.fill(1);
  for (const auto& l : net.layers) {
    auto dims = loop_dims(l);
    for (int d = 0; d < kDims; ++d) ref[d] = std::max(ref[d], dims[d]);
  }
  return ref;
}

// --------------------------------------------------- per-layer loop binding

// Trip counts of one layer under one mapping group. Sampled factors are
// clamped down the divisor chain by gcd so the product invariant holds for
// layers whose dimensions are smaller than the menu reference.
struct LayerTrips {
  std::array<std::int64_t, kDims> dram{}, gb{}, pe{}, rf{};
  std::array<std::array<int, kDims>, kOrderLevels> order{};  // from the group
  std::int64_t stride = 1;
  bool depthwise_ifmap = false;   // ifmap channel index follows K
  std::int64_t groups = 1;
  std::int64_t k_total = 1;       // full K of the layer (group span bookkeeping)
  std::int64_t c_loop = 1;        // per-group input channels

  std::int64_t lanes() const {
    std::int64_t n = 1;
    for (auto v : pe) n *= v;
    return n;
  }
};

inline LayerTrips resolve_layer(const ConvLayerDesc& layer, const MappingGroup& group) {
  layer.check();
  auto dims = loop_dims(layer);
  LayerTrips t;
  t.order = group.loop_order;
  t.stride = layer.stride;
  t.groups = layer.groups;
  t.depthwise_ifmap = layer.groups > 1;
  t.k_total = layer.k;
  t.c_loop = layer.c / layer.groups;
  for (int d = 0; d < kDims; ++d) {
    std::int64_t rest = dims[d];
    t.rf[d] = std::gcd(group.tile[TileRf][d], rest);
    rest /= t.rf[d];
    t.pe[d] = std::gcd(group.tile[TilePe][d], rest);
    rest /= t.pe[d];
    t.gb[d] = std::gcd(group.tile[TileGb][d], rest);
    rest /= t.gb[d];
    t.dram[d] = rest;
  }
  return t;
}

// Tile extent per dimension at each storage level (what the tile spans, not
// the trip count): RF tile covers the RF loops, the GB tile additionally
// covers the spatial lanes and the GB loops.
inline std::array<std::int64_t, kDims> rf_extents(const LayerTrips& t) { return t.rf; }

inline std::array<std::int64_t, kDims> gb_extents(const LayerTrips& t) {
  std::array<std::int64_t, kDims> e;
  for (int d = 0; d < kDims; ++d) e[d] = t.rf[d] * t.pe[d] * t.gb[d];
  return e;
}

// Input channels touched by a tile spanning ext_k output channels. For
// grouped layers the channel index follows the output channel's group.
inline std::int64_t ifmap_channel_extent(const LayerTrips& t, std::int64_t ext_c, std::int64_t ext_k) {
  if (t.groups == 1) return ext_c;
  const std::int64_t group_size = t.k_total / t.groups;  // output channels per group
  const std::int64_t span = (ext_k % group_size == 0) ? ext_k / group_size : 1;
  return ext_c * span;
}

enum Tensor : int { TenW = 0, TenI, TenO };
inline constexpr int kTensors = 3;
inline const char* tensor_name(int t) {
  static const char* names[kTensors] = {"weights", "ifmap", "ofmap"};
  return names[t];
}

// Words one tile occupies, given its per-dimension extents.
inline std::int64_t tile_words(const LayerTrips& t, int tensor,
                               const std::array<std::int64_t, kDims>& ext) {
  switch (tensor) {
    case TenW:
      return ext[DimR] * ext[DimS] * ext[DimC] * ext[DimK];
    case TenI: {
      const std::int64_t rows = (ext[DimY] - 1) * t.stride + ext[DimR];
      const std::int64_t cols = (ext[DimX] - 1) * t.stride + ext[DimS];
      return ifmap_channel_extent(t, ext[DimC], ext[DimK]) * rows * cols;
    }
    case TenO:
      return ext[DimK] * ext[DimX] * ext[DimY];
  }
  throw std::invalid_argument("tile_words: bad tensor");
}

// Dimensions whose outer-loop change invalidates a tensor's tile.
inline std::array<bool, kDims> tensor_deps(int tensor, bool grouped_ifmap) {
  switch (tensor) {
    case TenW: return {false, false, true, true, true, true};         // R,S,C,K
    case TenI: {
      std::array<bool, kDims> d = {true, true, true, true, true, false};  // X,Y,R,S,C
      if (grouped_ifmap) d[DimK] = true;
      return d;
    }
    case TenO: return {true, true, false, false, false, true};        // X,Y,K
  }
  throw std::invalid_argument("tensor_deps: bad tensor");
}

// -------------------------------------------------------------- execution

// How a network runs on a config: one stage covering everything in
// multi-cycle mode, one stage per chunk in pipeline mode. Shared resources
// (PEs, GB capacity, DRAM bandwidth) are split by MAC share.
struct ExecStage {
  std::vector<int> layer_ids;
  const MappingGroup* group = nullptr;
  std::int64_t pe_budget = 1;
  double gb_capacity = 0.0;
  double dram_bw = 0.0;
};

struct ExecutionPlan {
  bool pipelined = false;
  std::vector<ExecStage> stages;
};

// Largest-remainder split of max_pes proportional to per-chunk MAC counts,
// with a floor of one PE per chunk. Deterministic, ties go to the lower id.
inline std::vector<std::int64_t> split_pes(std::int64_t max_pes,
                                           const std::vector<std::int64_t>& chunk_macs) {
  const int n = static_cast<int>(chunk_macs.size());
  if (n < 1) throw std::invalid_argument("split_pes: no chunks");
  if (max_pes < n) throw std::invalid_argument("split_pes: fewer PEs than chunks");
  std::int64_t all_macs = 0;
  for (auto m : chunk_macs) all_macs += m;
  if (all_macs == 0) all_macs = 1;

  std::vector<double> exact(n);
  std::vector<std::int64_t> pes(n, 1);
  std::int64_t assigned = n;
  for (int ch = 0; ch < n; ++ch)
    exact[ch] = static_cast<double>(max_pes) * static_cast<double>(chunk_macs[ch]) /
                static_cast<double>(all_macs);
  for (int ch = 0; ch < n; ++ch) {
    std::int64_t extra = std::max<std::int64_t>(static_cast<std::int64_t>(exact[ch]) - 1, 0);
    extra = std::min(extra, max_pes - assigned);
    pes[ch] += extra;
    assigned += extra;
  }
  while (assigned < max_pes) {
    int best = 0;
    double best_frac = -1.0;
    for (int ch = 0; ch < n; ++ch) {
      double frac = exact[ch] - static_cast<double>(pes[ch]);
      if (frac > best_frac + 1e-12) {
        best_frac = frac;
        best = ch;
      }
    }
    pes[best] += 1;
    assigned += 1;
  }
  return pes;
}

inline ExecutionPlan plan_execution(const AcceleratorConfig& cfg, const NetworkDesc& net,
                                    const HardwareCostTables& tables) {
  tables.check();
  ExecutionPlan plan;
  if (cfg.mode == ExecMode::MultiCycle) {
    ExecStage st;
    st.group = &cfg.global;
    st.pe_budget = cfg.max_pes;
    st.gb_capacity = tables.gb_capacity;
    st.dram_bw = tables.bw_dram;
    for (int i = 0; i < static_cast<int>(net.layers.size()); ++i) st.layer_ids.push_back(i);
    plan.stages.push_back(std::move(st));
    return plan;
  }

  if (cfg.num_chunks < 1) throw std::invalid_argument("config: num_chunks must be >= 1");
  if (static_cast<int>(cfg.chunk_groups.size()) != cfg.num_chunks)
    throw std::invalid_argument("config: one mapping group per chunk required");
  if (cfg.chunk_of_layer.size() != net.layers.size())
    throw std::invalid_argument("config: one chunk assignment per layer required");

  plan.pipelined = true;
  plan.stages.resize(cfg.num_chunks);
  std::vector<std::int64_t> chunk_macs(cfg.num_chunks, 0);
  std::int64_t all_macs = 0;
  for (int i = 0; i < static_cast<int>(net.layers.size()); ++i) {
    int ch = cfg.chunk_of_layer[i];
    if (ch < 0 || ch >= cfg.num_chunks) throw std::invalid_argument("config: chunk id out of range");
    plan.stages[ch].layer_ids.push_back(i);
    std::int64_t m = macs(net.layers[i]);
    chunk_macs[ch] += m;
    all_macs += m;
  }
  if (all_macs == 0) all_macs = 1;

  auto pes = split_pes(cfg.max_pes, chunk_macs);
  for (int ch = 0; ch < cfg.num_chunks; ++ch) {
    auto& st = plan.stages[ch];
    st.group = &cfg.chunk_groups[ch];
    st.pe_budget = pes[ch];
    double share = static_cast<double>(chunk_macs[ch]) / static_cast<double>(all_macs);
    st.gb_capacity = tables.gb_capacity * share;
    st.dram_bw = std::max(tables.bw_dram * share, 1e-12);
  }
  return plan;
}

// ---------------------------------------------------------------- validate

struct Violation {
  std::string code;
  std::string message;
  int layer = -1;        // -1 when not layer specific
  double overflow = 0.0; // how far past the limit, as a ratio >= 0
};

struct LegalityReport {
  std::vector<Violation> violations;
  bool legal() const { return violations.empty(); }
};

inline double area_used(const AcceleratorConfig& cfg, const HardwareCostTables& tables) {
  return static_cast<double>(cfg.max_pes) * tables.area_per_pe +
         (tables.gb_capacity + static_cast<double>(cfg.max_pes) * tables.rf_capacity) *
             tables.area_per_word;
}

inline double dsp_used(const AcceleratorConfig& cfg, const HardwareCostTables& tables) {
  return static_cast<double>(cfg.max_pes) * tables.dsp_per_pe;
}

namespace detail {

inline bool is_permutation_of_dims(const std::array<int, kDims>& ord) {
  std::array<bool, kDims> seen{};
  for (int v : ord) {
    if (v < 0 || v >= kDims || seen[v]) return false;
    seen[v] = true;
  }
  return true;
}

inline void check_group_shape(const MappingGroup& g) {
  for (const auto& ord : g.loop_order)
    if (!is_permutation_of_dims(ord))
      throw std::invalid_argument("config: loop order must be a permutation of the six dims");
  for (const auto& lvl : g.tile)
    for (auto v : lvl)
      if (v < 1) throw std::invalid_argument("config: tile factors must be >= 1");
}

}  // namespace detail

// Static legality of a config for a network. Structural errors in the config
// object itself throw; quantitative violations are returned for the search to
// penalize.
inline LegalityReport validate(const AcceleratorConfig& cfg, const NetworkDesc& net,
                               const AcceleratorSpace& space, const HardwareCostTables& tables) {
  space.check();
  if (cfg.max_pes < 1) throw std::invalid_argument("config: max_pes must be >= 1");
  detail::check_group_shape(cfg.global);
  for (const auto& g : cfg.chunk_groups) detail::check_group_shape(g);

  LegalityReport rep;
  ExecutionPlan plan = plan_execution(cfg, net, tables);
  const auto& allowed = noc_parallel_dims(cfg.noc);

  for (std::size_t si = 0; si < plan.stages.size(); ++si) {
    const auto& st = plan.stages[si];
    double stage_gb_need = 0.0;
    for (int li : st.layer_ids) {
      const auto& layer = net.layers[li];
      LayerTrips t = resolve_layer(layer, *st.group);

      for (int d = 0; d < kDims; ++d)
        if (t.pe[d] > 1 && !allowed[d])
          rep.violations.push_back({"noc_dim",
                                    std::string("PE tiling on ") + dim_name(d) +
                                        " not supported by " + noc_name(cfg.noc),
                                    li, static_cast<double>(t.pe[d] - 1)});

      const std::int64_t lanes = t.lanes();
      if (lanes > st.pe_budget)
        rep.violations.push_back({"pe_budget",
                                  "PE tile product exceeds the stage budget", li,
                                  static_cast<double>(lanes) / static_cast<double>(st.pe_budget) - 1.0});

      if (layer.groups > 1 && !layer.depthwise()) {
        const std::int64_t group_size = layer.k / layer.groups;
        auto aligned = [&](std::int64_t ext) {
          return ext % group_size == 0 || group_size % ext == 0;
        };
        std::int64_t ek = t.rf[DimK];
        bool ok = aligned(ek);
        ek *= t.pe[DimK];
        ok = ok && aligned(ek);
        ek *= t.gb[DimK];
        ok = ok && aligned(ek);
        if (!ok)
          rep.violations.push_back({"group_alignment",
                                    "K tiling does not align with channel groups", li, 1.0});
      }

      // capacities, double buffered
      double rf_need = 0.0, gb_need = 0.0;
      auto gext = gb_extents(t);
      auto rext = rf_extents(t);
      for (int tn = 0; tn < kTensors; ++tn) {
        gb_need += 2.0 * static_cast<double>(tile_words(t, tn, gext));
        rf_need += 2.0 * static_cast<double>(tile_words(t, tn, rext));
      }
      if (rf_need > tables.rf_capacity)
        rep.violations.push_back({"rf_capacity", "per-PE register file tile set too large", li,
                                  rf_need / tables.rf_capacity - 1.0});
      stage_gb_need = std::max(stage_gb_need, gb_need);
    }
    if (stage_gb_need > st.gb_capacity && !st.layer_ids.empty())
      rep.violations.push_back({"gb_capacity", "global buffer tile set too large",
                                st.layer_ids.front(), stage_gb_need / st.gb_capacity - 1.0});
  }

  if (space.dsp_limit && dsp_used(cfg, tables) > *space.dsp_limit)
    rep.violations.push_back({"dsp_limit", "DSP budget exceeded", -1,
                              dsp_used(cfg, tables) / *space.dsp_limit - 1.0});
  if (space.area_limit && area_used(cfg, tables) > *space.area_limit)
    rep.violations.push_back({"area_limit", "area budget exceeded", -1,
                              area_used(cfg, tables) / *space.area_limit - 1.0});
  return rep;
}

// -------------------------------------------------------------- space size

// log10 of the number of distinct configurations, counting every slot as
// independent: noc x pe-count x mode x per-layer chunk menus x per mapping
// group (orders as 6! each, tiles as divisor-menu sizes). assignment_slots is
// the number of layers carrying a chunk choice (0 when pipeline is not in the
// space).
inline double space_size_log10(const AcceleratorSpace& space, int assignment_slots = 0) {
  space.check();
  auto log10_fact = [](int n) {
    double s = 0.0;
    for (int i = 2; i <= n; ++i) s += std::log10(static_cast<double>(i));
    return s;
  };
  double lg = 0.0;
  lg += std::log10(static_cast<double>(space.noc_options.size()));
  lg += std::log10(static_cast<double>(space.pe_count_options.size()));
  lg += std::log10(static_cast<double>(space.mode_options.size()));

  double group_lg = 0.0;
  if (space.search_loop_order) group_lg += kOrderLevels * log10_fact(kDims);
  for (int d = 0; d < kDims; ++d)
    group_lg += kTileLevels * std::log10(static_cast<double>(divisors(space.ref_dims[d]).size()));

  int groups = space.has_mode(ExecMode::MultiCycle) ? 1 : 0;
  if (space.has_mode(ExecMode::Pipeline)) {
    groups += space.num_chunks;
    if (assignment_slots > 0) {
      // menus differ for depthwise layers; use the conv menu size as the
      // uniform per-layer count (dw menus are smaller and layer types are a
      // network property, not a space property)
      double menu = static_cast<double>(space.chunk_menu(false).size());
      lg += assignment_slots * std::log10(std::max(menu, 1.0));
    }
  }
  lg += groups * group_lg;
  return lg;
}

// Exact count when it fits in 64 bits, using the same counting rule.
inline std::optional<std::uint64_t> space_size_exact(const AcceleratorSpace& space,
                                                     int assignment_slots = 0) {
  space.check();
  bool overflow = false;
  std::uint64_t total = 1;
  auto mul = [&](std::uint64_t f) {
    if (f == 0) f = 1;
    if (total > std::numeric_limits<std::uint64_t>::max() / f) overflow = true;
    if (!overflow) total *= f;
  };
  mul(space.noc_options.size());
  mul(space.pe_count_options.size());
  mul(space.mode_options.size());

  std::uint64_t fact = 1;
  for (int i = 2; i <= kDims; ++i) fact *= i;

  int groups = space.has_mode(ExecMode::MultiCycle) ? 1 : 0;
  if (space.has_mode(ExecMode::Pipeline)) {
    groups += space.num_chunks;
    if (assignment_slots > 0) {
      std::uint64_t menu = space.chunk_menu(false).size();
      for (int i = 0; i < assignment_slots && !overflow; ++i) mul(menu);
    }
  }
  for (int g = 0; g < groups && !overflow; ++g) {
    if (space.search_loop_order)
      for (int lvl = 0; lvl < kOrderLevels; ++lvl) mul(fact);
    for (int d = 0; d < kDims; ++d) {
      std::uint64_t menu = divisors(space.ref_dims[d]).size();
      for (int lvl = 0; lvl < kTileLevels; ++lvl) mul(menu);
    }
  }
  if (overflow) return std::nullopt;
  return total;
}

}  // namespace nacs
