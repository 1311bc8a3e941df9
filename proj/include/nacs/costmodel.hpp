#pragma once

// Analytical loop-nest cost model.
//
// Traffic follows the stationary-tile rule: a tensor's tile at a storage
// level stays put until an outer temporal loop that the tensor depends on
// changes, including wraparounds forced by loops outer to the innermost
// relevant one. Counting runs of constant relevant indices over the outer
// nest gives, per tensor and level,
//
//   refills = prod of trip counts from the outermost loop down to the
//             innermost loop (trip > 1) indexing a dependent dimension
//   traffic = refills x tile footprint at that level
//
// The output tile is special: it is flushed to the parent whenever any outer
// index advances (its residency id is the whole outer tuple), written back on
// every eviction, and read back only when it returns with partial sums, i.e.
// when reduction dimensions are split outside the level. Spatial lanes
// multiply footprint per refill (unicast NoC accounting), never refill
// counts. compute cycles = product of every temporal trip count.
//
// The exhaustive simulator in oracle.hpp measures the same quantities by
// walking every index tuple; tests hold the two equal exactly.

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "nacs/accel_space.hpp"
#include "nacs/cost_tables.hpp"
#include "nacs/workload.hpp"

namespace nacs {

inline constexpr int kLevels = 4;
enum MemLevel : int { LvlDram = 0, LvlGb, LvlNoc, LvlRf };
inline const char* level_name(int l) {
  static const char* names[kLevels] = {"dram", "gb", "noc", "rf"};
  return names[l];
}

struct TensorCounts {
  std::int64_t reads = 0;
  std::int64_t writes = 0;
};

struct AccessCounts {
  // at[level][tensor]
  std::array<std::array<TensorCounts, kTensors>, kLevels> at{};

  std::int64_t level_words(int level) const {
    std::int64_t w = 0;
    for (int t = 0; t < kTensors; ++t) w += at[level][t].reads + at[level][t].writes;
    return w;
  }
  AccessCounts& operator+=(const AccessCounts& o) {
    for (int l = 0; l < kLevels; ++l)
      for (int t = 0; t < kTensors; ++t) {
        at[l][t].reads += o.at[l][t].reads;
        at[l][t].writes += o.at[l][t].writes;
      }
    return *this;
  }
  bool operator==(const AccessCounts& o) const {
    for (int l = 0; l < kLevels; ++l)
      for (int t = 0; t < kTensors; ++t)
        if (at[l][t].reads != o.at[l][t].reads || at[l][t].writes != o.at[l][t].writes)
          return false;
    return true;
  }
};

namespace detail {

struct Loop {
  int dim;
  std::int64_t trip;
};

inline std::vector<Loop> level_loops(const LayerTrips& t, int order_level,
                                     const std::array<std::int64_t, kDims>& trips) {
  std::vector<Loop> loops;
  loops.reserve(kDims);
  for (int i = 0; i < kDims; ++i) {
    int d = t.order[order_level][i];
    loops.push_back({d, trips[d]});
  }
  return loops;
}

inline std::vector<Loop> outer_loops_gb(const LayerTrips& t) {
  return level_loops(t, OrderDram, t.dram);
}

inline std::vector<Loop> outer_loops_rf(const LayerTrips& t) {
  auto loops = level_loops(t, OrderDram, t.dram);
  auto gb = level_loops(t, OrderGb, t.gb);
  loops.insert(loops.end(), gb.begin(), gb.end());
  return loops;
}

// Runs of constant projection onto the dependent dims: product of all trips
// down to the innermost dependent loop that actually iterates.
inline std::int64_t run_fills(const std::vector<Loop>& loops, const std::array<bool, kDims>& deps) {
  int last = -1;
  for (int i = 0; i < static_cast<int>(loops.size()); ++i)
    if (deps[loops[i].dim] && loops[i].trip > 1) last = i;
  std::int64_t fills = 1;
  for (int i = 0; i <= last; ++i) fills *= loops[i].trip;
  return fills;
}

inline std::int64_t product_all(const std::vector<Loop>& loops) {
  std::int64_t p = 1;
  for (const auto& l : loops) p *= l.trip;
  return p;
}

inline std::int64_t product_over(const std::vector<Loop>& loops, const std::array<bool, kDims>& deps) {
  std::int64_t p = 1;
  for (const auto& l : loops)
    if (deps[l.dim]) p *= l.trip;
  return p;
}

}  // namespace detail

inline std::int64_t compute_cycles(const LayerTrips& t) {
  std::int64_t cycles = 1;
  for (int d = 0; d < kDims; ++d) cycles *= t.dram[d] * t.gb[d] * t.rf[d];
  return cycles;
}

// Word traffic of one layer on one mapping. See the file header for the rule.
inline AccessCounts count_accesses(const ConvLayerDesc& layer, const LayerTrips& t) {
  AccessCounts ac;
  const std::int64_t lanes = t.lanes();
  const std::int64_t n_macs = macs(layer);
  const auto ofmap_deps = tensor_deps(TenO, false);

  const auto dram_outer = detail::outer_loops_gb(t);
  const auto rf_outer = detail::outer_loops_rf(t);
  const auto gext = gb_extents(t);
  const auto rext = rf_extents(t);

  // input tensors: weights and ifmap
  for (int tensor : {TenW, TenI}) {
    const auto deps = tensor_deps(tensor, t.depthwise_ifmap);

    const std::int64_t gb_fp = tile_words(t, tensor, gext);
    const std::int64_t gb_fills = detail::run_fills(dram_outer, deps);
    ac.at[LvlDram][tensor].reads += gb_fills * gb_fp;
    ac.at[LvlGb][tensor].writes += gb_fills * gb_fp;

    const std::int64_t rf_fp = tile_words(t, tensor, rext);
    const std::int64_t rf_fills = detail::run_fills(rf_outer, deps);
    const std::int64_t words = rf_fills * lanes * rf_fp;
    ac.at[LvlGb][tensor].reads += words;
    ac.at[LvlNoc][tensor].reads += words;
    ac.at[LvlRf][tensor].writes += words;

    ac.at[LvlRf][tensor].reads += n_macs;  // one operand read per MAC
  }

  // output tensor
  {
    const std::int64_t gb_fp = tile_words(t, TenO, gext);
    const std::int64_t gb_fills = detail::product_all(dram_outer);
    const std::int64_t gb_fresh = detail::product_over(dram_outer, ofmap_deps);
    ac.at[LvlDram][TenO].writes += gb_fills * gb_fp;
    ac.at[LvlGb][TenO].reads += gb_fills * gb_fp;
    ac.at[LvlDram][TenO].reads += (gb_fills - gb_fresh) * gb_fp;
    ac.at[LvlGb][TenO].writes += (gb_fills - gb_fresh) * gb_fp;

    const std::int64_t rf_fp = tile_words(t, TenO, rext);
    const std::int64_t rf_fills = detail::product_all(rf_outer);
    const std::int64_t rf_fresh = detail::product_over(rf_outer, ofmap_deps);
    const std::int64_t evict = rf_fills * lanes * rf_fp;
    const std::int64_t readback = (rf_fills - rf_fresh) * lanes * rf_fp;
    ac.at[LvlRf][TenO].reads += evict;
    ac.at[LvlNoc][TenO].writes += evict;
    ac.at[LvlGb][TenO].writes += evict;
    ac.at[LvlGb][TenO].reads += readback;
    ac.at[LvlNoc][TenO].reads += readback;
    ac.at[LvlRf][TenO].writes += readback;

    // accumulator activity: every MAC writes; reads skip the zero-initialized
    // first touch of each output element on fresh fills
    ac.at[LvlRf][TenO].writes += n_macs;
    ac.at[LvlRf][TenO].reads += n_macs - rf_fresh * lanes * rf_fp;
  }
  return ac;
}

// ------------------------------------------------------------------- costs

struct LayerCost {
  AccessCounts counts;
  std::int64_t compute_cyc = 0;
  std::int64_t cycles = 0;  // roofline of compute and each boundary
  double energy = 0.0;
  std::int64_t lanes = 1;
  std::int64_t mac_count = 0;
};

inline LayerCost layer_cost(const ConvLayerDesc& layer, const LayerTrips& t,
                            const HardwareCostTables& tables, double dram_bw) {
  LayerCost lc;
  lc.counts = count_accesses(layer, t);
  lc.compute_cyc = compute_cycles(t);
  lc.lanes = t.lanes();
  lc.mac_count = macs(layer);

  auto mem_cycles = [](std::int64_t words, double bw) {
    return static_cast<std::int64_t>(std::ceil(static_cast<double>(words) / bw));
  };
  std::int64_t cyc = lc.compute_cyc;
  cyc = std::max(cyc, mem_cycles(lc.counts.level_words(LvlDram), dram_bw));
  cyc = std::max(cyc, mem_cycles(lc.counts.level_words(LvlGb), tables.bw_gb));
  cyc = std::max(cyc, mem_cycles(lc.counts.level_words(LvlNoc), tables.bw_noc));
  // register files work in parallel, one per lane
  cyc = std::max(cyc, mem_cycles(lc.counts.level_words(LvlRf),
                                 tables.bw_rf * static_cast<double>(lc.lanes)));
  lc.cycles = cyc;

  const double eu[kLevels] = {tables.e_dram, tables.e_gb, tables.e_noc, tables.e_rf};
  const int lv[kLevels] = {LvlDram, LvlGb, LvlNoc, LvlRf};
  for (int i = 0; i < kLevels; ++i)
    lc.energy += static_cast<double>(lc.counts.level_words(lv[i])) * eu[i];
  lc.energy += static_cast<double>(lc.mac_count) * tables.e_mac;
  return lc;
}

struct CostReport {
  std::vector<LayerCost> layers;
  std::vector<std::int64_t> stage_cycles;
  std::int64_t cycles_per_image = 0;
  double energy_per_image = 0.0;
  double edp = 0.0;
  double fps = 0.0;
  double dsp = 0.0;
  double area = 0.0;
  std::int64_t peak_lanes = 1;
};

inline CostReport network_cost(const NetworkDesc& net, const AcceleratorConfig& cfg,
                               const HardwareCostTables& tables) {
  if (net.layers.empty()) throw std::invalid_argument("network_cost: empty network");
  CostReport rep;
  rep.layers.resize(net.layers.size());
  ExecutionPlan plan = plan_execution(cfg, net, tables);
  rep.stage_cycles.assign(plan.stages.size(), 0);

  for (std::size_t si = 0; si < plan.stages.size(); ++si) {
    const auto& st = plan.stages[si];
    for (int li : st.layer_ids) {
      LayerTrips t = resolve_layer(net.layers[li], *st.group);
      rep.layers[li] = layer_cost(net.layers[li], t, tables, st.dram_bw);
      rep.stage_cycles[si] += rep.layers[li].cycles;
      rep.energy_per_image += rep.layers[li].energy;
      rep.peak_lanes = std::max(rep.peak_lanes, rep.layers[li].lanes);
    }
  }
  if (plan.pipelined) {
    for (auto c : rep.stage_cycles) rep.cycles_per_image = std::max(rep.cycles_per_image, c);
  } else {
    rep.cycles_per_image = rep.stage_cycles.empty() ? 0 : rep.stage_cycles[0];
  }
  rep.edp = rep.energy_per_image * static_cast<double>(rep.cycles_per_image);
  rep.fps = rep.cycles_per_image > 0 ? tables.clock_hz / static_cast<double>(rep.cycles_per_image) : 0.0;
  rep.dsp = dsp_used(cfg, tables);
  rep.area = area_used(cfg, tables);
  return rep;
}

enum class Objective : int { Edp = 0, Fps, Latency };

inline const char* objective_name(Objective o) {
  switch (o) {
    case Objective::Edp: return "edp";
    case Objective::Fps: return "fps";
    case Objective::Latency: return "latency";
  }
  return "?";
}

// Scalar to minimize. Maximizing frames/s is minimizing cycles/image.
inline double objective_cost(const CostReport& rep, Objective obj, const HardwareCostTables& tables) {
  switch (obj) {
    case Objective::Edp: return rep.edp;
    case Objective::Fps: return static_cast<double>(rep.cycles_per_image);
    case Objective::Latency: return static_cast<double>(rep.cycles_per_image) / tables.clock_hz;
  }
  throw std::invalid_argument("objective_cost: bad objective");
}

}  // namespace nacs
