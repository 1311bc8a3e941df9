#pragma once

// Exhaustive loop-nest simulator. Walks every temporal index tuple of a
// layer's mapped nest in configured order, tracks which tile each storage
// level holds per tensor and per lane, and counts a parent transfer whenever
// a tile's identity changes (plus a final drain of output tiles). Nothing in
// here shares formulas with costmodel.hpp beyond the tile coordinate
// geometry; it is the measurement the analytical model is tested against.
//
// Runtime is proportional to the layer's MAC count and is guarded by a cap.

#include <array>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <vector>

#include "nacs/accel_space.hpp"
#include "nacs/costmodel.hpp"
#include "nacs/workload.hpp"

namespace nacs {

struct OracleResult {
  AccessCounts counts;
  std::int64_t cycles = 0;
  bool gb_capacity_ok = true;
  bool rf_capacity_ok = true;
};

namespace detail {

struct Odometer {
  std::vector<Loop> loops;  // outermost first
  std::vector<std::int64_t> idx;

  explicit Odometer(std::vector<Loop> l) : loops(std::move(l)), idx(loops.size(), 0) {}

  // advance innermost position with carry; false once every position wrapped
  bool step() {
    for (int i = static_cast<int>(loops.size()) - 1; i >= 0; --i) {
      if (++idx[i] < loops[i].trip) return true;
      idx[i] = 0;
    }
    return false;
  }

  // current value of the loop indexing dimension d (each dim appears once)
  std::int64_t value_of(int d) const {
    for (std::size_t i = 0; i < loops.size(); ++i)
      if (loops[i].dim == d) return idx[i];
    return 0;
  }
};

// Tile geometry helper: footprint in words of a tile with the given extents,
// based at the given per-dimension offsets. Spatial rows/cols count the
// bounding box of touched input coordinates; channels count the exact set.
struct TileGeom {
  const LayerTrips* t;
  std::array<std::int64_t, kDims> ext;

  std::int64_t words(int tensor, const std::array<std::int64_t, kDims>& off) const {
    switch (tensor) {
      case TenW:
        return ext[DimR] * ext[DimS] * ext[DimC] * ext[DimK];
      case TenI: {
        const std::int64_t row_lo = off[DimY] * t->stride + off[DimR];
        const std::int64_t row_hi = (off[DimY] + ext[DimY] - 1) * t->stride + off[DimR] + ext[DimR] - 1;
        const std::int64_t col_lo = off[DimX] * t->stride + off[DimS];
        const std::int64_t col_hi = (off[DimX] + ext[DimX] - 1) * t->stride + off[DimS] + ext[DimS] - 1;
        std::int64_t channels = ext[DimC];
        if (t->groups > 1) {
          const std::int64_t gs = t->k_total / t->groups;
          const std::int64_t g_lo = off[DimK] / gs;
          const std::int64_t g_hi = (off[DimK] + ext[DimK] - 1) / gs;
          channels = ext[DimC] * (g_hi - g_lo + 1);
        }
        return channels * (row_hi - row_lo + 1) * (col_hi - col_lo + 1);
      }
      case TenO:
        return ext[DimK] * ext[DimX] * ext[DimY];
    }
    throw std::invalid_argument("oracle: bad tensor");
  }
};

}  // namespace detail

inline OracleResult oracle_simulate(const ConvLayerDesc& layer, const LayerTrips& t,
                                    std::int64_t mac_cap = 1000000,
                                    double gb_capacity = -1.0, double rf_capacity = -1.0) {
  const std::int64_t n_macs = macs(layer);
  if (n_macs > mac_cap) throw std::invalid_argument("oracle: layer exceeds the MAC cap");

  OracleResult res;
  const std::int64_t lanes = t.lanes();

  detail::Odometer dram(detail::level_loops(t, OrderDram, t.dram));
  detail::Odometer gb(detail::level_loops(t, OrderGb, t.gb));
  detail::Odometer rf(detail::level_loops(t, OrderRf, t.rf));

  // lane coordinates over the spatial dims, canonical dim order
  std::vector<std::array<std::int64_t, kDims>> lane_coord;
  {
    std::array<std::int64_t, kDims> cur{};
    auto rec = [&](auto&& self, int d) -> void {
      if (d == kDims) {
        lane_coord.push_back(cur);
        return;
      }
      for (std::int64_t i = 0; i < t.pe[d]; ++i) {
        cur[d] = i;
        self(self, d + 1);
      }
    };
    rec(rec, 0);
  }

  detail::TileGeom gb_geom{&t, gb_extents(t)};
  detail::TileGeom rf_geom{&t, rf_extents(t)};

  // double-buffered working sets against the provided capacities
  {
    std::array<std::int64_t, kDims> zero{};
    double gb_need = 0.0, rf_need = 0.0;
    for (int tn = 0; tn < kTensors; ++tn) {
      gb_need += 2.0 * static_cast<double>(gb_geom.words(tn, zero));
      rf_need += 2.0 * static_cast<double>(rf_geom.words(tn, zero));
    }
    if (gb_capacity >= 0.0 && gb_need > gb_capacity) res.gb_capacity_ok = false;
    if (rf_capacity >= 0.0 && rf_need > rf_capacity) res.rf_capacity_ok = false;
  }

  auto deps_of = [&](int tensor) { return tensor_deps(tensor, t.depthwise_ifmap); };

  // GB tile state
  std::array<std::vector<std::int64_t>, kTensors> gb_id;
  bool gb_live[kTensors] = {false, false, false};
  std::array<std::int64_t, kDims> gb_off{};
  std::set<std::vector<std::int64_t>> gb_seen_kxy;

  // per-lane RF tile state
  std::array<std::vector<std::vector<std::int64_t>>, kTensors> rf_id;
  std::vector<char> rf_live[kTensors];
  for (int tn = 0; tn < kTensors; ++tn) {
    rf_id[tn].resize(lanes);
    rf_live[tn].assign(lanes, 0);
  }
  std::set<std::vector<std::int64_t>> rf_seen_kxy;  // temporal projection, shared timing across lanes
  std::vector<char> rf_fresh(lanes, 1);

  // accumulator first-touch tracking per lane
  const std::int64_t rf_out_elems = t.rf[DimK] * t.rf[DimX] * t.rf[DimY];
  std::vector<std::vector<std::int64_t>> touched(lanes,
                                                 std::vector<std::int64_t>(rf_out_elems, -1));
  std::int64_t epoch = 0;

  const auto kxy = tensor_deps(TenO, false);

  auto project = [&](const std::vector<std::int64_t>& combined_vals,
                     const std::array<bool, kDims>& deps) {
    std::vector<std::int64_t> id;
    for (int d = 0; d < kDims; ++d)
      if (deps[d]) id.push_back(combined_vals[d]);
    return id;
  };

  auto dram_vals = [&]() {
    std::vector<std::int64_t> v(kDims);
    for (int d = 0; d < kDims; ++d) v[d] = dram.value_of(d);
    return v;
  };
  auto outer_vals = [&]() {  // combined dram+gb temporal index per dim
    std::vector<std::int64_t> v(kDims);
    for (int d = 0; d < kDims; ++d) v[d] = dram.value_of(d) * t.gb[d] + gb.value_of(d);
    return v;
  };

  auto drain_gb_out = [&]() {
    if (!gb_live[TenO]) return;
    std::int64_t fp = gb_geom.words(TenO, gb_off);
    res.counts.at[LvlGb][TenO].reads += fp;
    res.counts.at[LvlDram][TenO].writes += fp;
  };

  std::vector<std::array<std::int64_t, kDims>> rf_off(lanes);
  auto drain_rf_out = [&]() {
    for (std::int64_t ln = 0; ln < lanes; ++ln) {
      if (!rf_live[TenO][ln]) continue;
      std::int64_t fp = rf_geom.words(TenO, rf_off[ln]);
      res.counts.at[LvlRf][TenO].reads += fp;
      res.counts.at[LvlNoc][TenO].writes += fp;
      res.counts.at[LvlGb][TenO].writes += fp;
    }
  };

  bool dram_more = true;
  while (dram_more) {
    // ---- refresh GB tiles against the DRAM-level indices
    const auto dv = dram_vals();
    for (int d = 0; d < kDims; ++d) gb_off[d] = dram.value_of(d) * gb_geom.ext[d];

    for (int tn : {TenW, TenI}) {
      auto id = project(dv, deps_of(tn));
      if (!gb_live[tn] || id != gb_id[tn]) {
        std::int64_t fp = gb_geom.words(tn, gb_off);
        res.counts.at[LvlDram][tn].reads += fp;
        res.counts.at[LvlGb][tn].writes += fp;
        gb_id[tn] = std::move(id);
        gb_live[tn] = true;
      }
    }
    {
      // output tile: residency keyed on the full DRAM tuple
      std::vector<std::int64_t> full(dv);
      if (!gb_live[TenO] || full != gb_id[TenO]) {
        drain_gb_out();  // previous residency writes back
        auto proj = project(dv, kxy);
        bool fresh = gb_seen_kxy.insert(proj).second;
        if (!fresh) {
          std::int64_t fp = gb_geom.words(TenO, gb_off);
          res.counts.at[LvlDram][TenO].reads += fp;
          res.counts.at[LvlGb][TenO].writes += fp;
        }
        gb_id[TenO] = std::move(full);
        gb_live[TenO] = true;
      }
    }

    bool gb_more = true;
    while (gb_more) {
      const auto ov = outer_vals();
      for (std::int64_t ln = 0; ln < lanes; ++ln)
        for (int d = 0; d < kDims; ++d)
          rf_off[ln][d] = (ov[d] * t.pe[d] + lane_coord[ln][d]) * rf_geom.ext[d];

      for (int tn : {TenW, TenI}) {
        auto id = project(ov, deps_of(tn));
        for (std::int64_t ln = 0; ln < lanes; ++ln) {
          if (!rf_live[tn][ln] || id != rf_id[tn][ln]) {
            std::int64_t fp = rf_geom.words(tn, rf_off[ln]);
            res.counts.at[LvlGb][tn].reads += fp;
            res.counts.at[LvlNoc][tn].reads += fp;
            res.counts.at[LvlRf][tn].writes += fp;
            rf_id[tn][ln] = id;
            rf_live[tn][ln] = 1;
          }
        }
      }
      {
        std::vector<std::int64_t> full(ov);
        bool changed = !rf_live[TenO][0] || full != rf_id[TenO][0];
        if (changed) {
          drain_rf_out();
          auto proj = project(ov, kxy);
          bool fresh = rf_seen_kxy.insert(proj).second;
          ++epoch;
          for (std::int64_t ln = 0; ln < lanes; ++ln) {
            if (!fresh) {
              std::int64_t fp = rf_geom.words(TenO, rf_off[ln]);
              res.counts.at[LvlGb][TenO].reads += fp;
              res.counts.at[LvlNoc][TenO].reads += fp;
              res.counts.at[LvlRf][TenO].writes += fp;
            }
            rf_id[TenO][ln] = full;
            rf_live[TenO][ln] = 1;
            rf_fresh[ln] = fresh ? 1 : 0;
          }
        }
      }

      // ---- innermost temporal loops: one MAC per lane per step
      bool rf_more = true;
      while (rf_more) {
        const std::int64_t ek = rf.value_of(DimK);
        const std::int64_t ex = rf.value_of(DimX);
        const std::int64_t ey = rf.value_of(DimY);
        const std::int64_t elem = (ek * t.rf[DimX] + ex) * t.rf[DimY] + ey;
        for (std::int64_t ln = 0; ln < lanes; ++ln) {
          res.counts.at[LvlRf][TenW].reads += 1;
          res.counts.at[LvlRf][TenI].reads += 1;
          res.counts.at[LvlRf][TenO].writes += 1;
          if (touched[ln][elem] == epoch) {
            res.counts.at[LvlRf][TenO].reads += 1;
          } else {
            touched[ln][elem] = epoch;
            if (!rf_fresh[ln]) res.counts.at[LvlRf][TenO].reads += 1;
          }
        }
        res.cycles += 1;
        rf_more = rf.step();
      }
      gb_more = gb.step();
    }
    dram_more = dram.step();
  }

  // final drain of live output tiles
  {
    const auto ov = outer_vals();
    for (std::int64_t ln = 0; ln < lanes; ++ln)
      for (int d = 0; d < kDims; ++d)
        rf_off[ln][d] = (ov[d] * t.pe[d] + lane_coord[ln][d]) * rf_geom.ext[d];
    drain_rf_out();
    for (int d = 0; d < kDims; ++d) gb_off[d] = dram.value_of(d) * gb_geom.ext[d];
    drain_gb_out();
  }
  return res;
}

}  // namespace nacs
