#pragma once

// Randomized equivalence sweep: sample small layers and mapping configs,
// then compare the closed-form access counts and cycle product against the
// exhaustive loop-nest walker word for word. The analytical side is a hook
// so tests can corrupt it and prove the sweep actually bites.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nacs/accel_search.hpp"
#include "nacs/costmodel.hpp"
#include "nacs/oracle.hpp"
#include "nacs/prng.hpp"

namespace nacs {

struct SweepConfig {
  int min_configs = 500;       // legal configs to verify
  std::int64_t max_dim = 4;    // cap on every layer dimension
  std::int64_t mac_cap = 200000;
  std::uint64_t seed = 1;
};

struct SweepMismatch {
  ConvLayerDesc layer;
  AcceleratorConfig config;
  std::string detail;
};

struct SweepResult {
  int checked = 0;
  int mismatches = 0;
  std::optional<SweepMismatch> first;
};

// fn(layer, trips) -> (counts, cycles) claimed by the model under test.
using AnalyticalFn =
    std::function<std::pair<AccessCounts, std::int64_t>(const ConvLayerDesc&, const LayerTrips&)>;

inline std::pair<AccessCounts, std::int64_t> reference_analytical(const ConvLayerDesc& layer,
                                                                  const LayerTrips& t) {
  return {count_accesses(layer, t), compute_cycles(t)};
}

inline SweepResult oracle_sweep(const SweepConfig& cfg, const AnalyticalFn& fn) {
  Rng rng = make_rng(cfg.seed, 0x5feed);
  SweepResult res;
  HardwareCostTables tables;

  auto pick = [&](std::initializer_list<std::int64_t> v) {
    std::vector<std::int64_t> opts;
    for (auto x : v)
      if (x <= cfg.max_dim) opts.push_back(x);
    return opts[uniform_index(rng, opts.size())];
  };

  while (res.checked < cfg.min_configs) {
    ConvLayerDesc l;
    l.x = pick({1, 2, 3, 4});
    l.y = pick({1, 2, 3, 4});
    l.r = pick({1, 2, 3});
    l.s = pick({1, 2, 3});
    l.c = pick({1, 2, 3, 4});
    l.k = pick({1, 2, 3, 4});
    l.stride = pick({1, 2});
    l.groups = 1;
    if (l.c == l.k && l.c > 1 && uniform_index(rng, 2) == 0)
      l.groups = l.c;  // depthwise
    else if (l.c % 2 == 0 && l.k % 2 == 0 && uniform_index(rng, 2) == 0)
      l.groups = 2;

    NetworkDesc net{{l}};
    AcceleratorSpace sp;
    sp.ref_dims = reference_dims(net);
    sp.noc_options = {NocKind::OutputParallel, NocKind::KernelParallel,
                      NocKind::KernelOutputParallel};
    sp.pe_count_options = {1, 2, 4, 8, 16};
    sp.mode_options = {ExecMode::MultiCycle};
    sp.search_loop_order = true;

    SlotLayout lay = build_slot_layout(sp, net);
    AccelLogits logits = AccelLogits::zeros(lay);
    SampleRecord rec = sample_accelerator(lay, logits, 2.0, rng);

    // grouped layers with lane splits that straddle group boundaries are
    // rejected by validation, never costed
    bool aligned = true;
    for (const auto& v : validate(rec.config, net, sp, tables).violations)
      if (v.code == "group_alignment") aligned = false;
    if (!aligned) continue;

    const LayerTrips trips = resolve_layer(l, rec.config.global);
    if (macs(l) > cfg.mac_cap) continue;

    const auto [counts, cycles] = fn(l, trips);
    const OracleResult oracle = oracle_simulate(l, trips, cfg.mac_cap);
    ++res.checked;

    std::string detail;
    if (cycles != oracle.cycles)
      detail = "cycles: analytical " + std::to_string(cycles) + " vs oracle " +
               std::to_string(oracle.cycles);
    for (int lvl = 0; lvl < kLevels && detail.empty(); ++lvl)
      for (int t = 0; t < kTensors && detail.empty(); ++t) {
        const auto& a = counts.at[lvl][t];
        const auto& o = oracle.counts.at[lvl][t];
        if (a.reads != o.reads || a.writes != o.writes)
          detail = std::string(level_name(lvl)) + "/" + tensor_name(t) + ": analytical r=" +
                   std::to_string(a.reads) + " w=" + std::to_string(a.writes) + " vs oracle r=" +
                   std::to_string(o.reads) + " w=" + std::to_string(o.writes);
      }
    if (!detail.empty()) {
      ++res.mismatches;
      if (!res.first) res.first = SweepMismatch{l, rec.config, detail};
    }
  }
  return res;
}

inline SweepResult oracle_sweep(const SweepConfig& cfg) {
  return oracle_sweep(cfg, reference_analytical);
}

}  // namespace nacs
