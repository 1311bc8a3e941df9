#pragma once

// Gradient-based accelerator search. Every searchable decision is a
// categorical slot with a real logit vector (loop orders carry a 6x6 logit
// matrix read as sequential selection scores). Sampling walks the slots in a
// fixed canonical order, masking each menu to the choices that stay legal
// given what was already drawn (divisor chains, NoC dims, PE budget), so
// every sample is product-legal by construction.
//
// One step: sample a config, price it with the analytical model plus a soft
// penalty for capacity/budget violations, then ascend the surrogate
//   loss = (sum over visited slots of softprob[chosen]) * price, price detached
// whose gradient w.r.t. the logits is price * dsoftprob/dlogits at the
// sampled noise. The incumbent tracks the cheapest fully legal sample.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nacs/accel_space.hpp"
#include "nacs/costmodel.hpp"
#include "nacs/prng.hpp"
#include "nacs/sampling.hpp"
#include "nacs/workload.hpp"

namespace nacs {

// ------------------------------------------------------------- slot layout

struct CatSlot {
  std::string name;
  std::vector<std::int64_t> menu;  // payload per option (divisor, pe count, enum id, chunk id)
};

struct GroupSlots {
  std::array<std::array<int, kDims>, kTileLevels> tile_slot{};  // cat slot ids
  std::array<int, kOrderLevels> order_slot{-1, -1, -1};         // order slot ids, -1 = fixed
};

// Compiled view of an accelerator space for a fixed network: which slots
// exist, their menus, and how they map onto a config.
struct SlotLayout {
  AcceleratorSpace space;
  std::vector<CatSlot> cat;
  int n_order = 0;
  // Slots below n_shared_cat depend only on the space; per-layer chunk
  // assignment slots sit at the tail so logit banks can be shared across
  // networks of different depths (order slots are all space-determined).
  int n_shared_cat = 0;
  int noc_slot = -1, pes_slot = -1, mode_slot = -1;
  std::vector<int> assign_slot;  // per layer, -1 when pipeline not in space
  GroupSlots global;
  std::vector<GroupSlots> chunks;
  std::vector<char> layer_dw;
  std::vector<std::int64_t> layer_macs;
};

inline SlotLayout build_slot_layout(const AcceleratorSpace& space, const NetworkDesc& net) {
  space.check();
  SlotLayout lay;
  lay.space = space;

  auto add_cat = [&](std::string name, std::vector<std::int64_t> menu) {
    if (menu.empty()) throw std::invalid_argument("slot with empty menu: " + name);
    lay.cat.push_back({std::move(name), std::move(menu)});
    return static_cast<int>(lay.cat.size()) - 1;
  };
  auto add_order = [&]() { return lay.n_order++; };

  if (!space.has_mode(ExecMode::MultiCycle)) {
    std::int64_t biggest = 0;
    for (auto p : space.pe_count_options) biggest = std::max(biggest, p);
    if (biggest < space.num_chunks)
      throw std::invalid_argument("accelerator space: pipeline-only space needs a PE option >= num_chunks");
  }

  {
    std::vector<std::int64_t> menu;
    for (auto n : space.noc_options) menu.push_back(static_cast<std::int64_t>(n));
    lay.noc_slot = add_cat("noc", std::move(menu));
  }
  lay.pes_slot = add_cat("max_pes", space.pe_count_options);
  {
    std::vector<std::int64_t> menu;
    for (auto m : space.mode_options) menu.push_back(static_cast<std::int64_t>(m));
    lay.mode_slot = add_cat("mode", std::move(menu));
  }

  for (const auto& l : net.layers) {
    lay.layer_dw.push_back(l.depthwise() ? 1 : 0);
    lay.layer_macs.push_back(macs(l));
  }

  auto add_group = [&](const std::string& prefix) {
    GroupSlots g;
    for (int lvl = 0; lvl < kTileLevels; ++lvl) {
      static const char* lvl_name[kTileLevels] = {"gb", "pe", "rf"};
      for (int d = 0; d < kDims; ++d)
        g.tile_slot[lvl][d] = add_cat(prefix + "tile_" + lvl_name[lvl] + "_" + dim_name(d),
                                      divisors(space.ref_dims[d]));
    }
    if (space.search_loop_order)
      for (int lvl = 0; lvl < kOrderLevels; ++lvl) g.order_slot[lvl] = add_order();
    return g;
  };

  if (space.has_mode(ExecMode::MultiCycle)) lay.global = add_group("");
  if (space.has_mode(ExecMode::Pipeline))
    for (int ch = 0; ch < space.num_chunks; ++ch)
      lay.chunks.push_back(add_group("chunk" + std::to_string(ch) + "_"));

  lay.n_shared_cat = static_cast<int>(lay.cat.size());
  if (space.has_mode(ExecMode::Pipeline)) {
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
      auto menu_ids = space.chunk_menu(lay.layer_dw[i] != 0);
      std::vector<std::int64_t> menu(menu_ids.begin(), menu_ids.end());
      lay.assign_slot.push_back(add_cat("chunk_of_layer" + std::to_string(i), std::move(menu)));
    }
  } else {
    lay.assign_slot.assign(net.layers.size(), -1);
  }
  return lay;
}

// Logit bank matching a layout: one vector per categorical slot, one 6x6
// matrix per order slot. Zero-initialized (uniform distribution).
struct AccelLogits {
  std::vector<std::vector<double>> cat;
  std::vector<std::array<std::array<double, kDims>, kDims>> order;

  static AccelLogits zeros(const SlotLayout& lay) {
    AccelLogits lg;
    lg.cat.resize(lay.cat.size());
    for (std::size_t i = 0; i < lay.cat.size(); ++i)
      lg.cat[i].assign(lay.cat[i].menu.size(), 0.0);
    lg.order.resize(lay.n_order);
    for (auto& m : lg.order)
      for (auto& row : m) row.fill(0.0);
    return lg;
  }

  void accumulate(const AccelLogits& other, double w) {
    for (std::size_t i = 0; i < cat.size(); ++i)
      for (std::size_t j = 0; j < cat[i].size(); ++j) cat[i][j] += w * other.cat[i][j];
    for (std::size_t i = 0; i < order.size(); ++i)
      for (int r = 0; r < kDims; ++r)
        for (int c = 0; c < kDims; ++c) order[i][r][c] += w * other.order[i][r][c];
  }
};

// One sampled configuration plus everything needed to differentiate the
// surrogate at fixed noise.
struct SampleRecord {
  AcceleratorConfig config;
  std::vector<std::pair<int, GumbelDraw>> cat_draws;    // slot id, draw
  std::vector<std::pair<int, OrderDraw>> order_draws;   // order slot id, draw
  double soft_sum = 0.0;
};

namespace detail {

inline std::vector<int> menu_indices_dividing(const std::vector<std::int64_t>& menu,
                                              std::int64_t quotient) {
  std::vector<int> act;
  for (int i = 0; i < static_cast<int>(menu.size()); ++i)
    if (quotient % menu[i] == 0) act.push_back(i);
  return act;
}

}  // namespace detail

inline SampleRecord sample_accelerator(const SlotLayout& lay, const AccelLogits& lg, double temp,
                                       Rng& rng) {
  SampleRecord rec;
  auto draw_cat = [&](int slot, const std::vector<int>& active) {
    GumbelDraw d = gumbel_softmax_sample(lg.cat[slot], active, temp, rng);
    rec.soft_sum += d.soft[d.choice];
    int choice = d.choice;
    rec.cat_draws.emplace_back(slot, std::move(d));
    return lay.cat[slot].menu[choice];
  };
  auto all_of = [&](int slot) {
    std::vector<int> act(lay.cat[slot].menu.size());
    for (std::size_t i = 0; i < act.size(); ++i) act[i] = static_cast<int>(i);
    return act;
  };

  auto& cfg = rec.config;
  cfg.noc = static_cast<NocKind>(draw_cat(lay.noc_slot, all_of(lay.noc_slot)));

  // A pipeline needs at least one PE per chunk, so PE counts below the chunk
  // count are only reachable together with multi-cycle execution.
  const bool has_mc = lay.space.has_mode(ExecMode::MultiCycle);
  std::vector<int> pes_act;
  for (int i = 0; i < static_cast<int>(lay.cat[lay.pes_slot].menu.size()); ++i)
    if (has_mc || lay.cat[lay.pes_slot].menu[i] >= lay.space.num_chunks) pes_act.push_back(i);
  cfg.max_pes = draw_cat(lay.pes_slot, pes_act);

  std::vector<int> mode_act;
  for (int i = 0; i < static_cast<int>(lay.cat[lay.mode_slot].menu.size()); ++i)
    if (static_cast<ExecMode>(lay.cat[lay.mode_slot].menu[i]) == ExecMode::MultiCycle ||
        cfg.max_pes >= lay.space.num_chunks)
      mode_act.push_back(i);
  cfg.mode = static_cast<ExecMode>(draw_cat(lay.mode_slot, mode_act));

  std::vector<std::int64_t> stage_budget;
  if (cfg.mode == ExecMode::Pipeline) {
    cfg.num_chunks = lay.space.num_chunks;
    cfg.chunk_of_layer.resize(lay.assign_slot.size());
    std::vector<std::int64_t> chunk_macs(cfg.num_chunks, 0);
    for (std::size_t i = 0; i < lay.assign_slot.size(); ++i) {
      int ch = static_cast<int>(draw_cat(lay.assign_slot[i], all_of(lay.assign_slot[i])));
      cfg.chunk_of_layer[i] = ch;
      chunk_macs[ch] += lay.layer_macs[i];
    }
    stage_budget = split_pes(cfg.max_pes, chunk_macs);
  } else {
    stage_budget = {cfg.max_pes};
  }

  const auto& allowed = noc_parallel_dims(cfg.noc);
  auto sample_group = [&](const GroupSlots& slots, std::int64_t pe_budget) {
    MappingGroup g;
    std::int64_t lanes = 1;
    for (int d = 0; d < kDims; ++d) {
      const std::int64_t ref = lay.space.ref_dims[d];
      // divisor chain: RF, then PE under NoC and budget masks, then GB
      const auto& rf_menu = lay.cat[slots.tile_slot[TileRf][d]].menu;
      auto rf_act = detail::menu_indices_dividing(rf_menu, ref);
      g.tile[TileRf][d] = draw_cat(slots.tile_slot[TileRf][d], rf_act);

      const auto& pe_menu = lay.cat[slots.tile_slot[TilePe][d]].menu;
      std::vector<int> pe_act;
      if (allowed[d]) {
        const std::int64_t budget_left = pe_budget / lanes;
        for (int i : detail::menu_indices_dividing(pe_menu, ref / g.tile[TileRf][d]))
          if (pe_menu[i] <= budget_left) pe_act.push_back(i);
      }
      if (pe_act.empty())
        pe_act = detail::menu_indices_dividing(pe_menu, 1);  // the always-present 1
      g.tile[TilePe][d] = draw_cat(slots.tile_slot[TilePe][d], pe_act);
      lanes *= g.tile[TilePe][d];

      const auto& gb_menu = lay.cat[slots.tile_slot[TileGb][d]].menu;
      auto gb_act = detail::menu_indices_dividing(
          gb_menu, ref / (g.tile[TileRf][d] * g.tile[TilePe][d]));
      g.tile[TileGb][d] = draw_cat(slots.tile_slot[TileGb][d], gb_act);
    }
    for (int lvl = 0; lvl < kOrderLevels; ++lvl) {
      if (slots.order_slot[lvl] < 0) {
        g.loop_order[lvl] = lay.space.fixed_order[lvl];
        continue;
      }
      OrderDraw od = sample_order(lg.order[slots.order_slot[lvl]], kDims, temp, rng);
      for (int i = 0; i < kDims; ++i) g.loop_order[lvl][i] = od.perm[i];
      for (const auto& p : od.picks) rec.soft_sum += p.soft[p.choice];
      rec.order_draws.emplace_back(slots.order_slot[lvl], std::move(od));
    }
    return g;
  };

  if (cfg.mode == ExecMode::MultiCycle) {
    cfg.global = sample_group(lay.global, stage_budget[0]);
  } else {
    cfg.chunk_groups.clear();
    for (int ch = 0; ch < cfg.num_chunks; ++ch)
      cfg.chunk_groups.push_back(sample_group(lay.chunks[ch], stage_budget[ch]));
  }
  return rec;
}

// Recompute the surrogate soft sum for a past sample at possibly perturbed
// logits (fixed noise, fixed masks, fixed choices). Used by gradient checks.
inline double surrogate_soft_sum(const SlotLayout&, const AccelLogits& lg, double temp,
                                 const SampleRecord& rec) {
  double s = 0.0;
  std::vector<double> scores;
  for (const auto& [slot, d] : rec.cat_draws) {
    scores.assign(lg.cat[slot].size(), 0.0);
    for (int i : d.active) scores[i] = lg.cat[slot][i] + d.noise[i];
    s += masked_softmax(scores, d.active, temp)[d.choice];
  }
  for (const auto& [slot, od] : rec.order_draws) {
    for (int pos = 0; pos < kDims; ++pos) {
      const auto& p = od.picks[pos];
      scores.assign(kDims, 0.0);
      for (int i : p.active) scores[i] = lg.order[slot][pos][i] + p.noise[i];
      s += masked_softmax(scores, p.active, temp)[p.choice];
    }
  }
  return s;
}

// d(surrogate)/d(logits) scaled by `scale` (the detached price), accumulated.
inline void surrogate_grad(const SlotLayout&, double temp, const SampleRecord& rec, double scale,
                           AccelLogits& grad) {
  for (const auto& [slot, d] : rec.cat_draws) add_soft_choice_grad(d, temp, scale, grad.cat[slot]);
  for (const auto& [slot, od] : rec.order_draws)
    for (int pos = 0; pos < kDims; ++pos) {
      std::vector<double> row(grad.order[slot][pos].begin(), grad.order[slot][pos].end());
      add_soft_choice_grad(od.picks[pos], temp, scale, row);
      for (int c = 0; c < kDims; ++c) grad.order[slot][pos][c] = row[c];
    }
}

// ------------------------------------------------------------------ search

struct AccelSearchConfig {
  int steps = 300;
  double learning_rate = 0.05;
  bool raw_scale = false;          // true: no first-sample normalization (paper scale)
  double momentum = 0.9;
  double temp_init = 3.0;
  double temp_decay = 0.92;
  int steps_per_epoch = 0;         // 0: whole run is one temperature epoch
  int epoch_offset = 0;            // outer-loop epochs already elapsed
  double penalty_multiplier = 10.0;
  std::uint64_t seed = 1;

  double temperature(int step) const {
    int spe = steps_per_epoch > 0 ? steps_per_epoch : std::max(steps, 1);
    return temp_init * std::pow(temp_decay, epoch_offset + step / spe);
  }
};

struct SearchTraceRow {
  int step = 0;
  double temp = 0.0;
  double sampled_cost = 0.0;
  double incumbent_cost = std::numeric_limits<double>::infinity();
  bool legal = false;
};

struct SearchResult {
  bool found_legal = false;
  AcceleratorConfig best_config;
  double best_cost = std::numeric_limits<double>::infinity();
  CostReport best_report;
  // Cheapest sample regardless of legality; fallback donor when nothing
  // legal was seen.
  AcceleratorConfig best_any_config;
  double best_any_cost = std::numeric_limits<double>::infinity();
  AccelLogits final_logits;
  std::vector<SearchTraceRow> trace;
};

// Price of one config: objective value inflated by soft violation penalties.
inline double priced_cost(const NetworkDesc& net, const AcceleratorConfig& cfg,
                          const AcceleratorSpace& space, const HardwareCostTables& tables,
                          Objective obj, double penalty_multiplier, CostReport* rep_out = nullptr,
                          bool* legal_out = nullptr) {
  CostReport rep = network_cost(net, cfg, tables);
  LegalityReport leg = validate(cfg, net, space, tables);
  double penalty = 1.0;
  for (const auto& v : leg.violations) penalty += penalty_multiplier * (1.0 + v.overflow);
  if (rep_out) *rep_out = rep;
  if (legal_out) *legal_out = leg.legal();
  return objective_cost(rep, obj, tables) * penalty;
}

inline SearchResult search_accelerator(const NetworkDesc& net, const AcceleratorSpace& space,
                                       const HardwareCostTables& tables, Objective obj,
                                       const AccelSearchConfig& cfg,
                                       const AccelLogits* warm_start = nullptr) {
  if (net.layers.empty()) throw std::invalid_argument("search_accelerator: empty network");
  SlotLayout lay = build_slot_layout(space, net);
  AccelLogits logits = AccelLogits::zeros(lay);
  AccelLogits velocity = AccelLogits::zeros(lay);
  if (warm_start) {
    // Warm starts may cover just the leading space-determined slots; the
    // per-layer tail (chunk assignments) always starts uniform.
    if (warm_start->cat.size() > logits.cat.size() ||
        warm_start->order.size() != logits.order.size())
      throw std::invalid_argument("search_accelerator: warm start shape mismatch");
    for (std::size_t i = 0; i < warm_start->cat.size(); ++i) {
      if (warm_start->cat[i].size() != logits.cat[i].size())
        throw std::invalid_argument("search_accelerator: warm start slot size mismatch");
      logits.cat[i] = warm_start->cat[i];
    }
    logits.order = warm_start->order;
  }

  Rng rng = make_rng(cfg.seed);
  SearchResult res;
  res.trace.reserve(cfg.steps);
  double norm = 0.0;  // first sampled price, for dimensionless updates

  for (int step = 0; step < cfg.steps; ++step) {
    const double temp = cfg.temperature(step);
    SampleRecord rec = sample_accelerator(lay, logits, temp, rng);

    CostReport rep;
    bool legal = false;
    const double price =
        priced_cost(net, rec.config, space, tables, obj, cfg.penalty_multiplier, &rep, &legal);
    if (norm <= 0.0) norm = price > 0.0 ? price : 1.0;
    const double scale = cfg.raw_scale ? price : price / norm;

    AccelLogits grad = AccelLogits::zeros(lay);
    surrogate_grad(lay, temp, rec, scale, grad);
    // classic momentum: v <- momentum * v + g; logits <- logits - lr * v
    for (auto& v : velocity.cat)
      for (auto& x : v) x *= cfg.momentum;
    for (auto& m : velocity.order)
      for (auto& row : m)
        for (auto& x : row) x *= cfg.momentum;
    velocity.accumulate(grad, 1.0);

    res.trace.push_back({step, temp, price,
                         res.found_legal ? res.best_cost : std::numeric_limits<double>::infinity(),
                         legal});
    if (legal && price < res.best_cost) {
      res.best_cost = price;
      res.best_config = rec.config;
      res.best_report = rep;
      res.found_legal = true;
    }
    if (price < res.best_any_cost) {
      res.best_any_cost = price;
      res.best_any_config = rec.config;
    }
    res.trace.back().incumbent_cost =
        res.found_legal ? res.best_cost : std::numeric_limits<double>::infinity();

    for (std::size_t i = 0; i < logits.cat.size(); ++i)
      for (std::size_t j = 0; j < logits.cat[i].size(); ++j)
        logits.cat[i][j] -= cfg.learning_rate * velocity.cat[i][j];
    for (std::size_t i = 0; i < logits.order.size(); ++i)
      for (int r = 0; r < kDims; ++r)
        for (int c = 0; c < kDims; ++c)
          logits.order[i][r][c] -= cfg.learning_rate * velocity.order[i][r][c];
  }
  res.final_logits = std::move(logits);
  return res;
}

// -------------------------------------------------------------- enumerate

struct EnumeratedConfig {
  AcceleratorConfig config;
  double cost = 0.0;  // priced (penalized when illegal)
  bool legal = false;
};

// Visit every configuration reachable by the sampler, in a fixed canonical
// order, pricing each one. Throws std::length_error once more than `limit`
// configs have been produced. Loop orders multiply the count by 720 per
// searched order slot, so keep them fixed for exhaustive sweeps.
inline std::vector<EnumeratedConfig> enumerate_configs(const NetworkDesc& net,
                                                       const AcceleratorSpace& space,
                                                       const HardwareCostTables& tables,
                                                       Objective obj, double penalty_multiplier,
                                                       std::uint64_t limit) {
  SlotLayout lay = build_slot_layout(space, net);
  std::vector<EnumeratedConfig> out;
  auto emit = [&](const AcceleratorConfig& cfg) {
    if (out.size() >= limit) throw std::length_error("enumerate_configs: limit exceeded");
    EnumeratedConfig e;
    e.config = cfg;
    e.cost = priced_cost(net, cfg, space, tables, obj, penalty_multiplier, nullptr, &e.legal);
    out.push_back(std::move(e));
  };

  const std::array<int, kDims> identity{0, 1, 2, 3, 4, 5};

  // per-group enumeration: divisor chains under NoC + budget masks, then orders
  std::function<void(AcceleratorConfig&, const std::array<bool, kDims>&, std::int64_t,
                     const std::function<void(const MappingGroup&)>&)>
      enum_group = [&](AcceleratorConfig&, const std::array<bool, kDims>& allowed,
                       std::int64_t pe_budget, const std::function<void(const MappingGroup&)>& k) {
        MappingGroup g;
        std::function<void(int, std::int64_t)> per_dim = [&](int d, std::int64_t lanes) {
          if (d == kDims) {
            if (!space.search_loop_order) {
              for (int lvl = 0; lvl < kOrderLevels; ++lvl) g.loop_order[lvl] = space.fixed_order[lvl];
              k(g);
              return;
            }
            std::array<std::array<int, kDims>, kOrderLevels> perms{identity, identity, identity};
            std::function<void(int)> per_level = [&](int lvl) {
              if (lvl == kOrderLevels) {
                for (int l = 0; l < kOrderLevels; ++l) g.loop_order[l] = perms[l];
                k(g);
                return;
              }
              perms[lvl] = identity;
              do per_level(lvl + 1);
              while (std::next_permutation(perms[lvl].begin(), perms[lvl].end()));
            };
            per_level(0);
            return;
          }
          const std::int64_t ref = space.ref_dims[d];
          for (std::int64_t rf : divisors(ref)) {
            g.tile[TileRf][d] = rf;
            std::vector<std::int64_t> pe_opts{1};
            if (allowed[d]) {
              const std::int64_t budget_left = pe_budget / lanes;
              for (std::int64_t pe : divisors(ref / rf))
                if (pe != 1 && pe <= budget_left) pe_opts.push_back(pe);
            }
            for (std::int64_t pe : pe_opts) {
              g.tile[TilePe][d] = pe;
              for (std::int64_t gb : divisors(ref / (rf * pe))) {
                g.tile[TileGb][d] = gb;
                per_dim(d + 1, lanes * pe);
              }
            }
          }
        };
        per_dim(0, 1);
      };

  const bool has_mc = space.has_mode(ExecMode::MultiCycle);
  AcceleratorConfig cfg;
  for (NocKind noc : space.noc_options) {
    cfg.noc = noc;
    const auto& allowed = noc_parallel_dims(noc);
    for (std::int64_t pes : space.pe_count_options) {
      if (!has_mc && pes < space.num_chunks) continue;
      cfg.max_pes = pes;
      for (ExecMode mode : space.mode_options) {
        if (mode == ExecMode::Pipeline && pes < space.num_chunks) continue;
        cfg.mode = mode;
        if (mode == ExecMode::MultiCycle) {
          cfg.num_chunks = 1;
          cfg.chunk_of_layer.clear();
          cfg.chunk_groups.clear();
          enum_group(cfg, allowed, pes, [&](const MappingGroup& g) {
            cfg.global = g;
            emit(cfg);
          });
        } else {
          cfg.num_chunks = space.num_chunks;
          cfg.chunk_of_layer.assign(net.layers.size(), 0);
          std::function<void(std::size_t)> per_layer = [&](std::size_t li) {
            if (li == net.layers.size()) {
              std::vector<std::int64_t> chunk_macs(cfg.num_chunks, 0);
              for (std::size_t i = 0; i < net.layers.size(); ++i)
                chunk_macs[cfg.chunk_of_layer[i]] += lay.layer_macs[i];
              auto budget = split_pes(pes, chunk_macs);
              cfg.chunk_groups.assign(cfg.num_chunks, MappingGroup{});
              std::function<void(int)> per_chunk = [&](int ch) {
                if (ch == cfg.num_chunks) {
                  emit(cfg);
                  return;
                }
                enum_group(cfg, allowed, budget[ch], [&](const MappingGroup& g) {
                  cfg.chunk_groups[ch] = g;
                  per_chunk(ch + 1);
                });
              };
              per_chunk(0);
              return;
            }
            for (int ch : space.chunk_menu(lay.layer_dw[li] != 0)) {
              cfg.chunk_of_layer[li] = ch;
              per_layer(li + 1);
            }
          };
          per_layer(0);
        }
      }
    }
  }
  return out;
}

}  // namespace nacs
