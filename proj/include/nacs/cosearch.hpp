#pragma once

// Joint network/accelerator search driver. Each epoch: sample M candidate
// networks from the architecture distribution, search an accelerator for
// each (warm-started from a shared running logit bank), average the per-
// operator costs of those accelerators into a table, then interleave weight
// and architecture updates where the architecture step sees task loss plus
// lambda times the table-weighted hardware loss. After the last epoch the
// argmax network is derived and a final accelerator search is run on it.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "nacs/accel_search.hpp"
#include "nacs/costmodel.hpp"
#include "nacs/supernet.hpp"
#include "nacs/workload.hpp"

namespace nacs {

struct NoLegalAcceleratorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Deterministic work-sharing loop: f(i) must only write state owned by i.
template <class F>
inline void parallel_for(int n, int threads, F&& f) {
  threads = std::max(1, std::min(threads, n));
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (int i; (i = next.fetch_add(1)) < n;) f(i);
    });
  for (auto& th : pool) th.join();
}

// ------------------------------------------------------------ cost table

struct DonorAccel {
  std::vector<int> choices;  // network the accelerator was searched for
  AcceleratorConfig config;
};

namespace detail {

// First expanded-layer index of each site under the given choices.
inline std::vector<std::int64_t> site_layer_starts(const NetworkSpace& space,
                                                   const std::vector<int>& choices) {
  std::vector<std::int64_t> starts;
  std::int64_t at = 0;
  for (std::size_t s = 0; s < space.blocks.size(); ++s) {
    starts.push_back(at);
    if (!space.blocks[s].candidates[choices[s]].is_skip) at += 3;
  }
  return starts;
}

// Mapping group a donor accelerator contributes for one site. A lone
// operator is evaluated without chunk context, so a pipelined donor lends
// the group of the chunk its network ran that site on (chunk 0 when the
// donor's network skipped the site).
inline const MappingGroup& donor_group(const NetworkSpace& space, const DonorAccel& donor,
                                       std::size_t site) {
  if (donor.config.mode == ExecMode::MultiCycle) return donor.config.global;
  if (!space.blocks[site].candidates[donor.choices[site]].is_skip) {
    const auto starts = site_layer_starts(space, donor.choices);
    const int ch = donor.config.chunk_of_layer[static_cast<std::size_t>(starts[site])];
    return donor.config.chunk_groups[ch];
  }
  return donor.config.chunk_groups[0];
}

}  // namespace detail

// Expected per-operator hardware cost: entry (site, candidate) is the mean
// over donors of the candidate's expanded layers evaluated in isolation
// under multi-cycle semantics on that donor's data paths. Skips cost zero.
inline OpCostTable expected_op_cost(const NetworkSpace& space,
                                    const std::vector<DonorAccel>& donors,
                                    const HardwareCostTables& tables, Objective obj) {
  if (donors.empty()) throw std::invalid_argument("expected_op_cost: no donors");
  OpCostTable table(space.blocks.size());
  for (std::size_t s = 0; s < space.blocks.size(); ++s) {
    const auto& site = space.blocks[s];
    table[s].assign(site.candidates.size(), 0.0);
    for (std::size_t k = 0; k < site.candidates.size(); ++k) {
      const auto& cand = site.candidates[k];
      if (cand.is_skip) continue;
      NetworkDesc op_net;
      op_net.layers =
          expand_block(cand, site.in_channels, site.out_channels, site.spatial, site.stride);
      double sum = 0.0;
      for (const auto& donor : donors) {
        AcceleratorConfig eval_cfg;
        eval_cfg.noc = donor.config.noc;
        eval_cfg.max_pes = donor.config.max_pes;
        eval_cfg.mode = ExecMode::MultiCycle;
        eval_cfg.num_chunks = 1;
        eval_cfg.global = detail::donor_group(space, donor, s);
        sum += objective_cost(network_cost(op_net, eval_cfg, tables), obj, tables);
      }
      table[s][k] = sum / static_cast<double>(donors.size());
    }
  }
  return table;
}

// Layer-wise hardware loss: relaxed (noise-free, unit temperature)
// coefficients against a cost table.
inline double table_hw_loss(const AlphaParams& alpha, const OpCostTable& table) {
  if (alpha.logits.size() != table.size())
    throw std::invalid_argument("table_hw_loss: row count mismatch");
  double total = 0.0;
  for (std::size_t l = 0; l < table.size(); ++l) {
    if (alpha.logits[l].size() != table[l].size())
      throw std::invalid_argument("table_hw_loss: column count mismatch");
    std::vector<int> act(table[l].size());
    for (std::size_t i = 0; i < act.size(); ++i) act[i] = static_cast<int>(i);
    const auto w = masked_softmax(alpha.logits[l], act, 1.0);
    for (std::size_t k = 0; k < table[l].size(); ++k) total += w[k] * table[l][k];
  }
  return total;
}

// ---------------------------------------------------------------- driver

// Largest magnitude kept in the shared warm-start logits. A couple of
// multiples of the Gumbel noise scale (stddev ~1.28) biases the next search
// strongly toward what earlier epochs learned while leaving every option
// reachable.
inline constexpr double kWarmLogitCap = 3.0;

struct CoSearchConfig {
  int max_epoch = 8;
  int m_samples = 10;          // networks sampled per epoch
  int steps_per_epoch = 50;    // interleaved weight/architecture steps
  double lambda = -1.0;        // < 0: balance so lambda*hw == task loss at start
  Objective objective = Objective::Edp;
  bool warm_start = true;      // share accelerator logits across runs
  double temp_init = 3.0;
  double temp_decay = 0.92;
  int threads = 1;
  std::uint64_t seed = 1;
  AccelSearchConfig das;
  DnsConfig dns;
};

struct EpochTraceRow {
  int epoch = 0;
  double val_loss = 0.0;
  double hw_loss = 0.0;
  double mean_das_cost = std::numeric_limits<double>::infinity();
  double incumbent = std::numeric_limits<double>::infinity();
};

struct CoSearchResult {
  std::vector<int> choices;
  NetworkDesc network;
  AcceleratorConfig accel;
  CostReport report;
  double final_cost = std::numeric_limits<double>::infinity();
  double lambda_used = 0.0;
  double table_norm = 1.0;
  std::vector<EpochTraceRow> trace;
};

namespace detail {

inline std::vector<int> sample_nonempty_choices(const AlphaParams& alpha,
                                                const NetworkSpace& space, double temp, Rng& rng) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    auto choices = sample_choices(alpha, temp, rng);
    for (std::size_t s = 0; s < choices.size(); ++s)
      if (!space.blocks[s].candidates[choices[s]].is_skip) return choices;
  }
  throw std::runtime_error("network sampling kept producing all-skip networks");
}

// Rescale logits so the largest magnitude is at most `cap`, preserving their
// direction. Averaged run logits can grow far beyond the Gumbel noise scale,
// which saturates the sampling softmax (near-one-hot draws, vanishing
// gradients) and would freeze every later warm-started search inside
// whatever corner the early epochs favoured.
inline void shrink_logits(AccelLogits& lg, double cap) {
  double mx = 0.0;
  for (const auto& v : lg.cat)
    for (double x : v) mx = std::max(mx, std::abs(x));
  for (const auto& m : lg.order)
    for (const auto& row : m)
      for (double x : row) mx = std::max(mx, std::abs(x));
  if (mx <= cap) return;
  const double s = cap / mx;
  for (auto& v : lg.cat)
    for (double& x : v) x *= s;
  for (auto& m : lg.order)
    for (auto& row : m)
      for (double& x : row) x *= s;
}

inline void mean_shared_logits(const std::vector<SearchResult>& runs, int n_shared_cat,
                               AccelLogits& gamma) {
  gamma.cat.assign(n_shared_cat, {});
  gamma.order = runs[0].final_logits.order;
  for (auto& m : gamma.order)
    for (auto& row : m) row.fill(0.0);
  const double inv = 1.0 / static_cast<double>(runs.size());
  for (int i = 0; i < n_shared_cat; ++i) {
    gamma.cat[i].assign(runs[0].final_logits.cat[i].size(), 0.0);
    for (const auto& r : runs)
      for (std::size_t j = 0; j < gamma.cat[i].size(); ++j)
        gamma.cat[i][j] += inv * r.final_logits.cat[i][j];
  }
  for (const auto& r : runs)
    for (std::size_t m = 0; m < gamma.order.size(); ++m)
      for (int a = 0; a < kDims; ++a)
        for (int b = 0; b < kDims; ++b) gamma.order[m][a][b] += inv * r.final_logits.order[m][a][b];
}

}  // namespace detail

inline CoSearchResult run_cosearch(const CoSearchConfig& cfg, const NetworkSpace& nspace,
                                   const AcceleratorSpace& aspace,
                                   const HardwareCostTables& tables,
                                   const SyntheticTaskSpec& task_spec) {
  if (cfg.max_epoch < 1 || cfg.m_samples < 1 || cfg.steps_per_epoch < 1)
    throw std::invalid_argument("cosearch: counts must be >= 1");
  nspace.check();
  aspace.check();
  tables.check();
  task_spec.check();

  const SyntheticTask task = make_synthetic_task(task_spec);
  Supernet snet = build_supernet(nspace, task_spec.input_dim, task_spec.classes,
                                 mix_seed(cfg.seed, 1));
  AlphaParams alpha = AlphaParams::zeros(nspace);
  OmegaOptState wstate = OmegaOptState::init(snet);
  AlphaOptState astate = AlphaOptState::init(alpha);
  Rng rng_dns = make_rng(cfg.seed, 2);
  Rng rng_sample = make_rng(cfg.seed, 3);

  CoSearchResult result;
  result.lambda_used = cfg.lambda;
  AccelLogits gamma;
  bool have_gamma = false;
  int n_shared_cat = 0;
  double table_norm = 0.0;
  double incumbent = std::numeric_limits<double>::infinity();

  for (int epoch = 0; epoch < cfg.max_epoch; ++epoch) {
    const double temp = cfg.temp_init * std::pow(cfg.temp_decay, epoch);

    // sample M networks from the current distribution, search hardware for each
    std::vector<std::vector<int>> choices_m(cfg.m_samples);
    std::vector<NetworkDesc> nets_m(cfg.m_samples);
    for (int m = 0; m < cfg.m_samples; ++m) {
      choices_m[m] = detail::sample_nonempty_choices(alpha, nspace, temp, rng_sample);
      nets_m[m] = assemble_network(nspace, choices_m[m]);
    }
    std::vector<SearchResult> runs(cfg.m_samples);
    parallel_for(cfg.m_samples, cfg.threads, [&](int m) {
      AccelSearchConfig das = cfg.das;
      das.epoch_offset = epoch;
      das.seed = mix_seed(cfg.seed, 0x1000u + static_cast<std::uint64_t>(epoch) * 4096u +
                                        static_cast<std::uint64_t>(m));
      runs[m] = search_accelerator(nets_m[m], aspace, tables, cfg.objective, das,
                                   (cfg.warm_start && have_gamma) ? &gamma : nullptr);
    });

    std::vector<DonorAccel> donors(cfg.m_samples);
    double das_sum = 0.0;
    int das_legal = 0;
    for (int m = 0; m < cfg.m_samples; ++m) {
      donors[m] = {choices_m[m],
                   runs[m].found_legal ? runs[m].best_config : runs[m].best_any_config};
      if (runs[m].found_legal) {
        das_sum += runs[m].best_cost;
        ++das_legal;
        incumbent = std::min(incumbent, runs[m].best_cost);
      }
    }
    if (cfg.warm_start) {
      if (!have_gamma) n_shared_cat = build_slot_layout(aspace, nets_m[0]).n_shared_cat;
      detail::mean_shared_logits(runs, n_shared_cat, gamma);
      detail::shrink_logits(gamma, kWarmLogitCap);
      have_gamma = true;
    }

    OpCostTable table = expected_op_cost(nspace, donors, tables, cfg.objective);
    if (epoch == 0) {
      double sum = 0.0;
      std::size_t cnt = 0;
      for (const auto& row : table)
        for (double v : row) {
          sum += v;
          ++cnt;
        }
      table_norm = cnt && sum > 0.0 ? sum / static_cast<double>(cnt) : 1.0;
      result.table_norm = table_norm;
    }
    for (auto& row : table)
      for (double& v : row) v /= table_norm;

    if (epoch == 0 && cfg.lambda < 0.0) {
      GumbelNoise zero(alpha.logits.size());
      for (std::size_t l = 0; l < zero.size(); ++l) zero[l].assign(alpha.logits[l].size(), 0.0);
      const double val0 =
          supernet_forward(snet, alpha, zero, 1.0, false, task.val.x, task.val.y, nullptr);
      const double hw0 = table_hw_loss(alpha, table);
      result.lambda_used = hw0 > 1e-30 ? val0 / hw0 : 1.0;
    }

    // interleaved bilevel updates against the epoch's table
    DnsConfig dns = cfg.dns;
    dns.temp = temp;
    double train_loss = 0.0;
    for (int step = 0; step < cfg.steps_per_epoch; ++step) {
      train_loss = train_step_weights(snet, alpha, task.train, dns, rng_dns, wstate);
      update_alpha(snet, alpha, task.val, &table, result.lambda_used, dns, rng_dns, astate);
    }
    if (!std::isfinite(train_loss)) throw std::runtime_error("cosearch: training diverged");

    EpochTraceRow row;
    row.epoch = epoch;
    row.val_loss = evaluate_derived(snet, alpha, task.val).first;
    row.hw_loss = table_hw_loss(alpha, table);
    row.mean_das_cost = das_legal ? das_sum / das_legal : std::numeric_limits<double>::infinity();
    row.incumbent = incumbent;
    result.trace.push_back(row);
  }

  // derive the argmax network and search its accelerator
  result.choices = derive_choices(alpha);
  result.network = assemble_network(nspace, result.choices);
  if (result.network.layers.empty())
    throw NoLegalAcceleratorError("derived network is empty; nothing to map");
  AccelSearchConfig das = cfg.das;
  das.epoch_offset = cfg.max_epoch;
  das.seed = mix_seed(cfg.seed, 0xF1A1);
  SearchResult fin = search_accelerator(result.network, aspace, tables, cfg.objective, das,
                                        (cfg.warm_start && have_gamma) ? &gamma : nullptr);
  if (cfg.warm_start && have_gamma) {
    // The shared logits are a hint, not a constraint: they were tuned for
    // the mix of sampled networks, and occasionally steer the last search
    // into a corner that is poor (or outright infeasible) for the derived
    // network. Run a from-scratch search as well and keep the better result.
    AccelSearchConfig cold = das;
    cold.epoch_offset = 0;
    cold.seed = mix_seed(cfg.seed, 0xC01D);
    SearchResult alt = search_accelerator(result.network, aspace, tables, cfg.objective, cold);
    if (alt.found_legal && (!fin.found_legal || alt.best_cost < fin.best_cost))
      fin = std::move(alt);
  }
  if (!fin.found_legal)
    throw NoLegalAcceleratorError("no legal accelerator found for the derived network");
  result.accel = fin.best_config;
  result.report = fin.best_report;
  result.final_cost = fin.best_cost;
  return result;
}

// SEQ baseline: architecture search first with MAC count as the hardware
// term (no accelerator in the loop), then one accelerator search on the
// derived network.
inline CoSearchResult run_sequential_baseline(const CoSearchConfig& cfg,
                                              const NetworkSpace& nspace,
                                              const AcceleratorSpace& aspace,
                                              const HardwareCostTables& tables,
                                              const SyntheticTaskSpec& task_spec) {
  if (cfg.max_epoch < 1 || cfg.steps_per_epoch < 1)
    throw std::invalid_argument("seq: counts must be >= 1");
  nspace.check();
  aspace.check();
  tables.check();
  task_spec.check();

  const SyntheticTask task = make_synthetic_task(task_spec);
  Supernet snet = build_supernet(nspace, task_spec.input_dim, task_spec.classes,
                                 mix_seed(cfg.seed, 1));
  AlphaParams alpha = AlphaParams::zeros(nspace);
  OmegaOptState wstate = OmegaOptState::init(snet);
  AlphaOptState astate = AlphaOptState::init(alpha);
  Rng rng_dns = make_rng(cfg.seed, 2);

  OpCostTable table(nspace.blocks.size());
  for (std::size_t s = 0; s < nspace.blocks.size(); ++s) {
    const auto& site = nspace.blocks[s];
    table[s].assign(site.candidates.size(), 0.0);
    for (std::size_t k = 0; k < site.candidates.size(); ++k)
      if (!site.candidates[k].is_skip)
        table[s][k] = static_cast<double>(candidate_macs(site, site.candidates[k]));
  }
  double sum = 0.0;
  std::size_t cnt = 0;
  for (const auto& row : table)
    for (double v : row) {
      sum += v;
      ++cnt;
    }
  const double norm = cnt && sum > 0.0 ? sum / static_cast<double>(cnt) : 1.0;
  for (auto& row : table)
    for (double& v : row) v /= norm;

  CoSearchResult result;
  result.table_norm = norm;
  result.lambda_used = cfg.lambda;
  if (cfg.lambda < 0.0) {
    GumbelNoise zero(alpha.logits.size());
    for (std::size_t l = 0; l < zero.size(); ++l) zero[l].assign(alpha.logits[l].size(), 0.0);
    const double val0 =
        supernet_forward(snet, alpha, zero, 1.0, false, task.val.x, task.val.y, nullptr);
    const double hw0 = table_hw_loss(alpha, table);
    result.lambda_used = hw0 > 1e-30 ? val0 / hw0 : 1.0;
  }

  for (int epoch = 0; epoch < cfg.max_epoch; ++epoch) {
    DnsConfig dns = cfg.dns;
    dns.temp = cfg.temp_init * std::pow(cfg.temp_decay, epoch);
    for (int step = 0; step < cfg.steps_per_epoch; ++step) {
      train_step_weights(snet, alpha, task.train, dns, rng_dns, wstate);
      update_alpha(snet, alpha, task.val, &table, result.lambda_used, dns, rng_dns, astate);
    }
    EpochTraceRow row;
    row.epoch = epoch;
    row.val_loss = evaluate_derived(snet, alpha, task.val).first;
    row.hw_loss = table_hw_loss(alpha, table);
    result.trace.push_back(row);
  }

  result.choices = derive_choices(alpha);
  result.network = assemble_network(nspace, result.choices);
  if (result.network.layers.empty())
    throw NoLegalAcceleratorError("derived network is empty; nothing to map");
  AccelSearchConfig das = cfg.das;
  das.epoch_offset = cfg.max_epoch;
  das.seed = mix_seed(cfg.seed, 0xF1A1);
  SearchResult fin = search_accelerator(result.network, aspace, tables, cfg.objective, das);
  if (!fin.found_legal)
    throw NoLegalAcceleratorError("no legal accelerator found for the derived network");
  result.accel = fin.best_config;
  result.report = fin.best_report;
  result.final_cost = fin.best_cost;
  return result;
}

// ------------------------------------------------------------- baselines

// Accuracy of one concrete choice vector: train only its operators (logits
// pinned far above the Gumbel noise range) and evaluate the derived path.
inline double proxy_accuracy(const NetworkSpace& nspace, const std::vector<int>& choices,
                             const SyntheticTaskSpec& task_spec, int train_steps,
                             std::uint64_t seed) {
  const SyntheticTask task = make_synthetic_task(task_spec);
  Supernet snet = build_supernet(nspace, task_spec.input_dim, task_spec.classes,
                                 mix_seed(seed, 0xA11CE));
  AlphaParams alpha = AlphaParams::zeros(nspace);
  for (std::size_t s = 0; s < choices.size(); ++s) alpha.logits[s][choices[s]] = 50.0;
  OmegaOptState wstate = OmegaOptState::init(snet);
  Rng rng = make_rng(seed, 0x7721);
  DnsConfig dns;
  dns.hard = true;
  for (int step = 0; step < train_steps; ++step)
    train_step_weights(snet, alpha, task.train, dns, rng, wstate);
  return evaluate_derived(snet, alpha, task.val).second;
}

struct RandomPoint {
  std::vector<int> choices;
  AcceleratorConfig accel;
  double cost = std::numeric_limits<double>::infinity();
  double accuracy = 0.0;
  bool legal = false;
};

struct RandomBaselineResult {
  std::vector<RandomPoint> points;  // one per sampled network (its best accelerator)
  std::vector<RandomPoint> pareto;  // non-dominated subset (max accuracy, min cost)
};

// a dominates b when it is no worse on both axes and better on one.
inline bool pareto_dominates(const RandomPoint& a, const RandomPoint& b) {
  return a.accuracy >= b.accuracy && a.cost <= b.cost &&
         (a.accuracy > b.accuracy || a.cost < b.cost);
}

inline RandomBaselineResult run_random_baseline(const NetworkSpace& nspace,
                                                const AcceleratorSpace& aspace,
                                                const HardwareCostTables& tables, Objective obj,
                                                const SyntheticTaskSpec& task_spec, int n_nets,
                                                int n_accels_per_net, int proxy_train_steps,
                                                double penalty_multiplier, std::uint64_t seed,
                                                int threads = 1) {
  if (n_nets < 1 || n_accels_per_net < 1)
    throw std::invalid_argument("random baseline: counts must be >= 1");
  nspace.check();
  aspace.check();

  RandomBaselineResult out;
  out.points.resize(n_nets);
  parallel_for(n_nets, threads, [&](int i) {
    Rng rng = make_rng(seed, 0xBA5E0000u + static_cast<std::uint64_t>(i));
    RandomPoint pt;
    pt.choices.resize(nspace.blocks.size());
    for (std::size_t s = 0; s < nspace.blocks.size(); ++s)
      pt.choices[s] = static_cast<int>(uniform_index(rng, nspace.blocks[s].candidates.size()));
    NetworkDesc net = assemble_network(nspace, pt.choices);

    if (!net.layers.empty()) {
      SlotLayout lay = build_slot_layout(aspace, net);
      AccelLogits uniform = AccelLogits::zeros(lay);
      for (int a = 0; a < n_accels_per_net; ++a) {
        SampleRecord rec = sample_accelerator(lay, uniform, 1.0, rng);
        bool legal = false;
        const double cost = priced_cost(net, rec.config, aspace, tables, obj, penalty_multiplier,
                                        nullptr, &legal);
        if (legal && cost < pt.cost) {
          pt.cost = cost;
          pt.accel = rec.config;
          pt.legal = true;
        }
      }
    } else {
      pt.cost = 0.0;  // nothing to execute
      pt.legal = true;
    }
    pt.accuracy = proxy_accuracy(nspace, pt.choices, task_spec, proxy_train_steps,
                                 mix_seed(seed, 0xACC0000u + static_cast<std::uint64_t>(i)));
    out.points[i] = std::move(pt);
  });

  for (const auto& p : out.points) {
    if (!p.legal) continue;
    bool dominated = false;
    for (const auto& q : out.points)
      if (q.legal && pareto_dominates(q, p)) {
        dominated = true;
        break;
      }
    if (!dominated) out.pareto.push_back(p);
  }
  return out;
}

}  // namespace nacs
