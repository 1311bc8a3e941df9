#include <doctest.h>

#include <cmath>
#include <set>
#include <string>

#include "nacs/accel_search.hpp"

using namespace nacs;

namespace {

NetworkSpace two_site_space() {
  NetworkSpace space;
  space.blocks.push_back({4, 8, 8, 2, {{false, 3, 1, 1}, {false, 5, 1, 1}}});
  space.blocks.push_back({8, 8, 4, 1, {{false, 3, 2, 1}, {true, 3, 1, 1}}});
  return space;
}

AcceleratorSpace small_accel_space(const NetworkDesc& net) {
  AcceleratorSpace sp;
  sp.ref_dims = reference_dims(net);
  sp.noc_options = {NocKind::OutputParallel, NocKind::KernelOutputParallel};
  sp.pe_count_options = {4, 16};
  sp.mode_options = {ExecMode::MultiCycle};
  sp.search_loop_order = true;
  return sp;
}

}  // namespace

TEST_SUITE_BEGIN("das");

// Descent on the sampled-choice surrogate concentrates the logits on the
// cheap option of a synthetic two-option slot.
TEST_CASE("two options priced 1 and 100 resolve to the cheap one") {
  Rng rng = make_rng(21, 0);
  std::vector<double> logits{0.0, 0.0};
  std::vector<double> velocity{0.0, 0.0};
  std::vector<int> active{0, 1};
  double first_cost = -1.0;
  for (int step = 0; step < 500; ++step) {
    auto d = gumbel_softmax_sample(logits, active, 1.0, rng);
    double cost = d.choice == 0 ? 1.0 : 100.0;
    if (first_cost < 0.0) first_cost = cost;
    std::vector<double> grad{0.0, 0.0};
    add_soft_choice_grad(d, 1.0, cost / first_cost, grad);
    for (int i = 0; i < 2; ++i) {
      velocity[i] = 0.9 * velocity[i] + grad[i];
      logits[i] -= 0.05 * velocity[i];
    }
  }
  auto soft = masked_softmax(logits, active, 1.0);
  CHECK(soft[0] > 0.99);
}

TEST_CASE("identical costs leave the logits near where they started") {
  for (std::uint64_t seed : {31, 32, 33}) {
    Rng rng = make_rng(seed, 0);
    std::vector<double> logits{0.0, 0.0};
    std::vector<double> velocity{0.0, 0.0};
    std::vector<int> active{0, 1};
    for (int step = 0; step < 10000; ++step) {
      auto d = gumbel_softmax_sample(logits, active, 1.0, rng);
      std::vector<double> grad{0.0, 0.0};
      add_soft_choice_grad(d, 1.0, 1.0, grad);
      for (int i = 0; i < 2; ++i) {
        velocity[i] = 0.9 * velocity[i] + grad[i];
        logits[i] -= 0.01 * velocity[i];
      }
    }
    // symmetric costs: drift is zero-mean noise, far from a decision margin
    CHECK(std::abs(logits[0] - logits[1]) < 1.5);
  }
}

TEST_CASE("surrogate gradient matches finite differences at fixed noise") {
  NetworkSpace nspace = two_site_space();
  Rng pick = make_rng(40, 1);
  int checked = 0;
  for (int inst = 0; inst < 10; ++inst) {
    NetworkDesc net = assemble_network(nspace, {static_cast<int>(uniform_index(pick, 2)),
                                                static_cast<int>(uniform_index(pick, 2))});
    AcceleratorSpace sp = small_accel_space(net);
    SlotLayout lay = build_slot_layout(sp, net);

    AccelLogits logits = AccelLogits::zeros(lay);
    Rng init = make_rng(41 + inst, 2);
    for (auto& v : logits.cat)
      for (auto& x : v) x = normal(init) * 0.5;
    for (auto& m : logits.order)
      for (auto& row : m)
        for (auto& x : row) x = normal(init) * 0.5;

    const double temp = 1.3;
    Rng rng = make_rng(42 + inst, 3);
    SampleRecord rec = sample_accelerator(lay, logits, temp, rng);

    AccelLogits grad = AccelLogits::zeros(lay);
    surrogate_grad(lay, temp, rec, 1.0, grad);

    const double h = 1e-6;
    auto fd_at = [&](double* target) {
      double save = *target;
      *target = save + h;
      double up = surrogate_soft_sum(lay, logits, temp, rec);
      *target = save - h;
      double dn = surrogate_soft_sum(lay, logits, temp, rec);
      *target = save;
      return (up - dn) / (2.0 * h);
    };

    for (std::size_t s = 0; s < logits.cat.size(); ++s)
      for (std::size_t j = 0; j < logits.cat[s].size(); ++j) {
        double fd = fd_at(&logits.cat[s][j]);
        double an = grad.cat[s][j];
        double rel = std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-8});
        CHECK(rel < 1e-4);
        ++checked;
      }
    for (int r = 0; r < kDims && !logits.order.empty(); ++r)
      for (int c = 0; c < kDims; ++c) {
        double fd = fd_at(&logits.order[0][r][c]);
        double an = grad.order[0][r][c];
        double rel = std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-8});
        CHECK(rel < 1e-4);
        ++checked;
      }
  }
  CHECK(checked > 100);
}

TEST_CASE("search returns a legal config with a tight trace") {
  NetworkSpace nspace = two_site_space();
  NetworkDesc net = assemble_network(nspace, {0, 0});
  AcceleratorSpace sp = small_accel_space(net);
  HardwareCostTables tables;

  AccelSearchConfig cfg;
  cfg.steps = 120;
  cfg.seed = 5;
  SearchResult res = search_accelerator(net, sp, tables, Objective::Edp, cfg);

  REQUIRE(res.found_legal);
  CHECK(validate(res.best_config, net, sp, tables).legal());
  CHECK(res.best_any_cost <= res.best_cost);
  REQUIRE(res.trace.size() == 120);

  double last = std::numeric_limits<double>::infinity();
  for (const auto& row : res.trace) {
    CHECK(row.incumbent_cost <= last + 1e-12);
    last = row.incumbent_cost;
    if (row.legal) CHECK(row.sampled_cost >= res.best_cost);
  }
  CHECK(res.best_cost == last);
}

TEST_CASE("search is deterministic under a fixed seed") {
  NetworkSpace nspace = two_site_space();
  NetworkDesc net = assemble_network(nspace, {1, 0});
  AcceleratorSpace sp = small_accel_space(net);
  HardwareCostTables tables;

  AccelSearchConfig cfg;
  cfg.steps = 60;
  cfg.seed = 17;
  SearchResult a = search_accelerator(net, sp, tables, Objective::Edp, cfg);
  SearchResult b = search_accelerator(net, sp, tables, Objective::Edp, cfg);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].sampled_cost == b.trace[i].sampled_cost);
    CHECK(a.trace[i].incumbent_cost == b.trace[i].incumbent_cost);
  }
  CHECK(a.best_cost == b.best_cost);

  cfg.seed = 18;
  SearchResult c = search_accelerator(net, sp, tables, Objective::Edp, cfg);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.trace.size(); ++i)
    any_diff = any_diff || a.trace[i].sampled_cost != c.trace[i].sampled_cost;
  CHECK(any_diff);
}

TEST_CASE("zero learning rate leaves the logits untouched") {
  NetworkSpace nspace = two_site_space();
  NetworkDesc net = assemble_network(nspace, {0, 1});
  AcceleratorSpace sp = small_accel_space(net);
  HardwareCostTables tables;

  AccelSearchConfig cfg;
  cfg.steps = 25;
  cfg.learning_rate = 0.0;
  cfg.seed = 3;
  SearchResult res = search_accelerator(net, sp, tables, Objective::Edp, cfg);
  for (const auto& v : res.final_logits.cat)
    for (double x : v) CHECK(x == 0.0);
  for (const auto& m : res.final_logits.order)
    for (const auto& row : m)
      for (double x : row) CHECK(x == 0.0);
}

TEST_CASE("pipeline sampling never undershoots the chunk count") {
  NetworkSpace nspace = two_site_space();
  NetworkDesc net = assemble_network(nspace, {0, 0});
  AcceleratorSpace sp = small_accel_space(net);
  sp.mode_options = {ExecMode::Pipeline};
  sp.num_chunks = 3;
  sp.pe_count_options = {2, 4, 16};  // 2 is structurally impossible

  SlotLayout lay = build_slot_layout(sp, net);
  AccelLogits logits = AccelLogits::zeros(lay);
  Rng rng = make_rng(50, 0);
  for (int i = 0; i < 300; ++i) {
    SampleRecord rec = sample_accelerator(lay, logits, 2.0, rng);
    CHECK(rec.config.mode == ExecMode::Pipeline);
    CHECK(rec.config.max_pes >= 3);
    CHECK(rec.config.chunk_groups.size() == 3);
    CHECK(rec.config.chunk_of_layer.size() == net.layers.size());
  }

  sp.pe_count_options = {1, 2};
  CHECK_THROWS_AS(build_slot_layout(sp, net), std::invalid_argument);
}

TEST_CASE("warm starts may cover just the shared slot prefix") {
  NetworkSpace nspace = two_site_space();
  NetworkDesc short_net = assemble_network(nspace, {0, 1});  // 3 layers
  NetworkDesc long_net = assemble_network(nspace, {0, 0});   // 6 layers
  AcceleratorSpace sp = small_accel_space(long_net);
  sp.mode_options = {ExecMode::MultiCycle, ExecMode::Pipeline};
  sp.num_chunks = 2;
  HardwareCostTables tables;

  AccelSearchConfig cfg;
  cfg.steps = 40;
  cfg.seed = 9;
  SearchResult donor = search_accelerator(short_net, sp, tables, Objective::Edp, cfg);

  SlotLayout short_lay = build_slot_layout(sp, short_net);
  SlotLayout long_lay = build_slot_layout(sp, long_net);
  CHECK(short_lay.n_shared_cat == long_lay.n_shared_cat);
  CHECK(short_lay.cat.size() == static_cast<std::size_t>(short_lay.n_shared_cat) + 3);
  CHECK(long_lay.cat.size() == static_cast<std::size_t>(long_lay.n_shared_cat) + 6);

  AccelLogits warm = AccelLogits::zeros(short_lay);
  for (int s = 0; s < short_lay.n_shared_cat; ++s) warm.cat[s] = donor.final_logits.cat[s];
  warm.cat.resize(short_lay.n_shared_cat);  // shared prefix only
  warm.order = donor.final_logits.order;

  SearchResult warmed = search_accelerator(long_net, sp, tables, Objective::Edp, cfg, &warm);
  CHECK(warmed.trace.size() == 40);

  // an oversized warm start is a shape error
  AccelLogits too_big = AccelLogits::zeros(long_lay);
  too_big.cat.emplace_back(2, 0.0);
  CHECK_THROWS_AS(search_accelerator(long_net, sp, tables, Objective::Edp, cfg, &too_big),
                  std::invalid_argument);
}

TEST_CASE("enumeration visits the whole space once") {
  NetworkDesc net;
  net.layers.push_back({4, 4, 1, 1, 2, 4, 1, 1});
  AcceleratorSpace sp;
  sp.ref_dims = reference_dims(net);
  sp.noc_options = {NocKind::OutputParallel};
  sp.pe_count_options = {4};
  sp.mode_options = {ExecMode::MultiCycle};
  sp.search_loop_order = false;
  HardwareCostTables tables;

  auto all = enumerate_configs(net, sp, tables, Objective::Edp, 10.0, 200000);
  // per dim, chains (rf, pe, gb) with pe restricted to the noc dims:
  // X: rf*gb in {chains of 4}=(# ordered pairs)... counted empirically once
  CHECK(all.size() > 100);

  // every enumerated config satisfies the product invariant
  for (const auto& e : all) {
    LayerTrips t = resolve_layer(net.layers[0], e.config.global);
    auto dims = loop_dims(net.layers[0]);
    for (int d = 0; d < kDims; ++d)
      CHECK(t.rf[d] * t.pe[d] * t.gb[d] * t.dram[d] == dims[d]);
  }

  // pairwise distinct tile/pe signatures
  std::set<std::string> sigs;
  for (const auto& e : all) {
    std::string sig;
    for (int lvl = 0; lvl < kTileLevels; ++lvl)
      for (int d = 0; d < kDims; ++d)
        sig += std::to_string(e.config.global.tile[lvl][d]) + ",";
    sig += std::to_string(e.config.max_pes);
    sigs.insert(sig);
  }
  CHECK(sigs.size() == all.size());

  CHECK_THROWS_AS(enumerate_configs(net, sp, tables, Objective::Edp, 10.0, 10),
                  std::length_error);
}

TEST_CASE("the dsp constraint confines search to small arrays") {
  NetworkSpace nspace = two_site_space();
  NetworkDesc net = assemble_network(nspace, {0, 0});
  AcceleratorSpace sp = small_accel_space(net);
  sp.dsp_limit = 4.0;  // pe option 16 always violates
  HardwareCostTables tables;

  AccelSearchConfig cfg;
  cfg.steps = 150;
  cfg.seed = 23;
  SearchResult res = search_accelerator(net, sp, tables, Objective::Edp, cfg);
  REQUIRE(res.found_legal);
  CHECK(res.best_config.max_pes <= 4);
  CHECK(dsp_used(res.best_config, tables) <= 4.0);
}

TEST_SUITE_END();
