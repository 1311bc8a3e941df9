#include <doctest.h>

#include <cmath>
#include <vector>

#include "nacs/cosearch.hpp"

using namespace nacs;

namespace {

// two sites: the first always computes, the second may be skipped
NetworkSpace two_sites() {
  NetworkSpace space;
  space.blocks.push_back({4, 4, 4, 1, {{false, 3, 1, 1}, {false, 5, 1, 1}}});
  space.blocks.push_back({4, 4, 4, 1, {{false, 3, 1, 1}, {true, 3, 1, 1}}});
  return space;
}

// one site, one candidate, every dimension 1: a single reachable design
NetworkSpace point_space() {
  NetworkSpace space;
  space.blocks.push_back({1, 1, 1, 1, {{false, 1, 1, 1}}});
  return space;
}

AcceleratorSpace point_accel(const NetworkSpace& nspace) {
  AcceleratorSpace sp;
  sp.ref_dims = reference_dims(nspace);
  sp.noc_options = {NocKind::OutputParallel};
  sp.pe_count_options = {1};
  sp.mode_options = {ExecMode::MultiCycle};
  sp.search_loop_order = false;
  return sp;
}

SyntheticTaskSpec tiny_task(std::uint64_t seed) {
  SyntheticTaskSpec spec;
  spec.input_dim = 4;
  spec.classes = 2;
  spec.train_size = 32;
  spec.val_size = 32;
  spec.seed = seed;
  return spec;
}

}  // namespace

TEST_SUITE_BEGIN("cosearch");

TEST_CASE("the relaxed table loss averages costs by softmax weight") {
  NetworkSpace space;
  space.blocks.push_back({4, 4, 2, 1, {{false, 3, 1, 1}, {false, 5, 1, 1}}});
  AlphaParams alpha = AlphaParams::zeros(space);

  OpCostTable table{{2.0, 4.0}};
  CHECK(table_hw_loss(alpha, table) == doctest::Approx(3.0).epsilon(1e-14));

  alpha.logits[0] = {std::log(3.0), 0.0};  // weights 3/4 and 1/4
  CHECK(table_hw_loss(alpha, table) == doctest::Approx(2.5).epsilon(1e-14));

  OpCostTable wrong_rows{{2.0, 4.0}, {1.0, 1.0}};
  CHECK_THROWS_AS(table_hw_loss(alpha, wrong_rows), std::invalid_argument);
  OpCostTable wrong_cols{{2.0, 4.0, 6.0}};
  CHECK_THROWS_AS(table_hw_loss(alpha, wrong_cols), std::invalid_argument);
}

TEST_CASE("the op cost table is the mean over donor accelerators") {
  NetworkSpace space = two_sites();
  HardwareCostTables tables;

  auto donor_with_gb_x = [&](std::int64_t x_tile) {
    DonorAccel d;
    d.choices = {0, 0};
    d.config.noc = NocKind::OutputParallel;
    d.config.max_pes = 4;
    d.config.mode = ExecMode::MultiCycle;
    d.config.global.tile[TileGb][DimX] = x_tile;
    d.config.global.tile[TilePe][DimK] = 2;
    return d;
  };
  std::vector<DonorAccel> donors{donor_with_gb_x(1), donor_with_gb_x(2), donor_with_gb_x(4)};

  OpCostTable merged = expected_op_cost(space, donors, tables, Objective::Edp);
  std::vector<OpCostTable> singles;
  for (const auto& d : donors)
    singles.push_back(expected_op_cost(space, {d}, tables, Objective::Edp));

  REQUIRE(merged.size() == 2);
  for (std::size_t s = 0; s < merged.size(); ++s)
    for (std::size_t k = 0; k < merged[s].size(); ++k) {
      const double mean = (singles[0][s][k] + singles[1][s][k] + singles[2][s][k]) / 3.0;
      CHECK(merged[s][k] == doctest::Approx(mean).epsilon(1e-14));
    }

  // the donors differ, so at least one entry must differ across singles
  CHECK(singles[0][0][0] != singles[2][0][0]);

  // skips cost nothing; identical donors collapse to the single-donor table
  CHECK(merged[1][1] == 0.0);
  OpCostTable twice = expected_op_cost(space, {donors[0], donors[0]}, tables, Objective::Edp);
  for (std::size_t s = 0; s < twice.size(); ++s)
    for (std::size_t k = 0; k < twice[s].size(); ++k)
      CHECK(twice[s][k] == doctest::Approx(singles[0][s][k]).epsilon(1e-14));

  CHECK_THROWS_AS(expected_op_cost(space, {}, tables, Objective::Edp), std::invalid_argument);

  // non-skip entries are positive costs
  CHECK(merged[0][0] > 0.0);
  CHECK(merged[0][1] > 0.0);
  CHECK(merged[1][0] > 0.0);
}

TEST_CASE("a pipelined donor lends the chunk that ran the site") {
  NetworkSpace space = two_sites();

  DonorAccel donor;
  donor.choices = {0, 1};  // site 1 skipped
  donor.config.noc = NocKind::OutputParallel;
  donor.config.max_pes = 4;
  donor.config.mode = ExecMode::Pipeline;
  donor.config.num_chunks = 2;
  donor.config.chunk_groups.resize(2);
  donor.config.chunk_groups[1].tile[TileGb][DimX] = 2;  // make the chunks distinguishable
  donor.config.chunk_of_layer = {1, 1, 1};              // site 0 expands to three layers

  CHECK(&detail::donor_group(space, donor, 0) == &donor.config.chunk_groups[1]);
  // a skipped site falls back to the first chunk
  CHECK(&detail::donor_group(space, donor, 1) == &donor.config.chunk_groups[0]);

  donor.config.mode = ExecMode::MultiCycle;
  CHECK(&detail::donor_group(space, donor, 0) == &donor.config.global);
}

TEST_CASE("a one-point design space is found and fully reported") {
  NetworkSpace nspace = point_space();
  AcceleratorSpace aspace = point_accel(nspace);
  HardwareCostTables tables;

  CoSearchConfig cfg;
  cfg.max_epoch = 1;
  cfg.m_samples = 1;
  cfg.steps_per_epoch = 2;
  cfg.das.steps = 5;
  cfg.seed = 33;
  SyntheticTaskSpec task = tiny_task(5);

  CoSearchResult res = run_cosearch(cfg, nspace, aspace, tables, task);
  CHECK(res.choices == std::vector<int>{0});
  CHECK(res.network.layers.size() == 3);
  CHECK(res.accel.max_pes == 1);
  CHECK(res.accel.mode == ExecMode::MultiCycle);
  for (int lvl = 0; lvl < kTileLevels; ++lvl)
    for (int d = 0; d < kDims; ++d) CHECK(res.accel.global.tile[lvl][d] == 1);
  CHECK(res.final_cost > 0.0);
  CHECK(std::isfinite(res.final_cost));
  CHECK(res.trace.size() == 1);
  CHECK(res.lambda_used > 0.0);  // auto-balanced

  // the reported cost is the priced cost of the reported design
  bool legal = false;
  const double repriced = priced_cost(res.network, res.accel, aspace, tables, Objective::Edp,
                                      cfg.das.penalty_multiplier, nullptr, &legal);
  CHECK(legal);
  CHECK(res.final_cost == repriced);
}

TEST_CASE("the sequential baseline agrees on a one-point space") {
  NetworkSpace nspace = point_space();
  AcceleratorSpace aspace = point_accel(nspace);
  HardwareCostTables tables;

  CoSearchConfig cfg;
  cfg.max_epoch = 1;
  cfg.m_samples = 1;
  cfg.steps_per_epoch = 2;
  cfg.das.steps = 5;
  cfg.seed = 33;
  SyntheticTaskSpec task = tiny_task(5);

  CoSearchResult joint = run_cosearch(cfg, nspace, aspace, tables, task);
  CoSearchResult seq = run_sequential_baseline(cfg, nspace, aspace, tables, task);
  CHECK(seq.choices == joint.choices);
  CHECK(seq.final_cost == joint.final_cost);
  CHECK(seq.accel.max_pes == joint.accel.max_pes);
  CHECK(seq.trace.size() == 1);
}

TEST_CASE("joint search is bit-deterministic and thread-invariant") {
  NetworkSpace nspace = two_sites();
  AcceleratorSpace aspace;
  aspace.ref_dims = reference_dims(nspace);
  aspace.noc_options = {NocKind::OutputParallel, NocKind::KernelOutputParallel};
  aspace.pe_count_options = {4, 16};
  aspace.mode_options = {ExecMode::MultiCycle};
  HardwareCostTables tables;

  CoSearchConfig cfg;
  cfg.max_epoch = 2;
  cfg.m_samples = 3;
  cfg.steps_per_epoch = 5;
  cfg.das.steps = 10;
  cfg.seed = 71;
  SyntheticTaskSpec task = tiny_task(9);

  CoSearchResult a = run_cosearch(cfg, nspace, aspace, tables, task);
  CoSearchResult b = run_cosearch(cfg, nspace, aspace, tables, task);
  cfg.threads = 2;
  CoSearchResult c = run_cosearch(cfg, nspace, aspace, tables, task);

  for (const CoSearchResult* other : {&b, &c}) {
    CHECK(a.choices == other->choices);
    CHECK(a.final_cost == other->final_cost);
    CHECK(a.lambda_used == other->lambda_used);
    REQUIRE(a.trace.size() == other->trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
      CHECK(a.trace[i].val_loss == other->trace[i].val_loss);
      CHECK(a.trace[i].hw_loss == other->trace[i].hw_loss);
      CHECK(a.trace[i].mean_das_cost == other->trace[i].mean_das_cost);
      CHECK(a.trace[i].incumbent == other->trace[i].incumbent);
    }
  }
}

TEST_CASE("an infeasible arithmetic budget raises the dedicated error") {
  NetworkSpace nspace = point_space();
  AcceleratorSpace aspace = point_accel(nspace);
  aspace.dsp_limit = 1e-12;  // even one lane overshoots
  HardwareCostTables tables;

  CoSearchConfig cfg;
  cfg.max_epoch = 1;
  cfg.m_samples = 1;
  cfg.steps_per_epoch = 1;
  cfg.das.steps = 4;
  SyntheticTaskSpec task = tiny_task(5);

  CHECK_THROWS_AS(run_cosearch(cfg, nspace, aspace, tables, task), NoLegalAcceleratorError);
  CHECK_THROWS_AS(run_sequential_baseline(cfg, nspace, aspace, tables, task),
                  NoLegalAcceleratorError);
}

TEST_CASE("a space of pure skips cannot express a network") {
  NetworkSpace space;
  space.blocks.push_back({4, 4, 4, 1, {{true, 3, 1, 1}}});
  AlphaParams alpha = AlphaParams::zeros(space);
  Rng rng = make_rng(2, 0);
  CHECK_THROWS_AS(detail::sample_nonempty_choices(alpha, space, 1.0, rng), std::runtime_error);
}

TEST_CASE("pareto domination is no-worse on both axes and better on one") {
  auto point = [](double acc, double cost) {
    RandomPoint p;
    p.accuracy = acc;
    p.cost = cost;
    p.legal = true;
    return p;
  };
  CHECK(pareto_dominates(point(0.9, 10.0), point(0.8, 10.0)));
  CHECK(pareto_dominates(point(0.9, 9.0), point(0.9, 10.0)));
  CHECK(pareto_dominates(point(0.9, 9.0), point(0.8, 10.0)));
  CHECK_FALSE(pareto_dominates(point(0.9, 10.0), point(0.9, 10.0)));
  CHECK_FALSE(pareto_dominates(point(0.9, 10.0), point(0.8, 9.0)));
  CHECK_FALSE(pareto_dominates(point(0.8, 9.0), point(0.9, 10.0)));
}

TEST_CASE("the random baseline reports exactly the non-dominated points") {
  NetworkSpace nspace = two_sites();
  AcceleratorSpace aspace;
  aspace.ref_dims = reference_dims(nspace);
  aspace.noc_options = {NocKind::OutputParallel};
  aspace.pe_count_options = {4, 16};
  aspace.mode_options = {ExecMode::MultiCycle};
  HardwareCostTables tables;

  SyntheticTaskSpec task = tiny_task(11);
  RandomBaselineResult res = run_random_baseline(nspace, aspace, tables, Objective::Edp, task,
                                                 8, 6, 30, 10.0, 99, 1);
  REQUIRE(res.points.size() == 8);
  CHECK_FALSE(res.pareto.empty());

  // recompute the front from the points and compare sizes and members
  std::vector<const RandomPoint*> front;
  for (const auto& p : res.points) {
    if (!p.legal) continue;
    bool dominated = false;
    for (const auto& q : res.points)
      if (q.legal && pareto_dominates(q, p)) dominated = true;
    if (!dominated) front.push_back(&p);
  }
  REQUIRE(front.size() == res.pareto.size());
  for (std::size_t i = 0; i < front.size(); ++i) {
    CHECK(front[i]->cost == res.pareto[i].cost);
    CHECK(front[i]->accuracy == res.pareto[i].accuracy);
    CHECK(front[i]->choices == res.pareto[i].choices);
  }

  // no front member is dominated by any legal point
  for (const auto& p : res.pareto)
    for (const auto& q : res.points)
      if (q.legal) CHECK_FALSE(pareto_dominates(q, p));

  // thread-count cannot change the outcome
  RandomBaselineResult par = run_random_baseline(nspace, aspace, tables, Objective::Edp, task,
                                                 8, 6, 30, 10.0, 99, 3);
  REQUIRE(par.points.size() == res.points.size());
  for (std::size_t i = 0; i < res.points.size(); ++i) {
    CHECK(par.points[i].cost == res.points[i].cost);
    CHECK(par.points[i].accuracy == res.points[i].accuracy);
    CHECK(par.points[i].choices == res.points[i].choices);
  }

  CHECK_THROWS_AS(run_random_baseline(nspace, aspace, tables, Objective::Edp, task, 0, 6, 30,
                                      10.0, 99, 1),
                  std::invalid_argument);
}

TEST_CASE("proxy accuracy is a pure function of its arguments") {
  NetworkSpace nspace = two_sites();
  SyntheticTaskSpec task = tiny_task(13);
  const double a = proxy_accuracy(nspace, {0, 1}, task, 40, 7);
  const double b = proxy_accuracy(nspace, {0, 1}, task, 40, 7);
  CHECK(a == b);
  CHECK(a >= 0.0);
  CHECK(a <= 1.0);
}

TEST_SUITE_END();
