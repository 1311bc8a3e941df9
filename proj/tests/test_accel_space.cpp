#include <doctest.h>

#include <numeric>

#include "nacs/accel_space.hpp"
#include "nacs/cost_tables.hpp"
#include "nacs/prng.hpp"

using namespace nacs;

TEST_SUITE_BEGIN("accel_space");

TEST_CASE("divisor lists are exact and ascending") {
  CHECK(divisors(1) == std::vector<std::int64_t>{1});
  CHECK(divisors(7) == std::vector<std::int64_t>{1, 7});
  CHECK(divisors(12) == std::vector<std::int64_t>{1, 2, 3, 4, 6, 12});
}

namespace {

// Independent count of ordered factorizations, by direct recursion.
std::int64_t ordered_factorizations(std::int64_t dim, int levels) {
  if (levels == 1) return 1;
  std::int64_t n = 0;
  for (std::int64_t d : divisors(dim)) n += ordered_factorizations(dim / d, levels - 1);
  return n;
}

}  // namespace

TEST_CASE("tiling enumeration") {
  CHECK(enumerate_tilings(1, 3) == std::vector<std::vector<std::int64_t>>{{1, 1, 1}});
  CHECK(enumerate_tilings(7, 2).size() == 2);

  auto t4 = enumerate_tilings(4, 3);
  CHECK(t4.size() == 6);
  for (const auto& t : t4) {
    std::int64_t p = 1;
    for (auto v : t) p *= v;
    CHECK(p == 4);
  }

  for (std::int64_t dim = 1; dim <= 24; ++dim)
    for (int levels = 1; levels <= 4; ++levels)
      CHECK(static_cast<std::int64_t>(enumerate_tilings(dim, levels).size()) ==
            ordered_factorizations(dim, levels));
}

TEST_CASE("layer resolution clamps menu tiles down the divisor chain") {
  MappingGroup g;
  g.tile[TileRf] = {1, 1, 1, 1, 4, 1};
  g.tile[TilePe] = {1, 1, 1, 1, 1, 4};
  g.tile[TileGb] = {4, 2, 1, 1, 2, 2};

  // layer smaller than the menu reference in C and K
  ConvLayerDesc l{8, 8, 3, 3, 6, 4, 1, 1};
  LayerTrips t = resolve_layer(l, g);
  auto dims = loop_dims(l);
  for (int d = 0; d < kDims; ++d) {
    CHECK(t.rf[d] * t.pe[d] * t.gb[d] * t.dram[d] == dims[d]);
    CHECK(t.dram[d] >= 1);
  }
  CHECK(t.rf[DimC] == 2);   // gcd(4, 6)
  CHECK(t.pe[DimK] == 4);
  CHECK(t.gb[DimX] == 4);
  CHECK(t.dram[DimX] == 2);
}

TEST_CASE("product invariant holds for random menus and layers") {
  Rng rng = make_rng(11, 5);
  for (int it = 0; it < 300; ++it) {
    ConvLayerDesc l;
    l.x = 1 + static_cast<std::int64_t>(uniform_index(rng, 12));
    l.y = 1 + static_cast<std::int64_t>(uniform_index(rng, 12));
    l.r = 1 + 2 * static_cast<std::int64_t>(uniform_index(rng, 3));
    l.s = l.r;
    l.c = 1 + static_cast<std::int64_t>(uniform_index(rng, 16));
    l.k = 1 + static_cast<std::int64_t>(uniform_index(rng, 16));
    MappingGroup g;
    for (int lvl = 0; lvl < kTileLevels; ++lvl)
      for (int d = 0; d < kDims; ++d)
        g.tile[lvl][d] = 1 + static_cast<std::int64_t>(uniform_index(rng, 8));
    LayerTrips t = resolve_layer(l, g);
    auto dims = loop_dims(l);
    for (int d = 0; d < kDims; ++d)
      CHECK(t.rf[d] * t.pe[d] * t.gb[d] * t.dram[d] == dims[d]);
  }
}

TEST_CASE("pe split across chunks is proportional with a floor of one") {
  auto s = split_pes(16, {100, 100});
  CHECK(s == std::vector<std::int64_t>{8, 8});

  s = split_pes(16, {300, 100});
  CHECK(std::accumulate(s.begin(), s.end(), std::int64_t{0}) == 16);
  CHECK(s[0] == 12);
  CHECK(s[1] == 4);

  // tiny shares still get one PE
  s = split_pes(4, {1000000, 1, 1});
  CHECK(std::accumulate(s.begin(), s.end(), std::int64_t{0}) == 4);
  CHECK(s[1] >= 1);
  CHECK(s[2] >= 1);

  CHECK_THROWS_AS(split_pes(2, {1, 1, 1}), std::invalid_argument);
}

namespace {

AcceleratorConfig trivial_config(std::int64_t max_pes = 4) {
  AcceleratorConfig cfg;
  cfg.noc = NocKind::OutputParallel;
  cfg.max_pes = max_pes;
  cfg.mode = ExecMode::MultiCycle;
  return cfg;
}

NetworkDesc one_layer_net(const ConvLayerDesc& l) {
  NetworkDesc net;
  net.layers.push_back(l);
  return net;
}

}  // namespace

TEST_CASE("validate accepts the degenerate config") {
  HardwareCostTables tables;
  AcceleratorSpace space;
  space.ref_dims = {8, 8, 3, 3, 8, 8};
  NetworkDesc net = one_layer_net({8, 8, 3, 3, 8, 8, 1, 1});
  CHECK(validate(trivial_config(), net, space, tables).legal());
}

TEST_CASE("validate flags NoC dimension misuse") {
  HardwareCostTables tables;
  AcceleratorSpace space;
  space.ref_dims = {8, 8, 3, 3, 8, 8};
  NetworkDesc net = one_layer_net({8, 8, 3, 3, 8, 8, 1, 1});

  AcceleratorConfig cfg = trivial_config(16);
  cfg.global.tile[TilePe][DimC] = 2;  // C not parallelizable under OutputParallel
  auto rep = validate(cfg, net, space, tables);
  REQUIRE(!rep.legal());
  CHECK(rep.violations[0].code == "noc_dim");

  cfg.noc = NocKind::KernelParallel;  // C is allowed there
  CHECK(validate(cfg, net, space, tables).legal());
}

TEST_CASE("validate flags PE budget overflow with the overflow ratio") {
  HardwareCostTables tables;
  AcceleratorSpace space;
  space.ref_dims = {8, 8, 3, 3, 8, 8};
  NetworkDesc net = one_layer_net({8, 8, 3, 3, 8, 8, 1, 1});

  AcceleratorConfig cfg = trivial_config(8);
  cfg.global.tile[TilePe][DimK] = 4;
  cfg.global.tile[TilePe][DimY] = 4;
  auto rep = validate(cfg, net, space, tables);
  REQUIRE(rep.violations.size() == 1);
  CHECK(rep.violations[0].code == "pe_budget");
  CHECK(rep.violations[0].overflow == doctest::Approx(1.0));
}

TEST_CASE("validate flags misaligned K tiling on grouped layers") {
  HardwareCostTables tables;
  AcceleratorSpace space;
  space.ref_dims = {4, 4, 1, 1, 8, 12};
  // groups 3, group size 4: a K extent of 3 neither divides nor is divided by 4
  NetworkDesc net = one_layer_net({4, 4, 1, 1, 6, 12, 1, 3});

  AcceleratorConfig cfg = trivial_config(16);
  cfg.global.tile[TileGb][DimK] = 2;
  CHECK(validate(cfg, net, space, tables).legal());

  cfg.global.tile[TileGb][DimK] = 3;
  auto rep = validate(cfg, net, space, tables);
  REQUIRE(!rep.legal());
  CHECK(rep.violations[0].code == "group_alignment");
}

TEST_CASE("validate flags register file and buffer capacity overflows") {
  HardwareCostTables tables;
  tables.rf_capacity = 16;
  tables.gb_capacity = 256;
  AcceleratorSpace space;
  space.ref_dims = {8, 8, 1, 1, 16, 16};
  NetworkDesc net = one_layer_net({8, 8, 1, 1, 16, 16, 1, 1});

  AcceleratorConfig cfg = trivial_config(4);
  cfg.global.tile[TileRf][DimC] = 16;
  auto rep = validate(cfg, net, space, tables);
  bool saw_rf = false;
  for (const auto& v : rep.violations) saw_rf = saw_rf || v.code == "rf_capacity";
  CHECK(saw_rf);

  cfg = trivial_config(4);
  cfg.global.tile[TileGb][DimX] = 8;
  cfg.global.tile[TileGb][DimY] = 8;
  cfg.global.tile[TileGb][DimC] = 16;
  cfg.global.tile[TileGb][DimK] = 16;
  rep = validate(cfg, net, space, tables);
  bool saw_gb = false;
  for (const auto& v : rep.violations) saw_gb = saw_gb || v.code == "gb_capacity";
  CHECK(saw_gb);
}

TEST_CASE("validate enforces optional DSP and area budgets") {
  HardwareCostTables tables;
  AcceleratorSpace space;
  space.ref_dims = {4, 4, 1, 1, 4, 4};
  NetworkDesc net = one_layer_net({4, 4, 1, 1, 4, 4, 1, 1});

  space.dsp_limit = 2.0;
  auto rep = validate(trivial_config(4), net, space, tables);
  REQUIRE(!rep.legal());
  CHECK(rep.violations[0].code == "dsp_limit");

  space.dsp_limit.reset();
  space.area_limit = 1.0;
  rep = validate(trivial_config(4), net, space, tables);
  REQUIRE(!rep.legal());
  CHECK(rep.violations[0].code == "area_limit");
}

TEST_CASE("space sizes") {
  AcceleratorSpace binary;
  binary.ref_dims = {1, 1, 1, 1, 1, 1};
  binary.noc_options = {NocKind::OutputParallel};
  binary.pe_count_options = {1, 2};
  binary.mode_options = {ExecMode::MultiCycle};
  binary.search_loop_order = false;
  auto exact = space_size_exact(binary);
  REQUIRE(exact.has_value());
  CHECK(*exact == 2);
  CHECK(space_size_log10(binary) == doctest::Approx(std::log10(2.0)));

  AcceleratorSpace orders = binary;
  orders.pe_count_options = {1};
  orders.search_loop_order = true;
  exact = space_size_exact(orders);
  REQUIRE(exact.has_value());
  CHECK(*exact == 373248000ULL);  // 720^3
  CHECK(space_size_log10(orders) == doctest::Approx(3.0 * std::log10(720.0)));
}

TEST_SUITE_END();
