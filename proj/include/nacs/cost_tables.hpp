#pragma once

// Technology constants for the analytical cost model. Units are abstract:
// energy in units of one RF access, bandwidth in words/cycle, capacity in
// words. Defaults follow the usual RF < NoC < GB << DRAM access-cost ladder.

#include <stdexcept>

namespace nacs {

struct HardwareCostTables {
  // energy per word access (reads and writes priced equally), plus one MAC
  double e_rf = 1.0;
  double e_noc = 2.0;
  double e_gb = 6.0;
  double e_dram = 200.0;
  double e_mac = 1.0;

  // words per cycle at each boundary; rf is per PE, the rest are shared
  double bw_rf = 4.0;
  double bw_noc = 8.0;
  double bw_gb = 4.0;
  double bw_dram = 1.0;

  double gb_capacity = 4096.0;  // words
  double rf_capacity = 64.0;    // words per PE
  double clock_hz = 2.0e8;
  double dsp_per_pe = 1.0;
  double area_per_pe = 100.0;   // abstract area units
  double area_per_word = 0.1;

  void check() const {
    if (e_rf < 0 || e_noc < 0 || e_gb < 0 || e_dram < 0 || e_mac < 0)
      throw std::invalid_argument("cost tables: negative energy");
    if (bw_rf <= 0 || bw_noc <= 0 || bw_gb <= 0 || bw_dram <= 0)
      throw std::invalid_argument("cost tables: bandwidth must be positive");
    if (gb_capacity <= 0 || rf_capacity <= 0 || clock_hz <= 0)
      throw std::invalid_argument("cost tables: capacity and clock must be positive");
    if (dsp_per_pe <= 0 || area_per_pe < 0 || area_per_word < 0)
      throw std::invalid_argument("cost tables: bad resource constants");
  }
};

}  // namespace nacs
