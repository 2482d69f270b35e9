#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ttw {

/// Platform and radio constants of a TTnet deployment. Durations in
/// microseconds, sizes in bytes.
///
/// The defaults are a fitted surrogate: they reproduce the published model
/// round lengths exactly and the published energy savings within 0.25
/// percentage points (see tests/unit/test_ttnet_model.cpp for the fit).
struct PlatformConstants {
  double t_wakeup = 600.0;
  double t_start = 3320.0;
  double t_gap = 1000.0;
  double t_d = 0.0;
  double l_cal = 0.0;
  double l_header = 0.0;
  double r_bit = 250000.0;  // bit/s
  double t_preprocess = 2020.0;
  double l_beacon = 2.0;
  double slot_quantum = 500.0;

  void validate() const;
};

struct NetworkConfig {
  int payload_L = 16;
  int b_max = 5;
  int n_tx = 2;
  int hops = 4;
  int l_max = 64;

  void validate() const;
};

struct SlotTiming {
  double t_hop = 0;
  double t_flood = 0;
  double t_on = 0;
  double t_off = 0;
  double t_slot = 0;
};

struct RoundTiming {
  double t_round = 0;
  double t_on_total = 0;
  double t_no_rounds = 0;
  double savings = 0;  // fraction in [0, 1); 0 when B <= 1
};

/// Smallest multiple of `quantum` not below `value`.
double quantize_up(double value, double quantum);

SlotTiming slot_timing(const PlatformConstants& c, const NetworkConfig& net, double payload);

RoundTiming round_length(const PlatformConstants& c, const NetworkConfig& net, double payload,
                         int slots);

double energy_savings(const PlatformConstants& c, const NetworkConfig& net, double payload,
                      int slots);

/// Round length rounded up to whole ticks.
std::int64_t round_length_ticks(const PlatformConstants& c, const NetworkConfig& net,
                                double payload, int slots, std::int64_t tick_us);

struct ModelRow {
  int payload = 0;
  int slots = 0;
  int hops = 0;
  int n_tx = 0;
  double t_round_us = 0;
  double t_on_us = 0;
  double savings_pct = 0;
};

/// One row per (payload, slots, hops) combination, payload-major.
std::vector<ModelRow> model_table(const PlatformConstants& c, const NetworkConfig& net,
                                  const std::vector<int>& payloads,
                                  const std::vector<int>& slot_counts,
                                  const std::vector<int>& hop_range);

std::string model_table_csv(const std::vector<ModelRow>& rows);

}  // namespace ttw
