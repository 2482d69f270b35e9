#include "ttw/ttnet_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ttw/error.hpp"

namespace ttw {

void PlatformConstants::validate() const {
  const double all[] = {t_wakeup, t_start,      t_gap,    t_d,         l_cal,
                        l_header, t_preprocess, l_beacon, slot_quantum, r_bit};
  for (double v : all) {
    if (!(v >= 0.0) || !std::isfinite(v)) fail_input("platform constants must be finite and >= 0");
  }
  if (r_bit <= 0.0) fail_input("platform r_bit must be > 0");
  if (slot_quantum <= 0.0) fail_input("platform slot_quantum must be > 0");
}

void NetworkConfig::validate() const {
  if (payload_L <= 0 || b_max <= 0 || n_tx <= 0 || hops <= 0 || l_max <= 0)
    fail_input("network parameters L, B_max, N, H, L_max must be > 0");
  if (payload_L > l_max) fail_input("network payload L exceeds L_max");
}

double quantize_up(double value, double quantum) {
  // Guard against values that are a multiple of the quantum up to rounding.
  const double ratio = value / quantum;
  const double nearest = std::round(ratio);
  if (std::abs(ratio - nearest) < 1e-9) return nearest * quantum;
  return std::ceil(ratio) * quantum;
}

namespace {

double flood_multiplier(const NetworkConfig& net) {
  return static_cast<double>(net.hops + 2 * net.n_tx - 1);
}

double transmit_time(const PlatformConstants& c, double bytes) { return 8.0 * bytes / c.r_bit * 1e6; }

}  // namespace

SlotTiming slot_timing(const PlatformConstants& c, const NetworkConfig& net, double payload) {
  if (payload < 0) fail_input("payload must be >= 0");
  if (payload > net.l_max) fail_input("payload too large: exceeds L_max");
  SlotTiming s;
  s.t_hop = c.t_d + transmit_time(c, c.l_cal + c.l_header + payload);
  s.t_flood = flood_multiplier(net) * s.t_hop;
  s.t_on = c.t_start + s.t_flood;
  s.t_off = c.t_wakeup + c.t_gap;
  s.t_slot = quantize_up(s.t_off + s.t_on, c.slot_quantum);
  return s;
}

RoundTiming round_length(const PlatformConstants& c, const NetworkConfig& net, double payload,
                         int slots) {
  if (slots < 0) fail_input("slot count must be >= 0");
  if (slots > net.b_max) fail_input("slot count exceeds B_max");
  // The beacon carries l_beacon bytes regardless of L_max.
  NetworkConfig beacon_net = net;
  beacon_net.l_max = std::max<int>(net.l_max, static_cast<int>(std::ceil(c.l_beacon)));
  const SlotTiming beacon = slot_timing(c, beacon_net, c.l_beacon);
  const SlotTiming regular = slot_timing(c, net, payload);

  RoundTiming r;
  r.t_round = beacon.t_slot + slots * regular.t_slot + c.t_preprocess;
  r.t_on_total = beacon.t_on + slots * regular.t_on;
  r.t_no_rounds = slots * (beacon.t_slot + regular.t_slot);
  if (slots >= 1) {
    const double on_without = slots * (beacon.t_on + regular.t_on);
    r.savings = (on_without - r.t_on_total) / on_without;
  }
  return r;
}

double energy_savings(const PlatformConstants& c, const NetworkConfig& net, double payload,
                      int slots) {
  if (slots < 1) fail_input("energy savings undefined for B = 0");
  return round_length(c, net, payload, slots).savings;
}

std::int64_t round_length_ticks(const PlatformConstants& c, const NetworkConfig& net,
                                double payload, int slots, std::int64_t tick_us) {
  if (tick_us <= 0) fail_input("tick must be > 0");
  const double us = round_length(c, net, payload, slots).t_round;
  return static_cast<std::int64_t>(quantize_up(us, static_cast<double>(tick_us)) /
                                   static_cast<double>(tick_us));
}

std::vector<ModelRow> model_table(const PlatformConstants& c, const NetworkConfig& net,
                                  const std::vector<int>& payloads,
                                  const std::vector<int>& slot_counts,
                                  const std::vector<int>& hop_range) {
  std::vector<ModelRow> rows;
  for (int payload : payloads) {
    for (int slots : slot_counts) {
      for (int hops : hop_range) {
        NetworkConfig n = net;
        n.hops = hops;
        n.b_max = std::max(n.b_max, slots);
        n.l_max = std::max(n.l_max, payload);
        const RoundTiming rt = round_length(c, n, payload, slots);
        rows.push_back({payload, slots, hops, n.n_tx, rt.t_round, rt.t_on_total,
                        rt.savings * 100.0});
      }
    }
  }
  return rows;
}

std::string model_table_csv(const std::vector<ModelRow>& rows) {
  std::ostringstream out;
  out << "L_bytes,B_slots,H_hops,N_tx,T_round_us,T_on_us,savings_pct\n";
  out.setf(std::ios::fixed);
  for (const auto& r : rows) {
    out.precision(0);
    out << r.payload << ',' << r.slots << ',' << r.hops << ',' << r.n_tx << ','
        << std::llround(r.t_round_us) << ',' << std::llround(r.t_on_us) << ',';
    out.precision(1);
    out << r.savings_pct << '\n';
  }
  return out.str();
}

}  // namespace ttw
