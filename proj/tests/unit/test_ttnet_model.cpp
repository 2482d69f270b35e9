#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ttw/error.hpp"
#include "ttw/ttnet_model.hpp"

using namespace ttw;

namespace {

NetworkConfig wide_net() {
  NetworkConfig n;
  n.b_max = 30;
  return n;
}

const int kPayloads[] = {8, 16, 64};
const int kSlots[] = {5, 10, 30};
const double kRoundMs[] = {42.52, 77.52, 217.52, 52.52, 97.52, 277.52, 105.02, 202.52, 592.52};
const double kSavingsPct[] = {34, 38, 41, 28, 32, 34, 14, 16, 17};

}  // namespace

TEST_CASE("slot timing with fitted defaults") {
  PlatformConstants c;
  NetworkConfig net;
  const SlotTiming s = slot_timing(c, net, 16);
  CHECK(s.t_hop == doctest::Approx(512.0));
  CHECK(s.t_flood == doctest::Approx(7 * 512.0));
  CHECK(s.t_on == doctest::Approx(3320.0 + 7 * 512.0));
  CHECK(s.t_off == doctest::Approx(1600.0));
  CHECK(s.t_slot == doctest::Approx(9000.0));

  PlatformConstants zero = c;
  const SlotTiming s0 = slot_timing(zero, net, 0);
  CHECK(s0.t_hop == 0.0);
  CHECK(s0.t_flood == 0.0);

  CHECK_THROWS_AS(slot_timing(c, net, 65), Error);
}

TEST_CASE("round lengths reproduce the published model column") {
  PlatformConstants c;
  const NetworkConfig net = wide_net();
  int k = 0;
  for (int L : kPayloads) {
    for (int B : kSlots) {
      const RoundTiming r = round_length(c, net, L, B);
      CHECK(std::abs(r.t_round / 1000.0 - kRoundMs[k]) <= 0.005);
      CHECK(std::abs(energy_savings(c, net, L, B) * 100.0 - kSavingsPct[k]) <= 0.5);
      ++k;
    }
  }
  CHECK(round_length(c, NetworkConfig{}, 16, 0).t_round == doctest::Approx(7520.0));
  CHECK(energy_savings(c, NetworkConfig{}, 16, 1) == 0.0);
  CHECK_THROWS_AS(round_length(c, NetworkConfig{}, 16, 6), Error);
  CHECK_THROWS_AS(energy_savings(c, NetworkConfig{}, 16, 0), Error);
}

// Independent fit: slots must match the published round lengths exactly,
// which pins t_preprocess and bounds t_start + t_off; savings depend on
// t_start alone, so a 1-D minimax grid search finds the best constant.
TEST_CASE("fitted radio-on constant is the minimax optimum on a 10 us grid") {
  const double hop_us_per_byte = 8.0 / 250000.0 * 1e6;
  auto on = [&](double t_start, int L) { return t_start + 7 * hop_us_per_byte * L; };
  auto worst_error = [&](double t_start) {
    double worst = 0;
    int k = 0;
    for (int L : kPayloads) {
      for (int B : kSlots) {
        const double ob = on(t_start, 2), ol = on(t_start, L);
        const double e = (B - 1) * ob / (B * (ob + ol)) * 100.0;
        worst = std::max(worst, std::abs(e - kSavingsPct[k++]));
      }
    }
    return worst;
  };
  double best = 0, best_err = 1e9;
  for (int t = 0; t <= 5000; t += 10) {
    const double err = worst_error(t);
    if (err < best_err - 1e-12) best_err = err, best = t;
  }
  PlatformConstants c;
  CHECK(best == doctest::Approx(c.t_start));
  CHECK(best_err < 0.25);

  // Slot quantization admits t_start + t_off in (4916, 5052].
  const double sum = c.t_start + c.t_wakeup + c.t_gap;
  CHECK(sum > 4916.0);
  CHECK(sum <= 5052.0);
}

TEST_CASE("monotonicity of the round model") {
  PlatformConstants c;
  NetworkConfig net = wide_net();
  for (int L : kPayloads) {
    double prev = -1;
    for (int B = 0; B <= 30; ++B) {
      const double t = round_length(c, net, L, B).t_round;
      CHECK(t > prev);
      prev = t;
    }
    double prev_e = -1;
    for (int B = 1; B <= 30; ++B) {
      const double e = energy_savings(c, net, L, B);
      CHECK(e > prev_e);
      CHECK(e < 1.0);
      prev_e = e;
    }
  }
  double prev = 0;
  for (int H = 1; H <= 8; ++H) {
    net.hops = H;
    const double t = round_length(c, net, 16, 5).t_round;
    CHECK(t >= prev);
    prev = t;
  }
  net.hops = 4;
  CHECK(round_length(c, net, 16, 5).t_round / 1000.0 >= 52.0);
  CHECK(round_length(c, net, 16, 5).t_round / 1000.0 <= 53.0);
}

TEST_CASE("quantization and tick rounding") {
  CHECK(quantize_up(8600, 500) == 9000);
  CHECK(quantize_up(9000, 500) == 9000);
  CHECK(quantize_up(0, 500) == 0);
  PlatformConstants c;
  CHECK(round_length_ticks(c, NetworkConfig{}, 16, 5, 10) == 5252);
  CHECK(round_length_ticks(c, NetworkConfig{}, 16, 5, 1000) == 53);
}

TEST_CASE("model table rows and csv") {
  PlatformConstants c;
  NetworkConfig net;
  const auto rows = model_table(c, net, {8, 16, 64}, {5, 10, 30}, {4});
  REQUIRE(rows.size() == 9);
  for (std::size_t k = 0; k < rows.size(); ++k)
    CHECK(std::abs(rows[k].t_round_us / 1000.0 - kRoundMs[k]) <= 0.005);
  CHECK(model_table(c, net, {}, {5}, {4}).empty());
  const std::string csv = model_table_csv(rows);
  CHECK(csv.rfind("L_bytes,B_slots,H_hops,N_tx,T_round_us,T_on_us,savings_pct\n", 0) == 0);
  CHECK(csv.find("16,5,4,2,52520,") != std::string::npos);
}
