#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "mosum/detect.hpp"
#include "mosum/dgp.hpp"
#include "mosum/lrv.hpp"
#include "mosum/null_limit.hpp"

using namespace mosum;

namespace {

Panel noiseless_panel(int n, int p, const std::vector<BreakSpec>& breaks) {
  Panel panel;
  panel.values = Eigen::MatrixXd::Zero(n, p);
  inject_breaks(panel.values, breaks);
  panel.series_ids.resize(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j) panel.series_ids[static_cast<std::size_t>(j)] = "s" + std::to_string(j + 1);
  return panel;
}

Panel noisy_panel(int n, int p, const std::vector<BreakSpec>& breaks, std::uint64_t seed,
                  double noise_sd = 1.0) {
  Panel panel = noiseless_panel(n, p, breaks);
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> nd(0.0, noise_sd);
  for (int t = 0; t < n; ++t)
    for (int j = 0; j < p; ++j) panel.values(t, j) += nd(eng);
  return panel;
}

}  // namespace

TEST_CASE("estimate_jump reads the shift from flanking windows") {
  const int n = 100, p = 2, bn = 10;
  std::vector<BreakSpec> breaks = {{50, 1.5, {0}}};
  Panel panel = noiseless_panel(n, p, breaks);
  bool clipped = true;
  Eigen::VectorXd gamma = estimate_jump(panel.values, 50, bn, &clipped);
  CHECK_FALSE(clipped);
  CHECK(gamma(0) == doctest::Approx(1.5));
  CHECK(gamma(1) == doctest::Approx(0.0));
}

TEST_CASE("estimate_jump clips at the sample boundary and reports it") {
  const int n = 60, bn = 10;
  std::vector<BreakSpec> breaks = {{12, 2.0, {}}};
  Panel panel = noiseless_panel(n, 1, breaks);
  bool clipped = false;
  Eigen::VectorXd gamma = estimate_jump(panel.values, 12, bn, &clipped);
  CHECK(clipped);
  CHECK(gamma(0) == doctest::Approx(2.0));
}

TEST_CASE("detect_global finds a single break at the exact time without noise") {
  const int n = 120, p = 4, bn = 15;
  std::vector<BreakSpec> breaks = {{60, 0.8, {}}};
  Panel panel = noiseless_panel(n, p, breaks);
  LongRunEstimate lrv = known_lrv(Eigen::VectorXd::Ones(p));
  Centering cent = asymptotic_centering(bn, p);
  DetectionResult res = detect_global(panel, bn, lrv, 1.0, cent);
  REQUIRE(res.k_hat == 1);
  CHECK(res.breaks[0].tau == 60);
  CHECK(res.mode == "global");
  CHECK(res.q_stat > 1.0);
  CHECK_FALSE(res.separation_warning);
  REQUIRE(res.delta_hat.has_value());
  // delta = sqrt(|sum_j (0.8)^2 - 2p/bn|)
  double want = std::sqrt(std::abs(p * 0.64 - 2.0 * p / bn));
  CHECK(*res.delta_hat == doctest::Approx(want).epsilon(1e-9));
}

TEST_CASE("detect_global reports no breaks when the statistic stays under omega") {
  const int n = 120, p = 4, bn = 15;
  Panel panel = noiseless_panel(n, p, {});
  LongRunEstimate lrv = known_lrv(Eigen::VectorXd::Ones(p));
  DetectionResult res = detect_global(panel, bn, lrv, 0.5, asymptotic_centering(bn, p));
  CHECK(res.k_hat == 0);
  CHECK(res.breaks.empty());
  CHECK_FALSE(res.delta_hat.has_value());
  // the noiseless statistic is exactly -2p/bn everywhere
  CHECK(res.q_stat == doctest::Approx(-2.0 * p / bn));
}

TEST_CASE("detect_global separates two breaks at least 2 bn apart") {
  const int n = 240, p = 6, bn = 20;
  std::vector<BreakSpec> breaks = {{80, 1.0, {}}, {165, -0.9, {}}};
  Panel panel = noisy_panel(n, p, breaks, 1234, 0.15);
  LongRunEstimate lrv = known_lrv(Eigen::VectorXd::Constant(p, 0.15));
  DetectionResult res = detect_global(panel, bn, lrv, 3.0, asymptotic_centering(bn, p));
  REQUIRE(res.k_hat == 2);
  CHECK(std::abs(res.breaks[0].tau - 80) <= 2);
  CHECK(std::abs(res.breaks[1].tau - 165) <= 2);
  CHECK(res.breaks[0].tau < res.breaks[1].tau);  // sorted output
  // accepted peaks are at least 2 bn apart by construction of the removal rule
  CHECK(res.breaks[1].tau - res.breaks[0].tau >= 2 * bn);
  CHECK_FALSE(res.separation_warning);
}

TEST_CASE("detect_global removal drops strictly closer candidates only") {
  // two step changes exactly 2 bn apart: both survive the pruning rule
  const int n = 200, p = 3, bn = 12;
  std::vector<BreakSpec> breaks = {{90, 1.0, {}}, {90 + 2 * bn, 2.0, {}}};
  Panel panel = noiseless_panel(n, p, breaks);
  LongRunEstimate lrv = known_lrv(Eigen::VectorXd::Ones(p));
  DetectionResult res = detect_global(panel, bn, lrv, 0.5, asymptotic_centering(bn, p));
  CHECK(res.k_hat == 2);
  for (std::size_t a = 0; a + 1 < res.breaks.size(); ++a)
    CHECK(res.breaks[a + 1].tau - res.breaks[a].tau >= 2 * bn);
}

TEST_CASE("detect_twoway attributes a localized break to an overlapping group") {
  const int n = 160, p = 8, bn = 16;
  // shift only series 1..2 (0-based 0..1)
  std::vector<BreakSpec> breaks = {{80, 1.2, {0, 1}}};
  Panel panel = noiseless_panel(n, p, breaks);
  LongRunEstimate lrv = known_lrv(Eigen::VectorXd::Ones(p));
  std::vector<Neighborhood> items;
  items.push_back({1, {0, 1}, std::nullopt});
  items.push_back({2, {2, 3}, std::nullopt});
  items.push_back({3, {4, 5, 6, 7}, std::nullopt});
  NeighborhoodSet nb = make_neighborhood_set(items, p, 8.0);
  DetectionResult res = detect_twoway(panel, bn, lrv, nb, 0.5, asymptotic_centering(bn, p));
  REQUIRE(res.k_hat == 1);
  CHECK(res.mode == "twoway");
  CHECK(res.breaks[0].tau == 80);
  CHECK(res.breaks[0].nbhd == 0);
  CHECK(res.breaks[0].nbhd_id == 1);
}

TEST_CASE("detect_twoway keeps simultaneous breaks in unlinked groups") {
  const int n = 160, p = 8, bn = 16;
  std::vector<BreakSpec> breaks = {{70, 1.0, {0, 1}}, {84, -1.0, {6, 7}}};
  Panel panel = noiseless_panel(n, p, breaks);
  LongRunEstimate lrv = known_lrv(Eigen::VectorXd::Ones(p));
  std::vector<Neighborhood> items;
  items.push_back({1, {0, 1}, std::nullopt});
  items.push_back({2, {6, 7}, std::nullopt});
  NeighborhoodSet nb = make_neighborhood_set(items, p, 8.0);
  DetectionResult res = detect_twoway(panel, bn, lrv, nb, 0.5, asymptotic_centering(bn, p));
  REQUIRE(res.k_hat == 2);
  CHECK(res.breaks[0].tau == 70);
  CHECK(res.breaks[0].nbhd_id == 1);
  CHECK(res.breaks[1].tau == 84);
  CHECK(res.breaks[1].nbhd_id == 2);

  // the same pattern in two-hop linked groups keeps only the stronger peak
  std::vector<Neighborhood> linked;
  linked.push_back({1, {0, 1, 6}, std::nullopt});
  linked.push_back({2, {6, 7}, std::nullopt});
  NeighborhoodSet nbl = make_neighborhood_set(linked, p, 8.0);
  DetectionResult res2 = detect_twoway(panel, bn, lrv, nbl, 0.5, asymptotic_centering(bn, p));
  CHECK(res2.k_hat == 1);
}

TEST_CASE("detection JSON carries the full result") {
  const int n = 120, p = 4, bn = 15;
  std::vector<BreakSpec> breaks = {{60, 0.8, {}}};
  Panel panel = noiseless_panel(n, p, breaks);
  LongRunEstimate lrv = known_lrv(Eigen::VectorXd::Ones(p));
  DetectionResult res = detect_global(panel, bn, lrv, 1.0, asymptotic_centering(bn, p));
  nlohmann::json j = nlohmann::json::parse(detection_to_json(res));
  CHECK(j["mode"] == "global");
  CHECK(j["k_hat"] == 1);
  CHECK(j["omega_used"].get<double>() == doctest::Approx(1.0));
  CHECK(j["breaks"].size() == 1);
  CHECK(j["breaks"][0]["tau"] == 60);
  CHECK(j["breaks"][0]["s"].is_null());
  CHECK(j["breaks"][0]["gamma"].size() == static_cast<std::size_t>(p));
  CHECK(j["breaks"][0]["gamma"][0].get<double>() == doctest::Approx(0.8));
  CHECK(j["delta_hat"].is_number());
  CHECK(j["separation_warning"] == false);
}

TEST_CASE("detection respects omega from a calibrated threshold at roughly level alpha") {
  // at a 10% level the null rejection rate over 200 draws should sit well
  // inside [2%, 25%]; this ties the sampler, threshold and scan together.
  // p must be sizable: the Gaussian surrogate for the squared-norm field is a
  // large-p approximation and overshoots badly for p of order ten.
  const int n = 120, p = 50, bn = 12;
  LimitCovariance cov = cov_global(n, bn, p);
  ThresholdResult thr = compute_threshold(cov, 0.10, 2000, 31);
  LongRunEstimate lrv = known_lrv(Eigen::VectorXd::Ones(p));
  Centering cent = asymptotic_centering(bn, p);
  int rejections = 0;
  const int reps = 200;
  std::mt19937_64 eng(555);
  std::normal_distribution<double> nd;
  for (int r = 0; r < reps; ++r) {
    Panel panel;
    panel.values.resize(n, p);
    for (int t = 0; t < n; ++t)
      for (int j = 0; j < p; ++j) panel.values(t, j) = nd(eng);
    panel.series_ids.resize(static_cast<std::size_t>(p), "");
    for (int j = 0; j < p; ++j) panel.series_ids[static_cast<std::size_t>(j)] = "x" + std::to_string(j);
    DetectionResult res = detect_global(panel, bn, lrv, thr.omega, cent);
    if (res.k_hat > 0) ++rejections;
  }
  double rate = static_cast<double>(rejections) / reps;
  CHECK(rate > 0.02);
  CHECK(rate < 0.25);
}
