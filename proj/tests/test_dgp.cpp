#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "mosum/dgp.hpp"
#include "mosum/null_limit.hpp"
#include "mosum/rng.hpp"

using namespace mosum;

TEST_CASE("substream RNG is deterministic and distinct across streams") {
  std::mt19937_64 a = substream(42, 7);
  std::mt19937_64 b = substream(42, 7);
  std::mt19937_64 c = substream(42, 8);
  CHECK(a() == b());
  std::mt19937_64 a2 = substream(42, 7);
  CHECK(a2() != c());
}

TEST_CASE("inject_breaks shifts rows from tau on (1-based)") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(10, 3);
  inject_breaks(x, {{4, 2.0, {1}}});
  CHECK(x(2, 1) == doctest::Approx(0.0));  // time 3: untouched
  CHECK(x(3, 1) == doctest::Approx(2.0));  // time 4: first shifted row
  CHECK(x(9, 1) == doctest::Approx(2.0));
  CHECK(x(3, 0) == doctest::Approx(0.0));  // other series untouched
  // empty member list means every series; shifts accumulate
  inject_breaks(x, {{8, -1.0, {}}});
  CHECK(x(7, 0) == doctest::Approx(-1.0));
  CHECK(x(7, 1) == doctest::Approx(1.0));
  CHECK(x(6, 1) == doctest::Approx(2.0));
}

TEST_CASE("iid draws have unit variance for both tails") {
  const int n = 30000, p = 2;
  for (TailKind tail : {TailKind::gaussian, TailKind::student}) {
    ErrorModel model = iid_model(tail, 9.0);
    std::mt19937_64 eng = substream(3, 0);
    NoiseDraw draw = gen_errors(model, n, p, eng);
    for (int j = 0; j < p; ++j) {
      double v = draw.eps.col(j).squaredNorm() / n;
      CHECK(v == doctest::Approx(1.0).epsilon(0.05));
      CHECK(draw.longrun_sd(j) == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("AR(1) analytic moments match their textbook values") {
  ErrorModel model = ar1_model(0.7, 0.7);
  CHECK(longrun_sd(model, 0.7) == doctest::Approx(1.0 / 0.3));
  Eigen::VectorXd g = model_autocov(model, 0.7, 5);
  for (int h = 0; h < 5; ++h)
    CHECK(g(h) == doctest::Approx(std::pow(0.7, h) / (1 - 0.49)).epsilon(1e-12));
}

TEST_CASE("AR(1) sample autocovariance agrees with the analytic one") {
  ErrorModel model = ar1_model(0.8, 0.8);
  const int n = 60000;
  std::mt19937_64 eng = substream(17, 0);
  NoiseDraw draw = gen_errors(model, n, 1, eng);
  Eigen::VectorXd x = draw.eps.col(0);
  double m = x.mean();
  for (int h = 0; h <= 3; ++h) {
    double acc = 0.0;
    for (int t = 0; t + h < n; ++t) acc += (x(t) - m) * (x(t + h) - m);
    acc /= n;
    double want = std::pow(0.8, h) / (1 - 0.64);
    CHECK(acc == doctest::Approx(want).epsilon(0.08));
  }
  CHECK(draw.coeffs(0) == doctest::Approx(0.8));
  CHECK(draw.longrun_sd(0) == doctest::Approx(5.0));
}

TEST_CASE("moving-average weights, moments and both convolution paths") {
  const double psi = 0.7, beta = 2.0;
  // small truncation runs the direct path
  ErrorModel small = ma_poly_model(psi, psi, beta, 8);
  Eigen::VectorXd g_small = model_autocov(small, psi, 4);
  // direct oracle: a_k = psi k^-beta, gamma(h) = sum a_k a_{k+h}
  auto gamma_ref = [&](int h, int trunc) {
    double acc = 0.0;
    for (int k = 1; k + h <= trunc; ++k)
      acc += (psi * std::pow(k, -beta)) * (psi * std::pow(k + h, -beta));
    return acc;
  };
  for (int h = 0; h < 4; ++h)
    CHECK(g_small(h) == doctest::Approx(gamma_ref(h, 8)).epsilon(1e-12));
  double srl = 0.0;
  for (int k = 1; k <= 8; ++k) srl += psi * std::pow(k, -beta);
  CHECK(longrun_sd(small, psi) == doctest::Approx(srl).epsilon(1e-12));

  // simulated second moments match for both code paths
  for (int trunc : {8, 64}) {
    ErrorModel model = ma_poly_model(psi, psi, beta, trunc);
    const int n = 60000;
    std::mt19937_64 eng = substream(23, trunc);
    NoiseDraw draw = gen_errors(model, n, 1, eng);
    Eigen::VectorXd x = draw.eps.col(0);
    double m = x.mean();
    for (int h = 0; h <= 2; ++h) {
      double acc = 0.0;
      for (int t = 0; t + h < n; ++t) acc += (x(t) - m) * (x(t + h) - m);
      acc /= n;
      CHECK(acc == doctest::Approx(gamma_ref(h, trunc)).epsilon(0.08));
    }
  }
}

TEST_CASE("gen_errors respects fixed coefficients and draws within the range") {
  Eigen::VectorXd fixed(3);
  fixed << 0.6, 0.7, 0.8;
  ErrorModel model = ar1_model(0.0, 0.9);
  model.fixed_coeffs = fixed;
  std::mt19937_64 eng = substream(1, 0);
  NoiseDraw draw = gen_errors(model, 50, 3, eng);
  CHECK((draw.coeffs - fixed).cwiseAbs().maxCoeff() == doctest::Approx(0.0));

  ErrorModel ranged = ar1_model(0.6, 0.9);
  std::mt19937_64 eng2 = substream(1, 1);
  NoiseDraw d2 = gen_errors(ranged, 50, 40, eng2);
  for (int j = 0; j < 40; ++j) {
    CHECK(d2.coeffs(j) >= 0.6);
    CHECK(d2.coeffs(j) <= 0.9);
  }
}

TEST_CASE("window_corr for white noise matches the closed-form window overlap") {
  const int bn = 9;
  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(2 * bn);
  gamma(0) = 1.0;
  for (int d = 0; d < 2 * bn; ++d) {
    double want = d <= bn ? (2.0 * bn - 3.0 * d) : -(2.0 * bn - d);
    want /= bn * bn;
    CHECK(window_corr(gamma, 1.0, bn, d) == doctest::Approx(want).epsilon(1e-12));
  }
  // centering: R(0) = 2 / bn
  CHECK(window_corr(gamma, 1.0, bn, 0) == doctest::Approx(2.0 / bn));
}

TEST_CASE("exact kernel shape for white noise equals the limit kernel exactly") {
  const int bn = 11;
  std::vector<double> shape = exact_kernel_shape(iid_model(), bn);
  REQUIRE(static_cast<int>(shape.size()) == 2 * bn);
  for (int d = 0; d < 2 * bn; ++d) {
    double want = g_kernel(static_cast<double>(d) / bn) / (bn * bn);
    CHECK(shape[static_cast<std::size_t>(d)] == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("exact kernel shape under dependence: 2 R(d)^2 for a fixed AR root") {
  const int bn = 7;
  const double phi = 0.75;
  Eigen::VectorXd fixed(1);
  fixed << phi;
  ErrorModel model = ar1_model(0.6, 0.9);
  model.fixed_coeffs = fixed;
  std::vector<double> shape = exact_kernel_shape(model, bn);
  Eigen::VectorXd gamma = model_autocov(model, phi, 4 * bn + 1);
  double sigma = longrun_sd(model, phi);
  for (int d = 0; d < 2 * bn; ++d) {
    double r = window_corr(gamma, sigma, bn, d);
    CHECK(shape[static_cast<std::size_t>(d)] == doctest::Approx(2.0 * r * r).epsilon(1e-10));
  }
  // dependence deflates the variance below the white-noise value at this bn
  CHECK(shape[0] < g_kernel(0.0) / (bn * bn));
}

TEST_CASE("exact kernel shape averages over the coefficient law") {
  // the range average lies between the endpoint values at lag zero
  const int bn = 10;
  ErrorModel lo = ar1_model(0.6, 0.6);
  ErrorModel hi = ar1_model(0.9, 0.9);
  ErrorModel mix = ar1_model(0.6, 0.9);
  double s_lo = exact_kernel_shape(lo, bn)[0];
  double s_hi = exact_kernel_shape(hi, bn)[0];
  double s_mix = exact_kernel_shape(mix, bn)[0];
  CHECK(s_mix > std::min(s_lo, s_hi));
  CHECK(s_mix < std::max(s_lo, s_hi));
}

TEST_CASE("exact centering for one draw matches window_corr at lag zero") {
  const int bn = 8;
  Eigen::VectorXd coeffs(2);
  coeffs << 0.6, 0.85;
  ErrorModel model = ar1_model(0.6, 0.9);
  Centering cent = exact_centering(model, coeffs, 2, bn);
  for (int j = 0; j < 2; ++j) {
    Eigen::VectorXd gamma = model_autocov(model, coeffs(j), 4 * bn + 1);
    double sigma = longrun_sd(model, coeffs(j));
    CHECK(cent.per_series(j) ==
          doctest::Approx(window_corr(gamma, sigma, bn, 0)).epsilon(1e-10));
  }
  // iid centering is exactly 2/bn
  Centering flat = exact_centering(iid_model(), Eigen::VectorXd(), 3, bn);
  for (int j = 0; j < 3; ++j) CHECK(flat.per_series(j) == doctest::Approx(2.0 / bn));
}

TEST_CASE("simulate_panel is reproducible and labels series s1..sp") {
  ErrorModel model = ar1_model();
  Panel a = simulate_panel(model, 60, 5, {{30, 1.0, {}}}, 99);
  Panel b = simulate_panel(model, 60, 5, {{30, 1.0, {}}}, 99);
  Panel c = simulate_panel(model, 60, 5, {{30, 1.0, {}}}, 100);
  CHECK((a.values - b.values).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  CHECK((a.values - c.values).cwiseAbs().maxCoeff() > 0.0);
  CHECK(a.series_ids.front() == "s1");
  CHECK(a.series_ids.back() == "s5");
  CHECK(validate(a).empty());
}

TEST_CASE("size experiment smoke run stays near its level") {
  ExperimentConfig cfg;
  cfg.model = iid_model();
  cfg.n = 80;
  cfg.p = 30;
  cfg.bn = 10;
  cfg.reps = 60;
  cfg.mc_reps = 500;
  cfg.alpha = 0.10;
  cfg.seed = 7;
  SizeReport rep = run_size_experiment(cfg);
  CHECK(rep.reps == 60);
  CHECK(rep.omega > 0.0);
  CHECK(rep.size >= 0.0);
  CHECK(rep.size <= 0.35);
}

TEST_CASE("gaussian_data calibration tracks the level where the limit field overshoots") {
  // At p of order tens the squared-norm field is visibly skewed, so the
  // statistic-replicate threshold sits above the limit-field one and the
  // realized level stays near nominal instead of inflating.
  ExperimentConfig cfg;
  cfg.model = iid_model();
  cfg.n = 100;
  cfg.p = 24;
  cfg.bn = 12;
  cfg.reps = 200;
  cfg.mc_reps = 1500;
  cfg.alpha = 0.10;
  cfg.seed = 8;
  cfg.calib = CalibrationRoute::gaussian_data;
  SizeReport boot = run_size_experiment(cfg);
  cfg.calib = CalibrationRoute::limit_field;
  SizeReport field = run_size_experiment(cfg);
  CHECK(boot.omega > field.omega);
  CHECK(boot.size >= 0.02);
  CHECK(boot.size <= 0.20);
  CHECK(boot.size < field.size);
}

TEST_CASE("consistency experiment finds strong breaks exactly") {
  ExperimentConfig cfg;
  cfg.model = iid_model();
  cfg.n = 120;
  cfg.p = 40;
  cfg.bn = 15;
  cfg.reps = 12;
  cfg.mc_reps = 400;
  cfg.seed = 11;
  cfg.breaks = {{40, 1.5, {}}, {80, -1.5, {}}};
  ConsistencyReport rep = run_consistency_experiment(cfg);
  CHECK(rep.mean_k_hat == doctest::Approx(2.0).epsilon(0.2));
  CHECK(rep.an <= 0.2);
  CHECK(rep.at_over_n <= 0.02);
}

TEST_CASE("power experiment orders the tests on a dense break") {
  ExperimentConfig cfg;
  cfg.model = iid_model();
  cfg.n = 100;
  cfg.p = 40;
  cfg.bn = 12;
  cfg.reps = 40;
  cfg.mc_reps = 500;
  cfg.seed = 13;
  BreakSpec br;
  br.tau = 50;
  br.jump = 0.35;  // small dense shift: the aggregate statistic should win
  cfg.breaks = {br};
  PowerReport rep = run_power_experiment(cfg);
  CHECK(rep.reps == 40);
  CHECK(rep.power_l2 >= rep.power_linf - 0.15);
  CHECK(rep.power_l2 > 0.2);
  CHECK(rep.se_l2 >= 0.0);
  CHECK(rep.se_diff_linf >= 0.0);
}
