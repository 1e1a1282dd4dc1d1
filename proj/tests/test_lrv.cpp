#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <random>
#include <vector>

#include "doctest.h"
#include "mosum/dgp.hpp"
#include "mosum/errors.hpp"
#include "mosum/lrv.hpp"
#include "mosum/rng.hpp"

using namespace mosum;

TEST_CASE("phi branch values, continuity at the caps, odd symmetry") {
  const double l2 = std::log(2.0);
  CHECK(phi(5.0) == doctest::Approx(l2));
  CHECK(phi(-5.0) == doctest::Approx(-l2));
  CHECK(phi(0.0) == doctest::Approx(0.0));
  // interior branch: -log(1 - x + x^2/2) for x in [0, 1)
  CHECK(phi(0.5) == doctest::Approx(-std::log(0.625)));
  CHECK(phi(-0.5) == doctest::Approx(std::log(0.625)));
  // the quadratic meets the cap exactly: -log(1 - 1 + 1/2) = log 2
  CHECK(phi(1.0) == doctest::Approx(l2));
  CHECK(phi(std::nextafter(1.0, 0.0)) == doctest::Approx(l2).epsilon(1e-9));
  CHECK(phi(-1.0) == doctest::Approx(-l2));
  CHECK(phi(std::nextafter(-1.0, 0.0)) == doctest::Approx(-l2).epsilon(1e-9));
  // odd symmetry and monotonicity on a grid
  double prev = phi(-2.0);
  for (double x : {-1.5, -0.9, -0.3, 0.0, 0.3, 0.9, 1.5}) {
    CHECK(phi(-x) == doctest::Approx(-phi(x)));
    CHECK(phi(x) >= prev - 1e-15);
    prev = phi(x);
  }
}

TEST_CASE("phi_alpha approaches the identity for small alpha") {
  for (double x : {-3.0, -0.4, 0.2, 1.7}) {
    CHECK(phi_alpha(x, 1e-7) == doctest::Approx(x).epsilon(1e-5));
  }
  // and equals phi at alpha = 1
  CHECK(phi_alpha(0.3, 1.0) == doctest::Approx(phi(0.3)));
}

TEST_CASE("block samples on a hand-computed panel") {
  // n = 8, m = 2 -> block means over rows {0,1}, {2,3}, {4,5}, {6,7}; 3 diffs
  Eigen::MatrixXd x(8, 1);
  x << 1, 3, 5, 7, 2, 0, 4, 4;
  BlockSamples bs = block_var_samples(x, 2);
  CHECK(bs.n_blocks == 3);
  CHECK(bs.psi(0, 0) == doctest::Approx(2.0));
  CHECK(bs.psi(1, 0) == doctest::Approx(6.0));
  CHECK(bs.psi(2, 0) == doctest::Approx(1.0));
  CHECK(bs.psi(3, 0) == doctest::Approx(4.0));
  Eigen::VectorXd s = bs.pair_samples(0, 0);
  REQUIRE(s.size() == 3);
  // (m/2) * diff^2 = 1 * {16, 25, 9}
  CHECK(s(0) == doctest::Approx(16.0));
  CHECK(s(1) == doctest::Approx(25.0));
  CHECK(s(2) == doctest::Approx(9.0));

  // alternating block means 0, 2, 0: every diff is +-2, sample = (2/2) * 4 = 4
  Eigen::MatrixXd y(6, 1);
  y << 0, 0, 2, 2, 0, 0;
  BlockSamples bs2 = block_var_samples(y, 2);
  CHECK(bs2.pair_samples(0, 0)(0) == doctest::Approx(4.0));
  CHECK(bs2.pair_samples(0, 0)(1) == doctest::Approx(4.0));
}

TEST_CASE("solve_h_zero is exact for symmetric samples and degenerate input") {
  Eigen::VectorXd sym(4);
  sym << -1.0, -0.2, 0.2, 1.0;  // odd score => root at 0
  CHECK(solve_h_zero(sym, 0.7) == doctest::Approx(0.0).epsilon(1e-9));
  Eigen::VectorXd shifted = sym.array() + 3.25;
  CHECK(solve_h_zero(shifted, 0.7) == doctest::Approx(3.25).epsilon(1e-8));

  Eigen::VectorXd flat = Eigen::VectorXd::Constant(5, 2.5);
  CHECK(solve_h_zero(flat, 0.3) == doctest::Approx(2.5));

  // tiny alpha: the score is near-linear, so the root is near the mean
  Eigen::VectorXd v(3);
  v << 1.0, 2.0, 6.0;
  CHECK(solve_h_zero(v, 1e-8) == doctest::Approx(3.0).epsilon(1e-5));
}

TEST_CASE("estimate_lrv recovers the long-run scale of an AR(1) panel") {
  // phi = 0.5: long-run sd of the standardized series is 1/(1-phi) * sd(innov);
  // innovations are unit normal, so sigma_LR = 2 when marginal sd is 1/sqrt(1-phi^2)...
  // use the model helper as the analytic oracle instead of re-deriving here.
  ErrorModel model = ar1_model(0.5, 0.5);
  const int n = 20000, p = 6;
  std::mt19937_64 eng = substream(99, 0);
  NoiseDraw draw = gen_errors(model, n, p, eng);
  LongRunEstimate est = estimate_lrv(draw.eps);
  REQUIRE(est.p() == p);
  for (int j = 0; j < p; ++j) {
    CHECK(est.sigma(j) == doctest::Approx(draw.longrun_sd(j)).epsilon(0.15));
  }
}

TEST_CASE("estimate_lrv full mode produces clipped correlations and symmetric covariance") {
  std::mt19937_64 eng = substream(7, 1);
  std::normal_distribution<double> nd;
  const int n = 2000, p = 4;
  Eigen::MatrixXd x(n, p);
  for (int t = 0; t < n; ++t) {
    double common = nd(eng);
    for (int j = 0; j < p; ++j) x(t, j) = 0.8 * common + 0.6 * nd(eng);
  }
  LongRunEstimate est = estimate_lrv(x, std::nullopt, true);
  REQUIRE(est.sigma_full.has_value());
  REQUIRE(est.corr.has_value());
  const auto& cov = *est.sigma_full;
  const auto& corr = *est.corr;
  CHECK((cov - cov.transpose()).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  for (int i = 0; i < p; ++i) {
    CHECK(corr(i, i) == doctest::Approx(1.0));
    for (int j = 0; j < p; ++j) {
      CHECK(corr(i, j) <= 1.0);
      CHECK(corr(i, j) >= -1.0);
    }
  }
  // equicorrelated construction: off-diagonals near 0.64 and positive
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j) CHECK(corr(i, j) > 0.3);
}

TEST_CASE("estimate_lrv rejects panels with too few blocks or zero variance") {
  Eigen::MatrixXd tiny = Eigen::MatrixXd::Random(10, 2);
  CHECK_THROWS_AS(estimate_lrv(tiny, 4), error);
  Eigen::MatrixXd flat = Eigen::MatrixXd::Zero(400, 2);
  CHECK_THROWS_AS(estimate_lrv(flat), error);
}

TEST_CASE("default_block_size tracks sqrt(n / log(np)) with a floor of 2") {
  CHECK(default_block_size(200, 200) ==
        std::max(2, static_cast<int>(std::lround(std::sqrt(200.0 / std::log(200.0 * 200.0))))));
  CHECK(default_block_size(4, 1) == 2);
}

TEST_CASE("known_lrv validates positivity and load/save round-trips") {
  Eigen::VectorXd sigma(3);
  sigma << 1.0, 2.0, 0.5;
  LongRunEstimate est = known_lrv(sigma);
  CHECK(est.p() == 3);
  Eigen::VectorXd bad(2);
  bad << 1.0, -1.0;
  CHECK_THROWS_AS(known_lrv(bad), error);

  auto dir = std::filesystem::temp_directory_path() / "mosum_lrv_tests";
  std::filesystem::create_directories(dir);
  auto path = (dir / "lrv.json").string();
  write_lrv_json(est, path);
  LongRunEstimate back = load_lrv_json(path, 3);
  CHECK((back.sigma - sigma).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  CHECK_THROWS_AS(load_lrv_json(path, 4), error);
}
