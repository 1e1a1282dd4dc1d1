#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mosum/mosum_stats.hpp"
#include "mosum/neighborhoods.hpp"
#include "mosum/panel.hpp"

namespace mosum {

enum class NoiseKind { iid, ar1, ma_poly };
enum class TailKind { gaussian, student };

// Stationary error model. Per-series coefficients (AR root or moving-average
// scale) are drawn uniformly from [coeff_min, coeff_max] unless fixed_coeffs
// is set. ma_poly uses lag weights coeff * k^-beta for k = 1..trunc.
struct ErrorModel {
  NoiseKind kind = NoiseKind::iid;
  TailKind tail = TailKind::gaussian;
  double df = 9.0;
  double coeff_min = 0.0;
  double coeff_max = 0.0;
  double beta = 2.0;
  int trunc = 300;
  std::optional<Eigen::VectorXd> fixed_coeffs;
};

ErrorModel iid_model(TailKind tail = TailKind::gaussian, double df = 9.0);
ErrorModel ar1_model(double phi_min = 0.6, double phi_max = 0.9,
                     TailKind tail = TailKind::gaussian, double df = 9.0);
ErrorModel ma_poly_model(double psi_min = 0.5, double psi_max = 0.9, double beta = 2.0,
                         int trunc = 300, TailKind tail = TailKind::gaussian, double df = 9.0);

struct NoiseDraw {
  Eigen::MatrixXd eps;         // n x p
  Eigen::VectorXd coeffs;      // per-series coefficient; empty for iid
  Eigen::VectorXd longrun_sd;  // analytic per-series long-run sd
};
// Coefficients are drawn first (series order), then innovations series by
// series, so a fixed engine state yields a reproducible panel.
NoiseDraw gen_errors(const ErrorModel& model, int n, int p, std::mt19937_64& eng);

// A mean shift of `jump` on `members` (empty = every series) from time tau on:
// rows t >= tau are shifted.
struct BreakSpec {
  int tau = 0;
  double jump = 0.0;
  std::vector<int> members;
};
void inject_breaks(Eigen::MatrixXd& values, const std::vector<BreakSpec>& breaks);

Panel simulate_panel(const ErrorModel& model, int n, int p, const std::vector<BreakSpec>& breaks,
                     std::uint64_t seed);

// Analytic second moments (unit innovation variance).
double longrun_sd(const ErrorModel& model, double coeff);
// Autocovariances at lags 0..lags-1.
Eigen::VectorXd model_autocov(const ErrorModel& model, double coeff, int lags);

// Covariance of the standardized window difference at center distance d:
// sum_m w(m) gamma(|d+m|) / (bn^2 sigma^2) with window cross-correlation
// weights w. window_corr(..., 0) is the exact centering for one series.
double window_corr(const Eigen::VectorXd& gamma, double sigma, int bn, int d);

// Lag profile (length 2*bn) of the centered squared-norm field per series:
// 2 E[R(d)^2] over the model's coefficient law. Feed to cov_*_custom for
// thresholds that hold at finite bandwidth instead of only asymptotically.
std::vector<double> exact_kernel_shape(const ErrorModel& model, int bn);

// Exact per-series centering for one realized coefficient draw.
Centering exact_centering(const ErrorModel& model, const Eigen::VectorXd& coeffs, int p, int bn);

// ---------------------------------------------------------------------------
// Simulation experiments
// ---------------------------------------------------------------------------

// Threshold calibration route. limit_field samples the banded Gaussian limit
// covariance directly. gaussian_data recomputes the full statistic on
// Gaussian-innovation null panels drawn from the same second-order model;
// unlike the limit field it carries the finite-p skew of the squared-norm
// coordinates, which is visible for p of order tens.
enum class CalibrationRoute { limit_field, gaussian_data };

struct ExperimentConfig {
  ErrorModel model;
  int n = 200;
  int p = 200;
  int bn = 30;
  int reps = 500;
  int mc_reps = 2000;      // replicates for threshold calibration
  double alpha = 0.05;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  bool exact_kernel = true;  // calibrate with the model-implied lag profile
  bool known_scale = true;   // standardize by analytic long-run sd
  CalibrationRoute calib = CalibrationRoute::limit_field;
  std::vector<BreakSpec> breaks;
  std::optional<NeighborhoodSet> nbhds;  // grouped statistic when present
};

struct SizeReport {
  double omega = 0.0;
  double size = 0.0;
  int rejections = 0;
  int reps = 0;
};
SizeReport run_size_experiment(const ExperimentConfig& cfg);

// Rejection rates of the squared-norm scan, a max-coordinate comparator
// calibrated by direct null simulation, and (when groups are given) the
// grouped scan, all on the same panels; differences come with paired SEs.
struct PowerReport {
  double omega_l2 = 0.0, power_l2 = 0.0;
  double omega_linf = 0.0, power_linf = 0.0;
  std::optional<double> omega_twoway, power_twoway;
  double se_l2 = 0.0, se_linf = 0.0;
  double se_diff_linf = 0.0;  // SE of power_l2 - power_linf
  std::optional<double> se_twoway, se_diff_twoway;
  int reps = 0;
};
PowerReport run_power_experiment(const ExperimentConfig& cfg);

struct ConsistencyReport {
  double omega = 0.0;
  double an = 0.0;          // mean |k_hat - K|
  double at_over_n = 0.0;   // mean summed location error / n
  std::optional<double> as_over_bmin;  // grouped: mean summed set difference / min true group size
  double mean_k_hat = 0.0;
  int reps = 0;
};
ConsistencyReport run_consistency_experiment(const ExperimentConfig& cfg);

std::string size_report_to_json(const ExperimentConfig& cfg, const SizeReport& rep);
std::string power_report_to_json(const ExperimentConfig& cfg, const PowerReport& rep);
std::string consistency_report_to_json(const ExperimentConfig& cfg, const ConsistencyReport& rep);

}  // namespace mosum
