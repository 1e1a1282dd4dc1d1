#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mosum/neighborhoods.hpp"

namespace mosum {

// Limiting covariance kernel of the centered squared-norm scan field at
// window-center distance zeta (in bandwidth units, kernel support [0, 2)).
double g_kernel(double zeta);
// Kernel for a pair of series with long-run correlation rho:
// rho^2 * P(zeta) + q(zeta); reduces to g_kernel at rho = 1.
double dependent_kernel(double zeta, double rho);

// Covariance of the centered Gaussian field the scan statistic converges to,
// in factored form: temporal lag profiles of length 2*bn plus group weights.
struct LimitCovariance {
  enum class Mode { global, twoway, dependent };

  Mode mode = Mode::global;
  int n_eff = 0;  // number of window centers
  int bn = 0;
  int p = 0;
  // per-series covariance at lag d (d = 0..2*bn-1); in dependent mode this is
  // the shared-series remainder and shape_cross carries the correlated part
  std::vector<double> shape;
  std::vector<double> shape_cross;
  std::optional<NeighborhoodSet> nbhds;
  Eigen::MatrixXd rho2;  // p x p squared correlations (dependent mode)
  // derived group pair weights, filled by the builders
  Eigen::MatrixXd weights;        // |intersection| / sqrt(|s1| * |s2|)
  Eigen::MatrixXd weights_cross;  // correlated-pair mass on the intersection

  int groups() const { return nbhds ? nbhds->size() : 1; }
  std::int64_t dim() const { return static_cast<std::int64_t>(n_eff) * groups(); }
  // row = window index 0..n_eff-1, s = group index (0 in global mode)
  double entry(int row1, int s1, int row2, int s2) const;
};

LimitCovariance cov_global(int n, int bn, int p);
LimitCovariance cov_twoway(int n, int bn, const NeighborhoodSet& nbhds);
// corr: long-run correlation matrix; entries with |corr| < corr_cutoff are
// treated as zero.
LimitCovariance cov_dependent(int n, int bn, const NeighborhoodSet& nbhds,
                              const Eigen::MatrixXd& corr, double corr_cutoff = 0.0);

// Same fields with a caller-supplied per-series lag profile (length 2*bn),
// e.g. exact finite-bandwidth window moments of a known error model.
LimitCovariance cov_global_custom(int n, int bn, int p, std::vector<double> shape);
LimitCovariance cov_twoway_custom(int n, int bn, const NeighborhoodSet& nbhds,
                                  std::vector<double> shape);

// Monte Carlo draws of the field maximum; replicate r uses its own RNG
// substream of `seed`, so results do not depend on thread count.
std::vector<double> sample_max(const LimitCovariance& cov, int reps, std::uint64_t seed,
                               unsigned threads = 1);

struct ThresholdResult {
  double alpha = 0.0;
  double omega = 0.0;
  int reps = 0;
  std::uint64_t seed = 0;
  std::map<std::string, double> quantiles;  // keys "50", "90", "95", "99"
};

// omega = smallest sample value with exceedance fraction <= alpha.
ThresholdResult threshold_from_samples(std::vector<double> samples, double alpha,
                                       std::uint64_t seed);
ThresholdResult compute_threshold(const LimitCovariance& cov, double alpha, int reps,
                                  std::uint64_t seed, unsigned threads = 1);

std::string threshold_to_json(const ThresholdResult& r);
void write_threshold_json(const ThresholdResult& r, const std::string& path);
ThresholdResult load_threshold_json(const std::string& path);

}  // namespace mosum
