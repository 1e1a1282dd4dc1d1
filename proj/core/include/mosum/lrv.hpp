#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

namespace mosum {

// Bounded log-quadratic score: flat at +-log 2 outside [-1, 1].
double phi(double x);
// phi(alpha * x) / alpha; approaches the identity as alpha -> 0.
double phi_alpha(double x, double alpha);

// Non-overlapping block means and lag-1 block difference products.
struct BlockSamples {
  Eigen::MatrixXd psi;  // (n_blocks + 1) x p block means
  int m = 0;            // block length
  int n_blocks = 0;

  // (m/2) * (psi_k - psi_{k-1})_i * (psi_k - psi_{k-1})_j for k = 1..n_blocks
  Eigen::VectorXd pair_samples(int i, int j) const;
};
BlockSamples block_var_samples(const Eigen::MatrixXd& values, int m);

// Root of u -> mean_k phi_alpha(x_k - u), the M-estimate of location for the
// given samples; bisection to relative tolerance 1e-10.
double solve_h_zero(const Eigen::VectorXd& samples, double alpha);

int default_block_size(int n, int p);

struct LongRunEstimate {
  Eigen::VectorXd sigma;                      // per-series long-run sd
  std::optional<Eigen::MatrixXd> sigma_full;  // long-run covariance matrix
  std::optional<Eigen::MatrixXd> corr;        // correlations clipped to [-1, 1]
  int m = 0;
  int n_blocks = 0;

  int p() const { return static_cast<int>(sigma.size()); }
};

// Robust estimate from block difference products. Requires at least 8 blocks.
// With full = true the whole covariance matrix and its correlations are
// estimated; otherwise only the diagonal.
LongRunEstimate estimate_lrv(const Eigen::MatrixXd& values, std::optional<int> m = std::nullopt,
                             bool full = false);

LongRunEstimate known_lrv(Eigen::VectorXd sigma);
// File: {"sigma": [...]} (or a bare array) of p positive reals.
LongRunEstimate load_lrv_json(const std::string& path, int p);
std::string lrv_to_json(const LongRunEstimate& est);
void write_lrv_json(const LongRunEstimate& est, const std::string& path);

}  // namespace mosum
