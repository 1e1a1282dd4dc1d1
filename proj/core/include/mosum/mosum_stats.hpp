#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "mosum/lrv.hpp"
#include "mosum/neighborhoods.hpp"
#include "mosum/panel.hpp"

namespace mosum {

// Standardized moving-window jump profile. Row r corresponds to window center
// time bn + 1 + r (1-based); the value is (right-window mean minus left-window
// mean) / (bn * sigma_j) for each series j, windows of length bn each.
struct MosumProfile {
  int n = 0;
  int bn = 0;
  Eigen::MatrixXd v;  // (n - 2*bn) x p

  int rows() const { return static_cast<int>(v.rows()); }
  int p() const { return static_cast<int>(v.cols()); }
  int time_of_row(int r) const { return bn + 1 + r; }
  int row_of_time(int t) const { return t - bn - 1; }
};

MosumProfile jump_profile(const Eigen::MatrixXd& values, int bn, const Eigen::VectorXd& sigma);
MosumProfile jump_profile(const Panel& panel, int bn, const LongRunEstimate& lrv);

// Per-series centering constants c_j subtracted from squared profile norms.
struct Centering {
  Eigen::VectorXd per_series;

  double total() const { return per_series.sum(); }
  double group_total(const Neighborhood& nb) const;
};

// c_j = 2 / bn (exact for independent observations, limiting value otherwise).
Centering asymptotic_centering(int bn, int p);

// c_j from autocovariances of each series: gamma[j](h) for h = 0..2*bn-1 on
// the raw scale, standardized by sigma(j)^2.
Centering centering_from_autocov(const std::vector<Eigen::VectorXd>& gamma,
                                 const Eigen::VectorXd& sigma, int bn);

// c_j from sample autocovariances (1/n normalization) of the observed panel.
Centering estimated_centering(const Eigen::MatrixXd& values, const Eigen::VectorXd& sigma, int bn);

// Scan statistic profile. Global mode has a single column; grouped mode has
// one column per neighborhood, scaled by |group|^{-1/2}.
struct StatProfile {
  int n = 0;
  int bn = 0;
  Eigen::MatrixXd values;     // (n - 2*bn) x S
  std::vector<int> nbhd_ids;  // empty in global mode
  double max = 0.0;
  int argmax_time = 0;  // 1-based
  int argmax_nbhd = -1;  // index into the neighborhood set; -1 in global mode

  int rows() const { return static_cast<int>(values.rows()); }
  int time_of_row(int r) const { return bn + 1 + r; }
  int row_of_time(int t) const { return t - bn - 1; }
};

StatProfile stat_global(const MosumProfile& prof, const Centering& centering);
StatProfile stat_twoway(const MosumProfile& prof, const NeighborhoodSet& nbhds,
                        const Centering& centering);

// CSV columns: time,value (global) or time,nbhd,value (grouped).
void write_stat_csv(const StatProfile& stat, const std::string& path);

}  // namespace mosum
