#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "mosum/lrv.hpp"
#include "mosum/mosum_stats.hpp"
#include "mosum/neighborhoods.hpp"
#include "mosum/panel.hpp"

namespace mosum {

struct Break {
  int tau = 0;            // 1-based estimated change time
  int nbhd = -1;          // neighborhood index (-1 in global mode)
  int nbhd_id = 0;        // neighborhood id (0 in global mode)
  double stat = 0.0;      // scan statistic at the accepted peak
  Eigen::VectorXd gamma;  // estimated mean shift per series (raw scale)
  bool boundary_clipped = false;
};

struct DetectionResult {
  std::string mode;  // "global" or "twoway"
  int k_hat = 0;
  double omega_used = 0.0;
  double q_stat = 0.0;  // maximum of the scan statistic
  std::optional<double> delta_hat;  // smallest standardized break size, when k_hat > 0
  bool separation_warning = false;
  std::vector<Break> breaks;  // sorted by tau
};

// Mean shift at tau from bandwidth-length windows placed just outside the
// detection span: rows [tau+bn-1, tau+2bn-2] minus rows [tau-2bn, tau-bn-1],
// clipped to the sample (clipped reports when that happened).
Eigen::VectorXd estimate_jump(const Eigen::MatrixXd& values, int tau, int bn,
                              bool* clipped = nullptr);

// Iterative peak selection on the global statistic: accept the largest
// exceedance of omega, drop candidates within 2*bn - 1 of it, repeat.
DetectionResult detect_global(const Panel& panel, int bn, const LongRunEstimate& lrv,
                              double omega, const Centering& centering);

// Grouped variant: candidates are (time, group) pairs; accepting a peak drops
// candidates whose window range meets it in a two-hop connected group.
DetectionResult detect_twoway(const Panel& panel, int bn, const LongRunEstimate& lrv,
                              const NeighborhoodSet& nbhds, double omega,
                              const Centering& centering);

std::string detection_to_json(const DetectionResult& result);
void write_detection_json(const DetectionResult& result, const std::string& path);

}  // namespace mosum
