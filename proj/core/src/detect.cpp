#include "mosum/detect.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <utility>

#include "json.hpp"
#include "mosum/errors.hpp"

namespace mosum {

Eigen::VectorXd estimate_jump(const Eigen::MatrixXd& values, int tau, int bn, bool* clipped) {
  const int n = static_cast<int>(values.rows());
  require(bn >= 1, errc::config, "estimate_jump: bandwidth must be positive");
  require(tau >= 1 && tau <= n, errc::config, "estimate_jump: tau out of range");
  bool clip = false;

  int r_lo = tau + bn - 1, r_hi = tau + 2 * bn - 2;
  if (r_hi > n) {
    r_hi = n;
    clip = true;
  }
  if (r_lo > n) {
    r_lo = std::max(1, n - bn + 1);
    clip = true;
  }

  int l_lo = tau - 2 * bn, l_hi = tau - bn - 1;
  if (l_hi < 1) {
    // no room for an offset window; fall back to the samples right before tau
    l_lo = std::max(1, tau - bn);
    l_hi = std::max(1, tau - 1);
    clip = true;
  } else if (l_lo < 1) {
    l_lo = 1;
    clip = true;
  }

  Eigen::VectorXd right =
      values.middleRows(r_lo - 1, r_hi - r_lo + 1).colwise().mean().transpose();
  Eigen::VectorXd left = values.middleRows(l_lo - 1, l_hi - l_lo + 1).colwise().mean().transpose();
  if (clipped) *clipped = clip;
  return right - left;
}

namespace {

struct Candidate {
  int row;
  int s;
  double value;
  bool alive;
};

double break_magnitude(const Eigen::VectorXd& gamma, const Eigen::VectorXd& sigma, double cbar) {
  double acc = 0.0;
  for (int j = 0; j < gamma.size(); ++j) {
    double v = gamma(j) / sigma(j);
    acc += v * v;
  }
  return std::sqrt(std::abs(acc - cbar));
}

void finalize(DetectionResult& result, const Panel& panel, const LongRunEstimate& lrv,
              const Centering& centering, int bn) {
  std::sort(result.breaks.begin(), result.breaks.end(),
            [](const Break& a, const Break& b) { return a.tau < b.tau; });
  result.k_hat = static_cast<int>(result.breaks.size());
  if (result.breaks.empty()) return;
  const double cbar = centering.total();
  double dmin = std::numeric_limits<double>::infinity();
  for (auto& br : result.breaks) {
    bool clip = false;
    br.gamma = estimate_jump(panel.values, br.tau, bn, &clip);
    br.boundary_clipped = clip;
    dmin = std::min(dmin, break_magnitude(br.gamma, lrv.sigma, cbar));
  }
  result.delta_hat = dmin;
}

}  // namespace

DetectionResult detect_global(const Panel& panel, int bn, const LongRunEstimate& lrv,
                              double omega, const Centering& centering) {
  MosumProfile prof = jump_profile(panel, bn, lrv);
  StatProfile st = stat_global(prof, centering);

  DetectionResult result;
  result.mode = "global";
  result.omega_used = omega;
  result.q_stat = st.max;

  std::vector<Candidate> cand;
  for (int r = 0; r < st.rows(); ++r)
    if (st.values(r, 0) > omega) cand.push_back({r, 0, st.values(r, 0), true});

  while (true) {
    int best = -1;
    for (std::size_t k = 0; k < cand.size(); ++k)
      if (cand[k].alive && (best < 0 || cand[k].value > cand[static_cast<std::size_t>(best)].value))
        best = static_cast<int>(k);
    if (best < 0) break;
    const int tau = st.time_of_row(cand[static_cast<std::size_t>(best)].row);
    Break br;
    br.tau = tau;
    br.stat = cand[static_cast<std::size_t>(best)].value;
    result.breaks.push_back(std::move(br));
    for (auto& c : cand)
      if (c.alive && std::abs(st.time_of_row(c.row) - tau) < 2 * bn) c.alive = false;
  }

  finalize(result, panel, lrv, centering, bn);
  std::vector<int> taus;
  for (const auto& br : result.breaks) taus.push_back(br.tau);
  result.separation_warning = !check_separation(taus, bn, panel.n());
  return result;
}

DetectionResult detect_twoway(const Panel& panel, int bn, const LongRunEstimate& lrv,
                              const NeighborhoodSet& nbhds, double omega,
                              const Centering& centering) {
  MosumProfile prof = jump_profile(panel, bn, lrv);
  StatProfile st = stat_twoway(prof, nbhds, centering);
  auto twohop = twohop_matrix(nbhds);

  DetectionResult result;
  result.mode = "twoway";
  result.omega_used = omega;
  result.q_stat = st.max;

  std::vector<Candidate> cand;
  for (int r = 0; r < st.rows(); ++r)
    for (int s = 0; s < nbhds.size(); ++s)
      if (st.values(r, s) > omega) cand.push_back({r, s, st.values(r, s), true});

  while (true) {
    int best = -1;
    for (std::size_t k = 0; k < cand.size(); ++k)
      if (cand[k].alive && (best < 0 || cand[k].value > cand[static_cast<std::size_t>(best)].value))
        best = static_cast<int>(k);
    if (best < 0) break;
    const Candidate& top = cand[static_cast<std::size_t>(best)];
    const int tau = st.time_of_row(top.row);
    const int s_hat = top.s;
    Break br;
    br.tau = tau;
    br.nbhd = s_hat;
    br.nbhd_id = nbhds[s_hat].id;
    br.stat = top.value;
    result.breaks.push_back(std::move(br));
    for (auto& c : cand)
      if (c.alive && windows_linked(tau, s_hat, st.time_of_row(c.row), c.s, bn, panel.n(), twohop))
        c.alive = false;
  }

  finalize(result, panel, lrv, centering, bn);
  std::vector<std::pair<int, int>> pairs;
  for (const auto& br : result.breaks) pairs.emplace_back(br.tau, br.nbhd);
  result.separation_warning = !check_separation(pairs, bn, panel.n(), nbhds);
  return result;
}

std::string detection_to_json(const DetectionResult& result) {
  nlohmann::json j;
  j["mode"] = result.mode;
  j["k_hat"] = result.k_hat;
  j["omega_used"] = result.omega_used;
  j["q_stat"] = result.q_stat;
  if (result.delta_hat)
    j["delta_hat"] = *result.delta_hat;
  else
    j["delta_hat"] = nullptr;
  j["separation_warning"] = result.separation_warning;
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& br : result.breaks) {
    nlohmann::json b;
    b["tau"] = br.tau;
    if (result.mode == "twoway")
      b["s"] = br.nbhd_id;
    else
      b["s"] = nullptr;
    b["stat_value"] = br.stat;
    b["gamma"] = std::vector<double>(br.gamma.data(), br.gamma.data() + br.gamma.size());
    b["boundary_clipped"] = br.boundary_clipped;
    arr.push_back(b);
  }
  j["breaks"] = arr;
  return j.dump(2);
}

void write_detection_json(const DetectionResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(errc::io, "cannot write detection result: " + path);
  out << detection_to_json(result) << '\n';
}

}  // namespace mosum
