#include "mosum/mosum_stats.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "mosum/errors.hpp"

namespace mosum {

MosumProfile jump_profile(const Eigen::MatrixXd& values, int bn, const Eigen::VectorXd& sigma) {
  const int n = static_cast<int>(values.rows());
  const int p = static_cast<int>(values.cols());
  require(bn >= 1, errc::config, "jump_profile: bandwidth must be positive");
  require(n >= 2 * bn + 1, errc::config,
          "jump_profile: need n >= 2*bn + 1 (n=" + std::to_string(n) +
              ", bn=" + std::to_string(bn) + ")");
  require(sigma.size() == p, errc::config, "jump_profile: scale vector length mismatch");
  for (int j = 0; j < p; ++j)
    require(sigma(j) > 0.0 && std::isfinite(sigma(j)), errc::numeric,
            "jump_profile: scales must be positive finite");

  // prefix(k) = sum of the first k rows
  Eigen::MatrixXd prefix(n + 1, p);
  prefix.row(0).setZero();
  for (int t = 0; t < n; ++t) prefix.row(t + 1) = prefix.row(t) + values.row(t);

  MosumProfile prof;
  prof.n = n;
  prof.bn = bn;
  prof.v.resize(n - 2 * bn, p);
  for (int r = 0; r < n - 2 * bn; ++r) {
    const int i = bn + 1 + r;  // 1-based window center
    // right window rows [i-1, i+bn-2], left window rows [i-bn-1, i-2]
    prof.v.row(r) = (prefix.row(i + bn - 1) - prefix.row(i - 1)) -
                    (prefix.row(i - 1) - prefix.row(i - bn - 1));
  }
  const double inv_bn = 1.0 / static_cast<double>(bn);
  for (int j = 0; j < p; ++j) prof.v.col(j) *= inv_bn / sigma(j);
  return prof;
}

MosumProfile jump_profile(const Panel& panel, int bn, const LongRunEstimate& lrv) {
  require(lrv.p() == panel.p(), errc::config,
          "jump_profile: scale estimate does not match panel width");
  return jump_profile(panel.values, bn, lrv.sigma);
}

double Centering::group_total(const Neighborhood& nb) const {
  double acc = 0.0;
  for (int j : nb.members) acc += per_series(j);
  return acc;
}

Centering asymptotic_centering(int bn, int p) {
  require(bn >= 1 && p >= 1, errc::config, "asymptotic_centering: bad arguments");
  Centering c;
  c.per_series = Eigen::VectorXd::Constant(p, 2.0 / static_cast<double>(bn));
  return c;
}

Centering centering_from_autocov(const std::vector<Eigen::VectorXd>& gamma,
                                 const Eigen::VectorXd& sigma, int bn) {
  const int p = static_cast<int>(gamma.size());
  require(p >= 1, errc::config, "centering_from_autocov: no series");
  require(sigma.size() == p, errc::config, "centering_from_autocov: scale length mismatch");
  Centering c;
  c.per_series.resize(p);
  for (int j = 0; j < p; ++j) {
    const Eigen::VectorXd& g = gamma[static_cast<std::size_t>(j)];
    require(g.size() >= 2 * bn, errc::config,
            "centering_from_autocov: need autocovariances up to lag 2*bn - 1");
    // window cross-correlation weights: 2*bn - 3m (m <= bn), -(2*bn - m) beyond
    double acc = 2.0 * static_cast<double>(bn) * g(0);
    for (int m = 1; m < 2 * bn; ++m) {
      double w = m <= bn ? 2.0 * bn - 3.0 * m : -(2.0 * bn - static_cast<double>(m));
      acc += 2.0 * w * g(m);
    }
    c.per_series(j) = acc / (static_cast<double>(bn) * bn * sigma(j) * sigma(j));
  }
  return c;
}

Centering estimated_centering(const Eigen::MatrixXd& values, const Eigen::VectorXd& sigma,
                              int bn) {
  const int n = static_cast<int>(values.rows());
  const int p = static_cast<int>(values.cols());
  require(n >= 2 * bn, errc::config, "estimated_centering: sample too short for lag window");
  std::vector<Eigen::VectorXd> gamma;
  gamma.reserve(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j) {
    Eigen::ArrayXd x = values.col(j).array() - values.col(j).mean();
    Eigen::VectorXd g(2 * bn);
    for (int h = 0; h < 2 * bn; ++h)
      g(h) = (x.head(n - h) * x.tail(n - h)).sum() / static_cast<double>(n);
    gamma.push_back(std::move(g));
  }
  return centering_from_autocov(gamma, sigma, bn);
}

StatProfile stat_global(const MosumProfile& prof, const Centering& centering) {
  require(centering.per_series.size() == prof.p(), errc::config,
          "stat_global: centering length mismatch");
  StatProfile st;
  st.n = prof.n;
  st.bn = prof.bn;
  st.values.resize(prof.rows(), 1);
  const double cbar = centering.total();
  st.max = -std::numeric_limits<double>::infinity();
  for (int r = 0; r < prof.rows(); ++r) {
    double q = prof.v.row(r).squaredNorm() - cbar;
    st.values(r, 0) = q;
    if (q > st.max) {
      st.max = q;
      st.argmax_time = prof.time_of_row(r);
    }
  }
  st.argmax_nbhd = -1;
  return st;
}

StatProfile stat_twoway(const MosumProfile& prof, const NeighborhoodSet& nbhds,
                        const Centering& centering) {
  require(nbhds.p == prof.p(), errc::config, "stat_twoway: neighborhood set width mismatch");
  require(centering.per_series.size() == prof.p(), errc::config,
          "stat_twoway: centering length mismatch");
  StatProfile st;
  st.n = prof.n;
  st.bn = prof.bn;
  const int s_count = nbhds.size();
  st.values.resize(prof.rows(), s_count);
  st.nbhd_ids.resize(static_cast<std::size_t>(s_count));
  st.max = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < s_count; ++s) {
    const Neighborhood& nb = nbhds[s];
    st.nbhd_ids[static_cast<std::size_t>(s)] = nb.id;
    const double cbar_s = centering.group_total(nb);
    const double scale = 1.0 / std::sqrt(static_cast<double>(nb.members.size()));
    for (int r = 0; r < prof.rows(); ++r) {
      double acc = 0.0;
      for (int j : nb.members) acc += prof.v(r, j) * prof.v(r, j);
      st.values(r, s) = scale * (acc - cbar_s);
    }
  }
  for (int r = 0; r < prof.rows(); ++r)
    for (int s = 0; s < s_count; ++s)
      if (st.values(r, s) > st.max) {
        st.max = st.values(r, s);
        st.argmax_time = prof.time_of_row(r);
        st.argmax_nbhd = s;
      }
  return st;
}

void write_stat_csv(const StatProfile& stat, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(errc::io, "cannot write statistic profile: " + path);
  char buf[64];
  if (stat.nbhd_ids.empty()) {
    out << "time,value\n";
    for (int r = 0; r < stat.rows(); ++r) {
      std::snprintf(buf, sizeof buf, "%.17g", stat.values(r, 0));
      out << stat.time_of_row(r) << ',' << buf << '\n';
    }
  } else {
    out << "time,nbhd,value\n";
    for (int r = 0; r < stat.rows(); ++r)
      for (std::size_t s = 0; s < stat.nbhd_ids.size(); ++s) {
        std::snprintf(buf, sizeof buf, "%.17g", stat.values(r, static_cast<int>(s)));
        out << stat.time_of_row(r) << ',' << stat.nbhd_ids[s] << ',' << buf << '\n';
      }
  }
  if (!out) fail(errc::io, "failed while writing statistic profile: " + path);
}

}  // namespace mosum
