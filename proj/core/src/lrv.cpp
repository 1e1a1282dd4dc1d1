#include "mosum/lrv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <vector>

#include "json.hpp"
#include "mosum/errors.hpp"

namespace mosum {

double phi(double x) {
  if (x >= 1.0) return std::log(2.0);
  if (x >= 0.0) return -std::log1p(-x + 0.5 * x * x);
  if (x >= -1.0) return std::log1p(x + 0.5 * x * x);
  return -std::log(2.0);
}

double phi_alpha(double x, double alpha) {
  require(alpha > 0.0, errc::config, "phi_alpha: alpha must be positive");
  return phi(alpha * x) / alpha;
}

BlockSamples block_var_samples(const Eigen::MatrixXd& values, int m) {
  const int n = static_cast<int>(values.rows());
  const int p = static_cast<int>(values.cols());
  require(m >= 1, errc::config, "block_var_samples: block length must be positive");
  require(p >= 1, errc::validation, "block_var_samples: empty panel");
  const int n_blocks = n / m - 1;
  require(n_blocks >= 2, errc::validation,
          "block_var_samples: too few blocks (need n >= 3m, got n=" + std::to_string(n) +
              ", m=" + std::to_string(m) + ")");
  BlockSamples bs;
  bs.m = m;
  bs.n_blocks = n_blocks;
  bs.psi.resize(n_blocks + 1, p);
  for (int k = 0; k <= n_blocks; ++k)
    bs.psi.row(k) = values.middleRows(k * m, m).colwise().mean();
  return bs;
}

Eigen::VectorXd BlockSamples::pair_samples(int i, int j) const {
  require(i >= 0 && i < psi.cols() && j >= 0 && j < psi.cols(), errc::config,
          "pair_samples: series index out of range");
  Eigen::VectorXd out(n_blocks);
  const double half_m = 0.5 * static_cast<double>(m);
  for (int k = 1; k <= n_blocks; ++k)
    out(k - 1) = half_m * (psi(k, j) - psi(k - 1, j)) * (psi(k, i) - psi(k - 1, i));
  return out;
}

double solve_h_zero(const Eigen::VectorXd& samples, double alpha) {
  require(samples.size() > 0, errc::config, "solve_h_zero: no samples");
  require(alpha > 0.0, errc::config, "solve_h_zero: alpha must be positive");
  const double smin = samples.minCoeff();
  const double smax = samples.maxCoeff();
  if (smin == smax) return smin;
  auto h = [&](double u) {
    double acc = 0.0;
    for (int k = 0; k < samples.size(); ++k) acc += phi_alpha(samples(k) - u, alpha);
    return acc / static_cast<double>(samples.size());
  };
  double lo = smin - std::log(2.0) / alpha;
  double hi = smax + std::log(2.0) / alpha;
  // h is non-increasing, positive at lo and negative at hi
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (hi - lo <= 1e-10 * (1.0 + std::abs(mid))) return mid;
    if (h(mid) >= 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

int default_block_size(int n, int p) {
  require(n >= 2 && p >= 1, errc::config, "default_block_size: need n >= 2, p >= 1");
  double np = static_cast<double>(n) * static_cast<double>(p);
  int m = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n) / std::log(np))));
  return std::max(m, 2);
}

LongRunEstimate estimate_lrv(const Eigen::MatrixXd& values, std::optional<int> m_opt, bool full) {
  const int n = static_cast<int>(values.rows());
  const int p = static_cast<int>(values.cols());
  require(n >= 2 && p >= 1, errc::validation, "estimate_lrv: panel too small");
  const int m = m_opt.value_or(default_block_size(n, p));
  require(m >= 1, errc::config, "estimate_lrv: block length must be positive");
  BlockSamples bs = block_var_samples(values, m);
  const int n0 = bs.n_blocks;
  require(n0 >= 8, errc::validation,
          "estimate_lrv: too few blocks (need at least 8, got " + std::to_string(n0) +
              "); decrease m or provide more data");

  // Robust pre-scale: interquartile mean of the sorted block samples. Sorting
  // matters — a level shift anywhere in the sample produces a couple of huge
  // block differences, and ranking pushes them outside the middle half instead
  // of letting them inflate the scale (a positional trim would keep them).
  Eigen::VectorXd prescale(p);
  const int k_lo = (n0 + 3) / 4;         // ceil(n0 / 4)
  const int k_hi = (3 * n0) / 4;         // floor(3 n0 / 4)
  for (int i = 0; i < p; ++i) {
    Eigen::VectorXd s = bs.pair_samples(i, i);
    std::vector<double> sorted(s.data(), s.data() + s.size());
    std::sort(sorted.begin(), sorted.end());
    double acc = 0.0;
    for (int k = std::max(k_lo, 1); k <= k_hi; ++k) acc += sorted[static_cast<std::size_t>(k - 1)];
    double v = 2.0 * acc / static_cast<double>(n0);
    prescale(i) = std::sqrt(std::max(v, 0.0));
  }

  // The tuning scale shrinks as the sample scale grows, which keeps the root
  // exactly equivariant: rescaling a series by c rescales its estimate by c.
  const double rate = std::sqrt(static_cast<double>(m) / static_cast<double>(n));
  auto tuning = [&](int i, int j) {
    return rate / std::max(prescale(i) * prescale(j), 1e-12);
  };

  double mean_var = 0.0;
  for (int j = 0; j < p; ++j) {
    Eigen::ArrayXd col = values.col(j).array();
    mean_var += (col - col.mean()).square().sum() / std::max(1, n - 1);
  }
  mean_var /= static_cast<double>(p);
  require(mean_var > 0.0, errc::numeric, "estimate_lrv: panel has no variation");
  const double floor_eps = 1e-8 * mean_var;

  LongRunEstimate est;
  est.m = m;
  est.n_blocks = n0;
  est.sigma.resize(p);
  Eigen::VectorXd diag_var(p);
  for (int i = 0; i < p; ++i) {
    double v = solve_h_zero(bs.pair_samples(i, i), tuning(i, i));
    diag_var(i) = std::max(v, floor_eps);
    est.sigma(i) = std::sqrt(diag_var(i));
  }

  if (full) {
    Eigen::MatrixXd cov(p, p);
    for (int i = 0; i < p; ++i) {
      cov(i, i) = diag_var(i);
      for (int j = i + 1; j < p; ++j) {
        double v = solve_h_zero(bs.pair_samples(i, j), tuning(i, j));
        cov(i, j) = cov(j, i) = v;
      }
    }
    Eigen::MatrixXd corr(p, p);
    for (int i = 0; i < p; ++i) {
      corr(i, i) = 1.0;
      for (int j = i + 1; j < p; ++j) {
        double r = cov(i, j) / (est.sigma(i) * est.sigma(j));
        r = std::clamp(r, -1.0, 1.0);
        corr(i, j) = corr(j, i) = r;
      }
    }
    est.sigma_full = std::move(cov);
    est.corr = std::move(corr);
  }
  return est;
}

LongRunEstimate known_lrv(Eigen::VectorXd sigma) {
  require(sigma.size() > 0, errc::validation, "known_lrv: empty scale vector");
  for (int i = 0; i < sigma.size(); ++i)
    require(std::isfinite(sigma(i)) && sigma(i) > 0.0, errc::validation,
            "known_lrv: scales must be positive finite");
  LongRunEstimate est;
  est.sigma = std::move(sigma);
  return est;
}

LongRunEstimate load_lrv_json(const std::string& path, int p) {
  std::ifstream in(path);
  if (!in) fail(errc::io, "cannot open scale file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail(errc::validation, std::string("scale file parse error: ") + e.what());
  }
  const nlohmann::json* arr = nullptr;
  if (j.is_array())
    arr = &j;
  else if (j.is_object() && j.contains("sigma") && j["sigma"].is_array())
    arr = &j["sigma"];
  else
    fail(errc::validation, "scale file: expected an array or {\"sigma\": [...]}");
  if (static_cast<int>(arr->size()) != p)
    fail(errc::validation, "scale file: expected " + std::to_string(p) + " entries, got " +
                               std::to_string(arr->size()));
  Eigen::VectorXd sigma(p);
  for (int i = 0; i < p; ++i) {
    if (!(*arr)[static_cast<std::size_t>(i)].is_number())
      fail(errc::validation, "scale file: entries must be numbers");
    sigma(i) = (*arr)[static_cast<std::size_t>(i)].get<double>();
  }
  return known_lrv(std::move(sigma));
}

namespace {

nlohmann::json lrv_json(const LongRunEstimate& est) {
  nlohmann::json j;
  j["sigma"] = std::vector<double>(est.sigma.data(), est.sigma.data() + est.sigma.size());
  j["m"] = est.m;
  j["n_blocks"] = est.n_blocks;
  if (est.sigma_full) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < est.sigma_full->rows(); ++i) {
      nlohmann::json r = nlohmann::json::array();
      for (int k = 0; k < est.sigma_full->cols(); ++k) r.push_back((*est.sigma_full)(i, k));
      rows.push_back(r);
    }
    j["sigma_full"] = rows;
  }
  if (est.corr) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < est.corr->rows(); ++i) {
      nlohmann::json r = nlohmann::json::array();
      for (int k = 0; k < est.corr->cols(); ++k) r.push_back((*est.corr)(i, k));
      rows.push_back(r);
    }
    j["corr"] = rows;
  }
  return j;
}

}  // namespace

std::string lrv_to_json(const LongRunEstimate& est) { return lrv_json(est).dump(2); }

void write_lrv_json(const LongRunEstimate& est, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(errc::io, "cannot write scale file: " + path);
  out << lrv_to_json(est) << '\n';
}

}  // namespace mosum
