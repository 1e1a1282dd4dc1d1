#include "mosum/null_limit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <random>

#include "json.hpp"
#include "mosum/errors.hpp"
#include "mosum/parallel.hpp"
#include "mosum/rng.hpp"
#include "mosum/stats_util.hpp"

namespace mosum {

double g_kernel(double zeta) {
  double z = std::abs(zeta);
  if (z < 1.0) return (18.0 * z - 24.0) * z + 8.0;
  if (z < 2.0) return (2.0 * z - 8.0) * z + 8.0;
  return 0.0;
}

namespace {

double kernel_p(double z) {
  if (z < 1.0) return (15.0 * z - 20.0) * z + 8.0;
  if (z < 2.0) return (3.0 * z - 12.0) * z + 12.0;
  return 0.0;
}

double kernel_q(double z) {
  if (z < 1.0) return (3.0 * z - 4.0) * z;
  if (z < 2.0) return (-z + 4.0) * z - 4.0;
  return 0.0;
}

}  // namespace

double dependent_kernel(double zeta, double rho) {
  double z = std::abs(zeta);
  return rho * rho * kernel_p(z) + kernel_q(z);
}

namespace {

std::vector<double> scaled_shape(int bn, double (*kernel)(double)) {
  std::vector<double> shape(static_cast<std::size_t>(2 * bn));
  const double inv_bn2 = 1.0 / (static_cast<double>(bn) * bn);
  for (int d = 0; d < 2 * bn; ++d)
    shape[static_cast<std::size_t>(d)] = kernel(static_cast<double>(d) / bn) * inv_bn2;
  return shape;
}

int intersection_size(const std::vector<int>& a, const std::vector<int>& b) {
  std::size_t i = 0, j = 0;
  int cnt = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      ++cnt;
      ++i;
      ++j;
    } else if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return cnt;
}

void check_window(int n, int bn) {
  require(bn >= 1, errc::config, "limit covariance: bandwidth must be positive");
  require(n >= 2 * bn + 1, errc::config, "limit covariance: need n >= 2*bn + 1");
}

}  // namespace

double LimitCovariance::entry(int row1, int s1, int row2, int s2) const {
  const int d = std::abs(row1 - row2);
  if (d >= 2 * bn) return 0.0;
  const double diag_part = shape[static_cast<std::size_t>(d)];
  switch (mode) {
    case Mode::global:
      return static_cast<double>(p) * diag_part;
    case Mode::twoway:
      return weights(s1, s2) * diag_part;
    case Mode::dependent:
      return weights(s1, s2) * diag_part +
             weights_cross(s1, s2) * shape_cross[static_cast<std::size_t>(d)];
  }
  return 0.0;
}

namespace {

Eigen::MatrixXd overlap_weights(const NeighborhoodSet& nbhds) {
  const int s_count = nbhds.size();
  Eigen::MatrixXd w(s_count, s_count);
  for (int a = 0; a < s_count; ++a)
    for (int b = a; b < s_count; ++b) {
      double inter = intersection_size(nbhds[a].members, nbhds[b].members);
      double norm = std::sqrt(static_cast<double>(nbhds[a].members.size()) *
                              static_cast<double>(nbhds[b].members.size()));
      w(a, b) = w(b, a) = inter / norm;
    }
  return w;
}

}  // namespace

LimitCovariance cov_global(int n, int bn, int p) {
  return cov_global_custom(n, bn, p, scaled_shape(bn, &g_kernel));
}

LimitCovariance cov_global_custom(int n, int bn, int p, std::vector<double> shape) {
  check_window(n, bn);
  require(p >= 1, errc::config, "limit covariance: p must be positive");
  require(static_cast<int>(shape.size()) == 2 * bn, errc::config,
          "limit covariance: lag profile must have length 2*bn");
  LimitCovariance cov;
  cov.mode = LimitCovariance::Mode::global;
  cov.n_eff = n - 2 * bn;
  cov.bn = bn;
  cov.p = p;
  cov.shape = std::move(shape);
  return cov;
}

LimitCovariance cov_twoway(int n, int bn, const NeighborhoodSet& nbhds) {
  return cov_twoway_custom(n, bn, nbhds, scaled_shape(bn, &g_kernel));
}

LimitCovariance cov_twoway_custom(int n, int bn, const NeighborhoodSet& nbhds,
                                  std::vector<double> shape) {
  check_window(n, bn);
  require(static_cast<int>(shape.size()) == 2 * bn, errc::config,
          "limit covariance: lag profile must have length 2*bn");
  LimitCovariance cov;
  cov.mode = LimitCovariance::Mode::twoway;
  cov.n_eff = n - 2 * bn;
  cov.bn = bn;
  cov.p = nbhds.p;
  cov.shape = std::move(shape);
  cov.nbhds = nbhds;
  cov.weights = overlap_weights(nbhds);
  return cov;
}

LimitCovariance cov_dependent(int n, int bn, const NeighborhoodSet& nbhds,
                              const Eigen::MatrixXd& corr, double corr_cutoff) {
  check_window(n, bn);
  require(corr.rows() == nbhds.p && corr.cols() == nbhds.p, errc::config,
          "limit covariance: correlation matrix must be p x p");
  require(corr_cutoff >= 0.0, errc::config, "limit covariance: cutoff must be non-negative");
  LimitCovariance cov;
  cov.mode = LimitCovariance::Mode::dependent;
  cov.n_eff = n - 2 * bn;
  cov.bn = bn;
  cov.p = nbhds.p;
  cov.shape = scaled_shape(bn, &kernel_q);
  cov.shape_cross = scaled_shape(bn, &kernel_p);
  cov.nbhds = nbhds;

  cov.rho2.resize(nbhds.p, nbhds.p);
  for (int i = 0; i < nbhds.p; ++i)
    for (int j = 0; j < nbhds.p; ++j) {
      double r = i == j ? 1.0 : corr(i, j);
      if (std::abs(r) < corr_cutoff && i != j) r = 0.0;
      cov.rho2(i, j) = r * r;
    }

  const int s_count = nbhds.size();
  cov.weights.resize(s_count, s_count);
  cov.weights_cross.resize(s_count, s_count);
  for (int a = 0; a < s_count; ++a)
    for (int b = a; b < s_count; ++b) {
      std::vector<int> inter;
      std::set_intersection(nbhds[a].members.begin(), nbhds[a].members.end(),
                            nbhds[b].members.begin(), nbhds[b].members.end(),
                            std::back_inserter(inter));
      double norm = std::sqrt(static_cast<double>(nbhds[a].members.size()) *
                              static_cast<double>(nbhds[b].members.size()));
      double w2 = 0.0;
      for (int l1 : inter)
        for (int l2 : inter) w2 += cov.rho2(l1, l2);
      cov.weights(a, b) = cov.weights(b, a) = static_cast<double>(inter.size()) / norm;
      cov.weights_cross(a, b) = cov.weights_cross(b, a) = w2 / norm;
    }
  return cov;
}

namespace {

// Lower Cholesky factor of a banded symmetric Toeplitz matrix, stored by
// sub-diagonal: lb(r, j) = L(j + r, j).
struct BandedFactor {
  int n = 0;
  int band = 0;
  Eigen::MatrixXd lb;

  void matvec(const Eigen::VectorXd& w, Eigen::VectorXd& z) const {
    z.setZero();
    for (int j = 0; j < n; ++j) {
      const double wj = w(j);
      const int top = std::min(band, n - 1 - j);
      for (int r = 0; r <= top; ++r) z(j + r) += lb(r, j) * wj;
    }
  }
};

bool banded_toeplitz_cholesky(const std::vector<double>& c, int n, int band, BandedFactor& out) {
  out.n = n;
  out.band = band;
  out.lb.setZero(band + 1, n);
  for (int j = 0; j < n; ++j) {
    for (int i = j; i <= std::min(j + band, n - 1); ++i) {
      const int d = i - j;
      double sum = d < static_cast<int>(c.size()) ? c[static_cast<std::size_t>(d)] : 0.0;
      const int lo = std::max(0, i - band);
      for (int l = lo; l < j; ++l) sum -= out.lb(i - l, l) * out.lb(j - l, l);
      if (i == j) {
        if (!(sum > 0.0) || !std::isfinite(sum)) return false;
        out.lb(0, j) = std::sqrt(sum);
      } else {
        out.lb(d, j) = sum / out.lb(0, j);
      }
    }
  }
  return true;
}

// Factor with positive-semidefinite fallback: exact banded Cholesky, then a
// small diagonal jitter, then (for moderate sizes) eigenvalue clipping.
struct ToeplitzFactor {
  bool banded = true;
  BandedFactor bf;
  Eigen::MatrixXd dense;

  void matvec(const Eigen::VectorXd& w, Eigen::VectorXd& z) const {
    if (banded)
      bf.matvec(w, z);
    else
      z.noalias() = dense * w;
  }
};

ToeplitzFactor factor_toeplitz(std::vector<double> c, int n) {
  const int band = std::min(static_cast<int>(c.size()) - 1, n - 1);
  ToeplitzFactor f;
  if (banded_toeplitz_cholesky(c, n, band, f.bf)) return f;
  std::vector<double> cj = c;
  cj[0] += 1e-10 * std::max(std::abs(c[0]), 1.0);
  if (banded_toeplitz_cholesky(cj, n, band, f.bf)) return f;
  require(n <= 4000, errc::numeric,
          "threshold sampling: lag profile is not positive definite and is too large for the "
          "dense fallback");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = std::max(0, i - band); j <= std::min(n - 1, i + band); ++j)
      m(i, j) = std::abs(i - j) < static_cast<int>(c.size())
                    ? c[static_cast<std::size_t>(std::abs(i - j))]
                    : 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  require(es.info() == Eigen::Success, errc::numeric,
          "threshold sampling: eigendecomposition failed");
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  f.banded = false;
  f.dense = es.eigenvectors() * ev.asDiagonal();
  return f;
}

Eigen::MatrixXd dense_gauss_factor(const Eigen::MatrixXd& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::MatrixXd mj = m;
  const double jitter = 1e-10 * std::max(m.diagonal().mean(), 1.0);
  mj.diagonal().array() += jitter;
  Eigen::LLT<Eigen::MatrixXd> llt2(mj);
  if (llt2.info() == Eigen::Success) return llt2.matrixL();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  require(es.info() == Eigen::Success, errc::numeric,
          "threshold sampling: eigendecomposition failed");
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal();
}

bool all_contiguous(const NeighborhoodSet& nbhds) {
  for (const auto& nb : nbhds.items)
    if (nb.members.back() - nb.members.front() + 1 != static_cast<int>(nb.members.size()))
      return false;
  return true;
}

}  // namespace

std::vector<double> sample_max(const LimitCovariance& cov, int reps, std::uint64_t seed,
                               unsigned threads) {
  require(reps >= 1, errc::config, "sample_max: need at least one replicate");
  std::vector<double> draws(static_cast<std::size_t>(reps));
  const int n_eff = cov.n_eff;

  if (cov.mode == LimitCovariance::Mode::global) {
    std::vector<double> c(cov.shape.size());
    for (std::size_t d = 0; d < cov.shape.size(); ++d) c[d] = cov.p * cov.shape[d];
    ToeplitzFactor f = factor_toeplitz(std::move(c), n_eff);
    parallel_ranges(static_cast<std::size_t>(reps), threads, [&](std::size_t b, std::size_t e) {
      Eigen::VectorXd w(n_eff), z(n_eff);
      for (std::size_t r = b; r < e; ++r) {
        auto eng = substream(seed, stream_tag::threshold + r);
        std::normal_distribution<double> nd(0.0, 1.0);
        for (int i = 0; i < n_eff; ++i) w(i) = nd(eng);
        f.matvec(w, z);
        draws[r] = z.maxCoeff();
      }
    });
    return draws;
  }

  if (cov.mode == LimitCovariance::Mode::twoway) {
    const NeighborhoodSet& nbhds = *cov.nbhds;
    const int s_count = nbhds.size();
    const int p = cov.p;
    ToeplitzFactor f = factor_toeplitz(cov.shape, n_eff);
    const bool contiguous = all_contiguous(nbhds);
    std::vector<double> scale(static_cast<std::size_t>(s_count));
    for (int s = 0; s < s_count; ++s)
      scale[static_cast<std::size_t>(s)] =
          1.0 / std::sqrt(static_cast<double>(nbhds[s].members.size()));
    parallel_ranges(static_cast<std::size_t>(reps), threads, [&](std::size_t b, std::size_t e) {
      Eigen::VectorXd w(n_eff), zcol(n_eff);
      Eigen::MatrixXd z(n_eff, p);
      Eigen::MatrixXd prefix;
      if (contiguous) prefix.resize(n_eff, p + 1);
      for (std::size_t r = b; r < e; ++r) {
        auto eng = substream(seed, stream_tag::threshold + r);
        std::normal_distribution<double> nd(0.0, 1.0);
        for (int j = 0; j < p; ++j) {
          for (int i = 0; i < n_eff; ++i) w(i) = nd(eng);
          f.matvec(w, zcol);
          z.col(j) = zcol;
        }
        double best = -std::numeric_limits<double>::infinity();
        if (contiguous) {
          prefix.col(0).setZero();
          for (int j = 0; j < p; ++j) prefix.col(j + 1) = prefix.col(j) + z.col(j);
          for (int s = 0; s < s_count; ++s) {
            const auto& mem = nbhds[s].members;
            const double sc = scale[static_cast<std::size_t>(s)];
            for (int i = 0; i < n_eff; ++i) {
              double v = sc * (prefix(i, mem.back() + 1) - prefix(i, mem.front()));
              if (v > best) best = v;
            }
          }
        } else {
          for (int s = 0; s < s_count; ++s) {
            const auto& mem = nbhds[s].members;
            const double sc = scale[static_cast<std::size_t>(s)];
            for (int i = 0; i < n_eff; ++i) {
              double acc = 0.0;
              for (int j : mem) acc += z(i, j);
              double v = sc * acc;
              if (v > best) best = v;
            }
          }
        }
        draws[r] = best;
      }
    });
    return draws;
  }

  // dependent mode: dense assembly of the (n_eff * S) field covariance
  const std::int64_t dim = cov.dim();
  require(dim <= 4000, errc::numeric,
          "sample_max: dependent mode needs n_eff * S <= 4000 (got " + std::to_string(dim) + ")");
  const int s_count = cov.groups();
  Eigen::MatrixXd m(dim, dim);
  for (int r1 = 0; r1 < n_eff; ++r1)
    for (int s1 = 0; s1 < s_count; ++s1)
      for (int r2 = 0; r2 < n_eff; ++r2)
        for (int s2 = 0; s2 < s_count; ++s2)
          m(r1 * s_count + s1, r2 * s_count + s2) = cov.entry(r1, s1, r2, s2);
  Eigen::MatrixXd factor = dense_gauss_factor(m);
  parallel_ranges(static_cast<std::size_t>(reps), threads, [&](std::size_t b, std::size_t e) {
    Eigen::VectorXd w(dim), z(dim);
    for (std::size_t r = b; r < e; ++r) {
      auto eng = substream(seed, stream_tag::threshold + r);
      std::normal_distribution<double> nd(0.0, 1.0);
      for (std::int64_t i = 0; i < dim; ++i) w(i) = nd(eng);
      z.noalias() = factor * w;
      draws[r] = z.maxCoeff();
    }
  });
  return draws;
}

ThresholdResult threshold_from_samples(std::vector<double> samples, double alpha,
                                       std::uint64_t seed) {
  require(!samples.empty(), errc::config, "threshold: empty sample set");
  require(alpha > 0.0 && alpha < 1.0, errc::config, "threshold: alpha must be in (0, 1)");
  ThresholdResult r;
  r.alpha = alpha;
  r.reps = static_cast<int>(samples.size());
  r.seed = seed;
  r.omega = upper_threshold(samples, alpha);
  for (int q : {50, 90, 95, 99})
    r.quantiles[std::to_string(q)] = empirical_quantile(samples, q / 100.0);
  return r;
}

ThresholdResult compute_threshold(const LimitCovariance& cov, double alpha, int reps,
                                  std::uint64_t seed, unsigned threads) {
  return threshold_from_samples(sample_max(cov, reps, seed, threads), alpha, seed);
}

std::string threshold_to_json(const ThresholdResult& r) {
  nlohmann::json j;
  j["alpha"] = r.alpha;
  j["omega"] = r.omega;
  j["reps"] = r.reps;
  j["seed"] = r.seed;
  j["quantiles"] = r.quantiles;
  return j.dump(2);
}

void write_threshold_json(const ThresholdResult& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(errc::io, "cannot write threshold file: " + path);
  out << threshold_to_json(r) << '\n';
}

ThresholdResult load_threshold_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::io, "cannot open threshold file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail(errc::validation, std::string("threshold file parse error: ") + e.what());
  }
  ThresholdResult r;
  try {
    r.alpha = j.at("alpha").get<double>();
    r.omega = j.at("omega").get<double>();
    r.reps = j.value("reps", 0);
    r.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("quantiles"))
      for (auto it = j["quantiles"].begin(); it != j["quantiles"].end(); ++it)
        r.quantiles[it.key()] = it.value().get<double>();
  } catch (const std::exception& e) {
    fail(errc::validation, std::string("threshold file: missing or bad field: ") + e.what());
  }
  return r;
}

}  // namespace mosum
