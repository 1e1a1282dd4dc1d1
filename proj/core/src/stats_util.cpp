#include "mosum/stats_util.hpp"

#include <algorithm>
#include <cmath>

#include "mosum/errors.hpp"

namespace mosum {

double upper_threshold(std::vector<double> samples, double alpha) {
  require(!samples.empty(), errc::config, "upper_threshold: empty sample set");
  require(alpha >= 0.0 && alpha < 1.0, errc::config, "upper_threshold: alpha must be in [0, 1)");
  std::sort(samples.begin(), samples.end());
  const double r = static_cast<double>(samples.size());
  for (std::size_t i = 0; i < samples.size();) {
    std::size_t j = i;
    while (j + 1 < samples.size() && samples[j + 1] == samples[i]) ++j;
    double frac_greater = static_cast<double>(samples.size() - (j + 1)) / r;
    if (frac_greater <= alpha) return samples[i];
    i = j + 1;
  }
  return samples.back();
}

double empirical_quantile(std::vector<double> samples, double q) {
  require(q > 0.0 && q <= 1.0, errc::config, "empirical_quantile: q must be in (0, 1]");
  return upper_threshold(std::move(samples), 1.0 - q);
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  require(!a.empty() && !b.empty(), errc::config, "ks_two_sample: empty sample set");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t ia = 0, ib = 0;
  double d = 0.0;
  while (ia < a.size() && ib < b.size()) {
    double x = std::min(a[ia], b[ib]);
    while (ia < a.size() && a[ia] <= x) ++ia;
    while (ib < b.size() && b[ib] <= x) ++ib;
    d = std::max(d, std::abs(static_cast<double>(ia) / na - static_cast<double>(ib) / nb));
  }
  return d;
}

double mean(const std::vector<double>& x) {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double variance(const std::vector<double>& x) {
  if (x.size() < 2) return 0.0;
  double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

Quadrature gauss_legendre_16(double a, double b) {
  static const double kNodes[8] = {
      0.0950125098376374, 0.2816035507792589, 0.4580167776572274, 0.6178762444026438,
      0.7554044083550030, 0.8656312023878318, 0.9445750230732326, 0.9894009349916499,
  };
  static const double kWeights[8] = {
      0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
      0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541,
  };
  Quadrature q;
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  for (int i = 7; i >= 0; --i) {
    q.nodes.push_back(mid - half * kNodes[i]);
    q.weights.push_back(half * kWeights[i]);
  }
  for (int i = 0; i < 8; ++i) {
    q.nodes.push_back(mid + half * kNodes[i]);
    q.weights.push_back(half * kWeights[i]);
  }
  return q;
}

}  // namespace mosum
