#include "mosum/dgp.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>

#include "mosum/errors.hpp"
#include "mosum/rng.hpp"
#include "mosum/stats_util.hpp"

namespace mosum {

namespace {
constexpr int kArBurnin = 512;
}

ErrorModel iid_model(TailKind tail, double df) {
  ErrorModel m;
  m.kind = NoiseKind::iid;
  m.tail = tail;
  m.df = df;
  return m;
}

ErrorModel ar1_model(double phi_min, double phi_max, TailKind tail, double df) {
  require(phi_min <= phi_max && phi_min > -1.0 && phi_max < 1.0, errc::config,
          "ar1_model: need -1 < phi_min <= phi_max < 1");
  ErrorModel m;
  m.kind = NoiseKind::ar1;
  m.tail = tail;
  m.df = df;
  m.coeff_min = phi_min;
  m.coeff_max = phi_max;
  return m;
}

ErrorModel ma_poly_model(double psi_min, double psi_max, double beta, int trunc, TailKind tail,
                         double df) {
  require(psi_min <= psi_max, errc::config, "ma_poly_model: need psi_min <= psi_max");
  require(beta > 1.0, errc::config, "ma_poly_model: beta must exceed 1");
  require(trunc >= 1, errc::config, "ma_poly_model: trunc must be positive");
  ErrorModel m;
  m.kind = NoiseKind::ma_poly;
  m.tail = tail;
  m.df = df;
  m.coeff_min = psi_min;
  m.coeff_max = psi_max;
  m.beta = beta;
  m.trunc = trunc;
  return m;
}

namespace {

double draw_innovation(std::mt19937_64& eng, const ErrorModel& model) {
  if (model.tail == TailKind::gaussian) {
    std::normal_distribution<double> nd(0.0, 1.0);
    return nd(eng);
  }
  std::student_t_distribution<double> td(model.df);
  // scaled to unit variance
  return td(eng) * std::sqrt((model.df - 2.0) / model.df);
}

Eigen::VectorXd draw_coeffs(const ErrorModel& model, int p, std::mt19937_64& eng) {
  if (model.kind == NoiseKind::iid) return Eigen::VectorXd();
  if (model.fixed_coeffs) {
    require(model.fixed_coeffs->size() == p, errc::config,
            "gen_errors: fixed coefficient vector length mismatch");
    return *model.fixed_coeffs;
  }
  Eigen::VectorXd c(p);
  std::uniform_real_distribution<double> ud(model.coeff_min, model.coeff_max);
  for (int j = 0; j < p; ++j) c(j) = model.coeff_min == model.coeff_max ? model.coeff_min : ud(eng);
  return c;
}

}  // namespace

NoiseDraw gen_errors(const ErrorModel& model, int n, int p, std::mt19937_64& eng) {
  require(n >= 1 && p >= 1, errc::config, "gen_errors: need n, p >= 1");
  NoiseDraw draw;
  draw.eps.resize(n, p);
  draw.coeffs = draw_coeffs(model, p, eng);
  draw.longrun_sd.resize(p);
  for (int j = 0; j < p; ++j)
    draw.longrun_sd(j) = longrun_sd(model, draw.coeffs.size() > 0 ? draw.coeffs(j) : 0.0);

  switch (model.kind) {
    case NoiseKind::iid: {
      for (int j = 0; j < p; ++j)
        for (int t = 0; t < n; ++t) draw.eps(t, j) = draw_innovation(eng, model);
      break;
    }
    case NoiseKind::ar1: {
      for (int j = 0; j < p; ++j) {
        const double phi = draw.coeffs(j);
        double x = 0.0;
        for (int t = 0; t < kArBurnin; ++t) x = phi * x + draw_innovation(eng, model);
        for (int t = 0; t < n; ++t) {
          x = phi * x + draw_innovation(eng, model);
          draw.eps(t, j) = x;
        }
      }
      break;
    }
    case NoiseKind::ma_poly: {
      const int trunc = model.trunc;
      if (trunc >= 64) {
        // FFT convolution; the lag weights are linear in the per-series scale,
        // so one unit-kernel spectrum serves every series
        const int full = n + 2 * trunc - 1;
        int nfft = 1;
        while (nfft < full) nfft <<= 1;
        Eigen::FFT<double> fft;
        std::vector<double> ker(static_cast<std::size_t>(nfft), 0.0);
        for (int k = 1; k <= trunc; ++k)
          ker[static_cast<std::size_t>(k - 1)] = std::pow(static_cast<double>(k), -model.beta);
        std::vector<std::complex<double>> kspec, espec;
        fft.fwd(kspec, ker);
        std::vector<double> e(static_cast<std::size_t>(nfft), 0.0), conv;
        for (int j = 0; j < p; ++j) {
          const double psi = draw.coeffs(j);
          std::fill(e.begin(), e.end(), 0.0);
          for (int u = 0; u < n + trunc; ++u)
            e[static_cast<std::size_t>(u)] = draw_innovation(eng, model);
          fft.fwd(espec, e);
          for (int i = 0; i < nfft; ++i) espec[static_cast<std::size_t>(i)] *= kspec[static_cast<std::size_t>(i)];
          fft.inv(conv, espec);
          for (int t = 0; t < n; ++t) draw.eps(t, j) = psi * conv[static_cast<std::size_t>(t + trunc)];
        }
      } else {
        Eigen::VectorXd flipped(trunc);  // weight of innovation e[t+1+u] is k^-beta, k = T-u
        for (int u = 0; u < trunc; ++u)
          flipped(u) = std::pow(static_cast<double>(trunc - u), -model.beta);
        Eigen::VectorXd e(n + trunc);
        for (int j = 0; j < p; ++j) {
          const double psi = draw.coeffs(j);
          for (int u = 0; u < n + trunc; ++u) e(u) = draw_innovation(eng, model);
          for (int t = 0; t < n; ++t)
            draw.eps(t, j) = psi * flipped.dot(e.segment(t + 1, trunc));
        }
      }
      break;
    }
  }
  return draw;
}

void inject_breaks(Eigen::MatrixXd& values, const std::vector<BreakSpec>& breaks) {
  const int n = static_cast<int>(values.rows());
  const int p = static_cast<int>(values.cols());
  for (const auto& br : breaks) {
    require(br.tau >= 1 && br.tau <= n, errc::config, "inject_breaks: tau out of range");
    if (br.members.empty()) {
      values.bottomRows(n - br.tau + 1).array() += br.jump;
    } else {
      for (int j : br.members) {
        require(j >= 0 && j < p, errc::config, "inject_breaks: member out of range");
        values.col(j).tail(n - br.tau + 1).array() += br.jump;
      }
    }
  }
}

Panel simulate_panel(const ErrorModel& model, int n, int p, const std::vector<BreakSpec>& breaks,
                     std::uint64_t seed) {
  auto eng = substream(seed, stream_tag::replicate);
  NoiseDraw draw = gen_errors(model, n, p, eng);
  inject_breaks(draw.eps, breaks);
  Panel panel;
  panel.values = std::move(draw.eps);
  panel.series_ids.resize(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j)
    panel.series_ids[static_cast<std::size_t>(j)] = "s" + std::to_string(j + 1);
  return panel;
}

double longrun_sd(const ErrorModel& model, double coeff) {
  switch (model.kind) {
    case NoiseKind::iid:
      return 1.0;
    case NoiseKind::ar1:
      require(std::abs(coeff) < 1.0, errc::config, "longrun_sd: |phi| must be below 1");
      return 1.0 / (1.0 - coeff);
    case NoiseKind::ma_poly: {
      double s = 0.0;
      for (int k = 1; k <= model.trunc; ++k) s += std::pow(static_cast<double>(k), -model.beta);
      return std::abs(coeff) * s;
    }
  }
  return 1.0;
}

Eigen::VectorXd model_autocov(const ErrorModel& model, double coeff, int lags) {
  require(lags >= 1, errc::config, "model_autocov: lags must be positive");
  Eigen::VectorXd g = Eigen::VectorXd::Zero(lags);
  switch (model.kind) {
    case NoiseKind::iid:
      g(0) = 1.0;
      break;
    case NoiseKind::ar1: {
      const double v0 = 1.0 / (1.0 - coeff * coeff);
      for (int h = 0; h < lags; ++h) g(h) = v0 * std::pow(coeff, h);
      break;
    }
    case NoiseKind::ma_poly: {
      Eigen::VectorXd a(model.trunc);
      for (int k = 1; k <= model.trunc; ++k)
        a(k - 1) = coeff * std::pow(static_cast<double>(k), -model.beta);
      for (int h = 0; h < lags; ++h) {
        double acc = 0.0;
        for (int k = 0; k + h < model.trunc; ++k) acc += a(k) * a(k + h);
        g(h) = acc;
      }
      break;
    }
  }
  return g;
}

namespace {

// window cross-correlation weight at offset m (two length-bn windows)
double window_weight(int m, int bn) {
  int am = std::abs(m);
  if (am <= bn) return 2.0 * bn - 3.0 * am;
  if (am < 2 * bn) return -(2.0 * bn - static_cast<double>(am));
  return 0.0;
}

}  // namespace

double window_corr(const Eigen::VectorXd& gamma, double sigma, int bn, int d) {
  double acc = 0.0;
  for (int m = -(2 * bn - 1); m <= 2 * bn - 1; ++m) {
    int lag = std::abs(d + m);
    if (lag >= gamma.size()) continue;
    acc += window_weight(m, bn) * gamma(lag);
  }
  return acc / (static_cast<double>(bn) * bn * sigma * sigma);
}

std::vector<double> exact_kernel_shape(const ErrorModel& model, int bn) {
  require(bn >= 1, errc::config, "exact_kernel_shape: bandwidth must be positive");
  const int lags = 4 * bn;
  auto shape_for = [&](double coeff) {
    Eigen::VectorXd gamma = model_autocov(model, coeff, lags);
    double sigma = longrun_sd(model, coeff);
    std::vector<double> shape(static_cast<std::size_t>(2 * bn));
    for (int d = 0; d < 2 * bn; ++d) {
      double r = window_corr(gamma, sigma, bn, d);
      shape[static_cast<std::size_t>(d)] = 2.0 * r * r;
    }
    return shape;
  };

  if (model.fixed_coeffs && model.fixed_coeffs->size() > 0) {
    std::vector<double> shape(static_cast<std::size_t>(2 * bn), 0.0);
    for (int j = 0; j < model.fixed_coeffs->size(); ++j) {
      auto s = shape_for((*model.fixed_coeffs)(j));
      for (std::size_t d = 0; d < shape.size(); ++d) shape[d] += s[d];
    }
    for (auto& v : shape) v /= static_cast<double>(model.fixed_coeffs->size());
    return shape;
  }
  // the profile is coefficient-free except through the AR root
  if (model.kind != NoiseKind::ar1 || model.coeff_min == model.coeff_max)
    return shape_for(model.coeff_min);

  Quadrature q = gauss_legendre_16(model.coeff_min, model.coeff_max);
  std::vector<double> shape(static_cast<std::size_t>(2 * bn), 0.0);
  const double width = model.coeff_max - model.coeff_min;
  for (std::size_t k = 0; k < q.nodes.size(); ++k) {
    auto s = shape_for(q.nodes[k]);
    for (std::size_t d = 0; d < shape.size(); ++d) shape[d] += q.weights[k] * s[d] / width;
  }
  return shape;
}

Centering exact_centering(const ErrorModel& model, const Eigen::VectorXd& coeffs, int p, int bn) {
  std::vector<Eigen::VectorXd> gamma;
  Eigen::VectorXd sigma(p);
  gamma.reserve(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j) {
    double c = coeffs.size() > 0 ? coeffs(j) : 0.0;
    gamma.push_back(model_autocov(model, c, 2 * bn));
    sigma(j) = longrun_sd(model, c);
  }
  return centering_from_autocov(gamma, sigma, bn);
}

}  // namespace mosum
