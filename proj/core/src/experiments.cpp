#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "json.hpp"
#include "mosum/detect.hpp"
#include "mosum/dgp.hpp"
#include "mosum/errors.hpp"
#include "mosum/null_limit.hpp"
#include "mosum/parallel.hpp"
#include "mosum/rng.hpp"
#include "mosum/stats_util.hpp"

namespace mosum {

namespace {

std::vector<double> threshold_shape(const ExperimentConfig& cfg) {
  if (cfg.exact_kernel) return exact_kernel_shape(cfg.model, cfg.bn);
  std::vector<double> shape(static_cast<std::size_t>(2 * cfg.bn));
  const double inv_bn2 = 1.0 / (static_cast<double>(cfg.bn) * cfg.bn);
  for (int d = 0; d < 2 * cfg.bn; ++d)
    shape[static_cast<std::size_t>(d)] = g_kernel(static_cast<double>(d) / cfg.bn) * inv_bn2;
  return shape;
}

struct Replicate {
  MosumProfile prof;
  Centering cent;
  Eigen::MatrixXd values;
  Eigen::VectorXd sigma;
};

Replicate make_replicate(const ExperimentConfig& cfg, std::uint64_t stream, bool with_breaks) {
  auto eng = substream(cfg.seed, stream);
  NoiseDraw draw = gen_errors(cfg.model, cfg.n, cfg.p, eng);
  if (with_breaks) inject_breaks(draw.eps, cfg.breaks);
  Replicate rep;
  rep.sigma = cfg.known_scale ? draw.longrun_sd : estimate_lrv(draw.eps).sigma;
  rep.prof = jump_profile(draw.eps, cfg.bn, rep.sigma);
  rep.cent = cfg.exact_kernel ? exact_centering(cfg.model, draw.coeffs, cfg.p, cfg.bn)
                              : asymptotic_centering(cfg.bn, cfg.p);
  rep.values = std::move(draw.eps);
  return rep;
}

double calibrate_omega(const ExperimentConfig& cfg, bool grouped) {
  if (cfg.calib == CalibrationRoute::gaussian_data) {
    // Null replicates of the statistic itself, with the model's tails swapped
    // for Gaussian ones. Mirrors the experiment pipeline exactly (same
    // centering and scale handling), so the threshold absorbs the finite-p
    // skew of the squared-norm field.
    ExperimentConfig null_cfg = cfg;
    null_cfg.model.tail = TailKind::gaussian;
    std::vector<double> samples(static_cast<std::size_t>(cfg.mc_reps));
    parallel_ranges(static_cast<std::size_t>(cfg.mc_reps), cfg.threads,
                    [&](std::size_t b, std::size_t e) {
                      for (std::size_t r = b; r < e; ++r) {
                        Replicate rep = make_replicate(null_cfg, stream_tag::threshold + r, false);
                        samples[r] = (grouped && cfg.nbhds
                                          ? stat_twoway(rep.prof, *cfg.nbhds, rep.cent)
                                          : stat_global(rep.prof, rep.cent))
                                         .max;
                      }
                    });
    return upper_threshold(std::move(samples), cfg.alpha);
  }
  std::vector<double> shape = threshold_shape(cfg);
  LimitCovariance cov = grouped && cfg.nbhds
                            ? cov_twoway_custom(cfg.n, cfg.bn, *cfg.nbhds, std::move(shape))
                            : cov_global_custom(cfg.n, cfg.bn, cfg.p, std::move(shape));
  return compute_threshold(cov, cfg.alpha, cfg.mc_reps, cfg.seed, cfg.threads).omega;
}

double binom_se(double p, int reps) {
  return std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(reps));
}

nlohmann::json model_json(const ErrorModel& m) {
  nlohmann::json j;
  switch (m.kind) {
    case NoiseKind::iid: j["kind"] = "iid"; break;
    case NoiseKind::ar1: j["kind"] = "ar1"; break;
    case NoiseKind::ma_poly: j["kind"] = "ma_poly"; break;
  }
  j["tail"] = m.tail == TailKind::gaussian ? "gaussian" : "student";
  if (m.tail == TailKind::student) j["df"] = m.df;
  if (m.kind != NoiseKind::iid) {
    j["coeff_min"] = m.coeff_min;
    j["coeff_max"] = m.coeff_max;
  }
  if (m.kind == NoiseKind::ma_poly) {
    j["beta"] = m.beta;
    j["trunc"] = m.trunc;
  }
  return j;
}

nlohmann::json config_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["model"] = model_json(cfg.model);
  j["n"] = cfg.n;
  j["p"] = cfg.p;
  j["bn"] = cfg.bn;
  j["reps"] = cfg.reps;
  j["mc_reps"] = cfg.mc_reps;
  j["alpha"] = cfg.alpha;
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  j["exact_kernel"] = cfg.exact_kernel;
  j["known_scale"] = cfg.known_scale;
  j["calib"] = cfg.calib == CalibrationRoute::gaussian_data ? "gaussian_data" : "limit_field";
  nlohmann::json brs = nlohmann::json::array();
  for (const auto& b : cfg.breaks) {
    nlohmann::json e;
    e["tau"] = b.tau;
    e["jump"] = b.jump;
    e["members"] = b.members;
    brs.push_back(e);
  }
  j["breaks"] = brs;
  j["groups"] = cfg.nbhds ? nlohmann::json(cfg.nbhds->size()) : nlohmann::json(nullptr);
  return j;
}

}  // namespace

SizeReport run_size_experiment(const ExperimentConfig& cfg) {
  require(cfg.reps >= 1, errc::config, "size experiment: reps must be positive");
  SizeReport report;
  report.omega = calibrate_omega(cfg, cfg.nbhds.has_value());
  report.reps = cfg.reps;
  std::vector<char> rej(static_cast<std::size_t>(cfg.reps), 0);
  parallel_ranges(static_cast<std::size_t>(cfg.reps), cfg.threads,
                  [&](std::size_t b, std::size_t e) {
                    for (std::size_t r = b; r < e; ++r) {
                      Replicate rep = make_replicate(cfg, stream_tag::replicate + r, false);
                      StatProfile st = cfg.nbhds ? stat_twoway(rep.prof, *cfg.nbhds, rep.cent)
                                                 : stat_global(rep.prof, rep.cent);
                      rej[r] = st.max > report.omega ? 1 : 0;
                    }
                  });
  for (char c : rej) report.rejections += c;
  report.size = static_cast<double>(report.rejections) / cfg.reps;
  return report;
}

PowerReport run_power_experiment(const ExperimentConfig& cfg) {
  require(cfg.reps >= 1, errc::config, "power experiment: reps must be positive");
  require(!cfg.breaks.empty(), errc::config, "power experiment: needs at least one break");
  PowerReport report;
  report.reps = cfg.reps;
  report.omega_l2 = calibrate_omega(cfg, false);
  if (cfg.nbhds) report.omega_twoway = calibrate_omega(cfg, true);

  // comparator: largest absolute profile entry, calibrated by null simulation
  {
    std::vector<double> samples(static_cast<std::size_t>(cfg.mc_reps));
    parallel_ranges(static_cast<std::size_t>(cfg.mc_reps), cfg.threads,
                    [&](std::size_t b, std::size_t e) {
                      for (std::size_t r = b; r < e; ++r) {
                        Replicate rep = make_replicate(cfg, stream_tag::comparator + r, false);
                        samples[r] = rep.prof.v.cwiseAbs().maxCoeff();
                      }
                    });
    report.omega_linf = upper_threshold(std::move(samples), cfg.alpha);
  }

  std::vector<char> rl2(static_cast<std::size_t>(cfg.reps), 0);
  std::vector<char> rli(static_cast<std::size_t>(cfg.reps), 0);
  std::vector<char> rtw(static_cast<std::size_t>(cfg.reps), 0);
  parallel_ranges(
      static_cast<std::size_t>(cfg.reps), cfg.threads, [&](std::size_t b, std::size_t e) {
        for (std::size_t r = b; r < e; ++r) {
          Replicate rep = make_replicate(cfg, stream_tag::replicate + r, true);
          rl2[r] = stat_global(rep.prof, rep.cent).max > report.omega_l2 ? 1 : 0;
          rli[r] = rep.prof.v.cwiseAbs().maxCoeff() > report.omega_linf ? 1 : 0;
          if (cfg.nbhds)
            rtw[r] = stat_twoway(rep.prof, *cfg.nbhds, rep.cent).max > *report.omega_twoway ? 1 : 0;
        }
      });

  auto rate = [&](const std::vector<char>& v) {
    int c = 0;
    for (char x : v) c += x;
    return static_cast<double>(c) / cfg.reps;
  };
  report.power_l2 = rate(rl2);
  report.power_linf = rate(rli);
  report.se_l2 = binom_se(report.power_l2, cfg.reps);
  report.se_linf = binom_se(report.power_linf, cfg.reps);
  {
    std::vector<double> d(static_cast<std::size_t>(cfg.reps));
    for (std::size_t r = 0; r < d.size(); ++r) d[r] = static_cast<double>(rl2[r] - rli[r]);
    report.se_diff_linf = std::sqrt(variance(d) / cfg.reps);
  }
  if (cfg.nbhds) {
    report.power_twoway = rate(rtw);
    report.se_twoway = binom_se(*report.power_twoway, cfg.reps);
    std::vector<double> d(static_cast<std::size_t>(cfg.reps));
    for (std::size_t r = 0; r < d.size(); ++r) d[r] = static_cast<double>(rtw[r] - rl2[r]);
    report.se_diff_twoway = std::sqrt(variance(d) / cfg.reps);
  }
  return report;
}

ConsistencyReport run_consistency_experiment(const ExperimentConfig& cfg) {
  require(cfg.reps >= 1, errc::config, "consistency experiment: reps must be positive");
  require(!cfg.breaks.empty(), errc::config, "consistency experiment: needs true breaks");
  ConsistencyReport report;
  report.reps = cfg.reps;
  report.omega = calibrate_omega(cfg, cfg.nbhds.has_value());

  const int k_true = static_cast<int>(cfg.breaks.size());
  std::size_t b_min = static_cast<std::size_t>(cfg.p);
  for (const auto& br : cfg.breaks)
    if (!br.members.empty()) b_min = std::min(b_min, br.members.size());

  std::vector<std::string> proto_ids(static_cast<std::size_t>(cfg.p));
  for (int j = 0; j < cfg.p; ++j) proto_ids[static_cast<std::size_t>(j)] = "s" + std::to_string(j + 1);

  std::vector<double> an(static_cast<std::size_t>(cfg.reps));
  std::vector<double> at(static_cast<std::size_t>(cfg.reps));
  std::vector<double> as(static_cast<std::size_t>(cfg.reps), 0.0);
  std::vector<double> kh(static_cast<std::size_t>(cfg.reps));

  parallel_ranges(
      static_cast<std::size_t>(cfg.reps), cfg.threads, [&](std::size_t b, std::size_t e) {
        for (std::size_t r = b; r < e; ++r) {
          Replicate rep = make_replicate(cfg, stream_tag::replicate + r, true);
          Panel panel;
          panel.values = std::move(rep.values);
          panel.series_ids = proto_ids;
          LongRunEstimate lrv = known_lrv(rep.sigma);
          DetectionResult res = cfg.nbhds
                                    ? detect_twoway(panel, cfg.bn, lrv, *cfg.nbhds, report.omega,
                                                    rep.cent)
                                    : detect_global(panel, cfg.bn, lrv, report.omega, rep.cent);
          an[r] = std::abs(res.k_hat - k_true);
          kh[r] = res.k_hat;
          double loc = 0.0, setdiff = 0.0;
          for (const auto& det : res.breaks) {
            int best = 0, dist = std::numeric_limits<int>::max();
            for (int k = 0; k < k_true; ++k) {
              int dd = std::abs(det.tau - cfg.breaks[static_cast<std::size_t>(k)].tau);
              if (dd < dist) {
                dist = dd;
                best = k;
              }
            }
            loc += dist;
            if (cfg.nbhds) {
              const auto& truth = cfg.breaks[static_cast<std::size_t>(best)].members;
              std::vector<int> full;
              const std::vector<int>* tm = &truth;
              if (truth.empty()) {
                full.resize(static_cast<std::size_t>(cfg.p));
                for (int j = 0; j < cfg.p; ++j) full[static_cast<std::size_t>(j)] = j;
                tm = &full;
              }
              const auto& got = (*cfg.nbhds)[det.nbhd].members;
              std::vector<int> sym;
              std::set_symmetric_difference(got.begin(), got.end(), tm->begin(), tm->end(),
                                            std::back_inserter(sym));
              setdiff += static_cast<double>(sym.size());
            }
          }
          at[r] = loc;
          as[r] = setdiff;
        }
      });

  report.an = mean(an);
  report.at_over_n = mean(at) / cfg.n;
  report.mean_k_hat = mean(kh);
  if (cfg.nbhds) report.as_over_bmin = mean(as) / static_cast<double>(b_min);
  return report;
}

std::string size_report_to_json(const ExperimentConfig& cfg, const SizeReport& rep) {
  nlohmann::json j;
  j["kind"] = "size";
  j["config"] = config_json(cfg);
  j["omega"] = rep.omega;
  j["size"] = rep.size;
  j["rejections"] = rep.rejections;
  j["reps"] = rep.reps;
  return j.dump(2);
}

std::string power_report_to_json(const ExperimentConfig& cfg, const PowerReport& rep) {
  nlohmann::json j;
  j["kind"] = "power";
  j["config"] = config_json(cfg);
  j["omega_l2"] = rep.omega_l2;
  j["power_l2"] = rep.power_l2;
  j["se_l2"] = rep.se_l2;
  j["omega_linf"] = rep.omega_linf;
  j["power_linf"] = rep.power_linf;
  j["se_linf"] = rep.se_linf;
  j["se_diff_linf"] = rep.se_diff_linf;
  if (rep.power_twoway) {
    j["omega_twoway"] = *rep.omega_twoway;
    j["power_twoway"] = *rep.power_twoway;
    j["se_twoway"] = *rep.se_twoway;
    j["se_diff_twoway"] = *rep.se_diff_twoway;
  }
  j["reps"] = rep.reps;
  return j.dump(2);
}

std::string consistency_report_to_json(const ExperimentConfig& cfg, const ConsistencyReport& rep) {
  nlohmann::json j;
  j["kind"] = "consistency";
  j["config"] = config_json(cfg);
  j["omega"] = rep.omega;
  j["an"] = rep.an;
  j["at_over_n"] = rep.at_over_n;
  if (rep.as_over_bmin) j["as_over_bmin"] = *rep.as_over_bmin;
  j["mean_k_hat"] = rep.mean_k_hat;
  j["reps"] = rep.reps;
  return j.dump(2);
}

}  // namespace mosum
