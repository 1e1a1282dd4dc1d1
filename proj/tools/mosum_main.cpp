#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mosum/detect.hpp"
#include "mosum/dgp.hpp"
#include "mosum/errors.hpp"
#include "mosum/lrv.hpp"
#include "mosum/mosum_stats.hpp"
#include "mosum/neighborhoods.hpp"
#include "mosum/null_limit.hpp"
#include "mosum/panel.hpp"
#include "mosum/version.hpp"

namespace {

using namespace mosum;

std::uint64_t env_seed() {
  const char* s = std::getenv("MOSUM_SEED");
  if (!s || !*s) return 12345;
  char* end = nullptr;
  unsigned long long v = std::strtoull(s, &end, 10);
  if (end == s || (end && *end)) fail(errc::config, "MOSUM_SEED must be an unsigned integer");
  return static_cast<std::uint64_t>(v);
}

struct OutputSink {
  std::optional<std::string> dir;
  std::vector<std::string> written;

  void save(const std::string& name, const std::string& text) {
    if (!dir) return;
    std::filesystem::path path = std::filesystem::path(*dir) / name;
    std::ofstream out(path);
    if (!out) fail(errc::io, "cannot write " + path.string());
    out << text;
    if (text.empty() || text.back() != '\n') out << '\n';
    written.push_back(path.string());
  }

  void manifest(const std::string& command, int argc, char** argv) {
    if (!dir) return;
    nlohmann::json j;
    j["version"] = kVersion;
    j["command"] = command;
    nlohmann::json args = nlohmann::json::array();
    for (int i = 0; i < argc; ++i) args.push_back(std::string(argv[i]));
    j["argv"] = args;
    j["outputs"] = written;
    std::filesystem::path path = std::filesystem::path(*dir) / "run_manifest.json";
    std::ofstream out(path);
    if (!out) fail(errc::io, "cannot write " + path.string());
    out << j.dump(2) << '\n';
  }

  void prepare() {
    if (!dir) return;
    std::error_code ec;
    std::filesystem::create_directories(*dir, ec);
    if (ec) fail(errc::io, "cannot create output directory " + *dir + ": " + ec.message());
  }
};

LongRunEstimate resolve_scale(const std::string& spec, const Eigen::MatrixXd& values,
                              std::optional<int> m, bool full) {
  if (spec == "robust") return estimate_lrv(values, m, full);
  const std::string prefix = "known:";
  if (spec.rfind(prefix, 0) == 0)
    return load_lrv_json(spec.substr(prefix.size()), static_cast<int>(values.cols()));
  fail(errc::config, "--lrv must be 'robust' or 'known:PATH', got '" + spec + "'");
}

Centering resolve_centering(const std::string& mode, const Eigen::MatrixXd& values,
                            const Eigen::VectorXd& sigma, int bn) {
  if (mode == "asymptotic") return asymptotic_centering(bn, static_cast<int>(values.cols()));
  if (mode == "exact") return estimated_centering(values, sigma, bn);
  fail(errc::config, "--centering must be 'asymptotic' or 'exact', got '" + mode + "'");
}

// ---------------------------------------------------------------------------

struct DetectOpts {
  std::string input;
  std::string layout;
  std::string nbhds;
  int bn = 0;
  double alpha = 0.05;
  int reps = 2000;
  std::uint64_t seed = 12345;
  unsigned threads = 1;
  std::string centering = "asymptotic";
  std::string lrv = "robust";
  int m = 0;
  std::string omega_file;
  std::string out;
};

int run_detect(const DetectOpts& o, bool grouped, int argc, char** argv) {
  OutputSink sink;
  if (!o.out.empty()) sink.dir = o.out;
  sink.prepare();

  Panel panel = load_panel_csv(o.input, o.layout.empty()
                                            ? std::nullopt
                                            : std::optional<std::string>(o.layout));
  std::optional<int> m_opt;
  if (o.m > 0) m_opt = o.m;
  LongRunEstimate lrv = resolve_scale(o.lrv, panel.values, m_opt, false);
  Centering centering = resolve_centering(o.centering, panel.values, lrv.sigma, o.bn);

  std::optional<NeighborhoodSet> nbhds;
  if (grouped) {
    require(!o.nbhds.empty(), errc::config, "detect2w requires --nbhds");
    nbhds = load_neighborhoods_json(o.nbhds, panel.series_ids, panel.layout);
  }

  ThresholdResult thr;
  if (!o.omega_file.empty()) {
    thr = load_threshold_json(o.omega_file);
  } else {
    LimitCovariance cov = grouped ? cov_twoway(panel.n(), o.bn, *nbhds)
                                  : cov_global(panel.n(), o.bn, panel.p());
    thr = compute_threshold(cov, o.alpha, o.reps, o.seed, o.threads);
  }

  DetectionResult result = grouped
                               ? detect_twoway(panel, o.bn, lrv, *nbhds, thr.omega, centering)
                               : detect_global(panel, o.bn, lrv, thr.omega, centering);
  std::string text = detection_to_json(result);
  std::cout << text << '\n';

  if (sink.dir) {
    sink.save("detection.json", text);
    sink.save("threshold.json", threshold_to_json(thr));
    sink.save("lrv.json", lrv_to_json(lrv));
    MosumProfile prof = jump_profile(panel, o.bn, lrv);
    StatProfile st = grouped ? stat_twoway(prof, *nbhds, centering) : stat_global(prof, centering);
    std::filesystem::path stat_path = std::filesystem::path(*sink.dir) / "stat_profile.csv";
    write_stat_csv(st, stat_path.string());
    sink.written.push_back(stat_path.string());
    sink.manifest(grouped ? "detect2w" : "detect", argc, argv);
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct LrvOpts {
  std::string input;
  int m = 0;
  bool full = false;
  std::string out;
};

int run_lrv(const LrvOpts& o, int argc, char** argv) {
  OutputSink sink;
  if (!o.out.empty()) sink.dir = o.out;
  sink.prepare();
  Panel panel = load_panel_csv(o.input);
  std::optional<int> m_opt;
  if (o.m > 0) m_opt = o.m;
  LongRunEstimate est = estimate_lrv(panel.values, m_opt, o.full);
  std::string text = lrv_to_json(est);
  std::cout << text << '\n';
  sink.save("lrv.json", text);
  sink.manifest("lrv", argc, argv);
  return 0;
}

// ---------------------------------------------------------------------------

struct ThresholdOpts {
  std::string mode = "global";
  int n = 0, bn = 0, p = 0;
  std::string nbhds;
  std::string corr;
  double cutoff = 0.0;
  double alpha = 0.05;
  int reps = 2000;
  std::uint64_t seed = 12345;
  unsigned threads = 1;
  std::string out;
};

Eigen::MatrixXd load_corr_matrix(const std::string& path, int p) {
  std::ifstream in(path);
  if (!in) fail(errc::io, "cannot open correlation file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail(errc::validation, std::string("correlation file parse error: ") + e.what());
  }
  const nlohmann::json* rows = nullptr;
  if (j.is_array())
    rows = &j;
  else if (j.is_object() && j.contains("corr"))
    rows = &j["corr"];
  else
    fail(errc::validation, "correlation file: expected a matrix or {\"corr\": [[...]]}");
  if (static_cast<int>(rows->size()) != p)
    fail(errc::validation, "correlation file: expected " + std::to_string(p) + " rows");
  Eigen::MatrixXd corr(p, p);
  for (int i = 0; i < p; ++i) {
    const auto& row = (*rows)[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<int>(row.size()) != p)
      fail(errc::validation, "correlation file: row " + std::to_string(i + 1) + " has wrong length");
    for (int k = 0; k < p; ++k) corr(i, k) = row[static_cast<std::size_t>(k)].get<double>();
  }
  return corr;
}

int run_threshold(const ThresholdOpts& o, int argc, char** argv) {
  OutputSink sink;
  if (!o.out.empty()) sink.dir = o.out;
  sink.prepare();
  require(o.n > 0 && o.bn > 0 && o.p > 0, errc::config,
          "threshold: --n, --bn and --p are required and positive");

  std::vector<std::string> ids(static_cast<std::size_t>(o.p));
  for (int j = 0; j < o.p; ++j) ids[static_cast<std::size_t>(j)] = std::to_string(j + 1);

  LimitCovariance cov;
  if (o.mode == "global") {
    cov = cov_global(o.n, o.bn, o.p);
  } else if (o.mode == "twoway") {
    require(!o.nbhds.empty(), errc::config, "threshold --mode twoway requires --nbhds");
    NeighborhoodSet nb = load_neighborhoods_json(o.nbhds, ids, std::nullopt);
    cov = cov_twoway(o.n, o.bn, nb);
  } else if (o.mode == "dependent") {
    require(!o.nbhds.empty(), errc::config, "threshold --mode dependent requires --nbhds");
    require(!o.corr.empty(), errc::config, "threshold --mode dependent requires --corr");
    NeighborhoodSet nb = load_neighborhoods_json(o.nbhds, ids, std::nullopt);
    Eigen::MatrixXd corr = load_corr_matrix(o.corr, o.p);
    cov = cov_dependent(o.n, o.bn, nb, corr, o.cutoff);
  } else {
    fail(errc::config, "--mode must be global, twoway, or dependent");
  }

  ThresholdResult thr = compute_threshold(cov, o.alpha, o.reps, o.seed, o.threads);
  std::string text = threshold_to_json(thr);
  std::cout << text << '\n';
  sink.save("threshold.json", text);
  sink.manifest("threshold", argc, argv);
  return 0;
}

// ---------------------------------------------------------------------------

struct SimulateOpts {
  std::string model = "iid";
  std::string tail = "gaussian";
  double df = 9.0;
  double coeff_min = -1.0, coeff_max = -1.0;  // negative = model default
  double beta = 2.0;
  int trunc = 300;
  int n = 200, p = 100;
  std::uint64_t seed = 12345;
  std::vector<std::string> breaks;
  std::string out_csv;
  std::string truth;
  std::string out;
};

std::vector<BreakSpec> parse_breaks(const std::vector<std::string>& specs, int p) {
  std::vector<BreakSpec> out;
  for (const auto& s : specs) {
    BreakSpec br;
    std::size_t c1 = s.find(':');
    require(c1 != std::string::npos, errc::config,
            "--break expects tau:jump or tau:jump:a-b, got '" + s + "'");
    std::size_t c2 = s.find(':', c1 + 1);
    try {
      br.tau = std::stoi(s.substr(0, c1));
      br.jump = std::stod(s.substr(c1 + 1, c2 == std::string::npos ? std::string::npos
                                                                   : c2 - c1 - 1));
    } catch (const std::exception&) {
      fail(errc::config, "--break expects numeric tau:jump, got '" + s + "'");
    }
    if (c2 != std::string::npos) {
      std::string range = s.substr(c2 + 1);
      std::size_t dash = range.find('-');
      require(dash != std::string::npos, errc::config,
              "--break member range must be a-b (1-based), got '" + range + "'");
      int a = 0, b = 0;
      try {
        a = std::stoi(range.substr(0, dash));
        b = std::stoi(range.substr(dash + 1));
      } catch (const std::exception&) {
        fail(errc::config, "--break member range must be numeric, got '" + range + "'");
      }
      require(a >= 1 && b >= a && b <= p, errc::config,
              "--break member range out of bounds: " + range);
      for (int j = a; j <= b; ++j) br.members.push_back(j - 1);
    }
    out.push_back(std::move(br));
  }
  return out;
}

ErrorModel model_from_opts(const SimulateOpts& o) {
  TailKind tail;
  if (o.tail == "gaussian")
    tail = TailKind::gaussian;
  else if (o.tail == "student")
    tail = TailKind::student;
  else
    fail(errc::config, "--tail must be gaussian or student");
  if (o.tail == "student") require(o.df > 2.0, errc::config, "--df must exceed 2");

  if (o.model == "iid") return iid_model(tail, o.df);
  if (o.model == "ar1") {
    double lo = o.coeff_min < 0 ? 0.6 : o.coeff_min;
    double hi = o.coeff_max < 0 ? 0.9 : o.coeff_max;
    return ar1_model(lo, hi, tail, o.df);
  }
  if (o.model == "ma") {
    double lo = o.coeff_min < 0 ? 0.5 : o.coeff_min;
    double hi = o.coeff_max < 0 ? 0.9 : o.coeff_max;
    return ma_poly_model(lo, hi, o.beta, o.trunc, tail, o.df);
  }
  fail(errc::config, "--model must be iid, ar1, or ma");
}

int run_simulate(const SimulateOpts& o, int argc, char** argv) {
  OutputSink sink;
  if (!o.out.empty()) sink.dir = o.out;
  sink.prepare();
  require(!o.out_csv.empty(), errc::config, "simulate requires --out-csv");
  ErrorModel model = model_from_opts(o);
  std::vector<BreakSpec> breaks = parse_breaks(o.breaks, o.p);
  Panel panel = simulate_panel(model, o.n, o.p, breaks, o.seed);
  panel.time_labels = std::vector<std::string>();
  for (int t = 1; t <= o.n; ++t) panel.time_labels->push_back(std::to_string(t));
  write_panel_csv(panel, o.out_csv);

  nlohmann::json j;
  j["csv"] = o.out_csv;
  j["n"] = o.n;
  j["p"] = o.p;
  j["seed"] = o.seed;
  nlohmann::json brs = nlohmann::json::array();
  for (const auto& b : breaks) {
    nlohmann::json e;
    e["tau"] = b.tau;
    e["jump"] = b.jump;
    e["members"] = b.members;
    brs.push_back(e);
  }
  j["breaks"] = brs;
  std::string text = j.dump(2);
  std::cout << text << '\n';
  if (!o.truth.empty()) {
    std::ofstream tout(o.truth);
    if (!tout) fail(errc::io, "cannot write truth file: " + o.truth);
    tout << brs.dump(2) << '\n';
  }
  sink.manifest("simulate", argc, argv);
  return 0;
}

// ---------------------------------------------------------------------------

struct BenchOpts {
  std::string suite = "all";
  int reps = 0;     // 0 = per-cell default
  int mc_reps = 0;  // 0 = per-cell default
  std::uint64_t seed = 12345;
  unsigned threads = 1;
  std::string out;
};

NeighborhoodSet bench_groups(int p, double frac) {
  // four overlapping index blocks covering 1..p
  const int m = static_cast<int>(frac * p);
  std::vector<Neighborhood> items;
  for (int s = 1; s <= 4; ++s) {
    Neighborhood nb;
    nb.id = s;
    int start = 1 + (s - 1) * (p - m) / 3;
    for (int j = start; j < start + m; ++j) nb.members.push_back(j - 1);
    items.push_back(std::move(nb));
  }
  return make_neighborhood_set(std::move(items), p);
}

int run_bench(const BenchOpts& o, int argc, char** argv) {
  OutputSink sink;
  if (!o.out.empty()) sink.dir = o.out;
  sink.prepare();
  nlohmann::json results = nlohmann::json::array();

  auto base = [&](int n, int p, int bn, const ErrorModel& model) {
    ExperimentConfig cfg;
    cfg.model = model;
    cfg.n = n;
    cfg.p = p;
    cfg.bn = bn;
    cfg.seed = o.seed;
    cfg.threads = o.threads;
    cfg.reps = o.reps > 0 ? o.reps : 500;
    cfg.mc_reps = o.mc_reps > 0 ? o.mc_reps : 2000;
    return cfg;
  };

  if (o.suite == "all" || o.suite == "size") {
    std::vector<std::pair<std::string, ErrorModel>> models = {
        {"iid_gauss", iid_model()},
        {"iid_t9", iid_model(TailKind::student, 9.0)},
        {"ar1", ar1_model()},
        {"ma", ma_poly_model()},
    };
    std::vector<std::array<int, 3>> shapes = {{200, 200, 30}, {200, 400, 30}, {500, 400, 60}};
    for (const auto& [name, model] : models)
      for (const auto& sh : shapes) {
        ExperimentConfig cfg = base(sh[0], sh[1], sh[2], model);
        SizeReport rep = run_size_experiment(cfg);
        nlohmann::json cell = nlohmann::json::parse(size_report_to_json(cfg, rep));
        cell["cell"] = name + "_n" + std::to_string(sh[0]) + "_p" + std::to_string(sh[1]);
        results.push_back(cell);
        std::cerr << "size " << cell["cell"].get<std::string>() << ": " << rep.size << "\n";
      }
  }

  if (o.suite == "all" || o.suite == "power") {
    // one break on a block of series; sparse, medium, dense alternatives
    for (double frac : {0.1, 0.3, 1.0}) {
      ExperimentConfig cfg = base(200, 100, 30, iid_model());
      BreakSpec br;
      br.tau = 100;
      br.jump = 0.6;
      const int m = static_cast<int>(frac * cfg.p);
      for (int j = 0; j < m; ++j) br.members.push_back(j);
      cfg.breaks = {br};
      cfg.nbhds = bench_groups(cfg.p, 0.3);
      PowerReport rep = run_power_experiment(cfg);
      nlohmann::json cell = nlohmann::json::parse(power_report_to_json(cfg, rep));
      cell["cell"] = "power_frac" + std::to_string(frac);
      results.push_back(cell);
      std::cerr << "power frac=" << frac << ": l2=" << rep.power_l2
                << " linf=" << rep.power_linf << "\n";
    }
  }

  if (o.suite == "all" || o.suite == "consistency") {
    for (double jump : {2.0, 1.0, 0.7, 0.4}) {
      ExperimentConfig cfg = base(200, 400, 30, iid_model());
      cfg.reps = o.reps > 0 ? o.reps : 200;
      for (int tau : {40, 100, 160}) {
        BreakSpec br;
        br.tau = tau;
        br.jump = jump;
        cfg.breaks.push_back(br);
      }
      ConsistencyReport rep = run_consistency_experiment(cfg);
      nlohmann::json cell = nlohmann::json::parse(consistency_report_to_json(cfg, rep));
      cell["cell"] = "consistency_jump" + std::to_string(jump);
      results.push_back(cell);
      std::cerr << "consistency jump=" << jump << ": an=" << rep.an
                << " at/n=" << rep.at_over_n << "\n";
    }
  }

  std::string text = results.dump(2);
  std::cout << text << '\n';
  sink.save("bench_results.json", text);
  sink.manifest("bench", argc, argv);
  return 0;
}

// ---------------------------------------------------------------------------

struct ScanBnOpts {
  std::string input;
  std::string layout;
  std::vector<int> bns;
  double alpha = 0.05;
  int reps = 2000;
  std::uint64_t seed = 12345;
  unsigned threads = 1;
  std::string centering = "asymptotic";
  std::string lrv = "robust";
  int m = 0;
  std::string out;
};

int run_scan_bn(const ScanBnOpts& o, int argc, char** argv) {
  OutputSink sink;
  if (!o.out.empty()) sink.dir = o.out;
  sink.prepare();
  require(!o.bns.empty(), errc::config, "scan-bn requires at least one --bn");
  std::vector<int> bns = o.bns;
  std::sort(bns.begin(), bns.end());
  bns.erase(std::unique(bns.begin(), bns.end()), bns.end());

  Panel panel = load_panel_csv(o.input, o.layout.empty()
                                            ? std::nullopt
                                            : std::optional<std::string>(o.layout));
  std::optional<int> m_opt;
  if (o.m > 0) m_opt = o.m;
  LongRunEstimate lrv = resolve_scale(o.lrv, panel.values, m_opt, false);

  nlohmann::json arr = nlohmann::json::array();
  std::vector<int> k_hats;
  int first_drop = 0;
  bool have_drop = false;
  for (int bn : bns) {
    Centering centering = resolve_centering(o.centering, panel.values, lrv.sigma, bn);
    ThresholdResult thr =
        compute_threshold(cov_global(panel.n(), bn, panel.p()), o.alpha, o.reps, o.seed, o.threads);
    DetectionResult res = detect_global(panel, bn, lrv, thr.omega, centering);
    nlohmann::json e;
    e["bn"] = bn;
    e["omega"] = thr.omega;
    e["k_hat"] = res.k_hat;
    nlohmann::json taus = nlohmann::json::array();
    for (const auto& br : res.breaks) taus.push_back(br.tau);
    e["taus"] = taus;
    arr.push_back(e);
    if (!k_hats.empty() && !have_drop && res.k_hat < k_hats.back()) {
      first_drop = bn;
      have_drop = true;
    }
    k_hats.push_back(res.k_hat);
  }

  nlohmann::json j;
  j["results"] = arr;
  j["first_drop_bn"] = have_drop ? nlohmann::json(first_drop) : nlohmann::json(nullptr);
  std::string text = j.dump(2);
  std::cout << text << '\n';
  sink.save("scan_bn.json", text);
  sink.manifest("scan-bn", argc, argv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"moving-window change point scanner for high-dimensional panels"};
  app.require_subcommand(1);

  std::uint64_t seed_default;
  try {
    seed_default = env_seed();
  } catch (const mosum::error& e) {
    nlohmann::json err;
    err["error"] = true;
    err["code"] = static_cast<int>(e.code());
    err["message"] = e.what();
    std::cerr << err.dump() << "\n";
    return static_cast<int>(e.code());
  }

  DetectOpts det;
  det.seed = seed_default;
  auto add_detect_common = [&](CLI::App* sub, DetectOpts& d) {
    sub->add_option("--input", d.input, "panel CSV")->required();
    sub->add_option("--layout", d.layout, "layout JSON (series id -> coordinates)");
    sub->add_option("--bn,--b", d.bn, "window bandwidth")->required()->check(CLI::PositiveNumber);
    sub->add_option("--alpha", d.alpha, "level")->capture_default_str();
    sub->add_option("--reps", d.reps, "threshold Monte Carlo replicates")->capture_default_str();
    sub->add_option("--seed", d.seed, "RNG seed (default: MOSUM_SEED or 12345)")
        ->capture_default_str();
    sub->add_option("--threads", d.threads, "worker threads")->capture_default_str();
    sub->add_option("--centering", d.centering, "asymptotic | exact")->capture_default_str();
    sub->add_option("--lrv", d.lrv, "robust | known:PATH")->capture_default_str();
    sub->add_option("--m", d.m, "block length for the robust scale estimate");
    sub->add_option("--omega-file", d.omega_file, "reuse a saved threshold JSON");
    sub->add_option("--out", d.out, "directory for result artifacts");
  };

  CLI::App* c_detect = app.add_subcommand("detect", "scan a panel with the aggregate statistic");
  add_detect_common(c_detect, det);

  DetectOpts det2;
  det2.seed = seed_default;
  CLI::App* c_detect2w =
      app.add_subcommand("detect2w", "scan a panel jointly over time and series groups");
  add_detect_common(c_detect2w, det2);
  c_detect2w->add_option("--nbhds", det2.nbhds, "neighborhood JSON")->required();

  LrvOpts lrv_opts;
  CLI::App* c_lrv = app.add_subcommand("lrv", "robust long-run scale estimate");
  c_lrv->add_option("--input", lrv_opts.input, "panel CSV")->required();
  c_lrv->add_option("--m", lrv_opts.m, "block length (default: automatic)");
  c_lrv->add_flag("--full", lrv_opts.full, "estimate the full covariance and correlations");
  c_lrv->add_option("--out", lrv_opts.out, "directory for result artifacts");

  ThresholdOpts thr_opts;
  thr_opts.seed = seed_default;
  CLI::App* c_thr = app.add_subcommand("threshold", "Monte Carlo scan threshold");
  c_thr->add_option("--mode", thr_opts.mode, "global | twoway | dependent")->capture_default_str();
  c_thr->add_option("--n", thr_opts.n, "sample length")->required();
  c_thr->add_option("--bn,--b", thr_opts.bn, "window bandwidth")->required();
  c_thr->add_option("--p", thr_opts.p, "number of series")->required();
  c_thr->add_option("--nbhds", thr_opts.nbhds, "neighborhood JSON (twoway, dependent)");
  c_thr->add_option("--corr", thr_opts.corr, "correlation matrix JSON (dependent)");
  c_thr->add_option("--cutoff", thr_opts.cutoff, "zero out |corr| below this")->capture_default_str();
  c_thr->add_option("--alpha", thr_opts.alpha, "level")->capture_default_str();
  c_thr->add_option("--reps", thr_opts.reps, "Monte Carlo replicates")->capture_default_str();
  c_thr->add_option("--seed", thr_opts.seed, "RNG seed")->capture_default_str();
  c_thr->add_option("--threads", thr_opts.threads, "worker threads")->capture_default_str();
  c_thr->add_option("--out", thr_opts.out, "directory for result artifacts");

  SimulateOpts sim;
  sim.seed = seed_default;
  CLI::App* c_sim = app.add_subcommand("simulate", "generate a synthetic panel");
  c_sim->add_option("--model", sim.model, "iid | ar1 | ma")->capture_default_str();
  c_sim->add_option("--tail", sim.tail, "gaussian | student")->capture_default_str();
  c_sim->add_option("--df", sim.df, "student degrees of freedom")->capture_default_str();
  c_sim->add_option("--coeff-min", sim.coeff_min, "per-series coefficient lower bound");
  c_sim->add_option("--coeff-max", sim.coeff_max, "per-series coefficient upper bound");
  c_sim->add_option("--beta", sim.beta, "moving-average lag decay")->capture_default_str();
  c_sim->add_option("--trunc", sim.trunc, "moving-average truncation")->capture_default_str();
  c_sim->add_option("--n", sim.n, "sample length")->capture_default_str();
  c_sim->add_option("--p", sim.p, "number of series")->capture_default_str();
  c_sim->add_option("--seed", sim.seed, "RNG seed")->capture_default_str();
  c_sim->add_option("--break", sim.breaks, "tau:jump or tau:jump:a-b, repeatable");
  c_sim->add_option("--out-csv", sim.out_csv, "output panel CSV")->required();
  c_sim->add_option("--truth", sim.truth, "write the injected breaks to this JSON file");
  c_sim->add_option("--out", sim.out, "directory for the run manifest");

  BenchOpts bench;
  bench.seed = seed_default;
  CLI::App* c_bench = app.add_subcommand("bench", "run the simulation study battery");
  c_bench->add_option("--suite", bench.suite, "all | size | power | consistency")
      ->capture_default_str();
  c_bench->add_option("--reps", bench.reps, "replicates per cell (0 = cell default)");
  c_bench->add_option("--mc-reps", bench.mc_reps, "threshold replicates (0 = cell default)");
  c_bench->add_option("--seed", bench.seed, "RNG seed")->capture_default_str();
  c_bench->add_option("--threads", bench.threads, "worker threads")->capture_default_str();
  c_bench->add_option("--out", bench.out, "directory for result artifacts");

  ScanBnOpts scan;
  scan.seed = seed_default;
  CLI::App* c_scan = app.add_subcommand("scan-bn", "rerun detection over a bandwidth grid");
  c_scan->add_option("--input", scan.input, "panel CSV")->required();
  c_scan->add_option("--layout", scan.layout, "layout JSON");
  c_scan->add_option("--bn,--b", scan.bns, "bandwidth (repeatable)")->required();
  c_scan->add_option("--alpha", scan.alpha, "level")->capture_default_str();
  c_scan->add_option("--reps", scan.reps, "threshold Monte Carlo replicates")
      ->capture_default_str();
  c_scan->add_option("--seed", scan.seed, "RNG seed")->capture_default_str();
  c_scan->add_option("--threads", scan.threads, "worker threads")->capture_default_str();
  c_scan->add_option("--centering", scan.centering, "asymptotic | exact")
      ->capture_default_str();
  c_scan->add_option("--lrv", scan.lrv, "robust | known:PATH")->capture_default_str();
  c_scan->add_option("--m", scan.m, "block length for the robust scale estimate");
  c_scan->add_option("--out", scan.out, "directory for result artifacts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    if (code == 0) return 0;
    nlohmann::json err;
    err["error"] = true;
    err["code"] = 2;
    err["message"] = std::string(e.what());
    std::cerr << err.dump() << "\n";
    return 2;
  }

  try {
    if (c_detect->parsed()) return run_detect(det, false, argc, argv);
    if (c_detect2w->parsed()) return run_detect(det2, true, argc, argv);
    if (c_lrv->parsed()) return run_lrv(lrv_opts, argc, argv);
    if (c_thr->parsed()) return run_threshold(thr_opts, argc, argv);
    if (c_sim->parsed()) return run_simulate(sim, argc, argv);
    if (c_bench->parsed()) return run_bench(bench, argc, argv);
    if (c_scan->parsed()) return run_scan_bn(scan, argc, argv);
  } catch (const mosum::error& e) {
    nlohmann::json err;
    err["error"] = true;
    err["code"] = static_cast<int>(e.code());
    err["message"] = e.what();
    std::cerr << err.dump() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    nlohmann::json err;
    err["error"] = true;
    err["code"] = 1;
    err["message"] = e.what();
    std::cerr << err.dump() << "\n";
    return 1;
  }
  return 0;
}
