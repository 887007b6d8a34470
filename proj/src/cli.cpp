#include "quasispec/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "quasispec/dos.hpp"
#include "quasispec/eigensolve.hpp"
#include "quasispec/error.hpp"
#include "quasispec/io.hpp"
#include "quasispec/model.hpp"
#include "quasispec/regularity.hpp"
#include "quasispec/separable2d.hpp"
#include "quasispec/tracemap.hpp"

#ifndef QUASISPEC_VERSION
#define QUASISPEC_VERSION "dev"
#endif

namespace quasispec {
namespace {

using nlohmann::json;

// L2 growth between consecutive bandwidths at or above this ratio is reported as "growing".
constexpr double kL2GrowthFlag = 1.5;

struct RunOutput {
  std::map<std::string, std::string> files;
  json results = json::object();
  std::map<std::string, std::string> input_hashes;
};

struct Shared {
  std::string out_dir = "out";
  std::string cache_dir;
  std::string config;
  std::uint64_t seed = 1;
};

bool flag_present(const std::vector<std::string>& args, const std::string& name) {
  const std::string flag = "--" + name;
  return std::any_of(args.begin(), args.end(),
                     [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
}

// Config entries become flags unless the command line already sets them.
std::vector<std::string> inject_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  const auto kv = parse_key_value(read_file(path));
  for (const auto& [key, value] : kv) {
    if (key == "config") throw InvalidArgument("config files cannot include other config files");
    if (flag_present(args, key)) continue;
    args.push_back("--" + key);
    args.push_back(value);
  }
  return args;
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
  return s;
}

std::map<std::string, std::string> collect_params(const CLI::App& sub) {
  std::map<std::string, std::string> params;
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "out" || name == "cache" || name == "config") continue;
    params[name] = opt->count() > 0 ? join(opt->results()) : opt->get_default_str();
  }
  return params;
}

Spectrum1D cached_spectrum(const ModelParams& p, const std::string& cache_dir, bool* hit = nullptr) {
  p.validate();
  const double tol = default_tolerance(fibonacci_matrix(p));
  if (hit) *hit = false;
  if (!cache_dir.empty()) {
    const EigenvalueCache cache(cache_dir);
    const std::string key = spectrum_cache_key(p, tol);
    if (auto values = cache.load(key)) {
      if (hit) *hit = true;
      return Spectrum1D{std::move(*values), p, tol};
    }
    Spectrum1D s = fibonacci_spectrum(p, tol);
    cache.store(key, s.eigenvalues);
    return s;
  }
  return fibonacci_spectrum(p, tol);
}

ModelParams model_params(double lambda, double omega, std::int64_t n) {
  ModelParams p;
  p.lambda = lambda;
  p.omega = omega;
  p.n_sites = n;
  p.validate();
  return p;
}

CoverParams cover_params(double lambda, int depth, int max_iter, double threshold) {
  CoverParams cp = default_cover_params(lambda, depth);
  cp.max_iter = max_iter;
  cp.threshold = threshold;
  return cp;
}

std::string gap_csv(const std::vector<Gap>& gaps) {
  CsvTable t({"start", "end", "width"});
  for (const Gap& g : gaps) t.add_row({g.start, g.end, g.width});
  return t.str();
}

json fit_json(const SlopeFit& f) { return json{{"slope", f.slope}, {"stderr", f.stderr_}, {"intercept", f.intercept}}; }

struct SystemChoice {
  SymbolicSystem sys;
  double projection_lambda = 1.0 / 3.0;
};

SystemChoice preset_system(const std::string& name) {
  if (name == "middle-thirds") return {SymbolicSystem::full_shift({0.0, 2.0 / 3.0}, {0.5, 0.5}), 1.0 / 3.0};
  if (name == "ratio-fifth") return {SymbolicSystem::full_shift({0.0, 4.0 / 5.0}, {0.5, 0.5}), 1.0 / 5.0};
  if (name == "lebesgue") return {SymbolicSystem::full_shift({0.0, 0.5}, {0.5, 0.5}), 0.5};
  throw InvalidArgument("unknown preset '" + name + "' (middle-thirds, ratio-fifth, lebesgue)");
}

// {"transition": [[..]], "digits": [..], "weights": [..], "projection_lambda": x}
SystemChoice system_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("system file: ") + e.what());
  }
  SystemChoice c;
  try {
    c.sys.digits = j.at("digits").get<std::vector<double>>();
    c.sys.ell = static_cast<int>(c.sys.digits.size());
    c.sys.weights = j.at("weights").get<std::vector<double>>();
    if (j.contains("transition")) {
      c.sys.transition = j.at("transition").get<std::vector<std::vector<int>>>();
    } else {
      c.sys.transition.assign(c.sys.ell, std::vector<int>(c.sys.ell, 1));
    }
    c.projection_lambda = j.value("projection_lambda", 1.0 / 3.0);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("system file: ") + e.what());
  }
  c.sys.validate();
  return c;
}

json system_json(const SymbolicSystem& s) {
  return json{{"ell", s.ell}, {"transition", s.transition}, {"digits", s.digits}, {"weights", s.weights}};
}

using Action = std::function<RunOutput()>;

void add_spectrum1d(CLI::App& app, Shared& sh, Action& action, std::ostream& out) {
  struct Opts {
    double lambda = 1.0, omega = 0.0;
    std::int64_t n = 1000;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("spectrum1d", "Dirichlet box eigenvalues of the Fibonacci operator");
  sub->add_option("--lambda", o->lambda, "coupling");
  sub->add_option("--omega", o->omega, "phase");
  sub->add_option("--n", o->n, "box size")->check(CLI::Range(std::int64_t{1}, std::int64_t{100000}));
  sub->callback([o, &sh, &action, &out] {
    action = [o, &sh, &out] {
      bool hit = false;
      const Spectrum1D s = cached_spectrum(model_params(o->lambda, o->omega, o->n), sh.cache_dir, &hit);
      out << (hit ? "cache hit\n" : "computed\n");
      CsvTable t({"eigenvalue"});
      for (double e : s.eigenvalues) t.add_row({e});
      RunOutput r;
      r.files["eigenvalues.csv"] = t.str();
      r.results = {{"count", s.eigenvalues.size()}, {"min", s.eigenvalues.front()}, {"max", s.eigenvalues.back()},
                   {"tolerance", s.tol}};
      return r;
    };
  });
}

void add_ids(CLI::App& app, Shared& sh, Action& action, std::ostream&) {
  struct Opts {
    double lambda = 1.0, omega = 0.0, emin = 0.0, emax = 0.0;
    std::int64_t n = 1000;
    int points = 401;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("ids", "integrated density of states of a box");
  sub->add_option("--lambda", o->lambda, "coupling");
  sub->add_option("--omega", o->omega, "phase");
  sub->add_option("--n", o->n, "box size")->check(CLI::Range(std::int64_t{1}, std::int64_t{100000}));
  sub->add_option("--points", o->points, "energy grid points")->check(CLI::Range(2, 1000000));
  auto* lo = sub->add_option("--emin", o->emin, "grid start (default: spectrum minimum - 0.1)");
  auto* hi = sub->add_option("--emax", o->emax, "grid end (default: spectrum maximum + 0.1)");
  sub->callback([o, &sh, &action, lo, hi] {
    action = [o, &sh, lo, hi] {
      const Spectrum1D s = cached_spectrum(model_params(o->lambda, o->omega, o->n), sh.cache_dir);
      const double a = lo->count() ? o->emin : s.eigenvalues.front() - 0.1;
      const double b = hi->count() ? o->emax : s.eigenvalues.back() + 0.1;
      require(b > a, "--emax must exceed --emin");
      std::vector<double> grid(o->points);
      for (int i = 0; i < o->points; ++i) grid[i] = a + (b - a) * i / (o->points - 1);
      CsvTable t({"energy", "ids"});
      for (const auto& [e, v] : ids_curve(s, grid)) t.add_row({e, v});
      RunOutput r;
      r.files["ids.csv"] = t.str();
      r.results = {{"emin", a}, {"emax", b}};
      return r;
    };
  });
}

void add_tracemap(CLI::App& app, Shared&, Action& action, std::ostream&) {
  struct Opts {
    double lambda = 1.0, threshold = 0.0, emin = 0.0, emax = 0.0;
    int depth = 12, max_iter = 0;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("tracemap", "outer cover of the spectrum from the trace-map escape test");
  sub->add_option("--lambda", o->lambda, "coupling")->check(CLI::NonNegativeNumber);
  sub->add_option("--depth", o->depth, "dyadic depth")->check(CLI::Range(1, 24));
  sub->add_option("--max-iter", o->max_iter, "escape horizon (0: resolution-matched default)");
  sub->add_option("--threshold", o->threshold, "escape threshold (0: max(4, 2 + lambda))");
  auto* lo = sub->add_option("--emin", o->emin, "window start");
  auto* hi = sub->add_option("--emax", o->emax, "window end");
  sub->callback([o, &action, lo, hi] {
    action = [o, lo, hi] {
      CoverParams cp = cover_params(o->lambda, o->depth, o->max_iter, o->threshold);
      if (lo->count()) cp.emin = o->emin;
      if (hi->count()) cp.emax = o->emax;
      const IntervalSet c = spectrum_cover(cp);
      RunOutput r;
      r.files["cover.csv"] = interval_csv(c);
      r.results = {{"length", lebesgue_length(c)}, {"intervals", c.size()},
                   {"max_iter", cp.resolved_max_iter()}, {"threshold", cp.resolved_threshold()},
                   {"emin", cp.emin}, {"emax", cp.emax}, {"box_dimension", nullptr},
                   {"caveat", "outer approximation from probed energies, not a rigorous enclosure"}};
      if (!c.empty() && o->depth >= 8) {
        std::vector<double> scales;
        for (int k = 3; k <= o->depth - 3; ++k) scales.push_back(std::ldexp(1.0, -k));
        r.results["box_dimension"] = fit_json(box_dimension(c, scales));
      }
      return r;
    };
  });
}

void add_lyapunov(CLI::App& app, Shared& sh, Action& action, std::ostream&) {
  struct Opts {
    std::vector<double> lambdas{0.2, 0.5, 1.0};
    LyapunovScanParams scan;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("lyapunov", "finite-time Lyapunov exponents over the spectrum cover");
  sub->add_option("--lambdas", o->lambdas, "comma-separated couplings")->delimiter(',');
  sub->add_option("--e-samples", o->scan.e_samples, "energies per coupling")->check(CLI::PositiveNumber);
  sub->add_option("--m", o->scan.m, "orbit length")->check(CLI::PositiveNumber);
  sub->add_option("--depth", o->scan.depth, "cover depth")->check(CLI::Range(1, 24));
  sub->callback([o, &sh, &action] {
    action = [o, &sh] {
      LyapunovScanParams p = o->scan;
      p.seed = sh.seed;
      CsvTable t({"lambda", "mean", "spread", "samples"});
      RunOutput r;
      r.results["rows"] = json::array();
      for (const LyapunovScanRow& row : lyapunov_scan(o->lambdas, p)) {
        t.add_row({row.lambda, row.mean, row.spread, static_cast<double>(row.samples)});
        r.results["rows"].push_back({{"lambda", row.lambda}, {"mean", row.mean}, {"spread", row.spread}});
      }
      r.files["lyapunov.csv"] = t.str();
      return r;
    };
  });
}

void add_dimension(CLI::App& app, Shared& sh, Action& action, std::ostream&) {
  struct Opts {
    double lambda = 1.0, omega = 0.0;
    std::int64_t n = 5000;
    int rmax_exp = 4, rmin_exp = 10, samples = 2000;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("dimension", "local dimension estimate of the density of states");
  sub->add_option("--lambda", o->lambda, "coupling");
  sub->add_option("--omega", o->omega, "phase");
  sub->add_option("--n", o->n, "box size")->check(CLI::Range(std::int64_t{1}, std::int64_t{100000}));
  sub->add_option("--rmax-exp", o->rmax_exp, "largest radius 2^-k");
  sub->add_option("--rmin-exp", o->rmin_exp, "smallest radius 2^-k");
  sub->add_option("--samples", o->samples, "sampled centres")->check(CLI::Range(100, 100000000));
  sub->callback([o, &sh, &action] {
    action = [o, &sh] {
      require(o->rmin_exp > o->rmax_exp + 1, "need at least three radii");
      const AtomicMeasure m = empirical_measure(cached_spectrum(model_params(o->lambda, o->omega, o->n), sh.cache_dir));
      const auto radii = dyadic_radii(o->rmax_exp, o->rmin_exp);
      const LocalDimension ld = local_dimension(m, radii, o->samples, sh.seed);
      CsvTable t({"radius", "mean_log_mass"});
      for (std::size_t i = 0; i < ld.radii.size(); ++i) t.add_row({ld.radii[i], ld.mean_log_mass[i]});
      RunOutput r;
      r.files["local_dimension.csv"] = t.str();
      r.results = {{"local_dimension", fit_json(ld.fit)}};
      return r;
    };
  });
}

void add_dos2d(CLI::App& app, Shared& sh, Action& action, std::ostream&) {
  struct Opts {
    double l1 = 1.0, w1 = 0.0, l2 = 1.0, w2 = 0.0;
    std::int64_t n = 200;
    std::vector<double> bandwidths{std::ldexp(1.0, -8), std::ldexp(1.0, -9), std::ldexp(1.0, -10)};
    int samples = 2000;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("dos2d", "density of states of the separable square as a convolution");
  sub->add_option("--lambda", o->l1, "first coupling");
  sub->add_option("--omega", o->w1, "first phase");
  sub->add_option("--lambda2", o->l2, "second coupling");
  sub->add_option("--omega2", o->w2, "second phase");
  sub->add_option("--n", o->n, "box size per axis")->check(CLI::Range(std::int64_t{1}, std::int64_t{100000}));
  sub->add_option("--bandwidths", o->bandwidths, "comma-separated KDE bandwidths")->delimiter(',');
  sub->add_option("--samples", o->samples, "local-dimension centres")->check(CLI::Range(100, 100000000));
  sub->callback([o, &sh, &action] {
    action = [o, &sh] {
      require(!o->bandwidths.empty(), "need at least one bandwidth");
      const AtomicMeasure a = empirical_measure(cached_spectrum(model_params(o->l1, o->w1, o->n), sh.cache_dir));
      const AtomicMeasure b = empirical_measure(cached_spectrum(model_params(o->l2, o->w2, o->n), sh.cache_dir));
      std::optional<AtomicMeasure> conv;
      try {
        conv.emplace(convolve(a, b));
      } catch (const NumericFailure& e) {
        throw NumericFailure(std::string(e.what()) + "; reduce --n");
      }
      RunOutput r;
      r.files["convolution.csv"] = measure_csv(*conv);
      CsvTable trend({"bandwidth", "l2_norm"});
      std::vector<double> norms;
      for (std::size_t i = 0; i < o->bandwidths.size(); ++i) {
        const double h = o->bandwidths[i];
        require(h > 0.0, "bandwidths must be positive");
        const DensityEstimate d = kde_density(*conv, h, covering_grid(*conv, h, h / 4.0));
        CsvTable t({"energy", "density"});
        for (std::size_t k = 0; k < d.values.size(); ++k) t.add_row({d.grid.at(k), d.values[k]});
        r.files["density_" + std::to_string(i) + ".csv"] = t.str();
        norms.push_back(l2_norm(d));
        trend.add_row({h, norms.back()});
      }
      r.files["l2_trend.csv"] = trend.str();
      double worst = 0.0;
      for (std::size_t i = 1; i < norms.size(); ++i) worst = std::max(worst, norms[i] / norms[i - 1]);
      r.results["l2_ratio"] = norms.back() / norms.front();
      r.results["l2_max_step_ratio"] = worst;
      r.results["l2_trend"] = worst < kL2GrowthFlag ? "stable" : "growing";
      const auto radii = dyadic_radii(4, 10);
      r.results["local_dimension"] = fit_json(local_dimension(*conv, radii, o->samples, sh.seed).fit);
      return r;
    };
  });
}

void add_sumset2d(CLI::App& app, Shared&, Action& action, std::ostream&) {
  struct Opts {
    double l1 = 1.0, l2 = 1.0;
    int depth = 12, max_iter = 0;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("sumset2d", "sum of two spectrum covers and its gaps");
  sub->add_option("--lambda", o->l1, "first coupling")->check(CLI::NonNegativeNumber);
  sub->add_option("--lambda2", o->l2, "second coupling")->check(CLI::NonNegativeNumber);
  sub->add_option("--depth", o->depth, "dyadic depth")->check(CLI::Range(1, 24));
  sub->add_option("--max-iter", o->max_iter, "escape horizon (0: default)");
  sub->callback([o, &action] {
    action = [o] {
      const IntervalSet a = spectrum_cover(cover_params(o->l1, o->depth, o->max_iter, 0.0));
      const IntervalSet b = spectrum_cover(cover_params(o->l2, o->depth, o->max_iter, 0.0));
      const IntervalSet s = sumset(a, b);
      const auto gaps = gap_report(s);
      RunOutput r;
      r.files["sumset.csv"] = interval_csv(s);
      r.files["gaps.csv"] = gap_csv(gaps);
      r.results = {{"length", lebesgue_length(s)}, {"intervals", s.size()}, {"gaps", gaps.size()}};
      return r;
    };
  });
}

void add_verify_tensor(CLI::App& app, Shared&, Action& action, std::ostream&) {
  struct Opts {
    double l1 = 1.0, w1 = 0.0, l2 = 1.0, w2 = 0.0;
    std::int64_t n = 8;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("verify-tensor", "dense 2D eigenvalues against pairwise sums");
  sub->add_option("--lambda", o->l1, "first coupling");
  sub->add_option("--omega", o->w1, "first phase");
  sub->add_option("--lambda2", o->l2, "second coupling");
  sub->add_option("--omega2", o->w2, "second phase");
  sub->add_option("--n", o->n, "box size per axis")->check(CLI::Range(std::int64_t{1}, std::int64_t{16}));
  sub->callback([o, &action] {
    action = [o] {
      const BoxSpec2D spec = BoxSpec2D::make(o->l1, o->w1, o->l2, o->w2, o->n);
      const auto sums = eigs2d_from_sums(fibonacci_spectrum(spec.p1), fibonacci_spectrum(spec.p2));
      const auto dense = jacobi_dense(assemble_dense_2d(spec), 1e-14);
      CsvTable t({"pair_sum", "dense"});
      double worst = 0.0;
      for (std::size_t i = 0; i < sums.size(); ++i) {
        t.add_row({sums[i], dense[i]});
        worst = std::max(worst, std::abs(sums[i] - dense[i]));
      }
      RunOutput r;
      r.files["eigs2d.csv"] = t.str();
      r.results = {{"max_abs_diff", worst}, {"agree", worst <= 1e-8}};
      return r;
    };
  });
}

void add_regularity(CLI::App& app, Shared& sh, Action& action, std::ostream&) {
  struct Opts {
    std::string preset = "middle-thirds", system_file;
    double j_lo = 0.3, j_hi = 0.35, d_eta = 1.0, proj_lambda = 0.0;
    int proj_depth = 10, samples = 4000;
    SamplingParams sampling;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("regularity", "transversality diagnostics for a linear symbolic system");
  auto* pre = sub->add_option("--preset", o->preset, "middle-thirds, ratio-fifth or lebesgue");
  auto* file = sub->add_option("--system", o->system_file, "JSON system description")->check(CLI::ExistingFile);
  pre->excludes(file);
  sub->add_option("--j-lo", o->j_lo, "parameter interval start");
  sub->add_option("--j-hi", o->j_hi, "parameter interval end");
  sub->add_option("--depth", o->sampling.depth, "deepest prefix stratum")->check(CLI::Range(4, 40));
  sub->add_option("--k0", o->sampling.k0, "shallowest prefix stratum")->check(CLI::Range(1, 40));
  sub->add_option("--pairs", o->sampling.sample_pairs, "sampled word pairs")->check(CLI::PositiveNumber);
  sub->add_option("--tail", o->sampling.tail, "symbols beyond the deepest stratum")->check(CLI::Range(1, 64));
  sub->add_option("--d-eta", o->d_eta, "dimension of the companion measure")->check(CLI::Range(0.0, 1.0));
  sub->add_option("--proj-lambda", o->proj_lambda, "contraction for the correlation integral (0: system default)");
  sub->add_option("--proj-depth", o->proj_depth, "word length of the projected measure")->check(CLI::Range(1, 20));
  sub->add_option("--samples", o->samples, "correlation-integral samples")->check(CLI::Range(1000, 100000000));
  sub->callback([o, &sh, &action, file] {
    action = [o, &sh, file] {
      RunOutput r;
      SystemChoice choice;
      if (file->count()) {
        const std::string text = read_file(o->system_file);
        r.input_hashes[o->system_file] = sha256_hex(text);
        choice = system_from_json(text);
      } else {
        choice = preset_system(o->preset);
      }
      const double lam = o->proj_lambda > 0.0 ? o->proj_lambda : choice.projection_lambda;
      require(o->j_lo > 0.0 && o->j_hi < 1.0 && o->j_lo < o->j_hi, "need 0 < j-lo < j-hi < 1");
      SamplingParams p = o->sampling;
      p.seed = sh.seed;
      const ParameterInterval j{o->j_lo, o->j_hi};
      const TransversalityReport rep = build_report(choice.sys, j, p, o->d_eta);
      json report = {{"label", "diagnostic"},
                     {"alpha_hat", rep.alpha_hat}, {"beta_hat", rep.beta_hat}, {"gamma_hat", rep.gamma_hat},
                     {"c1", rep.c1}, {"c2", rep.c2}, {"c3", rep.c3}, {"k0", rep.k0},
                     {"verdict_1", rep.verdict_1}, {"verdict_2", rep.verdict_2}, {"d_eta", rep.d_eta},
                     {"max_certified_depth", rep.max_certified_depth},
                     {"flagged_fraction", rep.flagged_fraction},
                     {"inputs", {{"system", system_json(choice.sys)}, {"j", {o->j_lo, o->j_hi}}, {"depth", p.depth},
                                 {"k0", p.k0}, {"pairs", p.sample_pairs}, {"tail", p.tail}, {"seed", p.seed}}}};
      r.files["report.json"] = report.dump(2) + "\n";
      const AtomicMeasure eta = projected_measure(choice.sys, lam, o->proj_depth);
      const auto radii = dyadic_radii(4, 10);
      CsvTable t({"radius", "estimate"});
      for (const auto& [rad, est] : correlation_integral(eta, eta, radii, o->samples, sh.seed)) {
        t.add_row({rad, est});
      }
      r.files["correlation.csv"] = t.str();
      r.results = report;
      r.results["projection_lambda"] = lam;
      return r;
    };
  });
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);

  CLI::App app{"Spectral experiments for the Fibonacci Hamiltonian and its separable square", "quasispec"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_version_flag("--version", QUASISPEC_VERSION);

  Shared sh;
  Action action;
  using Adder = void (*)(CLI::App&, Shared&, Action&, std::ostream&);
  for (Adder add : {add_spectrum1d, add_ids, add_tracemap, add_lyapunov, add_dimension, add_dos2d, add_sumset2d,
                    add_verify_tensor, add_regularity}) {
    add(app, sh, action, out);
  }
  for (CLI::App* sub : app.get_subcommands([](CLI::App*) { return true; })) {
    sub->add_option("--out", sh.out_dir, "output directory");
    sub->add_option("--cache", sh.cache_dir, "eigenvalue cache directory");
    sub->add_option("--config", sh.config, "key=value file; command-line flags take precedence");
    sub->add_option("--seed", sh.seed, "random seed");
  }

  try {
    args = inject_config(std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    const auto t0 = std::chrono::steady_clock::now();
    RunOutput r = action();
    RunManifest m;
    m.command = sub->get_name();
    m.params = collect_params(*sub);
    m.input_hashes = r.input_hashes;
    m.results = r.results;
    m.seed = sh.seed;
    m.version = QUASISPEC_VERSION;
    m.duration_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    emit_outputs(sh.out_dir, r.files, m);
    out << m.command << ": wrote " << r.files.size() << " file(s) to " << sh.out_dir << "\n";
    out << r.results.dump() << "\n";
    return 0;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericFailure& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace quasispec
