// fracspde: special functions, kernels, well-posedness checks, simulation
// and verification from the command line.
//
// Exit status: 0 success, 1 invalid input, 2 a verification report failed.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "fracspde/chaos.hpp"
#include "fracspde/duhamel.hpp"
#include "fracspde/errors.hpp"
#include "fracspde/greens.hpp"
#include "fracspde/io.hpp"
#include "fracspde/noise.hpp"
#include "fracspde/parallel.hpp"
#include "fracspde/quadcheck.hpp"
#include "fracspde/specfun.hpp"

using namespace fracspde;

namespace {

struct Range {
  double lo = 0.0, hi = 1.0;
  int n = 1;
  std::vector<double> values() const {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
    return v;
  }
};

std::vector<double> split_numbers(const std::string& s, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(flag + ": '" + item + "' is not a number");
    }
  }
  return out;
}

Range parse_range(const std::string& s, const std::string& flag) {
  const auto v = split_numbers(s, flag);
  if (v.size() != 3 || v[2] < 1 || v[2] != std::floor(v[2]) || v[1] < v[0]) {
    throw ConfigError(flag + ": expected lo,hi,n with lo <= hi and integer n >= 1, got '" + s + "'");
  }
  return {v[0], v[1], static_cast<int>(v[2])};
}

FractionalOrder parse_alpha(double a) {
  if (!(a > 0.5 && a < 2.0) || a == 1.0) {
    throw ConfigError("--alpha: " + format_double(a) + " is not in (1/2,1) U (1,2)");
  }
  return FractionalOrder(a);
}

struct Output {
  std::string path;
  std::ofstream file;
  std::ostream& stream() { return path.empty() ? std::cout : file; }
  void open() {
    if (path.empty()) return;
    file.open(path, std::ios::binary);
    if (!file) throw ConfigError("--out: cannot open '" + path + "' for writing");
  }
};

// The manifest goes next to the main output, or to stderr when writing to stdout.
void emit_manifest(RunManifest& m, const std::string& out_path) {
  m.finished = utc_now();
  const std::string text = m.to_json().dump(2) + "\n";
  if (out_path.empty()) {
    std::cerr << text;
  } else {
    std::ofstream f(out_path + ".manifest.json", std::ios::binary);
    f << text;
  }
}

RunManifest start_manifest(const std::string& sub, Json config, std::uint64_t seed = 0) {
  RunManifest m;
  m.subcommand = sub;
  m.config = std::move(config);
  m.seed = seed;
  m.version = kVersion;
  m.started = utc_now();
  return m;
}

}  // namespace

namespace {

struct SpecfunArgs {
  std::string fn = "wright";
  std::string params = "-0.5,0.5";
  std::string range = "0,5,11";
  double tol = 1e-12;
};

int cmd_specfun(const SpecfunArgs& a) {
  const auto p = split_numbers(a.params, "--params");
  if (p.size() != 2) throw ConfigError("--params: expected two numbers a,b");
  const Range r = parse_range(a.range, "--range");
  if (!(a.tol > 0.0 && a.tol < 1.0)) throw ConfigError("--tol: must lie in (0, 1)");
  auto m = start_manifest("specfun", {{"fn", a.fn}, {"params", p}, {"range", a.range}, {"tol", a.tol}});
  SeriesControl ctl;
  ctl.rel_tol = a.tol;
  std::cout << "z\tvalue\tmethod\n";
  for (double z : r.values()) {
    if (a.fn == "wright") {
      const WrightValue v = wright_phi_eval(p[0], p[1], z, ctl);
      std::cout << format_double(z) << '\t' << format_double(v.value) << '\t'
                << (v.method == WrightMethod::Series ? "series" : "contour") << '\n';
    } else {
      std::cout << format_double(z) << '\t' << format_double(mittag_leffler(p[0], p[1], z, ctl))
                << "\tml\n";
    }
  }
  emit_manifest(m, "");
  return 0;
}

struct KernelArgs {
  std::string kernel = "Y";
  double alpha = 0.75;
  int dim = 1;
  std::string t_range = "0.25,1,4";
  std::string x_range = "0,3,31";
  std::string out;
};

int cmd_kernel(KernelArgs& a) {
  const FractionalOrder alpha = parse_alpha(a.alpha);
  Kernel k;
  try {
    k = kernel_from_string(a.kernel);
  } catch (const Error&) {
    throw ConfigError("--kernel: '" + a.kernel + "' is not one of Y, Z1, Z2");
  }
  if (k == Kernel::Z2 && alpha.alpha() < 1.0) throw ConfigError("--kernel: Z2 requires --alpha in (1,2)");
  if (a.dim < 1 || a.dim > 3) throw ConfigError("--dim: must be 1, 2 or 3");
  const Range tr = parse_range(a.t_range, "--t-range"), xr = parse_range(a.x_range, "--x-range");
  if (!(tr.lo > 0.0)) throw ConfigError("--t-range: times must be > 0");
  auto m = start_manifest("kernel", {{"kernel", a.kernel}, {"alpha", a.alpha}, {"dim", a.dim},
                                     {"t_range", a.t_range}, {"x_range", a.x_range}});
  Output out{a.out, {}};
  out.open();
  write_kernel_csv(out.stream(), k, alpha, a.dim, tr.values(), xr.values());
  if (!a.out.empty()) {
    out.file.close();
    m.add_output(a.out);
  }
  emit_manifest(m, a.out);
  return 0;
}

}  // namespace

namespace {

struct CheckArgs {
  double alpha = 0.75;
  int dim = 1;
  std::string kernel = "fractional";
  std::string hurst = "0.75";
  double kappa = 0.5;
  double t = 1.0;
  double gamma = 1.0;
  bool sweep = false;
  std::string alpha_range = "0.55,1.95,15";
  std::string param_range;
  std::string out;
};

NoiseSpec check_noise(const std::string& kernel, int d, const std::vector<double>& hurst,
                      double kappa) {
  NoiseSpec n;
  n.d = d;
  if (kernel == "fractional") {
    std::vector<double> H = hurst;
    if (H.size() == 1) H.assign(d, H[0]);
    if (static_cast<int>(H.size()) != d) {
      throw ConfigError("--hurst: expected 1 or " + std::to_string(d) + " values");
    }
    n.space = Fractional{H};
  } else if (kernel == "riesz") {
    n.space = Riesz{kappa, 1.0};
  } else if (kernel == "bessel") {
    n.space = Bessel{kappa, 1.0};
  } else {
    throw ConfigError("--kernel: '" + kernel + "' is not one of fractional, riesz, bessel");
  }
  const auto bad = validate_spec(n);
  if (!bad.empty()) {
    std::string msg = kernel == "fractional" ? "--hurst: " : "--kappa: ";
    for (std::size_t i = 0; i < bad.size(); ++i) msg += (i ? "; " : "") + bad[i];
    throw ConfigError(msg);
  }
  return n;
}

int cmd_check(CheckArgs& a) {
  if (a.dim < 1) throw ConfigError("--dim: must be >= 1");
  if (!(a.t > 0.0)) throw ConfigError("--t: must be > 0");
  Json echo = {{"alpha", a.alpha}, {"dim", a.dim}, {"kernel", a.kernel}, {"t", a.t},
               {"gamma", a.gamma}, {"sweep", a.sweep}};
  Output out{a.out, {}};
  if (!a.sweep) {
    const FractionalOrder alpha = parse_alpha(a.alpha);
    const NoiseSpec n = check_noise(a.kernel, a.dim, split_numbers(a.hurst, "--hurst"), a.kappa);
    echo["hurst"] = a.hurst;
    echo["kappa"] = a.kappa;
    auto m = start_manifest("check", echo);
    ConvergenceInputs in(alpha, n, a.t, a.gamma);
    const ChaosReport r = check_conditions(in);
    out.open();
    out.stream() << to_json(r, in).dump(2) << '\n';
    if (!a.out.empty()) {
      out.file.close();
      m.add_output(a.out);
    }
    emit_manifest(m, a.out);
    return 0;
  }
  const Range ar = parse_range(a.alpha_range, "--alpha-range");
  const bool frac = a.kernel == "fractional";
  const Range pr = parse_range(
      a.param_range.empty() ? (frac ? std::string("0.51,0.99,25") : "0.05," + format_double(a.dim - 0.05) + ",25")
                            : a.param_range,
      "--param-range");
  echo["alpha_range"] = a.alpha_range;
  echo["param_range"] = a.param_range;
  auto m = start_manifest("check", echo);
  out.open();
  std::ostream& os = out.stream();
  os << "alpha," << (frac ? "H" : "kappa") << ",ell,margin,threshold_ok,verdict\n";
  for (double al : ar.values()) {
    const FractionalOrder alpha = parse_alpha(al);
    for (double p : pr.values()) {
      const NoiseSpec n = check_noise(a.kernel, a.dim, {p}, p);
      ConvergenceInputs in(alpha, n, a.t, a.gamma);
      const ChaosReport r = check_conditions(in, 10);
      os << format_double(al) << ',' << format_double(p) << ',' << format_double(r.ell) << ','
         << format_double(r.margin) << ',' << (r.threshold_ok ? "true" : "false") << ','
         << (r.verdict ? "true" : "false") << '\n';
    }
  }
  if (!a.out.empty()) {
    out.file.close();
    m.add_output(a.out);
  }
  emit_manifest(m, a.out);
  return 0;
}

}  // namespace

namespace {

struct SimulateArgs {
  std::string config;
  std::string mode = "det";
  std::uint64_t samples = 1000;
  long long seed = -1;
  double x = 0.0;
  std::string out;
  int threads = 0;
};

Json read_json_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("--config: cannot open '" + path + "'");
  try {
    return Json::parse(f);
  } catch (const Json::parse_error& e) {
    throw ConfigError("--config: " + path + ": " + e.what());
  }
}

Forcing forcing_from_json(const Json& j) {
  double v = 0.0;
  if (j.contains("forcing") && j["forcing"].value("type", "zero") == "constant") {
    v = j["forcing"].value("value", 0.0);
  }
  return [v](double, double, double) { return v; };
}

Json field_summary(const GridField& f, int row) {
  double lo = INFINITY, hi = -INFINITY, sum = 0.0;
  for (int j = 0; j < f.n_s; ++j) {
    const double v = f.at(row, j);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    sum += v;
  }
  return {{"t", f.time.node(row)}, {"min", lo}, {"max", hi}, {"mean", sum / f.n_s}};
}

int cmd_simulate(SimulateArgs& a) {
  const Json raw = read_json_file(a.config);
  SimulationConfig cfg = config_from_json(raw);
  if (a.seed >= 0) cfg.seed = static_cast<std::uint64_t>(a.seed);
  if (a.threads > 0) cfg.threads = a.threads;
  if (a.mode != "det" && a.mode != "path" && a.mode != "moment") {
    throw ConfigError("--mode: '" + a.mode + "' is not one of det, path, moment");
  }
  if (a.mode == "moment" && a.samples < 1) throw ConfigError("--samples: must be >= 1");
  Json echo = config_to_json(cfg);
  echo["mode"] = a.mode;
  if (a.mode == "moment") echo["samples"] = a.samples;
  auto m = start_manifest("simulate", echo, cfg.seed);

  Json summary = {{"mode", a.mode}};
  GridField field;
  if (a.mode == "det") {
    field = deterministic_solve(cfg, forcing_from_json(raw));
    summary["final"] = field_summary(field, cfg.t_grid.n);
  } else if (a.mode == "path") {
    field = pathwise_simulate(cfg, 0);
    summary["scheme"] = field.scheme;
    summary["final"] = field_summary(field, cfg.t_grid.n);
  } else {
    const MCResult mc = mc_second_moment(cfg, a.samples);
    field = mc.second;
    const SecondMoment sm = second_moment_chaos(cfg, cfg.t_grid.T, a.x);
    const int j = std::clamp(
        static_cast<int>(std::floor((a.x - cfg.x_grid.axes[0].lo) / cfg.x_grid.axes[0].h())), 0,
        field.n_s - 1);
    const int k = field.n_t - 1;
    summary["scheme"] = field.scheme;
    summary["samples"] = mc.samples;
    summary["x_cell"] = cfg.x_grid.center(j)[0];
    summary["mc_second_moment"] = mc.second.at(k, j);
    summary["mc_ci95"] = mc.ci.at(k, j);
    summary["mc_mean"] = mc.mean.at(k, j);
    summary["chaos"] = {{"value", sm.value},
                        {"j0_sq", sm.j0_sq},
                        {"terms", sm.terms},
                        {"error", sm.error},
                        {"truncation_ratio", sm.truncation_ratio}};
  }

  Output out{a.out, {}};
  out.open();
  write_field_csv(out.stream(), field);
  if (!a.out.empty()) {
    out.file.close();
    m.add_output(a.out);
    const std::string sp = a.out + ".summary.json";
    std::ofstream(sp, std::ios::binary) << summary.dump(2) << '\n';
    m.add_output(sp);
  } else {
    std::cerr << summary.dump(2) << '\n';
  }
  emit_manifest(m, a.out);
  return 0;
}

}  // namespace

namespace {

struct VerifyArgs {
  double tolerance = 0.05;
  std::string out;
  int threads = 1;
};

std::string kernel_label(Kernel k) {
  switch (k) {
    case Kernel::Y: return "Y";
    case Kernel::Z1: return "Z1";
    default: return "Z2";
  }
}

int cmd_verify(VerifyArgs& a) {
  if (!(a.tolerance > 0.0 && a.tolerance < 1.0)) throw ConfigError("--tolerance: must lie in (0, 1)");
  auto m = start_manifest("verify", {{"tolerance", a.tolerance}});
  Json env = Json::array();
  bool pass = true;
  for (Kernel k : {Kernel::Y, Kernel::Z1, Kernel::Z2}) {
    for (double al : {0.75, 1.5}) {
      if (k == Kernel::Z2 && al < 1.0) continue;
      const FractionalOrder alpha(al);
      for (int d = 1; d <= 3; ++d) {
        const DominationReport r =
            verify_envelope(k, alpha, EnvelopeParams::for_kernel(k, alpha, d));
        pass = pass && r.pass;
        Json j = to_json(r);
        j["kernel"] = kernel_label(k);
        env.push_back(std::move(j));
        std::cerr << "envelope " << kernel_label(k) << " alpha=" << al << " d=" << d << ": "
                  << (r.pass ? "PASS" : "FAIL") << " sup=" << format_double(r.sup_ratio) << '\n';
      }
    }
  }
  const QuadcheckSuite qs = quadcheck_suite(a.tolerance, a.threads);
  pass = pass && qs.pass;
  std::cerr << "quadcheck: " << (qs.pass ? "PASS" : "FAIL") << '\n';
  const Json report = {{"envelope", env}, {"quadcheck", to_json(qs)}, {"pass", pass}};
  Output out{a.out, {}};
  out.open();
  out.stream() << report.dump(2) << '\n';
  if (!a.out.empty()) {
    out.file.close();
    m.add_output(a.out);
  }
  emit_manifest(m, a.out);
  return pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fractional stochastic PDE toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));
  int threads_req = 0;
  app.add_option("--threads", threads_req, "Worker threads (0 = FRACSPDE_THREADS or 1)")
      ->check(CLI::NonNegativeNumber);

  SpecfunArgs sf;
  auto* c_sf = app.add_subcommand("specfun", "Tabulate the Wright or Mittag-Leffler function");
  c_sf->add_option("--fn", sf.fn)->check(CLI::IsMember({"wright", "ml"}));
  c_sf->add_option("--params", sf.params, "a,b (Wright lambda,mu or ML alpha,beta)");
  c_sf->add_option("--range", sf.range, "lo,hi,n");
  c_sf->add_option("--tol", sf.tol);

  KernelArgs ka;
  auto* c_k = app.add_subcommand("kernel", "Evaluate Y, Z1 or Z2 on a radial grid");
  c_k->add_option("--kernel", ka.kernel);
  c_k->add_option("--alpha", ka.alpha);
  c_k->add_option("--dim", ka.dim);
  c_k->add_option("--t-range", ka.t_range);
  c_k->add_option("--x-range", ka.x_range);
  c_k->add_option("--out", ka.out);

  CheckArgs ca;
  auto* c_c = app.add_subcommand("check", "Convergence exponent and well-posedness conditions");
  c_c->add_option("--alpha", ca.alpha);
  c_c->add_option("--dim", ca.dim);
  c_c->add_option("--kernel", ca.kernel, "fractional|riesz|bessel");
  c_c->add_option("--hurst", ca.hurst, "H or H1,...,Hd");
  c_c->add_option("--kappa", ca.kappa);
  c_c->add_option("--t", ca.t);
  c_c->add_option("--gamma", ca.gamma);
  c_c->add_flag("--sweep", ca.sweep, "Grid over alpha and H (or kappa); CSV output");
  c_c->add_option("--alpha-range", ca.alpha_range);
  c_c->add_option("--param-range", ca.param_range);
  c_c->add_option("--out", ca.out);

  SimulateArgs sa;
  auto* c_s = app.add_subcommand("simulate", "Deterministic solve, sample path or second moment");
  c_s->add_option("--config", sa.config)->required();
  c_s->add_option("--mode", sa.mode, "det|path|moment");
  c_s->add_option("--samples", sa.samples);
  c_s->add_option("--seed", sa.seed);
  c_s->add_option("--x", sa.x, "Point for the chaos second moment");
  c_s->add_option("--out", sa.out);

  VerifyArgs va;
  auto* c_v = app.add_subcommand("verify", "Envelope domination and quadrature checks");
  c_v->add_option("--tolerance", va.tolerance);
  c_v->add_option("--out", va.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    const int threads = thread_count(threads_req);
    if (*c_sf) return cmd_specfun(sf);
    if (*c_k) return cmd_kernel(ka);
    if (*c_c) return cmd_check(ca);
    if (*c_s) {
      if (threads_req > 0 || std::getenv("FRACSPDE_THREADS")) sa.threads = threads;
      return cmd_simulate(sa);
    }
    va.threads = threads;
    return cmd_verify(va);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
