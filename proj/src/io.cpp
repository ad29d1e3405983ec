#include "fracspde/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "fracspde/errors.hpp"

namespace fracspde {

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

void write_field_csv(std::ostream& os, const GridField& f) {
  const bool nodes = f.n_t == f.time.n + 1;
  os << "t";
  for (int i = 0; i < f.space.dim(); ++i) os << (f.space.dim() == 1 ? ",x" : ",x" + std::to_string(i + 1));
  os << ",value\n";
  for (int k = 0; k < f.n_t; ++k) {
    const double t = nodes ? f.time.node(k) : (k + 0.5) * f.time.h();
    for (int j = 0; j < f.n_s; ++j) {
      os << format_double(t);
      for (double c : f.space.center(j)) os << ',' << format_double(c);
      os << ',' << format_double(f.at(k, j)) << '\n';
    }
  }
}

void write_increments_csv(std::ostream& os, const GridField& f) {
  os << "t_index";
  for (int i = 0; i < f.space.dim(); ++i) os << ",x" << i + 1;
  os << ",value\n";
  for (int k = 0; k < f.n_t; ++k) {
    for (int j = 0; j < f.n_s; ++j) {
      os << k;
      for (double c : f.space.center(j)) os << ',' << format_double(c);
      os << ',' << format_double(f.at(k, j)) << '\n';
    }
  }
}

void write_kernel_csv(std::ostream& os, Kernel k, const FractionalOrder& alpha, int d,
                      const std::vector<double>& ts, const std::vector<double>& xs) {
  FRACSPDE_REQUIRE(d >= 1 && d <= 3, InvalidArgument, "kernel tabulation supports d <= 3");
  os << "t";
  for (int i = 0; i < d; ++i) os << ",x" << i + 1;
  os << ",value\n";
  std::vector<double> x(d, 0.0);
  for (double t : ts) {
    for (double r : xs) {
      x[0] = r;
      os << format_double(t);
      for (double c : x) os << ',' << format_double(c);
      os << ',' << format_double(green(k, t, x, alpha)) << '\n';
    }
  }
}

void write_matrix_binary(const std::string& path, const Eigen::MatrixXd& m, const Json& extra) {
  std::ofstream out(path, std::ios::binary);
  FRACSPDE_REQUIRE(out.good(), ConfigError, "cannot open " + path + " for writing");
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      out.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
  }
  Json side = {{"rows", m.rows()}, {"cols", m.cols()}, {"dtype", "float64"},
               {"order", "row-major"}, {"endian", "little"}};
  for (auto it = extra.begin(); it != extra.end(); ++it) side[it.key()] = it.value();
  std::ofstream js(path + ".json");
  js << side.dump(2) << '\n';
}

std::string sha256_hex(const std::string& bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) {
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  }
  return os.str();
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  FRACSPDE_REQUIRE(in.good(), ConfigError, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

Json RunManifest::to_json() const {
  Json out = Json::array();
  for (const auto& [p, h] : outputs) out.push_back({{"path", p}, {"sha256", h}});
  return {{"subcommand", subcommand}, {"config", config},  {"seed", seed},
          {"version", version},       {"started", started}, {"finished", finished},
          {"outputs", out}};
}

namespace {

void only(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) throw ConfigError(where + ": unknown field '" + it.key() + "'");
  }
}

double num(const Json& j, const std::string& key, const std::string& where, double fallback,
           bool required = false) {
  if (!j.contains(key)) {
    if (required) throw ConfigError(where + ": missing field '" + key + "'");
    return fallback;
  }
  if (!j[key].is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return j[key].get<double>();
}

long long integer(const Json& j, const std::string& key, const std::string& where,
                  long long fallback, bool required = false) {
  if (!j.contains(key)) {
    if (required) throw ConfigError(where + ": missing field '" + key + "'");
    return fallback;
  }
  if (!j[key].is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
  return j[key].get<long long>();
}

std::string text(const Json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key) || !j[key].is_string()) {
    throw ConfigError(where + ": field '" + key + "' must be a string");
  }
  return j[key].get<std::string>();
}

InitialData initial_from_json(const Json& j, bool with_u1) {
  const std::string w = "initial";
  const std::string type = text(j, "type", w);
  if (type == "constant") {
    only(j, {"type", "u0", "u1"}, w);
    return InitialData::constant(num(j, "u0", w, 1.0), num(j, "u1", w, 0.0), with_u1);
  }
  if (type == "gaussian_bump") {
    only(j, {"type", "amplitude", "width"}, w);
    return InitialData::gaussian_bump(num(j, "amplitude", w, 1.0), num(j, "width", w, 1.0), with_u1);
  }
  if (type == "sinusoid") {
    only(j, {"type", "amplitude", "wavenumber"}, w);
    return InitialData::sinusoid(num(j, "amplitude", w, 1.0), num(j, "wavenumber", w, 1.0), with_u1);
  }
  throw ConfigError("initial.type: unknown '" + type + "' (constant|gaussian_bump|sinusoid)");
}

Json initial_to_json(const InitialData& d) {
  const auto& p = d.params;
  if (p.size() != 2) throw ConfigError("initial data '" + d.name + "' cannot be serialized");
  if (d.name == "constant") return {{"type", "constant"}, {"u0", p[0]}, {"u1", p[1]}};
  if (d.name == "gaussian_bump") return {{"type", "gaussian_bump"}, {"amplitude", p[0]}, {"width", p[1]}};
  if (d.name == "sinusoid") return {{"type", "sinusoid"}, {"amplitude", p[0]}, {"wavenumber", p[1]}};
  throw ConfigError("initial data '" + d.name + "' cannot be serialized");
}

}  // namespace

NoiseSpec noise_from_json(const Json& j, int d) {
  only(j, {"time", "space"}, "noise");
  NoiseSpec n;
  n.d = d;
  if (j.contains("time")) {
    const Json& t = j["time"];
    const std::string w = "noise.time", type = text(t, "type", w);
    if (type == "constant") {
      only(t, {"type", "c"}, w);
      n.time = ConstantTime{num(t, "c", w, 1.0)};
    } else if (type == "riesz") {
      only(t, {"type", "beta"}, w);
      n.time = RieszTime{num(t, "beta", w, 0.5, true)};
    } else if (type == "exponential") {
      only(t, {"type", "rate"}, w);
      n.time = ExponentialTime{num(t, "rate", w, 1.0, true)};
    } else {
      throw ConfigError(w + ".type: unknown '" + type + "' (constant|riesz|exponential)");
    }
  }
  if (j.contains("space")) {
    const Json& s = j["space"];
    const std::string w = "noise.space", type = text(s, "type", w);
    if (type == "fractional") {
      only(s, {"type", "H"}, w);
      if (!s.contains("H") || !s["H"].is_array()) throw ConfigError(w + ".H: expected an array");
      Fractional f;
      for (const auto& h : s["H"]) {
        if (!h.is_number()) throw ConfigError(w + ".H: expected numbers");
        f.H.push_back(h.get<double>());
      }
      n.space = f;
    } else if (type == "riesz") {
      only(s, {"type", "kappa", "C"}, w);
      n.space = Riesz{num(s, "kappa", w, 0.5, true), num(s, "C", w, 1.0)};
    } else if (type == "bessel") {
      only(s, {"type", "kappa", "C"}, w);
      n.space = Bessel{num(s, "kappa", w, 0.5, true), num(s, "C", w, 1.0)};
    } else {
      throw ConfigError(w + ".type: unknown '" + type + "' (fractional|riesz|bessel)");
    }
  }
  return n;
}

Json noise_to_json(const NoiseSpec& n) {
  Json t = std::visit(
      [](const auto& k) -> Json {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, ConstantTime>) return {{"type", "constant"}, {"c", k.c}};
        else if constexpr (std::is_same_v<K, RieszTime>) return {{"type", "riesz"}, {"beta", k.beta}};
        else return {{"type", "exponential"}, {"rate", k.rate}};
      },
      n.time);
  Json s = std::visit(
      [](const auto& k) -> Json {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Fractional>) return {{"type", "fractional"}, {"H", k.H}};
        else if constexpr (std::is_same_v<K, Riesz>)
          return {{"type", "riesz"}, {"kappa", k.kappa}, {"C", k.C}};
        else return {{"type", "bessel"}, {"kappa", k.kappa}, {"C", k.C}};
      },
      n.space);
  return {{"time", t}, {"space", s}};
}

SimulationConfig config_from_json(const Json& j) {
  const std::string w = "config";
  only(j, {"schema", "alpha", "d", "noise", "initial", "t_grid", "x_grid", "seed", "picard_iters",
           "chaos_order", "scheme", "amplitude", "threads", "forcing"},
       w);
  if (integer(j, "schema", w, 0, true) != 1) throw ConfigError("config.schema: only schema 1 is supported");
  SimulationConfig c;
  try {
    c.alpha = FractionalOrder(num(j, "alpha", w, 0.75, true));
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("config.alpha: ") + e.what());
  }
  c.d = static_cast<int>(integer(j, "d", w, 1));
  if (j.contains("noise")) c.noise = noise_from_json(j["noise"], c.d);
  c.noise.d = c.d;
  const bool with_u1 = c.alpha.regime() == Regime::Super;
  c.initial = j.contains("initial") ? initial_from_json(j["initial"], with_u1)
                                    : InitialData::constant(1.0, 0.0, with_u1);
  if (j.contains("t_grid")) {
    only(j["t_grid"], {"T", "n"}, "t_grid");
    c.t_grid = TimeGrid{num(j["t_grid"], "T", "t_grid", 0.25, true),
                        static_cast<int>(integer(j["t_grid"], "n", "t_grid", 16, true))};
  }
  if (j.contains("x_grid")) {
    const Json& x = j["x_grid"];
    only(x, {"lo", "hi", "n"}, "x_grid");
    c.x_grid = SpaceGrid::uniform(1, num(x, "lo", "x_grid", -7.0, true), num(x, "hi", "x_grid", 7.0, true),
                                  static_cast<int>(integer(x, "n", "x_grid", 97, true)));
  }
  const long long seed = integer(j, "seed", w, 1);
  if (seed < 0) throw ConfigError("config.seed: must be >= 0");
  c.seed = static_cast<std::uint64_t>(seed);
  c.picard_iters = static_cast<int>(integer(j, "picard_iters", w, 1));
  c.chaos_order = static_cast<int>(integer(j, "chaos_order", w, 2));
  if (j.contains("scheme")) {
    const std::string s = text(j, "scheme", w);
    if (s == "forward_sum") c.scheme = PathScheme::ForwardSum;
    else if (s == "wick_chaos") c.scheme = PathScheme::WickChaos;
    else throw ConfigError("config.scheme: unknown '" + s + "' (forward_sum|wick_chaos)");
  }
  c.amplitude = num(j, "amplitude", w, 1.0);
  c.threads = static_cast<int>(integer(j, "threads", w, 1));
  if (j.contains("forcing")) {
    const Json& f = j["forcing"];
    only(f, {"type", "value"}, "forcing");
    const std::string type = text(f, "type", "forcing");
    if (type != "zero" && type != "constant") {
      throw ConfigError("forcing.type: unknown '" + type + "' (zero|constant)");
    }
  }
  try {
    c.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

Json config_to_json(const SimulationConfig& c) {
  const Axis& ax = c.x_grid.axes.at(0);
  return {{"schema", 1},
          {"alpha", c.alpha.alpha()},
          {"d", c.d},
          {"noise", noise_to_json(c.noise)},
          {"initial", initial_to_json(c.initial)},
          {"t_grid", {{"T", c.t_grid.T}, {"n", c.t_grid.n}}},
          {"x_grid", {{"lo", ax.lo}, {"hi", ax.hi}, {"n", ax.n}}},
          {"seed", c.seed},
          {"picard_iters", c.picard_iters},
          {"chaos_order", c.chaos_order},
          {"scheme", c.scheme == PathScheme::WickChaos ? "wick_chaos" : "forward_sum"},
          {"amplitude", c.amplitude},
          {"threads", c.threads}};
}

Json to_json(const ChaosReport& r, const ConvergenceInputs& in) {
  Json conds = Json::array();
  for (const auto& c : r.conditions) {
    conds.push_back({{"name", c.name}, {"satisfied", c.satisfied}, {"slack", c.slack}});
  }
  return {{"inputs",
           {{"alpha", in.alpha.alpha()},
            {"d", in.d},
            {"t", in.horizon_t},
            {"c_t", in.c_t},
            {"noise", noise_to_json(in.noise)},
            {"envelope",
             {{"zeta", in.envelope.zeta}, {"kappa", in.envelope.kappa}, {"gamma", in.envelope.gamma}}}}},
          {"ell", r.ell},
          {"margin", r.margin},
          {"threshold_ok", r.threshold_ok},
          {"verdict", r.verdict},
          {"conditions", conds},
          {"summable", r.bound.summable},
          {"divergent", r.bound.divergent},
          {"bound_terms", r.bound.terms},
          {"ratios", r.bound.ratios}};
}

Json to_json(const ScalingReport& r) {
  return {{"name", r.name},         {"exponent_fit", r.exponent_fit},
          {"exponent_expected", r.exponent_expected}, {"intercept", r.intercept},
          {"residual", r.residual}, {"tolerance", r.tolerance},
          {"pass", r.pass},         {"scales", r.scales},
          {"values", r.values}};
}

Json to_json(const DominationReport& r) {
  return {{"kernel", to_string(r.kernel)},
          {"d", r.d},
          {"alpha", r.alpha},
          {"pass", r.pass},
          {"sup_ratio", r.sup_ratio},
          {"t_at", r.t_at},
          {"r_at", r.r_at},
          {"zeta", r.params.zeta},
          {"kappa", r.params.kappa},
          {"sigma", r.params.sigma},
          {"c_fit", r.params.c_fit}};
}

Json to_json(const QuadcheckSuite& s) {
  Json simplex = Json::array();
  for (const auto& c : s.simplex) {
    simplex.push_back({{"n", c.n},
                       {"h", c.h},
                       {"t", c.t},
                       {"numeric", c.result.numeric},
                       {"closed_form", c.result.closed_form},
                       {"rel_error", c.result.rel_error},
                       {"pass", c.pass}});
  }
  Json scaling = Json::array();
  for (const auto& r : s.scaling) scaling.push_back(to_json(r));
  return {{"pass", s.pass}, {"simplex", simplex}, {"scaling", scaling}};
}

}  // namespace fracspde
