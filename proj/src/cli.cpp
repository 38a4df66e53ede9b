#include "tacnode/cli.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <sstream>
#include <variant>

#include "tacnode/finite_kernel.hpp"
#include "tacnode/limit.hpp"
#include "tacnode/oracle.hpp"
#include "tacnode/specfun.hpp"

namespace tacnode::cli {

namespace {

constexpr const char* kVersion = "1.0.0";

const std::vector<std::pair<std::string, Command>> kCommands = {
    {"kernel-finite", Command::kernel_finite}, {"kernel-tacnode", Command::kernel_tacnode},
    {"gap-finite", Command::gap_finite},       {"gap-tacnode", Command::gap_tacnode},
    {"converge", Command::converge},           {"tw2", Command::tw2},
    {"selftest", Command::selftest}};

const std::vector<std::string> kKeys = {"t",    "m",     "sigma", "s1",    "s2",   "xi1", "xi2",  "grid",
                                        "tol",  "order", "format", "out",  "time", "sites", "x",   "mode"};

using Cell = std::variant<double, long, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::pair<std::string, std::string>> meta;  // results that belong in the header
};

// ---- parameter access ----

class Params {
 public:
  explicit Params(const RunConfig& c) : c_(c) {}

  bool has(const std::string& key) const { return c_.parameters.count(key) > 0; }

  const std::string& str(const std::string& key) const {
    auto it = c_.parameters.find(key);
    if (it == c_.parameters.end()) throw UsageError("missing required option --" + key);
    return it->second;
  }

  double num(const std::string& key) const { return to_double(key, str(key)); }
  double num(const std::string& key, double fallback) const { return has(key) ? num(key) : fallback; }
  long integer(const std::string& key) const { return to_long(key, str(key)); }
  long integer(const std::string& key, long fallback) const { return has(key) ? integer(key) : fallback; }

  std::vector<double> num_list(const std::string& key) const {
    std::vector<double> out;
    for (const std::string& part : split(str(key), ',')) out.push_back(to_double(key, part));
    if (out.empty()) throw UsageError("--" + key + ": empty list");
    return out;
  }

  static double to_double(const std::string& key, const std::string& text) {
    std::string s = trim(text);
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v))
      throw UsageError("--" + key + ": '" + text + "' is not a finite number");
    return v;
  }

  static long to_long(const std::string& key, const std::string& text) {
    std::string s = trim(text);
    long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw UsageError("--" + key + ": '" + text + "' is not an integer");
    return v;
  }

  static std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(text);
    while (std::getline(in, cur, sep))
      if (!trim(cur).empty()) out.push_back(trim(cur));
    return out;
  }

  static std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\"'");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\"'");
    return s.substr(b, e - b + 1);
  }

 private:
  const RunConfig& c_;
};

// "a:b" -> a..b; "a" -> a
std::vector<long> integer_range(const std::string& key, const std::string& text) {
  auto parts = Params::split(text, ':');
  if (parts.size() == 1) return {Params::to_long(key, parts[0])};
  if (parts.size() != 2) throw UsageError("--" + key + ": expected a or a:b, got '" + text + "'");
  long a = Params::to_long(key, parts[0]), b = Params::to_long(key, parts[1]);
  if (b < a || b - a > 10000) throw UsageError("--" + key + ": bad range '" + text + "'");
  std::vector<long> out;
  for (long x = a; x <= b; ++x) out.push_back(x);
  return out;
}

// "lo:hi:n" -> n equispaced values; "v" -> {v}
std::vector<double> real_grid(const std::string& text) {
  auto parts = Params::split(text, ':');
  if (parts.size() == 1) return {Params::to_double("grid", parts[0])};
  if (parts.size() != 3) throw UsageError("--grid: expected lo:hi:n, got '" + text + "'");
  double lo = Params::to_double("grid", parts[0]), hi = Params::to_double("grid", parts[1]);
  long n = Params::to_long("grid", parts[2]);
  if (n < 1 || n > 1000 || hi < lo) throw UsageError("--grid: bad grid '" + text + "'");
  std::vector<double> out;
  for (long i = 0; i < n; ++i) out.push_back(n == 1 ? lo : lo + (hi - lo) * double(i) / double(n - 1));
  return out;
}

// slices separated by ';', sites by ',', ranges a:b
std::vector<std::vector<long>> site_slices(const std::string& text) {
  std::vector<std::vector<long>> out;
  for (const std::string& slice : Params::split(text, ';')) {
    std::vector<long> sites;
    for (const std::string& part : Params::split(slice, ','))
      for (long x : integer_range("sites", part)) sites.push_back(x);
    out.push_back(sites);
  }
  return out;
}

// slices separated by ';', intervals "a:b" by ','
std::vector<fredholm::Region> interval_slices(const std::string& text) {
  std::vector<fredholm::Region> out;
  for (const std::string& slice : Params::split(text, ';')) {
    fredholm::Region region;
    for (const std::string& part : Params::split(slice, ',')) {
      auto ends = Params::split(part, ':');
      if (ends.size() != 2) throw UsageError("--x: expected intervals a:b, got '" + part + "'");
      region.push_back({Params::to_double("x", ends[0]), Params::to_double("x", ends[1])});
    }
    out.push_back(region);
  }
  return out;
}

Tolerance tolerance(const Params& p, Tolerance fallback) {
  if (!p.has("tol")) return fallback;
  double tol = p.num("tol");
  if (!(tol > 0.0)) throw UsageError("--tol must be positive");
  return {tol, tol};
}

finite::FiniteModel finite_model(const Params& p) {
  finite::FiniteModel m;
  m.t = p.num("t");
  m.m = p.integer("m");
  m.tol = tolerance(p, m.tol);
  m.validate();
  return m;
}

limit::TacnodeModel tacnode_model(const Params& p) {
  limit::TacnodeModel m;
  m.sigma = p.num("sigma", 0.0);
  m.tol = tolerance(p, m.tol);
  m.validate();
  return m;
}

finite::GapMode gap_mode(const Params& p) {
  std::string mode = p.has("mode") ? p.str("mode") : "holes";
  if (mode == "holes") return finite::GapMode::holes;
  if (mode == "particles") return finite::GapMode::particles;
  throw UsageError("--mode must be holes or particles");
}

// ---- commands ----

Table kernel_finite(const Params& p, bool verify) {
  finite::FiniteSystem sys(finite_model(p));
  double t1 = p.num("s1", 0.0), t2 = p.num("s2", 0.0);
  std::vector<std::pair<long, long>> pts;
  if (!p.has("grid") && p.has("xi1") && p.has("xi2")) {
    pts.push_back({p.integer("xi1"), p.integer("xi2")});
  } else {
    std::vector<long> g = integer_range("grid", p.has("grid") ? p.str("grid") : "-3:3");
    for (long a : g)
      for (long b : g) pts.push_back({a, b});
  }
  Table tab;
  tab.columns = {"t1", "x1", "t2", "x2", "reduced", "raw"};
  if (verify) tab.columns.insert(tab.columns.end(), {"contour", "abs_diff"});
  tab.rows.resize(pts.size());
  parallel_for(pts.size(), [&](std::size_t i) {
    auto [x1, x2] = pts[i];
    finite::ExtendedKernelValue v = sys.kernel_ext(t1, x1, t2, x2);
    std::vector<Cell> row{t1, x1, t2, x2, v.reduced, v.raw};
    if (verify) {
      double c = sys.kernel_contour(t1, x1, t2, x2);
      row.push_back(c);
      row.push_back(std::abs(c - v.reduced));
    }
    tab.rows[i] = row;
  });
  tab.meta.push_back({"h_ratio", format_number(sys.h_ratio())});
  return tab;
}

Table kernel_tacnode(const Params& p, bool verify) {
  limit::TacnodeSystem sys(tacnode_model(p));
  double s1 = p.num("s1", 0.0), s2 = p.num("s2", 0.0);
  std::vector<std::pair<double, double>> pts;
  if (p.has("grid")) {
    std::vector<double> g = real_grid(p.str("grid"));
    for (double a : g)
      for (double b : g) pts.push_back({a, b});
  } else {
    pts.push_back({p.num("xi1", 0.0), p.num("xi2", 0.0)});
  }
  Table tab;
  tab.columns = {"s1", "xi1", "s2", "xi2", "kernel"};
  if (verify) tab.columns.insert(tab.columns.end(), {"contour", "abs_diff"});
  tab.rows.resize(pts.size());
  parallel_for(pts.size(), [&](std::size_t i) {
    limit::ScaledPoint a{s1, pts[i].first}, b{s2, pts[i].second};
    double k = sys.kernel_airy_form(a, b);
    std::vector<Cell> row{s1, a.xi, s2, b.xi, k};
    if (verify) {
      double c = sys.kernel_contour_form(a, b);
      row.push_back(c);
      row.push_back(std::abs(c - k));
    }
    tab.rows[i] = row;
  });
  return tab;
}

Table gap_finite(const Params& p, bool verify) {
  finite::FiniteModel model = finite_model(p);
  finite::GapMode mode = gap_mode(p);
  auto slices = site_slices(p.str("sites"));
  std::vector<double> times = p.has("time") ? p.num_list("time") : std::vector<double>{0.0};
  if (times.size() != slices.size()) throw UsageError("--time and --sites must list the same number of slices");
  fredholm::GapRegion region;
  for (std::size_t i = 0; i < slices.size(); ++i) region.slices.push_back({times[i], slices[i]});
  region.validate();
  finite::FiniteSystem sys(model);
  double g = sys.gap_probability(region, mode);
  Table tab;
  tab.columns = {"probability"};
  std::vector<Cell> row{g};
  if (verify) {
    oracle::EnumerationWindow win = oracle::default_window(model, 1e-12, times);
    double o = 0.0;
    if (slices.size() == 1 && times[0] == 0.0)
      o = oracle::brute_gap(model, win, slices[0], mode);
    else if (slices.size() == 2)
      o = oracle::brute_gap_two_time(model, win, times[0], times[1], slices[0], slices[1], mode);
    else
      throw UsageError("--verify supports one slice at time 0 or two slices");
    tab.columns.insert(tab.columns.end(), {"oracle", "abs_diff"});
    row.push_back(o);
    row.push_back(std::abs(o - g));
  }
  tab.rows.push_back(row);
  return tab;
}

Table gap_tacnode(const Params& p, bool verify) {
  limit::TacnodeSystem sys(tacnode_model(p));
  auto slices = interval_slices(p.str("x"));
  std::vector<double> times = p.has("time") ? p.num_list("time") : std::vector<double>{0.0};
  if (times.size() != slices.size()) throw UsageError("--time and --x must list the same number of slices");
  fredholm::GapRegion region;
  for (std::size_t i = 0; i < slices.size(); ++i) region.slices.push_back({times[i], slices[i]});
  region.validate();
  long order = p.integer("order", 16);
  if (order < 4 || order > 256) throw UsageError("--order must lie in [4, 256]");
  double g = sys.gap_probability(region, static_cast<int>(order));
  Table tab;
  tab.columns = {"probability"};
  std::vector<Cell> row{g};
  if (verify) {
    double g2 = sys.gap_probability(region, static_cast<int>(2 * order));
    tab.columns.insert(tab.columns.end(), {"doubled_order", "abs_diff"});
    row.push_back(g2);
    row.push_back(std::abs(g2 - g));
  }
  tab.rows.push_back(row);
  return tab;
}

Table converge(const Params& p) {
  limit::TacnodeSystem sys(tacnode_model(p));
  limit::ScaledPoint a{p.num("s1", 0.0), p.num("xi1", 0.0)}, b{p.num("s2", 0.0), p.num("xi2", 0.0)};
  std::vector<double> ts = p.has("t") ? p.num_list("t") : std::vector<double>{20.0, 50.0, 100.0};
  auto rows = limit::convergence_probe(sys, a, b, ts);
  Table tab;
  tab.columns = {"t", "m", "x1", "x2", "t1", "t2", "finite", "limit", "error"};
  for (const auto& r : rows)
    tab.rows.push_back({r.t, r.m, r.x1, r.x2, r.t1, r.t2, r.finite_value, r.limit_value, r.error});
  tab.meta.push_back({"non_increasing", limit::non_increasing(rows) ? "true" : "false"});
  return tab;
}

Table tw2(const Params& p) {
  double t = p.num("t", 200.0);
  std::vector<double> xs = p.has("x") ? p.num_list("x") : std::vector<double>{-2.0, 0.0, 2.0};
  long order = p.integer("order", 64);
  if (order < 8 || order > 256) throw UsageError("--order must lie in [8, 256]");
  finite::FiniteModel model;
  model.t = t;
  model.m = std::lround(2.0 * t);  // H_n for n far below 4t is numerically zero
  model.tol = tolerance(p, model.tol);
  model.validate();
  finite::FiniteSystem sys(model);
  Table tab;
  tab.columns = {"x", "n", "hn0", "f2", "abs_diff"};
  for (double x : xs) {
    long n = static_cast<long>(std::ceil(4.0 * t + x * std::cbrt(2.0 * t)));
    if (n < 1) throw UsageError("tw2: n = ceil(4t + x (2t)^{1/3}) must be positive");
    double h = sys.hn0(n), f = limit::tracy_widom_f2(x, static_cast<int>(order));
    tab.rows.push_back({x, n, h, f, std::abs(h - f)});
  }
  return tab;
}

Table selftest() {
  Table tab;
  tab.columns = {"check", "deviation", "passed"};
  auto add = [&](const std::string& name, double dev, double bound) {
    tab.rows.push_back({name, dev, std::string(dev <= bound ? "yes" : "no")});
  };
  add("airy_shift at s=0", std::abs(specfun::airy_ai_shift(0.0, 0.7) - specfun::airy_ai(0.7)), 1e-15);
  add("bessel_j_tau at tau=0", std::abs(specfun::bessel_j_tau(3, 0.0, 1.5) - specfun::bessel_j(3, 3.0)), 1e-15);
  {
    CompensatedSum s;
    for (long y = -60; y <= 60; ++y) s.add(specfun::transition_prob(2.0, 0, y));
    add("transition probabilities sum to 1", std::abs(s.value() - 1.0), 1e-14);
  }
  {
    finite::FiniteSystem sys(finite::FiniteModel{1.0, 1});
    add("H_n(0) -> 1 for large n", std::abs(sys.hn0(60) - 1.0), 1e-12);
    add("empty region gap", std::abs(sys.gap_probability(fredholm::GapRegion{}) - 1.0), 0.0);
    finite::ExtendedKernelValue v = sys.kernel_ext(0.2, 1, 0.2, -1);
    finite::ExtendedKernelValue w = sys.kernel_ext(0.2, -1, 0.2, 1);
    add("finite kernel symmetric at equal times", std::abs(v.reduced - w.reduced), 1e-12);
  }
  limit::TacnodeModel m0;
  limit::TacnodeSystem s0(m0);
  add("C(s, xi) = C(s, -xi)", std::abs(s0.script_c(0.3, 0.8) - s0.script_c(0.3, -0.8)), 0.0);
  add("kernel invariant under xi -> -xi", std::abs(s0.kernel_airy_form({0.1, 0.4}, {0.1, -0.9}) -
                                                  s0.kernel_airy_form({0.1, -0.4}, {0.1, 0.9})),
      1e-9);
  add("contour form is real",
      std::abs(s0.kernel_contour_complex({0.2, 0.5}, {-0.1, -0.5}).imag()), 1e-9);
  {
    limit::TacnodeModel m5;
    m5.sigma = 5.0;
    limit::TacnodeSystem s5(m5);
    add("Q ~ Ai at sigma=5", std::abs(s5.q()(9.0) - specfun::airy_ai(9.0)), 1e-6);
    add("C ~ 0 at sigma=5", std::abs(s5.script_c(0.0, 0.5)), 1e-5);
  }
  {
    double g = s0.gap_probability(fredholm::GapRegion{{{0.0, fredholm::Region{{-0.5, 0.5}}}}});
    add("gap probability in [0,1]", std::max({0.0, -g, g - 1.0}), 1e-8);
  }
  add("Airy kernel symmetric", std::abs(limit::airy_kernel(0.2, 1.3) - limit::airy_kernel(1.3, 0.2)), 1e-14);
  return tab;
}

// ---- output ----

std::string cell_text(const Cell& c) {
  if (const double* d = std::get_if<double>(&c)) return format_number(*d);
  if (const long* l = std::get_if<long>(&c)) return std::to_string(*l);
  return std::get<std::string>(c);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

std::string versions_line() {
  return std::string("tacnode-lab ") + kVersion + ", eigen " + std::to_string(EIGEN_WORLD_VERSION) + "." +
         std::to_string(EIGEN_MAJOR_VERSION) + "." + std::to_string(EIGEN_MINOR_VERSION);
}

void write_csv(std::ostream& os, const RunConfig& c, const Table& t) {
  os << "# command=" << command_name(c.command) << '\n';
  for (const auto& [k, v] : c.parameters) os << "# " << k << '=' << v << '\n';
  os << "# verify=" << (c.verify ? "true" : "false") << '\n';
  os << "# versions=" << versions_line() << '\n';
  for (const auto& [k, v] : t.meta) os << "# " << k << '=' << v << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << csv_field(t.columns[i]);
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_field(cell_text(row[i]));
    os << '\n';
  }
}

void write_json(std::ostream& os, const RunConfig& c, const Table& t) {
  using nlohmann::json;
  json params = json::object();
  for (const auto& [k, v] : c.parameters) params[k] = v;
  params["verify"] = c.verify;
  json meta = {{"command", command_name(c.command)},
               {"parameters", params},
               {"versions", {{"tacnode-lab", kVersion},
                             {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                           "." + std::to_string(EIGEN_MINOR_VERSION)}}}};
  for (const auto& [k, v] : t.meta) meta[k] = v;
  // numbers are written by hand so that they keep 17 significant digits
  os << "{\"meta\":" << meta.dump() << ",\"data\":[";
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    os << (r ? "," : "") << '{';
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
      os << (i ? "," : "") << json(t.columns[i]).dump() << ':';
      const Cell& cell = t.rows[r][i];
      if (std::holds_alternative<std::string>(cell))
        os << json(std::get<std::string>(cell)).dump();
      else
        os << cell_text(cell);
    }
    os << '}';
  }
  os << "]}\n";
}

}  // namespace

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  (void)ec;
  return std::string(buf, p);
}

Command parse_command(const std::string& name) {
  for (const auto& [n, c] : kCommands)
    if (n == name) return c;
  throw UsageError("unknown command '" + name + "'");
}

std::string command_name(Command command) {
  for (const auto& [n, c] : kCommands)
    if (c == command) return n;
  return "?";
}

RunConfig parse_arguments(int argc, const char* const* argv) {
  CLI::App app{"Kernels and gap probabilities of random walks meeting at a tacnode", "tacnode-lab"};
  std::string command;
  std::vector<std::string> names;
  for (const auto& [n, c] : kCommands) names.push_back(n);
  app.add_option("command", command, "one of kernel-finite, kernel-tacnode, gap-finite, gap-tacnode, converge, tw2, selftest")
      ->required()
      ->check(CLI::IsMember(names));
  std::map<std::string, std::string> values;
  // the config reader splits "a,b" into two values; join them back
  for (const std::string& k : kKeys)
    app.add_option("--" + k, values[k])->delimiter(',')->multi_option_policy(CLI::MultiOptionPolicy::Join);
  bool verify = false;
  app.add_flag("--verify", verify, "cross-check against an independent computation");
  app.set_config("--config", "", "key=value file; flags override its values");
  app.allow_config_extras(false);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    throw;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }
  RunConfig cfg;
  cfg.command = parse_command(command);
  cfg.verify = verify;
  for (const std::string& k : kKeys)
    if (app.count("--" + k) > 0) cfg.parameters[k] = values[k];
  return cfg;
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    Params p(config);
    std::string format = p.has("format") ? p.str("format") : "csv";
    if (format != "csv" && format != "json") throw UsageError("--format must be csv or json");
    Table table;
    switch (config.command) {
      case Command::kernel_finite: table = kernel_finite(p, config.verify); break;
      case Command::kernel_tacnode: table = kernel_tacnode(p, config.verify); break;
      case Command::gap_finite: table = gap_finite(p, config.verify); break;
      case Command::gap_tacnode: table = gap_tacnode(p, config.verify); break;
      case Command::converge: table = converge(p); break;
      case Command::tw2: table = tw2(p); break;
      case Command::selftest: table = selftest(); break;
    }
    std::ofstream file;
    std::ostream* os = &out;
    if (p.has("out")) {
      file.open(p.str("out"), std::ios::binary);
      if (!file) throw UsageError("cannot open --out file '" + p.str("out") + "'");
      os = &file;
    }
    if (format == "json")
      write_json(*os, config, table);
    else
      write_csv(*os, config, table);
    if (config.command == Command::selftest) {
      for (const auto& row : table.rows)
        if (std::get<std::string>(row[2]) != "yes") {
          err << "selftest: check failed: " << std::get<std::string>(row[0]) << '\n';
          return kExitNonConvergence;
        }
    }
    return kExitOk;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ConvergenceError& e) {
    err << "no convergence: " << e.what() << '\n';
    return kExitNonConvergence;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = parse_arguments(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << "usage: tacnode-lab COMMAND [--t T] [--m M] [--sigma S] [--s1 S1] [--s2 S2] [--xi1 X1] [--xi2 X2]\n"
           "       [--grid G] [--time LIST] [--sites SITES] [--x LIST|INTERVALS] [--mode holes|particles]\n"
           "       [--tol TOL] [--order N] [--format csv|json] [--out PATH] [--verify] [--config PATH]\n"
           "commands: kernel-finite kernel-tacnode gap-finite gap-tacnode converge tw2 selftest\n";
    return kExitOk;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitValidation;
  }
  return run(cfg, out, err);
}

}  // namespace tacnode::cli
