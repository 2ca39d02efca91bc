#include "jetfb/config.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <filesystem>
#include <functional>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "jetfb/errors.hpp"

namespace jetfb {

namespace {

namespace pt = boost::property_tree;

[[noreturn]] void bad(const std::string& what) { raise(error_kind::configuration, what); }

void need(bool ok, const std::string& what) {
  if (!ok) bad(what);
}

double to_double(const std::string& key, const std::string& text) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &pos);
  } catch (const std::exception&) {
    bad(key + ": expected a number, got '" + text + "'");
  }
  if (pos != text.size()) bad(key + ": expected a number, got '" + text + "'");
  return v;
}

long to_integer(const std::string& key, const std::string& text) {
  const double v = to_double(key, text);
  if (v != std::floor(v)) bad(key + ": expected an integer, got '" + text + "'");
  return static_cast<long>(v);
}

bool to_bool(const std::string& key, const std::string& text) {
  const std::string t = boost::algorithm::to_lower_copy(text);
  if (t == "true" || t == "yes" || t == "on" || t == "1") return true;
  if (t == "false" || t == "no" || t == "off" || t == "0") return false;
  bad(key + ": expected a boolean, got '" + text + "'");
}

std::vector<std::string> to_list(const std::string& text) {
  std::vector<std::string> parts;
  boost::algorithm::split(parts, text, boost::algorithm::is_any_of(", "), boost::algorithm::token_compress_on);
  std::vector<std::string> out;
  for (auto& p : parts)
    if (!p.empty()) out.push_back(p);
  return out;
}

std::vector<double> to_doubles(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const auto& p : to_list(text)) out.push_back(to_double(key, p));
  return out;
}

std::string resolve(const std::string& base, const std::string& path) {
  if (path.empty()) return path;
  const std::filesystem::path p(path);
  return p.is_absolute() ? path : (std::filesystem::path(base) / p).string();
}

}  // namespace

void read_columns(const std::string& path, std::vector<double>& a, std::vector<double>& b) {
  std::ifstream in(path);
  if (!in) bad("cannot read table " + path);
  a.clear();
  b.clear();
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    boost::algorithm::trim(line);
    if (line.empty()) continue;
    std::istringstream row(line);
    double x = 0, y = 0;
    std::string extra;
    if (!(row >> x >> y) || (row >> extra)) bad(path + ":" + std::to_string(number) + ": expected two numbers");
    a.push_back(x);
    b.push_back(y);
  }
  if (a.size() < 2) bad(path + ": a table needs at least two rows");
}

void run_config::validate() const {
  need(std::isfinite(gamma) && gamma > 1.0, "gamma must exceed 1");
  need(std::isfinite(q) && q > 0.0, "Q must be positive");
  need(epsilon > 0.0 && epsilon < 1.0, "epsilon must lie in (0, 1)");
  need(std::isfinite(hbar) && hbar > 1.0, "hbar must exceed 1");
  need(nozzle_kind == "log" || nozzle_kind == "table" || nozzle_kind == "rectangle",
       "nozzle must be one of log, table, rectangle");
  need(nozzle_kind != "table" || !nozzle_table.empty(), "nozzle = table needs nozzle_table");
  need(nozzle_a > 0.0, "nozzle_a must be positive");
  need(profile_kind == "constant" || profile_kind == "power" || profile_kind == "table",
       "profile must be one of constant, power, table");
  need(profile_kind != "table" || !profile_table.empty(), "profile = table needs profile_table");
  need(domain.mu > 0.0, "mu must be positive");
  need(domain.r > 0.0, "R must be positive");
  need(domain.h > 0.0 && domain.h < 1.0, "h must lie in (0, 1)");
  need(domain.s_exp > 1.5 && domain.s_exp < 2.0, "s_exp must lie in (3/2, 2)");
  need(domain.k_mu >= 0.0, "k_mu must be nonnegative");
  need(big_lambda >= 0.0, "lambda must be nonnegative");
  need(fit.lo >= 0.0 && fit.hi >= 0.0, "fit bracket must be nonnegative");
  need(fit.lo == 0.0 || fit.hi == 0.0 || fit.lo < fit.hi, "fit bracket must satisfy lo < hi");
  need(fit.tol >= 0.0 && fit.lambda_tol >= 0.0, "fit tolerances must be nonnegative");
  need(fit.max_expansions >= 0, "max_expansions must be nonnegative");
  for (double l : sweep) need(l > 0.0, "asymptotics lambdas must be positive");
  need(!output_dir.empty(), "output directory must not be empty");
  try {
    solver.validate();
  } catch (const jetfb_error& e) {
    bad(e.what());
  }
}

gas_law run_config::make_gas() const { return gas_law(gamma); }

upstream_profile run_config::make_profile() const {
  if (profile_kind == "constant") return upstream_profile::constant(hbar, u0);
  if (profile_kind == "power") return upstream_profile::power(hbar, profile_a, profile_b, profile_n);
  std::vector<double> ys, us;
  read_columns(profile_table, ys, us);
  return upstream_profile::table(std::move(ys), std::move(us));
}

upstream_flow run_config::make_flow() const { return upstream_flow(make_gas(), make_profile(), q); }

nozzle run_config::make_nozzle() const {
  if (nozzle_kind == "log") return nozzle::logarithmic(hbar, nozzle_a);
  if (nozzle_kind == "rectangle") return nozzle::rectangle(hbar);
  std::vector<double> ys, xs;
  read_columns(nozzle_table, ys, xs);
  return nozzle::table(hbar, std::move(ys), std::move(xs));
}

run_config parse_config(std::istream& in, const std::string& base_dir) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    bad(std::string("malformed config: ") + e.what());
  }
  run_config c;
  using setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, std::map<std::string, setter>> keys = {
      {"problem",
       {
           {"gamma", [&](auto& k, auto& v) { c.gamma = to_double(k, v); }},
           {"Q", [&](auto& k, auto& v) { c.q = to_double(k, v); }},
           {"epsilon", [&](auto& k, auto& v) { c.epsilon = to_double(k, v); }},
           {"hbar", [&](auto& k, auto& v) { c.hbar = to_double(k, v); }},
           {"nozzle", [&](auto&, auto& v) { c.nozzle_kind = v; }},
           {"nozzle_a", [&](auto& k, auto& v) { c.nozzle_a = to_double(k, v); }},
           {"nozzle_table", [&](auto&, auto& v) { c.nozzle_table = resolve(base_dir, v); }},
           {"profile", [&](auto&, auto& v) { c.profile_kind = v; }},
           {"u0", [&](auto& k, auto& v) { c.u0 = to_double(k, v); }},
           {"profile_a", [&](auto& k, auto& v) { c.profile_a = to_double(k, v); }},
           {"profile_b", [&](auto& k, auto& v) { c.profile_b = to_double(k, v); }},
           {"profile_n", [&](auto& k, auto& v) { c.profile_n = to_double(k, v); }},
           {"profile_table", [&](auto&, auto& v) { c.profile_table = resolve(base_dir, v); }},
       }},
      {"numerics",
       {
           {"mu", [&](auto& k, auto& v) { c.domain.mu = to_double(k, v); }},
           {"R", [&](auto& k, auto& v) { c.domain.r = to_double(k, v); }},
           {"h", [&](auto& k, auto& v) { c.domain.h = to_double(k, v); }},
           {"s_exp", [&](auto& k, auto& v) { c.domain.s_exp = to_double(k, v); }},
           {"k_mu", [&](auto& k, auto& v) { c.domain.k_mu = to_double(k, v); }},
           {"lambda", [&](auto& k, auto& v) { c.big_lambda = to_double(k, v); }},
           {"mode",
            [&](auto& k, auto& v) {
              if (v == "minimize") c.solver.mode = solver_mode::minimize;
              else if (v == "pde") c.solver.mode = solver_mode::pde;
              else bad(k + ": expected minimize or pde, got '" + v + "'");
            }},
           {"max_iterations", [&](auto& k, auto& v) { c.solver.max_iterations = static_cast<int>(to_integer(k, v)); }},
           {"armijo", [&](auto& k, auto& v) { c.solver.armijo = to_double(k, v); }},
           {"backtrack", [&](auto& k, auto& v) { c.solver.backtrack = to_double(k, v); }},
           {"max_backtracks", [&](auto& k, auto& v) { c.solver.max_backtracks = static_cast<int>(to_integer(k, v)); }},
           {"energy_rtol", [&](auto& k, auto& v) { c.solver.energy_rtol = to_double(k, v); }},
           {"residual_tol", [&](auto& k, auto& v) { c.solver.residual_tol = to_double(k, v); }},
           {"delta_schedule", [&](auto& k, auto& v) { c.solver.delta_schedule = to_doubles(k, v); }},
           {"delta_scale", [&](auto& k, auto& v) { c.solver.delta_scale = to_double(k, v); }},
           {"delta_stages", [&](auto& k, auto& v) { c.solver.delta_stages = static_cast<int>(to_integer(k, v)); }},
           {"sor", [&](auto& k, auto& v) { c.solver.sor = to_double(k, v); }},
           {"monotone_projection", [&](auto& k, auto& v) { c.solver.monotone_projection = to_bool(k, v); }},
           {"enforce_invariants", [&](auto& k, auto& v) { c.solver.enforce_invariants = to_bool(k, v); }},
           {"workers", [&](auto& k, auto& v) { c.solver.workers = static_cast<int>(to_integer(k, v)); }},
           {"seed", [&](auto& k, auto& v) { c.solver.seed = static_cast<unsigned long long>(to_integer(k, v)); }},
           {"init_noise", [&](auto& k, auto& v) { c.solver.init_noise = to_double(k, v); }},
           {"verbose", [&](auto& k, auto& v) { c.solver.verbose = to_bool(k, v); }},
       }},
      {"fit",
       {
           {"lo", [&](auto& k, auto& v) { c.fit.lo = to_double(k, v); }},
           {"hi", [&](auto& k, auto& v) { c.fit.hi = to_double(k, v); }},
           {"tol", [&](auto& k, auto& v) { c.fit.tol = to_double(k, v); }},
           {"lambda_tol", [&](auto& k, auto& v) { c.fit.lambda_tol = to_double(k, v); }},
           {"max_expansions", [&](auto& k, auto& v) { c.fit.max_expansions = static_cast<int>(to_integer(k, v)); }},
           {"warm_start", [&](auto& k, auto& v) { c.fit.warm_start = to_bool(k, v); }},
       }},
      {"asymptotics",
       {
           {"lambdas", [&](auto& k, auto& v) { c.sweep = to_doubles(k, v); }},
       }},
      {"output",
       {
           {"directory", [&](auto&, auto& v) { c.output_dir = resolve(base_dir, v); }},
           {"formats",
            [&](auto& k, auto& v) {
              c.write_fields = c.write_boundary = c.write_report = false;
              for (const auto& f : to_list(v)) {
                if (f == "fields") c.write_fields = true;
                else if (f == "boundary") c.write_boundary = true;
                else if (f == "report") c.write_report = true;
                else bad(k + ": unknown format '" + f + "'");
              }
            }},
           {"reproducible_sum", [&](auto& k, auto& v) { c.reproducible_sum = to_bool(k, v); }},
       }},
  };

  for (const auto& [section, body] : tree) {
    const auto sec = keys.find(section);
    if (sec == keys.end()) {
      if (body.empty()) bad("key '" + section + "' outside a section");
      bad("unknown section [" + section + "]");
    }
    std::set<std::string> seen;
    for (const auto& [key, value] : body) {
      const auto it = sec->second.find(key);
      if (it == sec->second.end()) bad("unknown key '" + key + "' in [" + section + "]");
      if (!seen.insert(key).second) bad("duplicate key '" + key + "' in [" + section + "]");
      it->second(section + "." + key, boost::algorithm::trim_copy(value.data()));
    }
  }
  c.validate();
  return c;
}

run_config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad("cannot read config " + path);
  const auto base = std::filesystem::path(path).parent_path().string();
  return parse_config(in, base.empty() ? "." : base);
}

}  // namespace jetfb
