#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "bilatrr_cli/app.hpp"
#include "bilatrr_cli/csv.hpp"
#include "properties.hpp"

namespace fs = std::filesystem;
using bilatrr::cli::split_csv_record;

namespace {

const std::string kOmePath = std::string(BILATRR_DATA_DIR) + "/ome.csv";
const char* const kMethods[] = {"W", "PL", "SC", "MV", "GE"};

struct Run {
  int code;
  std::string out;
  std::string err;
  double seconds;
};

Run run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "bilatrr");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const auto t0 = std::chrono::steady_clock::now();
  const int code = bilatrr::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {code, out.str(), err.str(), s};
}

using Table = std::vector<std::map<std::string, std::string>>;

/// Parses CSV output, skipping '#' metadata lines.
Table parse_table(const std::string& text) {
  Table rows;
  std::istringstream in(text);
  std::vector<std::string> header;
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line[0] == '#') continue;
    const std::vector<std::string> f = split_csv_record(line);
    if (header.empty()) {
      header = f;
      continue;
    }
    std::map<std::string, std::string> row;
    for (std::size_t i = 0; i < header.size() && i < f.size(); ++i) row[header[i]] = f[i];
    rows.push_back(row);
  }
  return rows;
}

double number(const std::map<std::string, std::string>& row, const std::string& key) {
  const auto it = row.find(key);
  if (it == row.end() || it->second.empty()) return std::nan("");
  return std::stod(it->second);
}

struct Verdict {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      notes.push_back(what);
    }
  }
};

int failures = 0;

void report(const std::string& id, const std::string& title, const Verdict& v, const std::string& summary) {
  std::printf("[%s] %s %s: %s\n", v.pass ? "PASS" : "FAIL", id.c_str(), title.c_str(), summary.c_str());
  for (const std::string& n : v.notes) std::printf("    %s\n", n.c_str());
  std::fflush(stdout);
  if (!v.pass) ++failures;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

void near(Verdict& v, const std::string& what, double got, double want, double tol, double& worst) {
  const double err = std::abs(got - want);
  worst = std::isnan(err) ? 1e9 : std::max(worst, err / tol);
  v.check(err <= tol, what + fmt(": got %.6f want %.4f tol %.4g", got, want, tol));
}

void criterion_ome() {
  const Run r = run_cli({"analyze", "--data", kOmePath, "--format", "csv", "--precision", "8"});
  Verdict v;
  double worst = 0.0;
  v.check(r.code == 0, "analyze exited with " + std::to_string(r.code) + ": " + r.err);
  std::map<std::string, std::map<std::string, std::string>> by_name;
  for (const auto& row : parse_table(r.out)) by_name[row.at("section") + "." + row.at("name")] = row;
  const std::pair<const char*, double> mle[] = {
      {"mle.delta", 0.9841}, {"mle.pi1", 0.6528}, {"mle.R", 1.3172}, {"mle.rho1", 0.5964}, {"mle.rho2", 0.5699}};
  for (const auto& [key, want] : mle) near(v, key, number(by_name[key], "estimate"), want, 5e-4, worst);
  struct Ci {
    const char* name;
    double est, lo, hi;
  };
  const Ci cis[] = {{"SC", 0.9841, 0.8251, 1.1510}, {"PL", 0.9841, 0.8274, 1.1517}, {"W", 0.9841, 0.8280, 1.1403},
                    {"MV", 0.9674, 0.7979, 1.1658}, {"GE", 0.9681, 0.7800, 1.2017}};
  for (const Ci& c : cis) {
    const auto& row = by_name[std::string("ci.") + c.name];
    near(v, std::string(c.name) + " estimate", number(row, "estimate"), c.est, 5e-4, worst);
    near(v, std::string(c.name) + " lower", number(row, "lower"), c.lo, 5e-4, worst);
    near(v, std::string(c.name) + " upper", number(row, "upper"), c.hi, 5e-4, worst);
    near(v, std::string(c.name) + " width", number(row, "width"), c.hi - c.lo, 1e-3, worst);
  }
  v.check(r.seconds < 1.0, fmt("runtime %.3f s", r.seconds));
  report("1", "OME example exactness", v, fmt("worst error %.3f of tolerance, runtime %.3f s", worst, r.seconds));
}

void criterion_gof() {
  const Run r = run_cli({"gof", "--data", kOmePath, "--variant", "paper", "--format", "csv", "--precision", "8"});
  Verdict v;
  double worst = 0.0;
  v.check(r.code == 0, "gof exited with " + std::to_string(r.code) + ": " + r.err);
  const Table t = parse_table(r.out);
  v.check(t.size() == 1, "expected one paper-variant row");
  if (!t.empty()) {
    near(v, "G2", number(t[0], "G2"), 0.3871, 1e-3, worst);
    near(v, "p(G2)", number(t[0], "p_G2"), 0.5338, 1e-3, worst);
    near(v, "X2", number(t[0], "X2"), 0.3867, 1e-3, worst);
    near(v, "p(X2)", number(t[0], "p_X2"), 0.5341, 1e-3, worst);
  }
  v.check(r.seconds < 1.0, fmt("runtime %.3f s", r.seconds));
  report("2", "GOF exactness", v, fmt("worst error %.3f of tolerance, runtime %.3f s", worst, r.seconds));
}

struct Cell {
  double pi1, delta0, r;
  double ecp[5];
  double miw[5];
};

// Published values, methods in the order W, PL, SC, MV, GE.
const Cell kCells[] = {
    {0.2, 1.0, 1.0, {93.84, 94.79, 95.13, 96.05, 95.79}, {1.248, 1.364, 1.325, 1.366, 1.331}},
    {0.2, 1.0, 2.0, {93.24, 94.14, 94.99, 93.91, 95.30}, {1.318, 1.458, 1.410, 1.398, 1.475}},
    {0.3, 1.0, 1.0, {94.67, 94.93, 95.21, 95.61, 95.45}, {0.925, 0.981, 0.970, 0.973, 0.963}},
    {0.3, 1.0, 2.0, {94.03, 94.11, 94.97, 92.15, 95.32}, {0.928, 1.004, 0.988, 0.987, 1.116}},
    {0.2, 1.5, 3.0, {91.42, 94.41, 94.91, 91.21, 95.68}, {1.540, 1.779, 1.699, 1.856, 2.186}},
    {0.2, 2.0, 2.0, {93.14, 94.84, 95.28, 92.93, 95.61}, {2.235, 2.448, 2.346, 2.289, 2.510}},
};

std::string metrics_only(const std::string& csv) {
  std::istringstream in(csv);
  std::string out;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line[0] != '#') out += line + "\n";
  }
  return out;
}

void criteria_simulation(const fs::path& dir) {
  const fs::path grid = dir / "acceptance_grid.csv";
  {
    std::ofstream g(grid);
    g << "pi1,delta0,R,m,n,reps\n";
    for (const Cell& c : kCells) g << c.pi1 << "," << c.delta0 << "," << c.r << ",30,30,10000\n";
  }
  const std::vector<std::string> base = {"simulate", "--grid-file", grid.string(), "--seed", "7",
                                         "--format", "csv", "--precision", "6"};
  auto with_threads = [&](const char* t) {
    std::vector<std::string> a = base;
    a.insert(a.end(), {"--threads", t});
    return run_cli(a);
  };
  const Run first = with_threads("1");
  const Run second = with_threads("1");
  const Run eight = with_threads("8");

  Verdict cov;
  cov.check(first.code == 0, "simulate exited with " + std::to_string(first.code) + ": " + first.err);
  const Table t = parse_table(first.out);
  cov.check(t.size() == std::size(kCells), "expected six result rows");
  double worst_ecp = 0.0, worst_miw = 0.0;
  for (std::size_t i = 0; i < t.size() && i < std::size(kCells); ++i) {
    const Cell& c = kCells[i];
    const std::string cell = fmt("(%g, %g, %g)", c.pi1, c.delta0, c.r);
    for (int k = 0; k < 5; ++k) {
      const std::string m = kMethods[k];
      const double p = c.ecp[k] / 100.0;
      const double se = std::sqrt(p * (1.0 - p) / 10000.0);
      const double ecp = number(t[i], m + "_ECP");
      const double miw = number(t[i], m + "_MIW");
      worst_ecp = std::max(worst_ecp, std::abs(ecp - p) / se);
      worst_miw = std::max(worst_miw, std::abs(miw - c.miw[k]));
      cov.check(std::abs(ecp - p) <= 3.0 * se, cell + " " + m + fmt(" ECP %.4f vs %.4f (3 SE %.4f)", ecp, p, 3 * se));
      cov.check(std::abs(miw - c.miw[k]) <= 0.05, cell + " " + m + fmt(" MIW %.4f vs %.3f", miw, c.miw[k]));
    }
  }
  report("3", "Coverage reproduction", cov,
         fmt("worst ECP %.2f SE, worst MIW %.4f, runtime %.0f s", worst_ecp, worst_miw, first.seconds));

  Verdict rm;
  double w_rmncp = std::nan(""), lo = 1.0, hi = 0.0;
  if (!t.empty()) {
    w_rmncp = number(t[0], "W_RMNCP");
    rm.check(w_rmncp < 0.05, fmt("W RMNCP %.4f", w_rmncp));
    for (int k = 1; k < 5; ++k) {
      const double x = number(t[0], std::string(kMethods[k]) + "_RMNCP");
      lo = std::min(lo, x);
      hi = std::max(hi, x);
      rm.check(x >= 0.40 && x <= 0.60, std::string(kMethods[k]) + fmt(" RMNCP %.4f", x));
    }
  } else {
    rm.check(false, "no simulation output");
  }
  report("4", "RMNCP pattern", rm, fmt("W %.4f, others in [%.4f, %.4f]", w_rmncp, lo, hi));

  Verdict det;
  det.check(first.code == 0 && second.code == 0 && eight.code == 0, "a simulation run failed");
  det.check(first.out == second.out, "repeated run with the same seed differs");
  det.check(metrics_only(first.out) == metrics_only(eight.out), "threads 1 and 8 give different metrics");
  const bool rerun = first.out == second.out;
  const bool threads = metrics_only(first.out) == metrics_only(eight.out);
  report("6", "Determinism", det,
         std::string("identical CSV on rerun: ") + (rerun ? "yes" : "no") +
             "; threads 1 vs 8 identical: " + (threads ? "yes" : "no"));
}

void criterion_properties() {
  struct Prop {
    const char* id;
    const char* title;
    std::function<bilatrr::testing::CheckResult()> run;
  };
  const Prop props[] = {
      {"5a", "Gradient checks", [] { return bilatrr::testing::check_gradients(100, 1); }},
      {"5b", "Information checks", [] { return bilatrr::testing::check_information(10, 2); }},
      {"5c", "Grid oracle equivalence", [] { return bilatrr::testing::check_grid_oracle(20, 3); }},
      {"5d", "CI endpoint consistency", [] { return bilatrr::testing::check_endpoints(20, 4); }},
      {"5e", "Relabel equivariance", [] { return bilatrr::testing::check_relabel(20, 5); }},
      {"5f", "Alpha nesting", [] { return bilatrr::testing::check_alpha_nesting(20, 6); }},
  };
  for (const Prop& p : props) {
    const bilatrr::testing::CheckResult r = p.run();
    Verdict v;
    v.check(r.pass, r.detail);
    report(p.id, p.title, v, fmt("%.0f cases, worst %.4f of tolerance", r.cases, r.worst));
  }
}

void criterion_sweep(const fs::path& dir) {
  const fs::path grid = dir / "acceptance_sweep.csv";
  const double rs[] = {1.0, 1.5, 2.0, 2.5, 3.0};
  {
    std::ofstream g(grid);
    g << "pi1,delta0,R,m,n,reps\n";
    for (double r : rs) g << "0.2,1.5," << r << ",50,50,2000\n";
  }
  const Run run = run_cli({"simulate", "--grid-file", grid.string(), "--seed", "7", "--format", "csv",
                           "--precision", "6", "--threads", "8"});
  Verdict v;
  v.check(run.code == 0, "simulate exited with " + std::to_string(run.code) + ": " + run.err);
  const Table t = parse_table(run.out);
  v.check(t.size() == std::size(rs), "expected five result rows");
  std::string ge = "GE MIW", sc = "SC MIW";
  for (std::size_t i = 0; i < t.size(); ++i) {
    ge += fmt(" %.4f", number(t[i], "GE_MIW"));
    sc += fmt(" %.4f", number(t[i], "SC_MIW"));
    if (i == 0) continue;
    v.check(number(t[i], "GE_MIW") > number(t[i - 1], "GE_MIW"), fmt("GE MIW not increasing at R=%g", rs[i]));
    if (rs[i - 1] >= 2.0) {
      v.check(number(t[i], "SC_MIW") <= number(t[i - 1], "SC_MIW"), fmt("SC MIW increases at R=%g", rs[i]));
    }
  }
  report("7", "Scaled R sweep pattern", v, ge + "; " + sc);
}

}  // namespace

int main() {
  const fs::path dir = fs::temp_directory_path() / "bilatrr_acceptance";
  fs::create_directories(dir);
  criterion_ome();
  criterion_gof();
  criteria_simulation(dir);
  criterion_properties();
  criterion_sweep(dir);
  std::printf("%s: %d criterion line(s) failed\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}
