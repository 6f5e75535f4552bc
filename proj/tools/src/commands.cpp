#include "bilatrr_cli/commands.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <optional>
#include <ostream>
#include <string_view>

#include <fmt/format.h>

#include "bilatrr/errors.hpp"
#include "bilatrr/estimation.hpp"
#include "bilatrr/gof.hpp"
#include "bilatrr_cli/counts_csv.hpp"
#include "bilatrr_cli/csv.hpp"

#ifndef BILATRR_VERSION
#define BILATRR_VERSION "unknown"
#endif

namespace bilatrr::cli {

namespace {

constexpr CiMethod kReportOrder[] = {CiMethod::SC, CiMethod::PL, CiMethod::W, CiMethod::MV, CiMethod::GE};

class UsageError : public Error {
 public:
  using Error::Error;
};

double parse_double(std::string_view s, std::string_view what) {
  s = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw UsageError(fmt::format("{}: '{}' is not a number", what, s));
  }
  return v;
}

std::vector<double> parse_colon_list(std::string_view s, std::size_t count, std::string_view what) {
  std::vector<double> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t colon = s.find(':', start);
    out.push_back(parse_double(s.substr(start, colon == std::string_view::npos ? colon : colon - start), what));
    if (colon == std::string_view::npos) break;
    start = colon + 1;
  }
  if (out.size() != count) {
    throw UsageError(fmt::format("{} expects {} values separated by ':', got '{}'", what, count, s));
  }
  return out;
}

bool emit(const std::string& text, const std::string& path, std::ostream& out, std::ostream& err) {
  if (path.empty()) {
    out << text;
    return true;
  }
  std::ofstream file(path, std::ios::binary);
  if (!(file << text)) {
    err << "error: cannot write '" << path << "'\n";
    return false;
  }
  return true;
}

std::optional<Dataset> load(const std::string& path, std::ostream& err) {
  if (path.empty()) {
    err << "error: --data is required\n";
    return std::nullopt;
  }
  try {
    return parse_counts_csv(path);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const Error& e) {
    err << "error: " << path << ": " << e.what() << '\n';
  }
  return std::nullopt;
}

std::vector<SimSetting> read_grid_file(const SimulateOptions& o) {
  std::ifstream in(o.grid_file, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + o.grid_file + "'");
  static constexpr std::string_view kKnown[] = {"pi1", "delta0", "r", "m", "n", "reps", "alpha"};
  std::vector<int> column;
  std::vector<SimSetting> out;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty() || trim(line).front() == '#') continue;
    std::vector<std::string> fields;
    try {
      fields = split_csv_record(line);
    } catch (const std::invalid_argument& e) {
      throw UsageError(fmt::format("{}:{}: {}", o.grid_file, line_no, e.what()));
    }
    if (column.empty()) {
      for (std::string f : fields) {
        std::transform(f.begin(), f.end(), f.begin(), [](unsigned char c) { return std::tolower(c); });
        const auto* it = std::find(std::begin(kKnown), std::end(kKnown), f);
        if (it == std::end(kKnown)) throw UsageError(fmt::format("{}:{}: unknown column '{}'", o.grid_file, line_no, f));
        column.push_back(static_cast<int>(it - std::begin(kKnown)));
      }
      for (int required : {0, 1, 2}) {
        if (std::find(column.begin(), column.end(), required) == column.end()) {
          throw UsageError(fmt::format("{}: missing column '{}'", o.grid_file, kKnown[required]));
        }
      }
      continue;
    }
    if (fields.size() != column.size()) {
      throw UsageError(fmt::format("{}:{}: expected {} fields, found {}", o.grid_file, line_no, column.size(),
                                   fields.size()));
    }
    SimSetting s{o.pi1, o.delta0, o.r, o.m, o.n, o.reps, o.alpha, o.seed, out.size()};
    for (std::size_t k = 0; k < fields.size(); ++k) {
      const std::string where = fmt::format("{}:{}", o.grid_file, line_no);
      const double v = parse_double(fields[k], where);
      switch (column[k]) {
        case 0: s.pi1 = v; break;
        case 1: s.delta0 = v; break;
        case 2: s.r = v; break;
        case 3: s.m = static_cast<std::int64_t>(v); break;
        case 4: s.n = static_cast<std::int64_t>(v); break;
        case 5: s.reps = static_cast<std::int64_t>(v); break;
        default: s.alpha = v; break;
      }
    }
    out.push_back(s);
  }
  return out;
}

RandomSweep random_sweep(const SimulateOptions& o) {
  const std::vector<double> pi = parse_colon_list(o.pi_range, 2, "--pi-range");
  const std::vector<double> delta = parse_colon_list(o.delta_range, 2, "--delta-range");
  RandomSweep sw;
  sw.count = o.random;
  sw.m = o.m;
  sw.n = o.n;
  sw.reps = o.reps;
  sw.alpha = o.alpha;
  sw.seed = o.seed;
  sw.lo_pi = pi[0];
  sw.hi_pi = pi[1];
  sw.lo_delta = delta[0];
  sw.hi_delta = delta[1];
  sw.margin = o.margin;
  return sw;
}

std::string mode_name(const SimulateOptions& o) {
  if (o.paper_grid) return "paper-grid";
  if (!o.grid_file.empty()) return "grid-file";
  if (!o.sweep_r.empty()) return "sweep-R";
  if (o.random > 0) return "random";
  return "single";
}

}  // namespace

std::vector<CiMethod> report_methods(const std::vector<std::string>& names) {
  if (names.empty()) return {std::begin(kReportOrder), std::end(kReportOrder)};
  std::vector<CiMethod> wanted;
  for (const std::string& name : names) {
    const auto m = parse_ci_method(trim(name));
    if (!m) throw UsageError("unknown method '" + name + "' (expected SC, PL, W, MV or GE)");
    wanted.push_back(*m);
  }
  std::vector<CiMethod> out;
  for (CiMethod m : kReportOrder) {
    if (std::find(wanted.begin(), wanted.end(), m) != wanted.end()) out.push_back(m);
  }
  return out;
}

AnalysisReport build_report(const Dataset& data, double alpha, double delta0, const std::vector<CiMethod>& methods,
                            const SearchOptions& search) {
  AnalysisReport r;
  r.data = data;
  r.alpha = alpha;
  r.delta0 = delta0;
  r.mle = fit_unconstrained(data, search.fit);
  try {
    r.gof = {gof_rosner(data, r.mle, GofVariant::Paper), gof_rosner(data, r.mle, GofVariant::Saturated)};
  } catch (const Error& e) {
    r.gof_error = e.what();
  }
  Analysis a = analyze_all(data, alpha, delta0, methods, search);
  r.intervals = std::move(a.intervals);
  r.tests = std::move(a.tests);
  return r;
}

std::vector<SimSetting> simulation_settings(const SimulateOptions& o) {
  std::vector<SimSetting> settings;
  const SimSetting base{o.pi1, o.delta0, o.r, o.m, o.n, o.reps, o.alpha, o.seed, 0};
  if (o.paper_grid) {
    settings = paper_grid(o.m, o.n, o.reps, o.alpha, o.seed);
  } else if (!o.grid_file.empty()) {
    settings = read_grid_file(o);
  } else if (!o.sweep_r.empty()) {
    const std::vector<double> v = parse_colon_list(o.sweep_r, 3, "--sweep-R");
    settings = r_sweep(base, v[0], v[1], v[2]);
  } else if (o.random > 0) {
    settings = sample_random_settings(random_sweep(o));
  } else {
    settings = {base};
  }
  for (const SimSetting& s : settings) {
    try {
      validate(s);
    } catch (const Error& e) {
      if (settings.size() == 1) throw;
      throw UsageError(fmt::format("cell {} (pi1={:g}, delta0={:g}, R={:g}): {}", s.cell_index, s.pi1, s.delta0, s.r,
                                   e.what()));
    }
  }
  return settings;
}

std::string simulation_metadata(const SimulateOptions& o) {
  std::string meta = fmt::format("bilatrr={} mode={} seed={} reps={} alpha={:g} m={} n={} search={}", BILATRR_VERSION,
                                 mode_name(o), o.seed, o.reps, o.alpha, o.m, o.n,
                                 o.strict_search ? "strict" : "warm");
  if (!o.sweep_r.empty() && mode_name(o) == "sweep-R") meta += " sweep_R=" + o.sweep_r;
  if (mode_name(o) == "grid-file") meta += " grid_file=" + o.grid_file;
  if (mode_name(o) == "random") {
    const RandomSweep sw = random_sweep(o);
    meta += fmt::format(" count={} lo_pi={:g} hi_pi={:g} lo_delta={:g} hi_delta={:g} margin={:g}", sw.count, sw.lo_pi,
                        sw.hi_pi, sw.lo_delta, sw.hi_delta, sw.margin);
  }
  return meta;
}

int cmd_analyze(const AnalyzeOptions& o, std::ostream& out, std::ostream& err) {
  const auto format = parse_format(o.format);
  if (!format || *format == Format::Text) {
    err << "error: --format must be csv or md\n";
    return kExitInput;
  }
  std::vector<CiMethod> methods;
  try {
    methods = report_methods(o.methods);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
  const auto data = load(o.data, err);
  if (!data) return kExitInput;

  SearchOptions search;
  search.strict = o.strict_search;
  AnalysisReport report;
  try {
    report = build_report(*data, o.alpha, o.delta0, methods, search);
  } catch (const Error& e) {
    err << "error: estimation failed: " << e.what() << '\n';
    return kExitEstimation;
  }
  for (const CiOutcome& c : report.intervals) {
    if (!c.result) err << "warning: " << method_name(c.method) << " interval failed: " << c.error << '\n';
  }
  return emit(render_analysis(report, *format, o.precision), o.output, out, err) ? kExitOk : kExitInput;
}

int cmd_gof(const GofOptions& o, std::ostream& out, std::ostream& err) {
  const auto format = parse_format(o.format);
  if (!format) {
    err << "error: --format must be text, csv or md\n";
    return kExitInput;
  }
  std::vector<GofVariant> variants;
  if (o.variant == "paper" || o.variant == "both") variants.push_back(GofVariant::Paper);
  if (o.variant == "saturated" || o.variant == "both") variants.push_back(GofVariant::Saturated);
  if (variants.empty()) {
    err << "error: --variant must be paper, saturated or both\n";
    return kExitInput;
  }
  const auto data = load(o.data, err);
  if (!data) return kExitInput;

  std::vector<GofResult> results;
  try {
    const MleResult mle = fit_unconstrained(*data);
    for (GofVariant v : variants) results.push_back(gof_rosner(*data, mle, v));
  } catch (const Error& e) {
    err << "error: estimation failed: " << e.what() << '\n';
    return kExitEstimation;
  }
  return emit(render_gof(results, *format, o.precision), o.output, out, err) ? kExitOk : kExitInput;
}

int cmd_simulate(const SimulateOptions& o, std::ostream& out, std::ostream& err) {
  const auto format = parse_format(o.format);
  if (!format || *format == Format::Text) {
    err << "error: --format must be csv or md\n";
    return kExitInput;
  }
  std::vector<SimSetting> settings;
  std::string metadata;
  try {
    settings = simulation_settings(o);
    metadata = simulation_metadata(o);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
  SearchOptions search;
  search.strict = o.strict_search;
  const std::vector<CellResult> cells = run_grid(settings, o.threads, search);
  for (const CellResult& c : cells) {
    if (!c.error.empty()) err << "warning: cell " << c.setting.cell_index << ": " << c.error << '\n';
  }
  return emit(render_simulation(cells, metadata, *format, o.precision), o.output, out, err) ? kExitOk : kExitInput;
}

int cmd_check(const CheckOptions& o, std::ostream& out, std::ostream& err) {
  const auto data = load(o.data, err);
  if (!data) return kExitInput;
  return emit(write_counts_csv(*data), o.output, out, err) ? kExitOk : kExitInput;
}

}  // namespace bilatrr::cli
