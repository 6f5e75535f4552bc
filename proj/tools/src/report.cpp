#include "bilatrr_cli/report.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>

#include <fmt/format.h>

#include "bilatrr/model.hpp"
#include "bilatrr_cli/csv.hpp"

namespace bilatrr::cli {

namespace {

std::string opt_fixed(const std::optional<double>& v, int precision) {
  return v ? fixed(*v, precision) : std::string();
}

std::string md_cell(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += '\\';
    out += c;
  }
  return out;
}

std::string md_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::string out = "|";
  for (const std::string& h : header) out += " " + md_cell(h) + " |";
  out += "\n|";
  for (std::size_t k = 0; k < header.size(); ++k) out += k == 0 ? " --- |" : " ---: |";
  out += '\n';
  for (const auto& row : rows) {
    out += '|';
    for (const std::string& c : row) out += " " + md_cell(c) + " |";
    out += '\n';
  }
  return out;
}

std::vector<std::string> row_fields(const ReportRow& r, int precision) {
  return {r.section,
          r.name,
          r.integral && r.estimate ? fmt::format("{:.0f}", *r.estimate) : opt_fixed(r.estimate, precision),
          opt_fixed(r.lower, precision),
          opt_fixed(r.upper, precision),
          opt_fixed(r.width, precision),
          opt_fixed(r.statistic, precision),
          r.df ? std::to_string(*r.df) : std::string(),
          opt_fixed(r.p_value, precision),
          r.note};
}

std::string section_title(std::string_view section, const AnalysisReport& r) {
  if (section == "data") return "Data";
  if (section == "mle") return "Maximum likelihood estimates";
  if (section == "gof") return "Goodness of fit";
  if (section == "ci") return fmt::format("Confidence intervals ({:g}%)", 100.0 * (1.0 - r.alpha));
  return fmt::format("Tests of delta = {:g}", r.delta0);
}

ReportRow value_row(std::string section, std::string name, double v) {
  ReportRow row;
  row.section = std::move(section);
  row.name = std::move(name);
  row.estimate = v;
  return row;
}

}  // namespace

std::string fixed(double v, int precision) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::string s = fmt::format("{:.{}f}", v, precision);
  if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
  return s;
}

std::optional<Format> parse_format(std::string_view s) {
  std::string k(s);
  std::transform(k.begin(), k.end(), k.begin(), [](unsigned char c) { return std::tolower(c); });
  if (k == "csv") return Format::Csv;
  if (k == "md" || k == "markdown") return Format::Md;
  if (k == "text" || k == "txt") return Format::Text;
  return std::nullopt;
}

const std::vector<std::string>& report_columns() {
  static const std::vector<std::string> cols{"section", "name", "estimate", "lower", "upper",
                                             "width", "statistic", "df", "p_value", "note"};
  return cols;
}

std::vector<ReportRow> report_rows(const AnalysisReport& r) {
  std::vector<ReportRow> rows;
  static constexpr std::array<const char*, 5> cells{"m0", "m1", "m2", "n0", "n1"};
  for (int i = 1; i <= 2; ++i) {
    const GroupCounts& g = r.data.group(i);
    const std::array<std::int64_t, 5> v{g.m0, g.m1, g.m2, g.n0, g.n1};
    for (std::size_t k = 0; k < cells.size(); ++k) {
      ReportRow row = value_row("data", fmt::format("group{}.{}", i, cells[k]), static_cast<double>(v[k]));
      row.integral = true;
      rows.push_back(row);
    }
  }

  const MleResult& m = r.mle;
  std::string fit_note;
  if (!m.converged) {
    fit_note = "degenerate group";
  } else if (m.at_boundary) {
    fit_note = "boundary";
  }
  rows.push_back(value_row("mle", "pi1", m.pi1_hat));
  rows.push_back(value_row("mle", "pi2", m.pi2_hat));
  rows.push_back(value_row("mle", "delta", m.delta_hat));
  rows.back().note = fit_note;
  rows.push_back(value_row("mle", "R", m.r_hat));
  rows.push_back(value_row("mle", "rho1", icc(m.pi1_hat, m.r_hat)));
  rows.push_back(value_row("mle", "rho2", icc(m.pi2_hat, m.r_hat)));
  rows.push_back(value_row("mle", "loglik", m.loglik));
  rows.push_back(value_row("mle", "iterations", m.iterations));
  rows.back().integral = true;

  if (!r.gof_error.empty()) {
    ReportRow row;
    row.section = "gof";
    row.name = "all";
    row.note = r.gof_error;
    rows.push_back(row);
  }
  for (const GofResult& g : r.gof) {
    const std::string v(variant_name(g.variant));
    ReportRow g2;
    g2.section = "gof";
    g2.name = "G2." + v;
    g2.statistic = g.g2;
    g2.df = g.df;
    g2.p_value = g.p_g2;
    rows.push_back(g2);
    ReportRow x2 = g2;
    x2.name = "X2." + v;
    x2.statistic = g.chi2;
    x2.p_value = g.p_chi2;
    rows.push_back(x2);
  }

  for (const CiOutcome& o : r.intervals) {
    ReportRow row;
    row.section = "ci";
    row.name = std::string(method_name(o.method));
    if (o.result) {
      row.estimate = o.result->delta_hat;
      row.lower = o.result->lower;
      row.upper = o.result->upper;
      row.width = o.result->width();
    } else {
      row.note = o.error;
    }
    rows.push_back(row);
  }

  for (const TestOutcome& o : r.tests) {
    ReportRow row;
    row.section = "test";
    row.name = std::string(method_name(o.method));
    row.df = 1;
    if (o.result) {
      row.statistic = o.result->statistic;
      row.p_value = o.result->p_value;
    } else {
      row.note = o.error;
    }
    rows.push_back(row);
  }
  return rows;
}

std::string render_analysis(const AnalysisReport& r, Format format, int precision) {
  const std::vector<ReportRow> rows = report_rows(r);
  if (format == Format::Csv) {
    std::string out = csv_record(report_columns()) + '\n';
    for (const ReportRow& row : rows) out += csv_record(row_fields(row, precision)) + '\n';
    return out;
  }

  std::string out;
  std::size_t begin = 0;
  while (begin < rows.size()) {
    std::size_t end = begin;
    while (end < rows.size() && rows[end].section == rows[begin].section) ++end;

    std::vector<std::vector<std::string>> cells;
    for (std::size_t i = begin; i < end; ++i) cells.push_back(row_fields(rows[i], precision));
    std::vector<std::size_t> keep{1};
    for (std::size_t c = 2; c < report_columns().size(); ++c) {
      if (std::any_of(cells.begin(), cells.end(), [c](const auto& row) { return !row[c].empty(); })) {
        keep.push_back(c);
      }
    }
    std::vector<std::string> header;
    for (std::size_t c : keep) header.push_back(report_columns()[c]);
    std::vector<std::vector<std::string>> body;
    for (const auto& row : cells) {
      std::vector<std::string> b;
      for (std::size_t c : keep) b.push_back(row[c]);
      body.push_back(std::move(b));
    }
    if (!out.empty()) out += '\n';
    out += "### " + section_title(rows[begin].section, r) + "\n\n" + md_table(header, body);
    begin = end;
  }
  return out;
}

std::string gof_line(const GofResult& g, int precision) {
  return fmt::format("variant={} df={} G2={} p={} X2={} p={}", variant_name(g.variant), g.df,
                     fixed(g.g2, precision), fixed(g.p_g2, precision), fixed(g.chi2, precision),
                     fixed(g.p_chi2, precision));
}

std::string render_gof(const std::vector<GofResult>& results, Format format, int precision) {
  if (format == Format::Text) {
    std::string out;
    for (const GofResult& g : results) out += gof_line(g, precision) + '\n';
    return out;
  }
  const std::vector<std::string> header{"variant", "df", "G2", "p_G2", "X2", "p_X2"};
  std::vector<std::vector<std::string>> rows;
  for (const GofResult& g : results) {
    rows.push_back({std::string(variant_name(g.variant)), std::to_string(g.df), fixed(g.g2, precision),
                    fixed(g.p_g2, precision), fixed(g.chi2, precision), fixed(g.p_chi2, precision)});
  }
  if (format == Format::Md) return md_table(header, rows);
  std::string out = csv_record(header) + '\n';
  for (const auto& row : rows) out += csv_record(row) + '\n';
  return out;
}

std::vector<std::string> simulation_columns() {
  std::vector<std::string> cols{"pi1", "delta0", "R", "m", "n", "reps"};
  for (CiMethod m : kAllCiMethods) {
    const std::string name(method_name(m));
    cols.push_back(name + "_ECP");
    cols.push_back(name + "_MIW");
    cols.push_back(name + "_RMNCP");
  }
  for (CiMethod m : kAllCiMethods) cols.push_back(std::string(method_name(m)) + "_failures");
  cols.push_back("error");
  return cols;
}

std::vector<std::string> simulation_row(const CellResult& cell, int precision) {
  const SimSetting& s = cell.setting;
  std::vector<std::string> row{fmt::format("{:g}", s.pi1), fmt::format("{:g}", s.delta0), fmt::format("{:g}", s.r),
                               std::to_string(s.m),         std::to_string(s.n),            std::to_string(s.reps)};
  for (CiMethod m : kAllCiMethods) {
    if (!cell.metrics) {
      row.insert(row.end(), 3, std::string());
      continue;
    }
    const MethodMetrics& mm = (*cell.metrics)[m];
    const bool any = mm.successes > 0;
    row.push_back(any ? fixed(mm.ecp, precision) : std::string());
    row.push_back(any ? fixed(mm.miw, precision) : std::string());
    row.push_back(opt_fixed(mm.rmncp, precision));
  }
  for (CiMethod m : kAllCiMethods) {
    row.push_back(cell.metrics ? std::to_string((*cell.metrics)[m].failures) : std::string());
  }
  row.push_back(cell.error);
  return row;
}

std::string render_simulation(const std::vector<CellResult>& cells, std::string_view metadata, Format format,
                              int precision) {
  std::vector<std::vector<std::string>> rows;
  for (const CellResult& c : cells) rows.push_back(simulation_row(c, precision));
  if (format == Format::Md) return std::string(metadata) + "\n\n" + md_table(simulation_columns(), rows);
  std::string out = "# " + std::string(metadata) + '\n' + csv_record(simulation_columns()) + '\n';
  for (const auto& row : rows) out += csv_record(row) + '\n';
  return out;
}

}  // namespace bilatrr::cli
