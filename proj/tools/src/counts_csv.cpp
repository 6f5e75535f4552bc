#include "bilatrr_cli/counts_csv.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string_view>

#include "bilatrr_cli/csv.hpp"

namespace bilatrr::cli {

namespace {

constexpr std::array<std::string_view, 4> kColumns{"group", "design", "responses", "count"};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::optional<std::int64_t> parse_int(std::string_view s) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::int64_t* cell(Dataset& d, int group, bool bilateral, std::int64_t responses) {
  GroupCounts& g = group == 1 ? d.group1 : d.group2;
  if (bilateral) {
    if (responses == 0) return &g.m0;
    if (responses == 1) return &g.m1;
    return &g.m2;
  }
  return responses == 0 ? &g.n0 : &g.n1;
}

}  // namespace

ParseError::ParseError(std::size_t line, const std::string& what)
    : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

SchemaError::SchemaError(std::size_t line, const std::string& what)
    : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

Dataset parse_counts(std::istream& in) {
  Dataset d;
  std::array<int, 4> index{-1, -1, -1, -1};
  std::size_t width = 0;
  bool have_header = false;
  std::array<bool, 10> seen{};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (line_no == 1 && line.substr(0, 3) == "\xEF\xBB\xBF") line.remove_prefix(3);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) continue;

    std::vector<std::string> fields;
    try {
      fields = split_csv_record(line);
    } catch (const std::invalid_argument& e) {
      throw ParseError(line_no, e.what());
    }

    if (!have_header) {
      width = fields.size();
      for (std::size_t k = 0; k < fields.size(); ++k) {
        const std::string name = lower(fields[k]);
        const auto it = std::find(kColumns.begin(), kColumns.end(), name);
        if (it == kColumns.end()) throw ParseError(line_no, "unknown column '" + fields[k] + "'");
        int& slot = index[static_cast<std::size_t>(it - kColumns.begin())];
        if (slot >= 0) throw ParseError(line_no, "duplicate column '" + fields[k] + "'");
        slot = static_cast<int>(k);
      }
      for (std::size_t k = 0; k < kColumns.size(); ++k) {
        if (index[k] < 0) throw ParseError(line_no, "missing column '" + std::string(kColumns[k]) + "'");
      }
      have_header = true;
      continue;
    }

    if (fields.size() != width) {
      throw ParseError(line_no, "expected " + std::to_string(width) + " fields, found " +
                                    std::to_string(fields.size()));
    }
    const std::string& group_s = fields[static_cast<std::size_t>(index[0])];
    const std::string design = lower(fields[static_cast<std::size_t>(index[1])]);
    const std::string& resp_s = fields[static_cast<std::size_t>(index[2])];
    const std::string& count_s = fields[static_cast<std::size_t>(index[3])];

    const auto group = parse_int(group_s);
    if (!group || (*group != 1 && *group != 2)) throw SchemaError(line_no, "group must be 1 or 2, got '" + group_s + "'");
    if (design != "bilateral" && design != "unilateral") {
      throw SchemaError(line_no, "design must be bilateral or unilateral, got '" + design + "'");
    }
    const bool bilateral = design == "bilateral";
    const auto responses = parse_int(resp_s);
    const std::int64_t max_resp = bilateral ? 2 : 1;
    if (!responses || *responses < 0 || *responses > max_resp) {
      throw SchemaError(line_no, "responses must lie in 0.." + std::to_string(max_resp) + " for " + design +
                                     " rows, got '" + resp_s + "'");
    }
    const auto count = parse_int(count_s);
    if (!count) throw ParseError(line_no, "count is not an integer: '" + count_s + "'");
    if (*count < 0) throw SchemaError(line_no, "count must be nonnegative");

    const std::size_t key = static_cast<std::size_t>((*group - 1) * 5 + (bilateral ? *responses : 3 + *responses));
    if (seen[key]) {
      throw SchemaError(line_no, "duplicate row for group " + group_s + ", " + design + ", responses " + resp_s);
    }
    seen[key] = true;
    *cell(d, static_cast<int>(*group), bilateral, *responses) = *count;
  }
  return d;
}

Dataset parse_counts_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return parse_counts(in);
}

std::string write_counts_csv(const Dataset& data) {
  std::ostringstream out;
  out << "group,design,responses,count\n";
  for (int i = 1; i <= 2; ++i) {
    const GroupCounts& g = data.group(i);
    out << i << ",bilateral,0," << g.m0 << '\n';
    out << i << ",bilateral,1," << g.m1 << '\n';
    out << i << ",bilateral,2," << g.m2 << '\n';
    out << i << ",unilateral,0," << g.n0 << '\n';
    out << i << ",unilateral,1," << g.n1 << '\n';
  }
  return out.str();
}

}  // namespace bilatrr::cli
