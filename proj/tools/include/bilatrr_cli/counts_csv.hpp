#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <string>

#include "bilatrr/errors.hpp"
#include "bilatrr/types.hpp"

namespace bilatrr::cli {

/// Malformed CSV: wrong header, wrong field count, non-numeric count.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what);
  [[nodiscard]] std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Well-formed row with a value outside the schema (group, design,
/// responses, negative count, duplicate key).
class SchemaError : public Error {
 public:
  SchemaError(std::size_t line, const std::string& what);
  [[nodiscard]] std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Reads the long count format
///
///   group,design,responses,count
///   1,bilateral,0,9
///   ...
///   2,unilateral,1,36
///
/// group is 1 or 2, design is bilateral or unilateral, responses is 0..2 for
/// bilateral and 0..1 for unilateral rows. Missing rows count as 0; blank
/// lines are skipped; LF and CRLF are accepted.
Dataset parse_counts(std::istream& in);
Dataset parse_counts_csv(const std::filesystem::path& path);

/// All ten rows, group 1 first, bilateral before unilateral.
std::string write_counts_csv(const Dataset& data);

}  // namespace bilatrr::cli
