#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace bilatrr::cli {

/// Splits one CSV record. Quoted fields may contain commas and doubled
/// quotes; surrounding whitespace of unquoted fields is trimmed. Throws
/// std::invalid_argument on an unterminated quote.
std::vector<std::string> split_csv_record(std::string_view line);

/// Quotes a field when it contains a comma, quote, CR or LF.
std::string csv_field(std::string_view s);

std::string csv_record(const std::vector<std::string>& fields);

std::string_view trim(std::string_view s);

}  // namespace bilatrr::cli
