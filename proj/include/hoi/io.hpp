#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "hoi/hypothesis.hpp"
#include "hoi/kernel.hpp"

namespace hoi {

/// Reads one observation per row under a header of variable names.
/// Multi-dimensional variables use `name:0, name:1, ...` columns. Errors
/// (DataError) name the offending row and column.
Dataset read_csv(std::istream& in, const std::string& source = "<csv>");
Dataset read_csv_file(const std::string& path);

/// Writes with 17 significant digits so a read gives back identical doubles.
void write_csv(std::ostream& out, const Dataset& data);

/// Resolves a comma-separated list of names or 1-based indices; empty keeps all.
std::vector<int> resolve_variables(const Dataset& data, const std::string& selection);

nlohmann::json to_json(const TestConfig& config);
nlohmann::json to_json(const SubTestResult& result);
nlohmann::json to_json(const TestReport& report);

}  // namespace hoi
