#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bvm {

/// One (n, replicate) record.
struct ResultRow {
  long n = 0;
  long k = 0;
  long replicate = 0;
  std::uint64_t seed = 0;
  std::vector<double> values;  ///< one per metric column; NaN when not applicable
};

struct ExperimentResult {
  std::vector<std::string> metrics;
  std::vector<ResultRow> rows;
};

/// Per-n aggregates. Column names are free-form; values are numbers.
struct SummaryTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

/// Formats with 17 significant digits ("nan", "inf", "-inf" for non-finite).
std::string format_number(double value);

/// Writes a header line and one line per row through a temporary file and a
/// rename. With append = true, rows are added to an existing file whose header
/// must match.
void write_results(const ExperimentResult& result, const std::string& path, bool append = false);
/// Throws ParseError with the offending line number on malformed input.
ExperimentResult read_results(const std::string& path);

void write_summary(const SummaryTable& summary, const std::string& path);
SummaryTable read_summary(const std::string& path);

/// Renders a table as comma-separated text.
std::string summary_to_csv(const SummaryTable& summary);

}  // namespace bvm
