#include "bvm/results_io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bvm/errors.hpp"

namespace bvm {

namespace {

constexpr const char* kKeyColumns[] = {"n", "k", "replicate", "seed"};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string header_line(const std::vector<std::string>& metrics) {
  std::string h;
  for (const char* key : kKeyColumns) {
    if (!h.empty()) h += ',';
    h += key;
  }
  for (const auto& m : metrics) h += ',' + m;
  return h;
}

double parse_number(const std::string& field, std::size_t line) {
  if (field.empty()) throw ParseError("empty numeric field", line);
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (end != field.c_str() + field.size()) throw ParseError("not a number: '" + field + "'", line);
  return v;
}

template <class Int>
Int parse_integer(const std::string& field, std::size_t line) {
  if (field.empty()) throw ParseError("empty integer field", line);
  errno = 0;
  char* end = nullptr;
  const unsigned long long u = std::strtoull(field.c_str(), &end, 10);
  if (field[0] == '-' || end != field.c_str() + field.size() || errno == ERANGE) {
    throw ParseError("not a non-negative integer: '" + field + "'", line);
  }
  return static_cast<Int>(u);
}

void atomic_write(const std::string& path, const std::string& content) {
  const std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) throw Error("write to '" + tmp.string() + "' failed");
  }
  std::filesystem::rename(tmp, target);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_results(const ExperimentResult& result, const std::string& path, bool append) {
  std::string body;
  for (const auto& row : result.rows) {
    if (row.values.size() != result.metrics.size()) {
      throw InvalidDimension("row has " + std::to_string(row.values.size()) + " values for " +
                             std::to_string(result.metrics.size()) + " metrics");
    }
    body += std::to_string(row.n) + ',' + std::to_string(row.k) + ',' +
            std::to_string(row.replicate) + ',' + std::to_string(row.seed);
    for (double v : row.values) body += ',' + format_number(v);
    body += '\n';
  }
  const std::string header = header_line(result.metrics);
  if (append && std::filesystem::exists(path)) {
    std::string existing = read_file(path);
    const auto eol = existing.find('\n');
    const std::string existing_header = existing.substr(0, eol);
    if (existing_header != header) {
      throw ParseError("header does not match the rows being appended", 1);
    }
    if (!existing.empty() && existing.back() != '\n') existing += '\n';
    atomic_write(path, existing + body);
    return;
  }
  atomic_write(path, header + '\n' + body);
}

ExperimentResult read_results(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw ParseError("file is empty", 1);
  const auto header = split(line);
  if (header.size() < 4) throw ParseError("header needs n,k,replicate,seed", 1);
  for (std::size_t i = 0; i < 4; ++i) {
    if (header[i] != kKeyColumns[i]) {
      throw ParseError("header column " + std::to_string(i + 1) + " should be '" +
                           kKeyColumns[i] + "'", 1);
    }
  }
  ExperimentResult result;
  result.metrics.assign(header.begin() + 4, header.end());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split(line);
    if (fields.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields, found " +
                           std::to_string(fields.size()), line_no);
    }
    ResultRow row;
    row.n = parse_integer<long>(fields[0], line_no);
    row.k = parse_integer<long>(fields[1], line_no);
    row.replicate = parse_integer<long>(fields[2], line_no);
    row.seed = parse_integer<std::uint64_t>(fields[3], line_no);
    row.values.reserve(fields.size() - 4);
    for (std::size_t i = 4; i < fields.size(); ++i) {
      row.values.push_back(parse_number(fields[i], line_no));
    }
    result.rows.push_back(std::move(row));
  }
  return result;
}

std::string summary_to_csv(const SummaryTable& summary) {
  std::string out;
  for (std::size_t i = 0; i < summary.columns.size(); ++i) {
    if (i) out += ',';
    out += summary.columns[i];
  }
  out += '\n';
  for (const auto& row : summary.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_number(row[i]);
    }
    out += '\n';
  }
  return out;
}

void write_summary(const SummaryTable& summary, const std::string& path) {
  for (const auto& row : summary.rows) {
    if (row.size() != summary.columns.size()) throw InvalidDimension("summary row width mismatch");
  }
  atomic_write(path, summary_to_csv(summary));
}

SummaryTable read_summary(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw ParseError("file is empty", 1);
  SummaryTable table;
  table.columns = split(line);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split(line);
    if (fields.size() != table.columns.size()) {
      throw ParseError("expected " + std::to_string(table.columns.size()) + " fields", line_no);
    }
    std::vector<double> row;
    for (const auto& f : fields) row.push_back(parse_number(f, line_no));
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace bvm
