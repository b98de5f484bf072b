#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <string>
#include <system_error>
#include <vector>

#include "perfreg/data.hpp"
#include "perfreg/errors.hpp"
#include "perfreg/problems.hpp"

namespace perfreg {

// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const std::to_chars_result res = std::to_chars(buf, buf + sizeof buf, v);
  if (res.ec != std::errc())
    throw InternalError("format_double: conversion failed");
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, std::size_t line_no, const char* what) {
  double v = 0.0;
  const std::from_chars_result res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw DataError(std::string("line ") + std::to_string(line_no) + ": bad " + what +
                    " value '" + std::string(s) + "'");
  return v;
}

inline long parse_long(std::string_view s, std::size_t line_no, const char* what) {
  long v = 0;
  const std::from_chars_result res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw DataError(std::string("line ") + std::to_string(line_no) + ": bad " + what +
                    " value '" + std::string(s) + "'");
  return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  out << content;
  if (!out) throw DataError("write failed: " + path);
}

// ---- performance tables ---------------------------------------------------

inline constexpr const char* kPerformanceHeader =
    "algorithm,problem_id,instance_id,budget,target_precision";

inline std::string performance_table_to_csv(const PerformanceTable& table) {
  std::string out = kPerformanceHeader;
  out += "\n";
  for (const PerformanceRecord& r : table.records) {
    out += r.algorithm_id;
    out += "," + std::to_string(r.problem_id);
    out += "," + std::to_string(r.instance_id);
    out += "," + std::to_string(r.budget);
    out += "," + format_double(r.target_precision);
    out += "\n";
  }
  return out;
}

inline PerformanceTable parse_performance_csv(const std::vector<std::string>& lines) {
  if (lines.empty() || lines[0] != kPerformanceHeader)
    throw DataError(std::string("performance table must start with header '") +
                    kPerformanceHeader + "'");
  PerformanceTable table;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::vector<std::string> f = split_csv_line(lines[i]);
    const std::size_t line_no = i + 1;
    if (f.size() != 5)
      throw DataError("line " + std::to_string(line_no) + ": expected 5 fields, got " +
                      std::to_string(f.size()));
    PerformanceRecord r;
    r.algorithm_id = f[0];
    if (r.algorithm_id.empty())
      throw DataError("line " + std::to_string(line_no) + ": empty algorithm id");
    r.problem_id = static_cast<int>(parse_long(f[1], line_no, "problem_id"));
    r.instance_id = static_cast<int>(parse_long(f[2], line_no, "instance_id"));
    r.budget = parse_long(f[3], line_no, "budget");
    r.target_precision = parse_double(f[4], line_no, "target_precision");
    if (r.budget <= 0)
      throw DataError("line " + std::to_string(line_no) + ": budget must be positive");
    if (!(r.target_precision >= 0.0))
      throw DataError("line " + std::to_string(line_no) +
                      ": target_precision must be nonnegative");
    table.records.push_back(std::move(r));
  }
  table.validate();
  return table;
}

inline PerformanceTable load_performance_table(const std::string& path) {
  return parse_performance_csv(read_lines(path));
}

inline void save_performance_table(const PerformanceTable& table, const std::string& path) {
  write_file(path, performance_table_to_csv(table));
}

// ---- feature tables --------------------------------------------------------

inline std::string feature_table_header() {
  std::string h = "problem_id,instance_id";
  for (const std::string& name : canonical_feature_names()) h += "," + name;
  return h;
}

inline std::string feature_table_to_csv(const FeatureTable& table) {
  std::string out = feature_table_header();
  out += "\n";
  for (const FeatureVector& fv : table.rows) {
    out += std::to_string(fv.problem_id) + "," + std::to_string(fv.instance_id);
    for (double v : fv.values) out += "," + format_double(v);
    out += "\n";
  }
  return out;
}

inline FeatureTable parse_feature_csv(const std::vector<std::string>& lines) {
  if (lines.empty() || lines[0] != feature_table_header())
    throw DataError(
        "feature table header does not match the canonical 56-feature schema");
  FeatureTable table;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::vector<std::string> f = split_csv_line(lines[i]);
    const std::size_t line_no = i + 1;
    if (f.size() != 2 + kFeatureCount)
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(2 + kFeatureCount) + " fields, got " +
                      std::to_string(f.size()));
    FeatureVector fv;
    fv.problem_id = static_cast<int>(parse_long(f[0], line_no, "problem_id"));
    fv.instance_id = static_cast<int>(parse_long(f[1], line_no, "instance_id"));
    for (std::size_t c = 0; c < kFeatureCount; ++c)
      fv.values[c] = parse_double(f[2 + c], line_no, "feature");
    table.rows.push_back(fv);
  }
  table.validate();
  return table;
}

inline FeatureTable load_feature_table(const std::string& path) {
  return parse_feature_csv(read_lines(path));
}

inline void save_feature_table(const FeatureTable& table, const std::string& path) {
  write_file(path, feature_table_to_csv(table));
}

// ---- design sets ------------------------------------------------------------

inline std::string design_set_to_csv(const DesignSet& ds) {
  std::string out = "problem_id,instance_id,dim,seed";
  for (int i = 1; i <= ds.dim; ++i) out += ",x" + std::to_string(i);
  out += ",fitness\n";
  for (std::size_t r = 0; r < ds.points.rows; ++r) {
    out += std::to_string(ds.problem_id) + "," + std::to_string(ds.instance_id) + "," +
           std::to_string(ds.dim) + "," + std::to_string(ds.seed);
    for (std::size_t c = 0; c < ds.points.cols; ++c)
      out += "," + format_double(ds.points.at(r, c));
    out += "," + format_double(ds.fitness[r]);
    out += "\n";
  }
  return out;
}

inline void save_design_set(const DesignSet& ds, const std::string& path) {
  write_file(path, design_set_to_csv(ds));
}

}  // namespace perfreg
