#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace cli {

// Failure of the CLI itself (bad flags, unreadable config, artifact mismatch).
struct CliError {
  int exit_code;
  std::string category;
  std::string message;
};

enum class Col { integer, real, boolean, text };

struct CsvSchema {
  std::string name;
  int version = 1;
  std::vector<std::pair<std::string, Col>> columns;
};

// Shortest round-trip text for a double; "inf", "-inf", "nan" for the rest.
auto fmt(double v) -> std::string;

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, CsvSchema schema);
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;
  ~CsvWriter();  // removes the file unless finish() succeeded

  template <class... T>
  void row(const T&... fields) {
    std::string line;
    (append(line, fields), ...);
    line.back() = '\n';
    out_ << line;
    ++rows_;
  }

  // Closes the file, re-reads it against the schema and returns the manifest entry.
  auto finish() -> nlohmann::json;

 private:
  static void append(std::string& line, double v) { line += fmt(v) + ','; }
  static void append(std::string& line, std::size_t v) { line += std::to_string(v) + ','; }
  static void append(std::string& line, int v) { line += std::to_string(v) + ','; }
  static void append(std::string& line, bool v) { line += v ? "1," : "0,"; }
  static void append(std::string& line, std::string_view v) { (line += v) += ','; }
  static void append(std::string& line, const char* v) { append(line, std::string_view(v)); }
  static void append(std::string& line, const std::string& v) { append(line, std::string_view(v)); }

  std::filesystem::path path_;
  CsvSchema schema_;
  std::ofstream out_;
  std::size_t rows_ = 0;
  bool finished_ = false;
};

// Checks header, field count and field types; returns the number of data rows.
auto validate_csv(const std::filesystem::path& path, const CsvSchema& schema) -> std::size_t;

// Writes pretty JSON (must carry schema_version), re-parses it and returns the manifest entry.
auto write_json(const std::filesystem::path& path, const nlohmann::json& doc, std::string_view schema)
    -> nlohmann::json;

}  // namespace cli
