#include "artifacts.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace cli {

namespace fs = std::filesystem;

namespace {

auto integrity(const fs::path& path, const std::string& what) -> CliError {
  return {4, "integrity", path.filename().string() + ": " + what};
}

auto split(const std::string& line) -> std::vector<std::string> {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) out.push_back(f);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

auto parses(const std::string& f, Col c) -> bool {
  switch (c) {
    case Col::integer: {
      unsigned long long v = 0;
      auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      return ec == std::errc() && p == f.data() + f.size();
    }
    case Col::boolean:
      return f == "0" || f == "1";
    case Col::real: {
      if (f == "inf" || f == "-inf" || f == "nan") return true;
      double v = 0;
      auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      return ec == std::errc() && p == f.data() + f.size();
    }
    case Col::text:
      return f.find_first_of("\"\n") == std::string::npos;
  }
  return false;
}

auto header_of(const CsvSchema& s) -> std::string {
  std::string h;
  for (const auto& [name, _] : s.columns) h += name + ',';
  h.back() = '\n';
  return h;
}

auto entry(const fs::path& path, std::string_view schema, int version) -> nlohmann::json {
  return {{"path", path.filename().string()},
          {"schema", schema},
          {"schema_version", version},
          {"bytes", fs::file_size(path)}};
}

}  // namespace

auto fmt(double v) -> std::string {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

CsvWriter::CsvWriter(const fs::path& path, CsvSchema schema)
    : path_(path), schema_(std::move(schema)), out_(path, std::ios::binary) {
  if (!out_) throw CliError{4, "io", "cannot write " + path.string()};
  out_ << header_of(schema_);
}

CsvWriter::~CsvWriter() {
  if (finished_) return;
  out_.close();
  std::error_code ec;
  fs::remove(path_, ec);
}

auto CsvWriter::finish() -> nlohmann::json {
  out_.close();
  if (out_.fail()) throw CliError{4, "io", "write failed for " + path_.string()};
  auto n = validate_csv(path_, schema_);
  if (n != rows_) throw integrity(path_, "row count changed on re-read");
  auto e = entry(path_, schema_.name, schema_.version);
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& c : schema_.columns) cols.push_back(c.first);
  e["columns"] = cols;
  e["rows"] = n;
  finished_ = true;
  return e;
}

auto validate_csv(const fs::path& path, const CsvSchema& schema) -> std::size_t {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError{4, "io", "cannot re-read " + path.string()};
  std::string line;
  if (!std::getline(in, line) || line + '\n' != header_of(schema)) throw integrity(path, "unexpected header");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    auto f = split(line);
    if (f.size() != schema.columns.size()) throw integrity(path, "row " + std::to_string(rows) + " has wrong width");
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (!parses(f[i], schema.columns[i].second)) {
        throw integrity(path, "row " + std::to_string(rows) + ", column " + schema.columns[i].first);
      }
    }
  }
  return rows;
}

auto write_json(const fs::path& path, const nlohmann::json& doc, std::string_view schema) -> nlohmann::json {
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CliError{4, "io", "cannot write " + path.string()};
    out << doc.dump(2) << '\n';
    if (!out) throw CliError{4, "io", "write failed for " + path.string()};
  }
  std::ifstream in(path, std::ios::binary);
  auto back = nlohmann::json::parse(in, nullptr, false);
  if (back.is_discarded() || !back.is_object() || back.value("schema_version", 0) < 1) {
    throw integrity(path, "JSON does not re-parse with a schema_version");
  }
  if (back != doc) throw integrity(path, "JSON content changed on re-read");
  return entry(path, schema, back["schema_version"].get<int>());
}

}  // namespace cli
