// splitree command-line front end. Everything numerical goes through the C API.
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "artifacts.hpp"
#include "splitree/splitree.h"

#ifndef SPLITREE_CLI_VERSION
#define SPLITREE_CLI_VERSION "0.0.0"
#endif

namespace {

using nlohmann::json;
using cli::CliError;
using cli::Col;
namespace fs = std::filesystem;

enum class Kind { text, real, count, boolean };

struct Param {
  Kind kind;
  json def;  // null: no default
  const char* help;
};

const std::map<std::string, Param>& params() {
  static const std::map<std::string, Param> p{
      {"lifetime", {Kind::text, "exp:1", "lifetime law: exp:<rate>, det:<c> or table:<csv of x,tail>"}},
      {"b", {Kind::real, 0.8, "birth rate"}},
      {"delta", {Kind::real, 0.3, "detection clock rate"}},
      {"q", {Kind::real, 0.0, "killing rate of the scale function"}},
      {"h", {Kind::real, 0.0, "grid step (0: library default)"}},
      {"xmax", {Kind::real, 0.0, "grid horizon (0: library default)"}},
      {"reps", {Kind::count, 100000, "number of replicates"}},
      {"seed", {Kind::count, nullptr, "master seed (fallback: SPLITREE_SEED, then 1)"}},
      {"workers", {Kind::count, 0, "worker threads (0: all cores)"}},
      {"alpha", {Kind::real, 0.01, "significance level of each check"}},
      {"los", {Kind::text, nullptr, "length-of-stay law K: exp:<nu> or table:<csv>"}},
      {"data", {Kind::text, nullptr, "outbreak CSV (outbreak_id,y[,hospital])"}},
      {"mode", {Kind::text, "pooled", "pooled or per_hospital"}},
      {"intervals", {Kind::boolean, true, "profile-likelihood intervals"}},
      {"nmax", {Kind::count, 0, "largest n (0: until the tail is below 1e-10)"}},
      {"ymax", {Kind::real, 0.0, "right end of the grid (0: half the table horizon)"}},
      {"points", {Kind::count, 200, "grid intervals"}},
      {"window", {Kind::real, nullptr, "observation window y for ages (default: infinite)"}},
      {"out", {Kind::text, "out", "output directory"}},
  };
  return p;
}

const std::map<std::string, std::vector<std::string>>& command_keys() {
  static const std::map<std::string, std::vector<std::string>> k{
      {"simulate", {"lifetime", "b", "delta", "los", "reps", "seed", "workers", "out"}},
      {"verify", {"lifetime", "b", "delta", "h", "xmax", "reps", "seed", "workers", "alpha", "out"}},
      {"scale", {"lifetime", "b", "q", "h", "xmax", "out"}},
      {"law", {"lifetime", "b", "delta", "h", "xmax", "nmax", "ymax", "points", "window", "out"}},
      {"fit", {"data", "los", "mode", "intervals", "out"}},
  };
  return k;
}

auto usage(const std::string& msg) -> CliError { return {2, "usage", msg}; }

auto exit_code(splitree_status s) -> int {
  if (s == SPLITREE_E_CONFIG || s == SPLITREE_E_ARGUMENT) return 2;
  if (s == SPLITREE_E_VERIFY_FAILED) return 3;
  return 4;
}

void check(splitree_status s) {
  if (s != SPLITREE_OK) throw CliError{exit_code(s), splitree_status_name(s), splitree_last_error()};
}

template <class T, void (*Free)(T*)>
struct Handle {
  std::unique_ptr<T, decltype([](T* p) { Free(p); })> p;
  T** out() {
    raw = nullptr;
    return &raw;
  }
  T* get() {
    if (raw) p.reset(std::exchange(raw, nullptr));
    return p.get();
  }
  T* raw = nullptr;
};
using Model = Handle<splitree_model, splitree_model_free>;
using Scale = Handle<splitree_scale, splitree_scale_free>;
using Law = Handle<splitree_law, splitree_law_free>;
using Runs = Handle<splitree_runs, splitree_runs_free>;
using Stay = Handle<splitree_stay, splitree_stay_free>;
using Dataset = Handle<splitree_dataset, splitree_dataset_free>;

auto take_string(char* s) -> std::string {
  std::string out = s ? s : "";
  splitree_string_free(s);
  return out;
}

// Flag and config values, resolved to typed JSON (flags override the file).
class Config {
 public:
  std::map<std::string, std::string> raw;       // bound to CLI11 options
  std::map<const CLI::App*, std::map<std::string, CLI::Option*>> options;  // per leaf command
  std::set<std::string> flagged;                // set by boolean flags
  std::string config_path;

  void resolve(const std::string& command, const CLI::App* leaf) {
    keys_ = command_keys().at(command);
    const auto& given = options[leaf];
    json file = json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw usage("cannot read config file " + config_path);
      file = json::parse(in, nullptr, false);
      if (file.is_discarded() || !file.is_object()) throw usage("config file is not a JSON object");
      for (const auto& [k, _] : file.items()) {
        if (!params().count(k)) throw usage("unknown config key '" + k + "'");
      }
    }
    for (const auto& k : keys_) {
      const auto& p = params().at(k);
      json v = p.def;
      source_[k] = "default";
      if (file.contains(k)) {
        v = typed(k, file[k]);
        source_[k] = "config";
      }
      auto o = given.find(k);
      if ((o != given.end() && o->second->count() > 0) || flagged.count(k)) {
        v = from_text(k, raw[k]);
        source_[k] = "flag";
      }
      values_[k] = v;
    }
    if (values_.contains("seed") && values_["seed"].is_null()) {
      if (const char* env = std::getenv("SPLITREE_SEED")) {
        values_["seed"] = from_text("seed", env);
        source_["seed"] = "env";
      } else {
        values_["seed"] = 1;
      }
    }
  }

  auto real(const std::string& k) const -> double {
    const auto& v = values_.at(k);
    return v.is_null() ? std::numeric_limits<double>::infinity() : v.get<double>();
  }
  auto count(const std::string& k) const -> std::uint64_t { return values_.at(k).get<std::uint64_t>(); }
  auto text(const std::string& k) const -> std::string {
    const auto& v = values_.at(k);
    return v.is_null() ? std::string() : v.get<std::string>();
  }
  auto flag(const std::string& k) const -> bool { return values_.at(k).get<bool>(); }
  auto echo() const -> json { return values_; }
  auto source(const std::string& k) const -> std::string { return source_.at(k); }

 private:
  static auto typed(const std::string& k, const json& v) -> json {
    switch (params().at(k).kind) {
      case Kind::text:
        if (v.is_string()) return v;
        break;
      case Kind::real:
        if (v.is_number() || (v.is_null() && params().at(k).def.is_null())) return v;
        if (v.is_string()) return from_text(k, v.get<std::string>());
        break;
      case Kind::count:
        if (v.is_number_unsigned()) return v;
        if (v.is_number_integer() && v.get<long long>() >= 0) return v.get<std::uint64_t>();
        break;
      case Kind::boolean:
        if (v.is_boolean()) return v;
        break;
    }
    throw usage("config key '" + k + "' has the wrong type");
  }

  static auto from_text(const std::string& k, const std::string& s) -> json {
    auto bad = [&] { return usage("invalid value '" + s + "' for " + k); };
    switch (params().at(k).kind) {
      case Kind::text:
        return s;
      case Kind::boolean:
        if (s == "true" || s == "1") return true;
        if (s == "false" || s == "0") return false;
        throw bad();
      case Kind::real: {
        std::size_t used = 0;
        double v = 0;
        try {
          v = std::stod(s, &used);
        } catch (const std::exception&) {
          throw bad();
        }
        if (used != s.size() || std::isnan(v)) throw bad();
        if (std::isinf(v)) return nullptr;
        return v;
      }
      case Kind::count: {
        std::size_t used = 0;
        unsigned long long v = 0;
        try {
          v = std::stoull(s, &used);
        } catch (const std::exception&) {
          throw bad();
        }
        if (used != s.size() || s.find('-') != std::string::npos) throw bad();
        return static_cast<std::uint64_t>(v);
      }
    }
    throw bad();
  }

  std::vector<std::string> keys_;
  json values_ = json::object();
  std::map<std::string, std::string> source_;
};

void add_params(CLI::App* leaf, Config& cfg, const std::string& command) {
  leaf->add_option("--config", cfg.config_path, "JSON config file; flags override its values");
  for (const auto& k : command_keys().at(command)) {
    if (k == "mode" || k == "intervals") continue;
    cfg.options[leaf][k] = leaf->add_option("--" + k, cfg.raw[k], params().at(k).help);
  }
  if (command == "fit") {
    auto* pooled = leaf->add_flag_callback("--pooled", [&cfg] {
      cfg.raw["mode"] = "pooled";
      cfg.flagged.insert("mode");
    }, "fit one (b, delta) to all outbreaks (default)");
    leaf->add_flag_callback("--per-hospital", [&cfg] {
      cfg.raw["mode"] = "per_hospital";
      cfg.flagged.insert("mode");
    }, "common delta, hospital-specific b (experimental)")->excludes(pooled);
    leaf->add_flag_callback("--no-intervals", [&cfg] {
      cfg.raw["intervals"] = "false";
      cfg.flagged.insert("intervals");
    }, "skip profile-likelihood intervals");
  }
}

struct Run {
  std::string command;  // "verify laws", "law nt", ...
  const Config& cfg;
  fs::path out;
  json files = json::array();
  json summary = json::object();
  std::string status = "ok";
};

void require(bool ok, const std::string& msg) {
  if (!ok) throw usage(msg);
}

auto make_model(const Config& cfg) -> Model {
  require(cfg.real("b") > 0 && std::isfinite(cfg.real("b")), "--b must be positive");
  Model m;
  check(splitree_model_create(cfg.text("lifetime").c_str(), cfg.real("b"), m.out()));
  m.get();
  return m;
}

auto grid_h(const Config& cfg) -> double {
  require(cfg.real("h") >= 0 && cfg.real("xmax") >= 0, "--h and --xmax must be nonnegative");
  return cfg.real("h");
}

void positive_delta(const Config& cfg) {
  require(cfg.real("delta") > 0 && std::isfinite(cfg.real("delta")), "--delta must be positive");
}

void cmd_simulate(Run& run) {
  const auto& cfg = run.cfg;
  positive_delta(cfg);
  require(cfg.count("reps") > 0, "--reps must be positive");
  bool epidemic = !cfg.text("los").empty();
  Runs runs;
  Stay stay;
  if (epidemic) {
    require(cfg.real("b") > 0, "--b must be positive");
    check(splitree_stay_create(cfg.text("los").c_str(), stay.out()));
    check(splitree_simulate_epidemic(stay.get(), cfg.real("b"), cfg.real("delta"), cfg.count("reps"),
                                     cfg.count("seed"), static_cast<unsigned>(cfg.count("workers")),
                                     runs.out()));
  } else {
    auto model = make_model(cfg);
    check(splitree_simulate(model.get(), cfg.real("delta"), cfg.count("reps"), cfg.count("seed"),
                            static_cast<unsigned>(cfg.count("workers")), runs.out()));
  }
  static const char* status_names[] = {"detected", "extinct", "horizon", "capped"};
  cli::CsvWriter reps(run.out / "replicates.csv",
                      {"replicates", 1,
                       {{"replicate", Col::integer}, {"detected", Col::boolean}, {"T", Col::real},
                        {"N_T", Col::integer}, {"status", Col::text}}});
  cli::CsvSchema carrier_schema{"carriers", 1, {{"replicate", Col::integer}, {"A", Col::real}, {"R", Col::real}}};
  if (epidemic) {
    carrier_schema.columns.push_back({"U", Col::real});
    carrier_schema.columns.push_back({"H", Col::real});
  }
  cli::CsvWriter carriers(run.out / "carriers.csv", carrier_schema);
  std::size_t n = 0;
  std::size_t tally[4] = {0, 0, 0, 0};
  check(splitree_runs_count(runs.get(), &n));
  for (std::size_t i = 0; i < n; ++i) {
    int st = 0;
    double T = 0;
    std::size_t nt = 0;
    check(splitree_runs_get(runs.get(), i, &st, &T, &nt));
    ++tally[st];
    reps.row(i, st == 0, T, nt, status_names[st]);
    for (std::size_t k = 0; k < nt; ++k) {
      double a = 0, r = 0;
      check(splitree_runs_carrier(runs.get(), i, k, &a, &r));
      if (epidemic) {
        double u = 0;
        check(splitree_runs_carrier_stay(runs.get(), i, k, &u));
        carriers.row(i, a, r, u, u + a);
      } else {
        carriers.row(i, a, r);
      }
    }
  }
  run.files.push_back(reps.finish());
  run.files.push_back(carriers.finish());
  run.summary = {{"replicates", n},
                 {"detected", tally[0]},
                 {"extinct", tally[1]},
                 {"horizon", tally[2]},
                 {"capped", tally[3]},
                 {"detection_frequency", static_cast<double>(tally[0]) / static_cast<double>(n)},
                 {"epidemic", epidemic}};
}

void cmd_verify(Run& run, const std::string& battery) {
  const auto& cfg = run.cfg;
  positive_delta(cfg);
  require(cfg.count("reps") > 0, "--reps must be positive");
  require(cfg.real("alpha") > 0 && cfg.real("alpha") < 1, "--alpha must lie in (0, 1)");
  auto model = make_model(cfg);
  splitree_verify_options opt{cfg.count("reps"), cfg.count("seed"), static_cast<unsigned>(cfg.count("workers")),
                              cfg.real("alpha"), grid_h(cfg), cfg.real("xmax")};
  char* raw = nullptr;
  auto st = splitree_verify(model.get(), cfg.real("delta"), battery.c_str(), &opt, &raw);
  if (st != SPLITREE_OK && st != SPLITREE_E_VERIFY_FAILED) check(st);
  auto report = json::parse(take_string(raw));
  run.files.push_back(cli::write_json(run.out / "report.json", report, "verify_report"));
  json failed = json::array();
  for (const auto& c : report["checks"]) {
    if (!c["passed"].get<bool>()) failed.push_back(c["name"]);
  }
  run.summary = {{"battery", battery}, {"passed", report["passed"]}, {"checks", report["checks"].size()},
                 {"failed", failed}};
  if (st == SPLITREE_E_VERIFY_FAILED) run.status = "verify_failed";
}

void cmd_scale(Run& run) {
  const auto& cfg = run.cfg;
  require(cfg.real("q") >= 0 && std::isfinite(cfg.real("q")), "--q must be nonnegative");
  auto model = make_model(cfg);
  Scale scale;
  check(splitree_scale_create(model.get(), cfg.real("q"), grid_h(cfg), cfg.real("xmax"), scale.out()));
  std::size_t size = 0;
  double step = 0, phi = 0;
  check(splitree_scale_grid(scale.get(), &size, &step));
  check(splitree_scale_phi_q(scale.get(), &phi));
  cli::CsvWriter csv(run.out / "scale.csv",
                     {"scale", 1,
                      {{"x", Col::real}, {"W_q", Col::real}, {"int_W_q", Col::real}, {"G_q", Col::real}}});
  for (std::size_t i = 0; i < size; ++i) {
    double x = static_cast<double>(i) * step, W = 0, iW = 0, G = 0;
    check(splitree_scale_eval(scale.get(), x, &W, &iW, &G));
    csv.row(x, W, iW, G);
  }
  run.files.push_back(csv.finish());
  double G_inf = 0;
  check(splitree_scale_eval(scale.get(), std::numeric_limits<double>::infinity(), nullptr, nullptr, &G_inf));
  run.summary = {{"grid_points", size}, {"step", step}, {"phi_q", phi}, {"G_q_inf", G_inf}};
}

// Horizon of the table the law uses (same defaults, q = delta).
auto law_horizon(const Config& cfg, splitree_model* m) -> double {
  Scale s;
  check(splitree_scale_create(m, cfg.real("delta"), grid_h(cfg), cfg.real("xmax"), s.out()));
  std::size_t size = 0;
  double step = 0;
  check(splitree_scale_grid(s.get(), &size, &step));
  return static_cast<double>(size - 1) * step;
}

void cmd_law(Run& run, const std::string& which) {
  const auto& cfg = run.cfg;
  positive_delta(cfg);
  require(cfg.count("points") >= 1, "--points must be positive");
  require(cfg.real("ymax") >= 0, "--ymax must be nonnegative");
  auto model = make_model(cfg);
  Law law;
  check(splitree_law_create(model.get(), cfg.real("delta"), grid_h(cfg), cfg.real("xmax"), law.out()));
  double p = 0, phi = 0;
  check(splitree_law_p(law.get(), &p));
  check(splitree_law_phi_delta(law.get(), &phi));
  run.summary = {{"p", p}, {"phi_delta", phi}};
  auto points = cfg.count("points");
  auto grid_end = [&](double natural) {
    if (cfg.real("ymax") > 0) return cfg.real("ymax");
    return std::min(natural, 0.5 * law_horizon(cfg, model.get()));
  };

  if (which == "nt") {
    cli::CsvWriter csv(run.out / "law_nt.csv",
                       {"law_nt", 1, {{"n", Col::integer}, {"pmf", Col::real}, {"pmf_joint", Col::real}}});
    std::uint64_t nmax = cfg.count("nmax");
    double mass = 0;
    for (std::size_t n = 1; nmax ? n <= nmax : (mass < 1 - 1e-10 && n <= 100000); ++n) {
      double c = 0, j = 0;
      check(splitree_law_pmf_nt(law.get(), n, 1, &c));
      check(splitree_law_pmf_nt(law.get(), n, 0, &j));
      mass += c;
      csv.row(n, c, j);
    }
    run.files.push_back(csv.finish());
    run.summary["mass"] = mass;
  } else if (which == "t") {
    double ymax = grid_end(std::numeric_limits<double>::infinity());
    cli::CsvWriter csv(run.out / "law_t.csv",
                       {"law_t", 1, {{"y", Col::real}, {"cdf", Col::real}, {"cdf_joint", Col::real}}});
    for (std::uint64_t i = 0; i <= points; ++i) {
      double y = ymax * static_cast<double>(i) / static_cast<double>(points), c = 0, j = 0;
      check(splitree_law_cdf_t(law.get(), y, 1, &c));
      check(splitree_law_cdf_t(law.get(), y, 0, &j));
      csv.row(y, c, j);
    }
    run.files.push_back(csv.finish());
  } else {
    double window = cfg.real("window");
    require(window > 0, "--window must be positive");
    double amax = grid_end(window);
    cli::CsvWriter csv(run.out / "law_age.csv",
                       {"law_age", 1, {{"window", Col::real}, {"a", Col::real}, {"density", Col::real}}});
    for (std::uint64_t i = 1; i <= points; ++i) {  // the density needs a > 0
      double a = amax * static_cast<double>(i) / static_cast<double>(points), d = 0;
      check(splitree_law_age_density(law.get(), window, a, &d));
      csv.row(window, a, d);
    }
    run.files.push_back(csv.finish());
  }
}

void cmd_fit(Run& run) {
  const auto& cfg = run.cfg;
  require(!cfg.text("data").empty(), "--data is required");
  require(!cfg.text("los").empty(), "--los is required");
  auto mode = cfg.text("mode");
  require(mode == "pooled" || mode == "per_hospital", "mode must be pooled or per_hospital");
  Stay stay;
  Dataset data;
  check(splitree_stay_create(cfg.text("los").c_str(), stay.out()));
  check(splitree_dataset_read(cfg.text("data").c_str(), data.out()));
  char* raw = nullptr;
  if (mode == "pooled") {
    check(splitree_fit(data.get(), stay.get(), cfg.flag("intervals") ? 1 : 0, &raw));
  } else {
    check(splitree_fit_per_hospital(data.get(), stay.get(), &raw));
  }
  auto result = json::parse(take_string(raw));
  run.files.push_back(cli::write_json(run.out / "fit.json", result, "fit_result"));
  std::size_t n = 0, s = 0;
  check(splitree_dataset_size(data.get(), &n, &s));
  run.summary = {{"outbreaks", n}, {"carriers", s}, {"mode", mode}};
  run.summary["delta"] = result["estimates"]["delta"];
}

void write_manifest(const Run& run, double wall) {
  json doc = {{"schema_version", 1},
              {"command", run.command},
              {"status", run.status},
              {"config", run.cfg.echo()},
              {"versions",
               {{"splitree", splitree_version()}, {"cli", SPLITREE_CLI_VERSION}, {"compiler", __VERSION__}}},
              {"wall_time_s", wall},
              {"summary", run.summary},
              {"files", run.files}};
  if (doc["config"].contains("seed")) {
    doc["seed"] = doc["config"]["seed"];
    doc["seed_source"] = run.cfg.source("seed");
  }
  cli::write_json(run.out / "manifest.json", doc, "manifest");
}

void report_error(const CliError& e) {
  json err = {{"error", {{"category", e.category}, {"exit_code", e.exit_code}, {"message", e.message}}}};
  std::cerr << err.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  auto start = std::chrono::steady_clock::now();
  CLI::App app{"Splitting trees, their contour processes and outbreak inference"};
  app.set_version_flag("--version", std::string(splitree_version()));
  app.set_help_flag("--help", "print this help and exit");  // -h would clash with --h
  app.require_subcommand(1);
  Config cfg;
  std::string leaf;

  auto* simulate = app.add_subcommand("simulate", "simulate trees until detection; replicate and carrier CSVs");
  add_params(simulate, cfg, "simulate");
  auto* verify = app.add_subcommand("verify", "statistical verification batteries; JSON report");
  verify->require_subcommand(1);
  for (const char* b : {"vervaat", "laws"}) {
    auto* sub = verify->add_subcommand(b, std::string(b) == "vervaat" ? "tree side against the Levy side"
                                                                      : "simulated trees against the analytic laws");
    add_params(sub, cfg, "verify");
  }
  auto* scale = app.add_subcommand("scale", "scale function table; CSV x,W_q,int_W_q,G_q");
  add_params(scale, cfg, "scale");
  auto* law = app.add_subcommand("law", "pmf/cdf/density tables of the detection law");
  law->require_subcommand(1);
  for (const char* w : {"nt", "t", "age"}) {
    add_params(law->add_subcommand(w, std::string("law of ") + (std::string(w) == "nt" ? "N_T"
                                                                 : std::string(w) == "t" ? "T" : "carrier ages")),
               cfg, "law");
  }
  auto* fit = app.add_subcommand("fit", "maximum-likelihood fit of (b, delta) from outbreak data");
  add_params(fit, cfg, "fit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    report_error(usage(e.what()));
    return 2;
  }

  try {
    auto* top = app.get_subcommands().front();
    std::string name = top->get_name();
    std::string sub = top->get_subcommands().empty() ? "" : top->get_subcommands().front()->get_name();
    cfg.resolve(name, sub.empty() ? top : top->get_subcommands().front());
    Run run{sub.empty() ? name : name + " " + sub, cfg, fs::path(cfg.text("out"))};
    std::error_code ec;
    fs::create_directories(run.out, ec);
    if (ec) throw CliError{4, "io", "cannot create " + run.out.string() + ": " + ec.message()};

    if (name == "simulate") cmd_simulate(run);
    else if (name == "verify") cmd_verify(run, sub);
    else if (name == "scale") cmd_scale(run);
    else if (name == "law") cmd_law(run, sub);
    else cmd_fit(run);

    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_manifest(run, wall);
    json line = {{"command", run.command}, {"status", run.status}, {"out", run.out.string()},
                 {"summary", run.summary}};
    if (run.cfg.echo().contains("seed")) line["seed"] = run.cfg.echo()["seed"];
    std::cout << line.dump() << '\n';
    if (run.status == "verify_failed") {
      report_error({3, "verify_failed", "verification battery '" + sub + "' failed; see report.json"});
      return 3;
    }
    return 0;
  } catch (const CliError& e) {
    report_error(e);
    return e.exit_code;
  } catch (const std::exception& e) {
    report_error({4, "internal", e.what()});
    return 4;
  }
}
