#include "splitree/splitree.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <new>
#include <optional>
#include <string>

#include <json.hpp>

#include "splitree/epidemic.hpp"
#include "splitree/error.hpp"
#include "splitree/laws.hpp"
#include "splitree/scale_fn.hpp"
#include "splitree/tree_sim.hpp"
#include "splitree/verify.hpp"

#ifndef SPLITREE_VERSION
#define SPLITREE_VERSION "0.0.0"
#endif

using json = nlohmann::json;

struct splitree_model {
  splitree::LifespanMeasure measure;
  splitree::LaplaceExponent exponent;
};
struct splitree_scale {
  splitree::ScaleTable table;
};
struct splitree_law {
  splitree::DetectionLaw law;
};
struct splitree_runs {
  std::vector<splitree::DetectionOutcome> outcomes;
};
struct splitree_stay {
  splitree::StayDistribution K;
};
struct splitree_dataset {
  splitree::OutbreakDataset data;
};

namespace {

thread_local std::string last_error;

auto set_error(splitree_status s, const std::string& msg) -> splitree_status {
  last_error = msg;
  return s;
}

// Runs f, mapping exceptions to status codes and the thread-local message.
template <class F>
auto guarded(F&& f) -> splitree_status {
  try {
    last_error.clear();
    return f();
  } catch (const splitree::Error& e) {
    return set_error(static_cast<splitree_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(SPLITREE_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(SPLITREE_E_INTERNAL, e.what());
  } catch (...) {
    return set_error(SPLITREE_E_INTERNAL, "unknown exception");
  }
}

auto null_arg(const char* what) -> splitree_status {
  return set_error(SPLITREE_E_ARGUMENT, std::string("null argument: ") + what);
}

#define SPLITREE_CHECK(p) \
  if ((p) == nullptr) return null_arg(#p)

auto dup(const std::string& s) -> char* {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

auto opt_positive(double v) -> std::optional<double> {
  if (v > 0 && std::isfinite(v)) return v;
  return std::nullopt;
}

// JSON has no infinity; unbounded values are written as null
auto num(double v) -> json {
  if (std::isfinite(v)) return v;
  return nullptr;
}

auto interval(const splitree::Interval& i) -> json { return json::array({num(i.lo), num(i.hi)}); }

auto report_to_json(const splitree::VerifyReport& r) -> json {
  json checks = json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"name", c.name},
                      {"method", c.method},
                      {"statistic", num(c.statistic)},
                      {"p_value", num(c.p_value)},
                      {"alpha", c.alpha},
                      {"passed", c.passed},
                      {"detail", c.detail}});
  }
  return {{"schema_version", 1}, {"battery", r.battery}, {"seed", r.seed}, {"reps", r.reps},
          {"passed", r.passed()}, {"checks", checks}};
}

}  // namespace

extern "C" {

const char* splitree_version(void) { return SPLITREE_VERSION; }

const char* splitree_status_name(splitree_status s) {
  switch (s) {
    case SPLITREE_OK: return "ok";
    case SPLITREE_E_VERIFY_FAILED: return "verify_failed";
    case SPLITREE_E_ARGUMENT: return "argument";
    case SPLITREE_E_INTERNAL: return "internal";
    default: break;
  }
  if (s >= SPLITREE_E_CONFIG && s <= SPLITREE_E_AMBIGUITY) return splitree::errc_name(static_cast<splitree::Errc>(s));
  return "unknown";
}

const char* splitree_last_error(void) { return last_error.c_str(); }

void splitree_string_free(char* s) { std::free(s); }

splitree_status splitree_model_create(const char* lifetime, double b, splitree_model** out) {
  SPLITREE_CHECK(lifetime);
  SPLITREE_CHECK(out);
  return guarded([&] {
    splitree::LifespanMeasure m(b, splitree::parse_lifetime_spec(lifetime));
    *out = new splitree_model{m, splitree::LaplaceExponent(m)};
    return SPLITREE_OK;
  });
}

void splitree_model_free(splitree_model* m) { delete m; }

splitree_status splitree_model_describe(const splitree_model* m, char** out) {
  SPLITREE_CHECK(m);
  SPLITREE_CHECK(out);
  return guarded([&] {
    json j{{"b", m->measure.birth_rate()},
           {"lifetime", m->measure.lifetime().description()},
           {"eta", m->exponent.eta()},
           {"mass_at_infinity", m->measure.mass_at_infinity()}};
    *out = dup(j.dump());
    return SPLITREE_OK;
  });
}

splitree_status splitree_model_psi(const splitree_model* m, double a, double* out) {
  SPLITREE_CHECK(m);
  SPLITREE_CHECK(out);
  return guarded([&] {
    *out = m->exponent.psi(a);
    return SPLITREE_OK;
  });
}

splitree_status splitree_model_phi(const splitree_model* m, double q, double* out) {
  SPLITREE_CHECK(m);
  SPLITREE_CHECK(out);
  return guarded([&] {
    *out = m->exponent.phi(q);
    return SPLITREE_OK;
  });
}

splitree_status splitree_model_eta(const splitree_model* m, double* out) {
  SPLITREE_CHECK(m);
  SPLITREE_CHECK(out);
  *out = m->exponent.eta();
  return SPLITREE_OK;
}

splitree_status splitree_scale_create(const splitree_model* m, double q, double h, double x_max,
                                      splitree_scale** out) {
  SPLITREE_CHECK(m);
  SPLITREE_CHECK(out);
  return guarded([&] {
    double step = opt_positive(h).value_or(splitree::default_scale_step);
    double top = opt_positive(x_max).value_or(splitree::default_scale_horizon(m->exponent));
    *out = new splitree_scale{splitree::ScaleTable::build(m->exponent, q, step, top)};
    return SPLITREE_OK;
  });
}

void splitree_scale_free(splitree_scale* s) { delete s; }

splitree_status splitree_scale_grid(const splitree_scale* s, size_t* size, double* step) {
  SPLITREE_CHECK(s);
  if (size) *size = s->table.size();
  if (step) *step = s->table.step();
  return SPLITREE_OK;
}

splitree_status splitree_scale_eval(const splitree_scale* s, double x, double* W, double* int_W, double* G) {
  SPLITREE_CHECK(s);
  return guarded([&] {
    if (W) *W = s->table.W(x);
    if (int_W) *int_W = s->table.integral(x);
    if (G) *G = splitree::G_q(s->table, x);
    return SPLITREE_OK;
  });
}

splitree_status splitree_scale_phi_q(const splitree_scale* s, double* out) {
  SPLITREE_CHECK(s);
  SPLITREE_CHECK(out);
  *out = s->table.phi_q();
  return SPLITREE_OK;
}

splitree_status splitree_scale_laplace(const splitree_scale* s, double a, double* out) {
  SPLITREE_CHECK(s);
  SPLITREE_CHECK(out);
  return guarded([&] {
    *out = splitree::numerical_laplace_transform(s->table, a);
    return SPLITREE_OK;
  });
}

splitree_status splitree_fixed_time_pmf(const splitree_scale* s, double t, size_t n, double* out) {
  SPLITREE_CHECK(s);
  SPLITREE_CHECK(out);
  return guarded([&] {
    *out = splitree::fixed_time_law(s->table, t).pmf(n);
    return SPLITREE_OK;
  });
}

splitree_status splitree_law_create(const splitree_model* m, double delta, double h, double x_max,
                                    splitree_law** out) {
  SPLITREE_CHECK(m);
  SPLITREE_CHECK(out);
  return guarded([&] {
    *out = new splitree_law{splitree::DetectionLaw(m->exponent, delta, opt_positive(h), opt_positive(x_max))};
    return SPLITREE_OK;
  });
}

void splitree_law_free(splitree_law* l) { delete l; }

splitree_status splitree_law_p(const splitree_law* l, double* out) {
  SPLITREE_CHECK(l);
  SPLITREE_CHECK(out);
  *out = l->law.p();
  return SPLITREE_OK;
}

splitree_status splitree_law_phi_delta(const splitree_law* l, double* out) {
  SPLITREE_CHECK(l);
  SPLITREE_CHECK(out);
  *out = l->law.phi_delta();
  return SPLITREE_OK;
}

splitree_status splitree_law_pmf_nt(const splitree_law* l, size_t n, int conditional, double* out) {
  SPLITREE_CHECK(l);
  SPLITREE_CHECK(out);
  return guarded([&] {
    *out = l->law.pmf_NT(n, conditional != 0);
    return SPLITREE_OK;
  });
}

splitree_status splitree_law_cdf_t(const splitree_law* l, double y, int conditional, double* out) {
  SPLITREE_CHECK(l);
  SPLITREE_CHECK(out);
  return guarded([&] {
    *out = l->law.cdf_T(y, conditional != 0);
    return SPLITREE_OK;
  });
}

splitree_status splitree_law_joint_density(const splitree_law* l, size_t n, double t, double* out) {
  SPLITREE_CHECK(l);
  SPLITREE_CHECK(out);
  return guarded([&] {
    *out = l->law.joint_density(n, t);
    return SPLITREE_OK;
  });
}

splitree_status splitree_law_age_density(const splitree_law* l, double y, double a, double* out) {
  SPLITREE_CHECK(l);
  SPLITREE_CHECK(out);
  return guarded([&] {
    *out = l->law.age_density(y, a);
    return SPLITREE_OK;
  });
}

splitree_status splitree_law_age_residual_density(const splitree_law* l, double y, double a, double r,
                                                  double* out) {
  SPLITREE_CHECK(l);
  SPLITREE_CHECK(out);
  return guarded([&] {
    *out = l->law.age_residual_density(y, a, r);
    return SPLITREE_OK;
  });
}

splitree_status splitree_law_age_residual_cell(const splitree_law* l, double y, double a0, double a1, double r0,
                                               double r1, double* out) {
  SPLITREE_CHECK(l);
  SPLITREE_CHECK(out);
  return guarded([&] {
    *out = l->law.age_residual_cell(y, a0, a1, r0, r1);
    return SPLITREE_OK;
  });
}

splitree_status splitree_simulate(const splitree_model* m, double delta, size_t reps, uint64_t seed,
                                  unsigned workers, splitree_runs** out) {
  SPLITREE_CHECK(m);
  SPLITREE_CHECK(out);
  return guarded([&] {
    splitree::require(delta > 0 && std::isfinite(delta), splitree::Errc::config, "delta must be positive");
    splitree::require(reps > 0, splitree::Errc::config, "reps must be positive");
    auto outcomes = splitree::run_replicates(splitree::TreeModel(m->measure, delta), reps, seed, workers);
    *out = new splitree_runs{std::move(outcomes)};
    return SPLITREE_OK;
  });
}

void splitree_runs_free(splitree_runs* r) { delete r; }

splitree_status splitree_runs_count(const splitree_runs* r, size_t* out) {
  SPLITREE_CHECK(r);
  SPLITREE_CHECK(out);
  *out = r->outcomes.size();
  return SPLITREE_OK;
}

splitree_status splitree_runs_get(const splitree_runs* r, size_t i, int* status, double* T, size_t* carriers) {
  SPLITREE_CHECK(r);
  if (i >= r->outcomes.size()) return set_error(SPLITREE_E_DOMAIN, "replicate index out of range");
  const auto& o = r->outcomes[i];
  if (status) *status = static_cast<int>(o.status);
  if (T) *T = o.T;
  if (carriers) *carriers = o.N_T();
  return SPLITREE_OK;
}

splitree_status splitree_runs_carrier(const splitree_runs* r, size_t i, size_t k, double* age, double* residual) {
  SPLITREE_CHECK(r);
  if (i >= r->outcomes.size() || k >= r->outcomes[i].N_T()) {
    return set_error(SPLITREE_E_DOMAIN, "carrier index out of range");
  }
  const auto& c = r->outcomes[i].carriers[k];
  if (age) *age = c.age;
  if (residual) *residual = c.residual;
  return SPLITREE_OK;
}

splitree_status splitree_runs_carrier_stay(const splitree_runs* r, size_t i, size_t k, double* stay) {
  SPLITREE_CHECK(r);
  SPLITREE_CHECK(stay);
  if (i >= r->outcomes.size() || k >= r->outcomes[i].N_T()) {
    return set_error(SPLITREE_E_DOMAIN, "carrier index out of range");
  }
  *stay = r->outcomes[i].carriers[k].stay;
  return SPLITREE_OK;
}

splitree_status splitree_verify(const splitree_model* m, double delta, const char* battery,
                                const splitree_verify_options* opt, char** report_json) {
  SPLITREE_CHECK(m);
  SPLITREE_CHECK(battery);
  SPLITREE_CHECK(opt);
  SPLITREE_CHECK(report_json);
  return guarded([&] {
    splitree::VerifyOptions o;
    o.reps = opt->reps;
    o.seed = opt->seed;
    o.workers = opt->workers;
    o.alpha = opt->alpha > 0 ? opt->alpha : 0.01;
    o.h = opt_positive(opt->h);
    o.x_max = opt_positive(opt->x_max);
    std::string which = battery;
    splitree::VerifyReport r;
    if (which == "vervaat") {
      r = splitree::verify_vervaat(m->measure, delta, o);
    } else if (which == "laws") {
      r = splitree::verify_laws(m->measure, delta, o);
    } else {
      splitree::fail(splitree::Errc::config, "unknown battery '" + which + "' (expected vervaat or laws)");
    }
    *report_json = dup(report_to_json(r).dump(2));
    if (!r.passed()) return set_error(SPLITREE_E_VERIFY_FAILED, "verification battery '" + which + "' failed");
    return SPLITREE_OK;
  });
}

splitree_status splitree_stay_create(const char* spec, splitree_stay** out) {
  SPLITREE_CHECK(spec);
  SPLITREE_CHECK(out);
  return guarded([&] {
    *out = new splitree_stay{splitree::StayDistribution(splitree::parse_lifetime_spec(spec))};
    return SPLITREE_OK;
  });
}

void splitree_stay_free(splitree_stay* k) { delete k; }

splitree_status splitree_stay_mean(const splitree_stay* k, double* out) {
  SPLITREE_CHECK(k);
  SPLITREE_CHECK(out);
  *out = k->K.mean();
  return SPLITREE_OK;
}

splitree_status splitree_simulate_epidemic(const splitree_stay* k, double b, double delta, size_t reps,
                                           uint64_t seed, unsigned workers, splitree_runs** out) {
  SPLITREE_CHECK(k);
  SPLITREE_CHECK(out);
  return guarded([&] {
    *out = new splitree_runs{splitree::simulate_epidemic_trees(k->K, b, delta, reps, seed, workers)};
    return SPLITREE_OK;
  });
}

splitree_status splitree_h_density(const splitree_stay* k, double g2, double y, double* out) {
  SPLITREE_CHECK(k);
  SPLITREE_CHECK(out);
  return guarded([&] {
    *out = splitree::h_density(k->K, g2, y);
    return SPLITREE_OK;
  });
}

splitree_status splitree_h_cdf(const splitree_stay* k, double g2, double y, double* out) {
  SPLITREE_CHECK(k);
  SPLITREE_CHECK(out);
  return guarded([&] {
    *out = splitree::h_cdf(k->K, g2, y);
    return SPLITREE_OK;
  });
}

splitree_status splitree_dataset_read(const char* path, splitree_dataset** out) {
  SPLITREE_CHECK(path);
  SPLITREE_CHECK(out);
  return guarded([&] {
    auto data = splitree::read_outbreaks_csv(path);
    *out = new splitree_dataset{std::move(data)};
    return SPLITREE_OK;
  });
}

splitree_status splitree_dataset_write(const splitree_dataset* d, const char* path) {
  SPLITREE_CHECK(d);
  SPLITREE_CHECK(path);
  return guarded([&] {
    splitree::write_outbreaks_csv(d->data, path);
    return SPLITREE_OK;
  });
}

splitree_status splitree_dataset_simulate(const splitree_stay* k, double b, double delta, size_t count,
                                          uint64_t seed, unsigned workers, splitree_dataset** out) {
  SPLITREE_CHECK(k);
  SPLITREE_CHECK(out);
  return guarded([&] {
    auto data = splitree::simulate_outbreaks(k->K, b, delta, count, seed, workers);
    *out = new splitree_dataset{std::move(data)};
    return SPLITREE_OK;
  });
}

void splitree_dataset_free(splitree_dataset* d) { delete d; }

splitree_status splitree_dataset_size(const splitree_dataset* d, size_t* outbreaks, size_t* carriers) {
  SPLITREE_CHECK(d);
  if (outbreaks) *outbreaks = d->data.n();
  if (carriers) *carriers = d->data.carriers();
  return SPLITREE_OK;
}

splitree_status splitree_dataset_log_likelihood(const splitree_dataset* d, const splitree_stay* k, double g1,
                                                double g2, double* out) {
  SPLITREE_CHECK(d);
  SPLITREE_CHECK(k);
  SPLITREE_CHECK(out);
  return guarded([&] {
    *out = splitree::log_likelihood(d->data, k->K, g1, g2);
    return SPLITREE_OK;
  });
}

splitree_status splitree_fit(const splitree_dataset* d, const splitree_stay* k, int with_intervals,
                             char** result_json) {
  SPLITREE_CHECK(d);
  SPLITREE_CHECK(k);
  SPLITREE_CHECK(result_json);
  return guarded([&] {
    auto r = splitree::fit(d->data, k->K, with_intervals != 0);
    json j{{"schema_version", 1},
           {"mode", "pooled"},
           {"estimates", {{"g1", r.g1_hat}, {"g2", r.g2_hat}, {"b", num(r.b_hat)}, {"delta", r.delta_hat}}},
           {"log_likelihood", r.log_likelihood},
           {"diagnostics",
            {{"n", r.n},
             {"s", r.s},
             {"g1_at_boundary", r.g1_at_boundary},
             {"evaluations", r.evaluations},
             {"score_log_g2", r.score_g2}}}};
    if (with_intervals) {
      j["intervals"] = {{"level", 0.95}, {"delta", interval(r.delta_ci)}, {"b", interval(r.b_ci)}};
    }
    *result_json = dup(j.dump(2));
    return SPLITREE_OK;
  });
}

splitree_status splitree_fit_per_hospital(const splitree_dataset* d, const splitree_stay* k, char** result_json) {
  SPLITREE_CHECK(d);
  SPLITREE_CHECK(k);
  SPLITREE_CHECK(result_json);
  return guarded([&] {
    auto groups = splitree::split_by_hospital(d->data);
    auto r = splitree::fit_per_hospital(groups, {k->K});
    json hospitals = json::array();
    for (const auto& h : r.hospitals) {
      hospitals.push_back({{"hospital", h.hospital}, {"b", num(h.b_hat)}, {"g2", h.g2_hat}});
    }
    json j{{"schema_version", 1},
           {"mode", "per_hospital"},
           {"experimental", true},
           {"estimates", {{"delta", r.delta_hat}}},
           {"intervals", {{"level", 0.95}, {"delta", interval(r.delta_ci)}}},
           {"log_likelihood", r.log_likelihood},
           {"hospitals", hospitals}};
    *result_json = dup(j.dump(2));
    return SPLITREE_OK;
  });
}

}  // extern "C"
