// Command-line laboratory for regulated random walks in the nonnegative
// orthant.  Four subcommands:
//
//   validate       parse a run configuration, build the reflection matrix and
//                  the increment model, and print the hypothesis report.
//   simulate-path  sample one increment path, solve the constrained walk and
//                  its reversed storage companion, and judge every pathwise
//                  equivalence at the final horizon.
//   duality-check  run the randomized pathwise-duality corpus and report the
//                  failure and converse-gap counts.
//   estimate       run the Monte Carlo estimator suites and emit the
//                  cross-checked claims report.
//
// Exit codes: 0 success; 1 configuration or model error (machine-readable
// error JSON on standard error); 2 exact pathwise-duality counterexample;
// 3 statistical failure of a guaranteed distributional identity.
//
// Reports are byte-identical for identical (config, seed) regardless of the
// worker count: floats are printed with 17 significant digits, key order is
// fixed, and volatile run metadata is segregated into run_metadata.json.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ruinlab/claims.hpp"
#include "ruinlab/common.hpp"
#include "ruinlab/corpus.hpp"
#include "ruinlab/estimators.hpp"
#include "ruinlab/models.hpp"
#include "ruinlab/reflection.hpp"
#include "ruinlab/report_io.hpp"
#include "ruinlab/rng.hpp"
#include "ruinlab/skorokhod.hpp"
#include "ruinlab/storage.hpp"

namespace {

using ruinlab::Error;
using ruinlab::ErrorCode;
using ruinlab::Json;
using ruinlab::Mat;
using ruinlab::Vec;

using ConfigJson = nlohmann::json;

// ---------------------------------------------------------------------------
// Run configuration: a single closed-schema JSON document.  Unknown keys are
// rejected at every level so that configs stay reproducible.

struct OutputSpec {
  std::string dir = "out";
  bool json = true;
  bool csv = false;
};

struct RunConfig {
  Mat P;  // interaction matrix; zero matrix when the config omits it
  ruinlab::ModelConfig model;
  Vec a;  // initial capital; zero vector when the config omits it
  std::int64_t horizon = 64;
  std::int64_t n_paths = 100'000;
  std::uint64_t seed = 1;
  std::int64_t step_cap = 100'000;
  double strict_tol = ruinlab::kStrictTolDefault;
  int kmax = 12;
  double z_consistent = ruinlab::kZConsistent;
  double z_inconsistent = ruinlab::kZInconsistent;
  OutputSpec output;
};

[[noreturn]] void config_fail(const std::string& message) {
  ruinlab::fail(ErrorCode::invalid_config, message);
}

void expect_object(const ConfigJson& j, const std::string& where) {
  if (!j.is_object()) config_fail(where + " must be a JSON object");
}

void reject_unknown(const ConfigJson& j, const std::string& where,
                    std::initializer_list<const char*> allowed) {
  expect_object(j, where);
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* key : allowed) {
      if (it.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      config_fail("unknown key \"" + it.key() + "\" in " + where);
    }
  }
}

const ConfigJson& require_key(const ConfigJson& j, const std::string& where,
                              const char* key) {
  expect_object(j, where);
  const auto it = j.find(key);
  if (it == j.end()) config_fail(where + " is missing required key \"" +
                                 key + "\"");
  return *it;
}

double as_number(const ConfigJson& v, const std::string& where) {
  if (!v.is_number()) config_fail(where + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) config_fail(where + " must be finite");
  return x;
}

std::int64_t as_integer(const ConfigJson& v, const std::string& where) {
  if (!v.is_number_integer()) config_fail(where + " must be an integer");
  return v.get<std::int64_t>();
}

std::string as_string(const ConfigJson& v, const std::string& where) {
  if (!v.is_string()) config_fail(where + " must be a string");
  return v.get<std::string>();
}

std::vector<double> as_number_array(const ConfigJson& v,
                                    const std::string& where) {
  if (!v.is_array()) config_fail(where + " must be an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(as_number(v[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

ruinlab::ClaimDist parse_claim_dist(const ConfigJson& j,
                                    const std::string& where) {
  const std::string kind = as_string(require_key(j, where, "kind"),
                                     where + ".kind");
  ruinlab::ClaimDist cd;
  if (kind == "exponential") {
    reject_unknown(j, where, {"kind", "mean"});
    cd.kind = ruinlab::ClaimKind::exponential;
    cd.mean_param = as_number(require_key(j, where, "mean"), where + ".mean");
  } else if (kind == "pareto") {
    reject_unknown(j, where, {"kind", "alpha", "xm"});
    cd.kind = ruinlab::ClaimKind::pareto;
    cd.alpha = as_number(require_key(j, where, "alpha"), where + ".alpha");
    cd.xm = as_number(require_key(j, where, "xm"), where + ".xm");
  } else if (kind == "lognormal") {
    reject_unknown(j, where, {"kind", "mu", "sigma"});
    cd.kind = ruinlab::ClaimKind::lognormal;
    cd.mu = as_number(require_key(j, where, "mu"), where + ".mu");
    cd.sigma = as_number(require_key(j, where, "sigma"), where + ".sigma");
  } else if (kind == "deterministic") {
    reject_unknown(j, where, {"kind", "size"});
    cd.kind = ruinlab::ClaimKind::deterministic;
    cd.size = as_number(require_key(j, where, "size"), where + ".size");
  } else if (kind == "two_point") {
    reject_unknown(j, where, {"kind", "sizes", "probs"});
    cd.kind = ruinlab::ClaimKind::two_point;
    const auto sizes = as_number_array(require_key(j, where, "sizes"),
                                       where + ".sizes");
    const auto probs = as_number_array(require_key(j, where, "probs"),
                                       where + ".probs");
    if (sizes.size() != 2 || probs.size() != 2) {
      config_fail(where + ".sizes and .probs must each have 2 entries");
    }
    cd.sizes = {sizes[0], sizes[1]};
    cd.probs = {probs[0], probs[1]};
  } else {
    config_fail(where + ".kind must be one of exponential, pareto, "
                "lognormal, deterministic, two_point");
  }
  return cd;
}

ruinlab::ArrivalDist parse_arrival(const ConfigJson& j,
                                   const std::string& where) {
  const std::string kind = as_string(require_key(j, where, "kind"),
                                     where + ".kind");
  ruinlab::ArrivalDist ad;
  if (kind == "exponential") {
    reject_unknown(j, where, {"kind", "rate"});
    ad.kind = ruinlab::ArrivalKind::exponential;
    ad.rate = as_number(require_key(j, where, "rate"), where + ".rate");
  } else if (kind == "deterministic") {
    reject_unknown(j, where, {"kind", "delta"});
    ad.kind = ruinlab::ArrivalKind::deterministic;
    ad.delta = as_number(require_key(j, where, "delta"), where + ".delta");
  } else if (kind == "gamma") {
    reject_unknown(j, where, {"kind", "shape", "rate"});
    ad.kind = ruinlab::ArrivalKind::gamma;
    ad.shape = as_number(require_key(j, where, "shape"), where + ".shape");
    ad.rate = as_number(require_key(j, where, "rate"), where + ".rate");
  } else {
    config_fail(where + ".kind must be one of exponential, deterministic, "
                "gamma");
  }
  return ad;
}

std::vector<ruinlab::ClaimDist> parse_claims(const ConfigJson& j,
                                             const std::string& where) {
  if (!j.is_array()) config_fail(where + " must be an array of objects");
  std::vector<ruinlab::ClaimDist> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(
        parse_claim_dist(j[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

ruinlab::ModelConfig parse_model(const ConfigJson& j) {
  const std::string where = "model";
  const std::string mode = as_string(require_key(j, where, "mode"),
                                     "model.mode");
  ruinlab::ModelConfig mc;
  if (mode == "renewal_network") {
    reject_unknown(j, where,
                   {"mode", "d", "premium_rates", "interarrival", "routing",
                    "claims"});
    mc.mode = ruinlab::ModelMode::renewal_network;
    mc.d = static_cast<int>(as_integer(require_key(j, where, "d"), "model.d"));
    mc.premium_rates = as_number_array(
        require_key(j, where, "premium_rates"), "model.premium_rates");
    mc.interarrival = parse_arrival(require_key(j, where, "interarrival"),
                                    "model.interarrival");
    mc.routing = as_number_array(require_key(j, where, "routing"),
                                 "model.routing");
    mc.claims = parse_claims(require_key(j, where, "claims"), "model.claims");
  } else if (mode == "cl_network") {
    reject_unknown(j, where,
                   {"mode", "d", "premium_rates", "lambdas", "claims"});
    mc.mode = ruinlab::ModelMode::cl_network;
    mc.d = static_cast<int>(as_integer(require_key(j, where, "d"), "model.d"));
    mc.premium_rates = as_number_array(
        require_key(j, where, "premium_rates"), "model.premium_rates");
    mc.lambdas = as_number_array(require_key(j, where, "lambdas"),
                                 "model.lambdas");
    mc.claims = parse_claims(require_key(j, where, "claims"), "model.claims");
  } else if (mode == "plus_minus_walk") {
    reject_unknown(j, where, {"mode", "d", "q"});
    mc.mode = ruinlab::ModelMode::plus_minus_walk;
    mc.d = 1;
    if (j.contains("d") &&
        as_integer(j.at("d"), "model.d") != 1) {
      config_fail("model.d must be 1 for plus_minus_walk");
    }
    mc.q = as_number(require_key(j, where, "q"), "model.q");
  } else {
    config_fail("model.mode must be one of renewal_network, cl_network, "
                "plus_minus_walk");
  }
  if (mc.d < 1) config_fail("model.d must be at least 1");
  return mc;
}

Mat parse_matrix(const ConfigJson& j, int d) {
  reject_unknown(j, "matrix", {"P"});
  const ConfigJson& rows = require_key(j, "matrix", "P");
  if (!rows.is_array() || rows.empty()) {
    config_fail("matrix.P must be a non-empty array of rows");
  }
  const int n = static_cast<int>(rows.size());
  if (n != d) {
    config_fail("matrix.P has " + std::to_string(n) +
                " rows but the model dimension is " + std::to_string(d));
  }
  Mat P(n, n);
  for (int r = 0; r < n; ++r) {
    const auto row = as_number_array(rows[static_cast<std::size_t>(r)],
                                     "matrix.P[" + std::to_string(r) + "]");
    if (static_cast<int>(row.size()) != n) {
      config_fail("matrix.P[" + std::to_string(r) + "] must have " +
                  std::to_string(n) + " entries");
    }
    for (int c = 0; c < n; ++c) P(r, c) = row[static_cast<std::size_t>(c)];
  }
  return P;
}

OutputSpec parse_output(const ConfigJson& j) {
  reject_unknown(j, "output", {"dir", "formats"});
  OutputSpec out;
  if (j.contains("dir")) out.dir = as_string(j.at("dir"), "output.dir");
  if (out.dir.empty()) config_fail("output.dir must be non-empty");
  if (j.contains("formats")) {
    const ConfigJson& fmts = j.at("formats");
    if (!fmts.is_array() || fmts.empty()) {
      config_fail("output.formats must be a non-empty array");
    }
    out.json = false;
    out.csv = false;
    for (std::size_t i = 0; i < fmts.size(); ++i) {
      const std::string f =
          as_string(fmts[i], "output.formats[" + std::to_string(i) + "]");
      if (f == "json") {
        out.json = true;
      } else if (f == "csv") {
        out.csv = true;
      } else {
        config_fail("output.formats entries must be \"json\" or \"csv\"");
      }
    }
  }
  return out;
}

RunConfig parse_run_config(const ConfigJson& j) {
  reject_unknown(j, "config",
                 {"matrix", "model", "initial_capital", "horizon", "n_paths",
                  "seed", "step_cap", "strict_tol", "kmax",
                  "verdict_thresholds", "output"});
  RunConfig cfg;
  cfg.model = parse_model(require_key(j, "config", "model"));
  const int d = cfg.model.d;

  if (j.contains("matrix")) {
    cfg.P = parse_matrix(j.at("matrix"), d);
  } else {
    cfg.P = Mat::Zero(d, d);
  }

  if (j.contains("initial_capital")) {
    const auto a = as_number_array(j.at("initial_capital"), "initial_capital");
    if (static_cast<int>(a.size()) != d) {
      config_fail("initial_capital must have exactly " + std::to_string(d) +
                  " entries");
    }
    cfg.a = Vec(d);
    for (int i = 0; i < d; ++i) {
      if (a[static_cast<std::size_t>(i)] < 0.0) {
        config_fail("initial_capital entries must be nonnegative");
      }
      cfg.a[i] = a[static_cast<std::size_t>(i)];
    }
  } else {
    cfg.a = Vec::Zero(d);
  }

  if (j.contains("horizon")) {
    cfg.horizon = as_integer(j.at("horizon"), "horizon");
    if (cfg.horizon < 1) config_fail("horizon must be at least 1");
  }
  if (j.contains("n_paths")) {
    cfg.n_paths = as_integer(j.at("n_paths"), "n_paths");
    if (cfg.n_paths < 0) config_fail("n_paths must be nonnegative");
  }
  if (j.contains("seed")) {
    const std::int64_t s = as_integer(j.at("seed"), "seed");
    if (s < 0) config_fail("seed must be nonnegative");
    cfg.seed = static_cast<std::uint64_t>(s);
  }
  if (j.contains("step_cap")) {
    cfg.step_cap = as_integer(j.at("step_cap"), "step_cap");
    if (cfg.step_cap < 1) config_fail("step_cap must be at least 1");
  }
  if (j.contains("strict_tol")) {
    cfg.strict_tol = as_number(j.at("strict_tol"), "strict_tol");
    if (cfg.strict_tol < 0.0) config_fail("strict_tol must be nonnegative");
  }
  if (j.contains("kmax")) {
    cfg.kmax = static_cast<int>(as_integer(j.at("kmax"), "kmax"));
    if (cfg.kmax < 1) config_fail("kmax must be at least 1");
  }
  if (j.contains("verdict_thresholds")) {
    const auto t = as_number_array(j.at("verdict_thresholds"),
                                   "verdict_thresholds");
    if (t.size() != 2) {
      config_fail("verdict_thresholds must be [z_consistent, z_inconsistent]");
    }
    cfg.z_consistent = t[0];
    cfg.z_inconsistent = t[1];
    if (!(cfg.z_consistent > 0.0) ||
        !(cfg.z_inconsistent >= cfg.z_consistent)) {
      config_fail("verdict_thresholds must satisfy 0 < z_consistent <= "
                  "z_inconsistent");
    }
  }
  if (j.contains("output")) cfg.output = parse_output(j.at("output"));
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) config_fail("cannot read config file: " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  ConfigJson j;
  try {
    j = ConfigJson::parse(buf.str());
  } catch (const ConfigJson::exception& e) {
    config_fail(path + ": " + e.what());
  }
  return parse_run_config(j);
}

// Canonical echo of the effective configuration (defaults materialized).
// Embedding it in every payload makes reports self-describing and pins the
// byte-identity contract to a fixed serialization.
Json config_json(const RunConfig& cfg) {
  Json j;
  Json matrix;
  matrix["P"] = ruinlab::mat_json(cfg.P);
  j["matrix"] = std::move(matrix);

  Json model;
  switch (cfg.model.mode) {
    case ruinlab::ModelMode::renewal_network: {
      model["mode"] = "renewal_network";
      model["d"] = cfg.model.d;
      model["premium_rates"] = cfg.model.premium_rates;
      Json arr;
      switch (cfg.model.interarrival.kind) {
        case ruinlab::ArrivalKind::exponential:
          arr["kind"] = "exponential";
          arr["rate"] = cfg.model.interarrival.rate;
          break;
        case ruinlab::ArrivalKind::deterministic:
          arr["kind"] = "deterministic";
          arr["delta"] = cfg.model.interarrival.delta;
          break;
        case ruinlab::ArrivalKind::gamma:
          arr["kind"] = "gamma";
          arr["shape"] = cfg.model.interarrival.shape;
          arr["rate"] = cfg.model.interarrival.rate;
          break;
      }
      model["interarrival"] = std::move(arr);
      model["routing"] = cfg.model.routing;
      break;
    }
    case ruinlab::ModelMode::cl_network:
      model["mode"] = "cl_network";
      model["d"] = cfg.model.d;
      model["premium_rates"] = cfg.model.premium_rates;
      model["lambdas"] = cfg.model.lambdas;
      break;
    case ruinlab::ModelMode::plus_minus_walk:
      model["mode"] = "plus_minus_walk";
      model["d"] = 1;
      model["q"] = cfg.model.q;
      break;
  }
  if (cfg.model.mode != ruinlab::ModelMode::plus_minus_walk) {
    Json claims = Json::array();
    for (const auto& cd : cfg.model.claims) {
      Json c;
      switch (cd.kind) {
        case ruinlab::ClaimKind::exponential:
          c["kind"] = "exponential";
          c["mean"] = cd.mean_param;
          break;
        case ruinlab::ClaimKind::pareto:
          c["kind"] = "pareto";
          c["alpha"] = cd.alpha;
          c["xm"] = cd.xm;
          break;
        case ruinlab::ClaimKind::lognormal:
          c["kind"] = "lognormal";
          c["mu"] = cd.mu;
          c["sigma"] = cd.sigma;
          break;
        case ruinlab::ClaimKind::deterministic:
          c["kind"] = "deterministic";
          c["size"] = cd.size;
          break;
        case ruinlab::ClaimKind::two_point:
          c["kind"] = "two_point";
          c["sizes"] = std::vector<double>{cd.sizes[0], cd.sizes[1]};
          c["probs"] = std::vector<double>{cd.probs[0], cd.probs[1]};
          break;
      }
      claims.push_back(std::move(c));
    }
    model["claims"] = std::move(claims);
  }
  j["model"] = std::move(model);

  j["initial_capital"] = ruinlab::vec_json(cfg.a);
  j["horizon"] = cfg.horizon;
  j["n_paths"] = cfg.n_paths;
  j["seed"] = cfg.seed;
  j["step_cap"] = cfg.step_cap;
  j["strict_tol"] = cfg.strict_tol;
  j["kmax"] = cfg.kmax;
  j["verdict_thresholds"] =
      std::vector<double>{cfg.z_consistent, cfg.z_inconsistent};
  Json output;
  output["dir"] = cfg.output.dir;
  Json formats = Json::array();
  if (cfg.output.json) formats.push_back("json");
  if (cfg.output.csv) formats.push_back("csv");
  output["formats"] = std::move(formats);
  j["output"] = std::move(output);
  return j;
}

// ---------------------------------------------------------------------------
// Output plumbing.

void write_payload(const std::string& dir, const std::string& name,
                   const std::string& content) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path p = std::filesystem::path(dir) / name;
  ruinlab::write_text_file(p.string(), content);
}

// Volatile run facts (wall-clock time, worker count, file names) live in a
// separate file so the payload files stay byte-identical across reruns.
void write_metadata(const std::string& dir, const std::string& command,
                    int workers) {
  Json j;
  j["command"] = command;
  j["workers"] = workers;
  j["unix_time"] = static_cast<std::int64_t>(std::time(nullptr));
  write_payload(dir, "run_metadata.json", ruinlab::dump_report(j));
}

Json pfraction_json(const ruinlab::PFraction& p) {
  Json j;
  j["estimate"] = ruinlab::estimate_json(p.est);
  j["first_half_count"] = p.first_half_count;
  j["second_half_count"] = p.second_half_count;
  return j;
}

Json harvest_json(const ruinlab::LadderHarvest& h) {
  Json j;
  j["uncensored_count"] = static_cast<std::int64_t>(h.heights.size());
  j["censored_fraction"] = h.censored_fraction;
  j["horizon"] = h.horizon;
  j["n_paths"] = h.n_paths;
  return j;
}

std::string model_label(const ruinlab::ModelConfig& mc) {
  std::string mode;
  switch (mc.mode) {
    case ruinlab::ModelMode::renewal_network: mode = "renewal_network"; break;
    case ruinlab::ModelMode::cl_network: mode = "cl_network"; break;
    case ruinlab::ModelMode::plus_minus_walk: mode = "plus_minus_walk"; break;
  }
  return mode + "_d" + std::to_string(mc.d);
}

// ---------------------------------------------------------------------------
// Subcommands.

int cmd_validate(const std::string& config_path, bool strict) {
  const RunConfig cfg = load_config(config_path);
  const ruinlab::ReflectionMatrix rm = ruinlab::build_reflection(cfg.P);
  const ruinlab::BuiltModel built =
      ruinlab::build_model(cfg.model, rm, strict);
  Json doc;
  doc["config"] = config_json(cfg);
  doc["matrix"] = ruinlab::matrix_summary_json(rm);
  doc["hypotheses"] = ruinlab::hypothesis_report_json(built.report);
  std::cout << ruinlab::dump_report(doc);
  return 0;
}

int cmd_simulate_path(const std::string& config_path,
                      std::optional<std::int64_t> n_override,
                      std::optional<std::uint64_t> seed_override,
                      std::optional<std::string> dump_override) {
  const RunConfig cfg = load_config(config_path);
  const ruinlab::ReflectionMatrix rm = ruinlab::build_reflection(cfg.P);
  const ruinlab::BuiltModel built = ruinlab::build_model(cfg.model, rm, false);

  const std::int64_t n = n_override.value_or(cfg.horizon);
  if (n < 1) config_fail("--n must be at least 1");
  const std::uint64_t seed = seed_override.value_or(cfg.seed);

  ruinlab::RngStream stream =
      ruinlab::derive_stream(seed, ruinlab::StreamPurpose::free_walk, 0);
  std::vector<Vec> u;
  u.reserve(static_cast<std::size_t>(n));
  for (std::int64_t k = 0; k < n; ++k) {
    u.push_back(built.model.sample_increment(stream));
  }

  const ruinlab::SpPath primal = ruinlab::solve_sp(cfg.a, u, rm);
  const ruinlab::StoragePath dual =
      ruinlab::solve_storage(ruinlab::reverse_inputs(u, rm), rm);
  const ruinlab::DualityVerdict verdict =
      ruinlab::duality_verdict(cfg.a, u, rm, cfg.strict_tol);

  Json doc;
  doc["config"] = config_json(cfg);
  doc["horizon"] = n;
  doc["seed"] = seed;
  doc["initial_capital"] = ruinlab::vec_json(cfg.a);
  doc["verdict"] = ruinlab::duality_verdict_json(verdict);

  const std::string dir = dump_override.value_or(cfg.output.dir);
  write_payload(dir, "primal_path.csv", ruinlab::primal_path_csv(primal, rm.d));
  write_payload(dir, "dual_path.csv", ruinlab::dual_path_csv(dual, rm.d));
  write_payload(dir, "duality_verdict.json", ruinlab::dump_report(doc));
  write_metadata(dir, "simulate-path", 1);

  std::cout << ruinlab::dump_report(doc);
  return verdict.pass() ? 0 : 2;
}

int cmd_duality_check(const std::string& config_path, std::int64_t instances,
                      int dmax, int nmax, int workers) {
  const RunConfig cfg = load_config(config_path);
  if (instances < 0) config_fail("--instances must be nonnegative");
  if (dmax < 1 || nmax < 1) config_fail("--dmax and --nmax must be >= 1");

  const ruinlab::CorpusResult res =
      ruinlab::run_duality_corpus(instances, cfg.seed, dmax, nmax, workers);
  Json doc = ruinlab::corpus_result_json(res);

  if (cfg.output.json) {
    write_payload(cfg.output.dir, "duality_check.json",
                  ruinlab::dump_report(doc));
    write_metadata(cfg.output.dir, "duality-check", workers);
  }

  std::cout << "instances: " << res.instances << "\n";
  std::cout << "failures: " << res.failures << "\n";
  std::cout << "converse_gaps: " << res.converse_gaps << "\n";
  if (res.failures > 0) {
    std::cout << ruinlab::dump_report(doc);
    return 2;
  }
  return 0;
}

std::vector<double> parse_sweep_spec(const std::string& spec) {
  double start = 0.0, stop = 0.0, step = 0.0;
  char colon1 = 0, colon2 = 0;
  std::istringstream in(spec);
  in >> start >> colon1 >> stop >> colon2 >> step;
  if (!in || colon1 != ':' || colon2 != ':' || !(step > 0.0) ||
      stop < start || !std::isfinite(start) || !std::isfinite(stop)) {
    config_fail("--sweep must be start:stop:step with step > 0, e.g. 0:16:2");
  }
  std::vector<double> scales;
  for (double t = start; t <= stop + 1e-12; t += step) scales.push_back(t);
  return scales;
}

int cmd_estimate(const std::string& config_path, const std::string& method,
                 const std::optional<std::string>& sweep_spec, int workers) {
  const RunConfig cfg = load_config(config_path);
  const ruinlab::ReflectionMatrix rm = ruinlab::build_reflection(cfg.P);
  const ruinlab::BuiltModel built = ruinlab::build_model(cfg.model, rm, false);
  const ruinlab::Model& model = built.model;

  const bool want_direct = method == "direct" || method == "all";
  const bool want_storage = method == "storage" || method == "all";
  const bool want_ladder = method == "ladder" || method == "all";
  if (!want_direct && !want_storage && !want_ladder) {
    config_fail("--method must be one of direct, storage, ladder, all");
  }

  ruinlab::ClaimInputs in;
  in.model_label = model_label(cfg.model);
  in.a = cfg.a;
  in.strict_tol = cfg.strict_tol;
  in.z_consistent = cfg.z_consistent;
  in.z_inconsistent = cfg.z_inconsistent;

  if (want_direct) {
    in.direct = ruinlab::estimate_ruin_direct(model, rm, cfg.a, cfg.horizon,
                                              cfg.n_paths, cfg.seed, workers,
                                              cfg.strict_tol);
    if (sweep_spec) {
      in.sweep = ruinlab::run_capital_sweep(model, rm,
                                            parse_sweep_spec(*sweep_spec),
                                            cfg.horizon, cfg.n_paths, cfg.seed,
                                            workers, cfg.strict_tol);
    }
  }

  if (want_storage) {
    in.storage = ruinlab::estimate_storage_side(model, rm, cfg.a, cfg.n_paths,
                                                cfg.seed, workers,
                                                cfg.step_cap, cfg.strict_tol);
    in.p_frac = ruinlab::estimate_p(model, rm, cfg.n_paths, cfg.seed, workers,
                                    ruinlab::StreamPurpose::p_fraction,
                                    cfg.strict_tol);
    in.deficit_diag =
        ruinlab::estimate_p(model, rm, cfg.n_paths, cfg.seed, workers,
                            ruinlab::StreamPurpose::model_diagnostics,
                            cfg.strict_tol);
    in.sigma_table = ruinlab::sigma_bd_distribution(
        model, rm, cfg.n_paths, cfg.seed, cfg.kmax, workers, cfg.strict_tol);
    const int ph_horizon =
        static_cast<int>(std::min<std::int64_t>(cfg.horizon, 10));
    in.per_horizon = ruinlab::per_horizon_identity(model, rm, cfg.a,
                                                   ph_horizon, cfg.n_paths,
                                                   cfg.seed, workers,
                                                   cfg.strict_tol);
    if (rm.d == 1) {
      std::vector<std::int64_t> horizons;
      for (std::int64_t h : {cfg.horizon / 4, cfg.horizon / 2, cfg.horizon}) {
        if (h >= 1 && (horizons.empty() || horizons.back() != h)) {
          horizons.push_back(h);
        }
      }
      in.stationary = ruinlab::stationary_diagnostic(
          model, rm, horizons, cfg.n_paths, cfg.seed, workers, cfg.strict_tol);
    }
  }

  if (want_ladder) {
    in.ladder = ruinlab::sample_ladder_pk(model, rm, cfg.a, cfg.n_paths,
                                          cfg.seed, workers, cfg.strict_tol);
    in.harvest = ruinlab::harvest_ladder_law(model, rm, cfg.n_paths,
                                             cfg.horizon, cfg.seed, workers,
                                             cfg.strict_tol);
    const std::int64_t n_ref = std::min<std::int64_t>(cfg.n_paths, 10'000);
    in.reference_deficits = ruinlab::sample_conditional_deficits(
        model, rm, n_ref, cfg.seed, workers, cfg.strict_tol);
  }

  // Closed-form anchors exist only for the one-dimensional special cases.
  if (rm.d == 1) {
    if (cfg.model.mode == ruinlab::ModelMode::plus_minus_walk) {
      in.oracle_p = cfg.model.q;
      if (cfg.a[0] == 0.0) in.oracle_ruin = ruinlab::gamblers_ruin(cfg.model.q);
    } else if (cfg.model.mode == ruinlab::ModelMode::cl_network &&
               cfg.model.claims[0].kind == ruinlab::ClaimKind::exponential) {
      const double lambda = cfg.model.lambdas[0];
      const double mu = cfg.model.claims[0].mean_param;
      const double c = cfg.model.premium_rates[0];
      if (c > lambda * mu) {
        in.oracle_ruin = ruinlab::cl_ruin_prob(lambda, mu, c, cfg.a[0]);
        in.oracle_p = ruinlab::cl_p(lambda, mu, c);
      }
    }
  }

  const ruinlab::ClaimsReport report =
      ruinlab::build_claims_report(in, model, built.report, rm);

  Json estimates;
  if (in.direct) estimates["direct"] = ruinlab::ruin_direct_json(*in.direct);
  if (in.storage) {
    estimates["storage_side"] = ruinlab::storage_side_json(*in.storage);
  }
  if (in.p_frac) estimates["increment_fraction"] = pfraction_json(*in.p_frac);
  if (in.deficit_diag) {
    estimates["full_deficit_frequency"] = pfraction_json(*in.deficit_diag);
  }
  if (in.ladder) {
    estimates["compound_geometric"] = ruinlab::ladder_json(*in.ladder);
  }
  if (in.harvest) estimates["ladder_sample"] = harvest_json(*in.harvest);
  if (in.reference_deficits) {
    Json r;
    r["count"] = static_cast<std::int64_t>(in.reference_deficits->size());
    estimates["reference_deficit_sample"] = std::move(r);
  }
  if (in.oracle_ruin) estimates["oracle_ruin"] = *in.oracle_ruin;
  if (in.oracle_p) estimates["oracle_increment_fraction"] = *in.oracle_p;

  Json doc;
  doc["config"] = config_json(cfg);
  doc["matrix"] = ruinlab::matrix_summary_json(rm);
  doc["method"] = method;
  doc["estimates"] = std::move(estimates);
  doc["claims"] = ruinlab::claims_report_json(report);

  if (cfg.output.json) {
    write_payload(cfg.output.dir, "estimate.json", ruinlab::dump_report(doc));
  }
  if (cfg.output.csv) {
    if (in.per_horizon) {
      write_payload(cfg.output.dir, "per_horizon.csv",
                    ruinlab::per_horizon_csv(*in.per_horizon));
    }
    if (in.sigma_table) {
      write_payload(cfg.output.dir, "sigma_table.csv",
                    ruinlab::sigma_table_csv(*in.sigma_table));
    }
    if (in.sweep) {
      write_payload(cfg.output.dir, "sweep.csv",
                    ruinlab::sweep_csv(*in.sweep));
    }
  }
  if (cfg.output.json || cfg.output.csv) {
    write_metadata(cfg.output.dir, "estimate", workers);
  }

  std::cout << ruinlab::dump_report(doc);

  // The per-horizon reversal identity is exact, so a statistically decisive
  // discrepancy indicates an implementation bug, not an interesting finding.
  // For d = 1 the bare storage event itself is exact and gets the same gate.
  if (in.per_horizon) {
    for (const auto& row : in.per_horizon->rows) {
      if (std::abs(row.z) >= cfg.z_inconsistent) return 3;
      if (rm.d == 1 && std::abs(row.z_storage) >= cfg.z_inconsistent) {
        return 3;
      }
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Laboratory for regulated random walks in the nonnegative orthant: "
      "pathwise duality checks and cross-checked ruin estimators"};
  app.require_subcommand(1);

  std::string validate_config;
  bool validate_strict = false;
  CLI::App* validate =
      app.add_subcommand("validate",
                         "Validate a config; print the interaction-matrix "
                         "summary and hypothesis report");
  validate->add_option("config", validate_config, "Path to the JSON config")
      ->required();
  validate->add_flag("--strict", validate_strict,
                     "Also fail on net-profit or boundedness violations");

  std::string sim_config;
  std::int64_t sim_n = -1;
  std::int64_t sim_seed = -1;
  std::string sim_dump;
  CLI::App* simulate =
      app.add_subcommand("simulate-path",
                         "Sample one path, solve both walks, and judge the "
                         "pathwise equivalences");
  simulate->add_option("config", sim_config, "Path to the JSON config")
      ->required();
  simulate->add_option("--n", sim_n, "Horizon override (default: config)");
  simulate->add_option("--seed", sim_seed, "Seed override (default: config)");
  simulate->add_option("--dump", sim_dump,
                       "Output directory override (default: config)");

  std::string dc_config;
  std::int64_t dc_instances = 100'000;
  int dc_dmax = 5;
  int dc_nmax = 40;
  int dc_workers = 1;
  CLI::App* duality =
      app.add_subcommand("duality-check",
                         "Run the randomized pathwise-duality corpus");
  duality->add_option("config", dc_config, "Path to the JSON config")
      ->required();
  duality->add_option("--instances", dc_instances,
                      "Number of random instances (default 100000)");
  duality->add_option("--dmax", dc_dmax, "Maximum dimension (default 5)");
  duality->add_option("--nmax", dc_nmax, "Maximum horizon (default 40)");
  duality->add_option("--workers", dc_workers, "Worker threads (default 1)");

  std::string est_config;
  std::string est_method = "all";
  std::string est_sweep;
  int est_workers = 1;
  CLI::App* estimate =
      app.add_subcommand("estimate",
                         "Run the Monte Carlo estimator suites and emit the "
                         "claims report");
  estimate->add_option("config", est_config, "Path to the JSON config")
      ->required();
  estimate->add_option("--method", est_method,
                       "direct | storage | ladder | all (default all)");
  estimate->add_option("--sweep", est_sweep,
                       "Capital sweep start:stop:step (scales of the all-ones "
                       "vector), e.g. 0:16:2");
  estimate->add_option("--workers", est_workers,
                       "Worker threads (default 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "{\n  \"error\": {\n    \"code\": \"InvalidConfig\",\n"
              << "    \"message\": \"" << e.what() << "\"\n  }\n}\n";
    return 1;
  }

  try {
    if (validate->parsed()) {
      return cmd_validate(validate_config, validate_strict);
    }
    if (simulate->parsed()) {
      std::optional<std::int64_t> n;
      if (simulate->count("--n") > 0) n = sim_n;
      std::optional<std::uint64_t> seed;
      if (simulate->count("--seed") > 0) {
        if (sim_seed < 0) config_fail("--seed must be nonnegative");
        seed = static_cast<std::uint64_t>(sim_seed);
      }
      std::optional<std::string> dump;
      if (simulate->count("--dump") > 0) dump = sim_dump;
      return cmd_simulate_path(sim_config, n, seed, dump);
    }
    if (duality->parsed()) {
      return cmd_duality_check(dc_config, dc_instances, dc_dmax, dc_nmax,
                               dc_workers);
    }
    if (estimate->parsed()) {
      std::optional<std::string> sweep;
      if (estimate->count("--sweep") > 0) sweep = est_sweep;
      return cmd_estimate(est_config, est_method, sweep, est_workers);
    }
  } catch (const Error& e) {
    std::cerr << ruinlab::error_envelope(e);
    return 1;
  } catch (const std::exception& e) {
    const Error wrapped(ErrorCode::invalid_config, e.what());
    std::cerr << ruinlab::error_envelope(wrapped);
    return 1;
  }
  return 0;
}
