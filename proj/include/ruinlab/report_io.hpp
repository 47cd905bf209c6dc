#pragma once

// JSON and CSV serialization.  All floating-point values are printed with
// %.17g so a value round-trips exactly; non-finite values are emitted as the
// strings "inf", "-inf", "nan".  Key order is fixed by construction
// (insertion-ordered JSON), and reports carry no timestamps, so two runs with
// the same seed produce byte-identical files.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ruinlab/claims.hpp"
#include "ruinlab/common.hpp"
#include "ruinlab/corpus.hpp"
#include "ruinlab/estimators.hpp"
#include "ruinlab/models.hpp"
#include "ruinlab/reflection.hpp"
#include "ruinlab/skorokhod.hpp"
#include "ruinlab/storage.hpp"

namespace ruinlab {

using Json = nlohmann::ordered_json;

[[nodiscard]] inline std::string format_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline void dump_json_value(const Json& j, std::string& out, int depth) {
  const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
  const std::string pad_in(static_cast<std::size_t>(depth + 1) * 2, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad_in;
        out += Json(it.key()).dump();
        out += ": ";
        dump_json_value(it.value(), out, depth + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += ",\n";
        first = false;
        out += pad_in;
        dump_json_value(v, out, depth + 1);
      }
      out += "\n" + pad + "]";
      return;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      if (std::isnan(v)) {
        out += "\"nan\"";
      } else if (std::isinf(v)) {
        out += v > 0 ? "\"inf\"" : "\"-inf\"";
      } else {
        out += format_double(v);
      }
      return;
    }
    default:
      out += j.dump();
      return;
  }
}

}  // namespace detail

[[nodiscard]] inline std::string dump_report(const Json& j) {
  std::string out;
  detail::dump_json_value(j, out, 0);
  out += "\n";
  return out;
}

inline void write_text_file(const std::string& path,
                            const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::invalid_config, "cannot open for writing: " + path);
  f << content;
  if (!f) fail(ErrorCode::invalid_config, "write failed: " + path);
}

// ---------------------------------------------------------------------------
// JSON builders.

[[nodiscard]] inline Json vec_json(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

[[nodiscard]] inline Json mat_json(const Mat& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

[[nodiscard]] inline Json estimate_json(const Estimate& e) {
  Json j;
  j["value"] = e.value;
  j["std_error"] = e.std_error;
  j["n_samples"] = e.n_samples;
  j["method"] = e.method;
  return j;
}

[[nodiscard]] inline Json matrix_summary_json(const ReflectionMatrix& rm) {
  Json j;
  j["d"] = rm.d;
  j["spectral_radius"] = rm.rho;
  j["substochastic"] = rm.substochastic;
  if (rm.h2_column) {
    j["strictly_positive_inverse_column"] = *rm.h2_column;
  } else {
    j["strictly_positive_inverse_column"] = nullptr;
  }
  j["routing"] = mat_json(rm.P);
  j["reflection"] = mat_json(rm.R);
  j["reflection_inverse"] = mat_json(rm.Rinv);
  return j;
}

[[nodiscard]] inline Json hypothesis_report_json(const HypothesisReport& h) {
  Json j;
  Json entries = Json::array();
  for (const auto& e : h.entries) {
    Json ej;
    ej["id"] = e.id;
    ej["status"] = e.status;
    ej["note"] = e.note;
    entries.push_back(std::move(ej));
  }
  j["entries"] = std::move(entries);
  j["net_profit_margins"] = vec_json(h.net_profit_margins);
  j["net_profit_ok"] = h.net_profit_ok;
  return j;
}

[[nodiscard]] inline Json notion_json(const NotionCheck& c) {
  Json j;
  j["event"] = c.lhs;
  j["step_threshold"] = c.step_form;
  j["cumulative_threshold"] = c.cumulative_form;
  j["storage_conditions"] = c.storage_conditions;
  j["certified_rhs"] = c.rhs;
  j["converse_gap"] = c.converse_gap;
  j["exact_converse"] = c.exact_converse;
  j["pass"] = c.pass();
  return j;
}

[[nodiscard]] inline Json zero_start_json(const ZeroStartCheck& c) {
  Json j;
  j["event"] = c.lhs;
  j["zero_start_rhs"] = c.rhs;
  j["converse_gap"] = c.converse_gap;
  j["exact_converse"] = c.exact_converse;
  j["shift_ok"] = c.shift_ok;
  j["shift_residual"] = c.shift_residual;
  j["pass"] = c.pass();
  return j;
}

[[nodiscard]] inline Json hitting_times_json(const HittingTimes& ht) {
  Json j;
  const auto put = [&](const char* key, const std::optional<int>& t) {
    if (t) {
      j[key] = *t;
    } else {
      j[key] = nullptr;
    }
  };
  put("boundary_contact", ht.sigma_bd);
  put("origin_contact", ht.sigma_0);
  put("strict_crossing", ht.theta_open);
  put("partial_crossing", ht.theta_gt);
  put("weak_crossing", ht.theta_geq);
  return j;
}

[[nodiscard]] inline Json duality_verdict_json(const DualityVerdict& v) {
  Json j;
  j["horizon"] = v.n;
  j["threshold"] = vec_json(v.b);
  j["full_pushing"] = notion_json(v.ss);
  j["contact_with_pushing"] = notion_json(v.s);
  j["contact"] = notion_json(v.r);
  j["zero_start_full_pushing"] = zero_start_json(v.zero_ss);
  j["zero_start_contact"] = zero_start_json(v.zero_r);
  j["start_bracket_ok"] = v.bracket_ok;
  j["start_bracket_residual"] = v.bracket_residual;
  j["value_identity_ok"] = v.value_ok;
  j["value_identity_residual"] = v.value_residual;
  j["dual_hitting_times"] = hitting_times_json(v.ht);
  j["converse_gap_any"] = v.converse_gap_any();
  j["pass"] = v.pass();
  return j;
}

[[nodiscard]] inline Json ruin_direct_json(const RuinDirect& r) {
  Json j;
  j["horizon"] = r.horizon;
  j["contact"] = estimate_json(r.ruin);
  j["contact_with_pushing"] = estimate_json(r.sruin);
  j["full_pushing"] = estimate_json(r.ssruin);
  return j;
}

[[nodiscard]] inline Json storage_side_json(const StorageSide& s) {
  Json j;
  j["estimate"] = estimate_json(s.est);
  j["censored_fraction"] = s.censored_fraction;
  j["step_cap"] = s.step_cap;
  return j;
}

[[nodiscard]] inline Json ladder_json(const LadderPk& l) {
  Json j;
  j["exceedance"] = estimate_json(l.prob);
  j["mass_at_zero"] = l.mass_at_zero;
  j["mass_at_zero_se"] = l.mass_at_zero_se;
  j["p_hat"] = estimate_json(l.p_hat);
  j["n_paths"] = l.n_paths;
  return j;
}

[[nodiscard]] inline Json sigma_table_json(const SigmaBdTable& t) {
  Json j;
  j["p_hat"] = estimate_json(t.p_hat);
  j["n_paths"] = t.n_paths;
  Json rows = Json::array();
  for (const auto& r : t.rows) {
    Json rj;
    rj["k"] = r.k;
    rj["survival"] = r.survival;
    rj["survival_se"] = r.survival_se;
    rj["geometric_ref"] = r.geometric_ref;
    rj["geometric_se"] = r.geometric_se;
    rj["z"] = r.z;
    rows.push_back(std::move(rj));
  }
  j["rows"] = std::move(rows);
  return j;
}

[[nodiscard]] inline Json per_horizon_json(const PerHorizonTable& t) {
  Json j;
  j["n_paths_per_side"] = t.n_paths_per_side;
  Json rows = Json::array();
  for (const auto& r : t.rows) {
    Json rj;
    rj["n"] = r.n;
    rj["lhs_count"] = r.lhs_count;
    rj["rhs_count"] = r.rhs_count;
    rj["storage_count"] = r.storage_count;
    rj["surviving_count"] = r.surviving_count;
    rj["lhs"] = r.lhs;
    rj["lhs_se"] = r.lhs_se;
    rj["rhs"] = r.rhs;
    rj["rhs_se"] = r.rhs_se;
    rj["z"] = r.z;
    rj["storage"] = r.storage;
    rj["storage_se"] = r.storage_se;
    rj["z_storage"] = r.z_storage;
    rj["rhs_conditional"] = r.rhs_conditional;
    rows.push_back(std::move(rj));
  }
  j["rows"] = std::move(rows);
  return j;
}

[[nodiscard]] inline Json sweep_json(const SweepTable& t) {
  Json j;
  j["n_paths"] = t.n_paths;
  j["horizon"] = t.horizon;
  Json rows = Json::array();
  for (const auto& r : t.rows) {
    Json rj;
    rj["scale"] = r.scale;
    rj["contact"] = r.ruin;
    rj["contact_with_pushing"] = r.sruin;
    rj["full_pushing"] = r.ssruin;
    rj["contact_count"] = r.ruin_count;
    rj["contact_with_pushing_count"] = r.sruin_count;
    rj["full_pushing_count"] = r.ssruin_count;
    rows.push_back(std::move(rj));
  }
  j["rows"] = std::move(rows);
  return j;
}

[[nodiscard]] inline Json stationary_json(const StationaryDiag& s) {
  Json j;
  j["n_paths"] = s.n_paths;
  Json probs = Json::array();
  for (double p : s.probs) probs.push_back(p);
  j["quantile_levels"] = std::move(probs);
  Json horizons = Json::array();
  for (std::int64_t h : s.horizons) horizons.push_back(h);
  j["horizons"] = std::move(horizons);
  Json wq = Json::array();
  for (const auto& row : s.w_quantiles) {
    Json rj = Json::array();
    for (double v : row) rj.push_back(v);
    wq.push_back(std::move(rj));
  }
  j["level_quantiles"] = std::move(wq);
  Json cq = Json::array();
  for (double v : s.cycle_quantiles) cq.push_back(v);
  j["cycle_quantiles"] = std::move(cq);
  return j;
}

[[nodiscard]] inline Json claim_entry_json(const ClaimEntry& c) {
  Json j;
  j["id"] = c.id;
  j["statement"] = c.statement;
  if (c.lhs) j["lhs"] = *c.lhs;
  if (c.rhs) j["rhs"] = *c.rhs;
  if (c.lhs_se) j["lhs_se"] = *c.lhs_se;
  if (c.rhs_se) j["rhs_se"] = *c.rhs_se;
  if (c.z) j["z"] = *c.z;
  j["verdict"] = verdict_name(c.verdict);
  j["note"] = c.note;
  return j;
}

[[nodiscard]] inline Json claims_report_json(const ClaimsReport& rep) {
  Json j;
  j["model"] = rep.model_label;
  j["hypotheses"] = hypothesis_report_json(rep.hypotheses);
  if (rep.p_hat) j["p_hat"] = estimate_json(*rep.p_hat);
  if (rep.max_abs_per_horizon_z) {
    j["max_abs_per_horizon_z"] = *rep.max_abs_per_horizon_z;
  }
  Json claims = Json::array();
  for (const auto& c : rep.claims) claims.push_back(claim_entry_json(c));
  j["claims"] = std::move(claims);
  Json tables;
  if (rep.sigma_table) tables["first_passage"] = sigma_table_json(*rep.sigma_table);
  if (rep.per_horizon) tables["per_horizon"] = per_horizon_json(*rep.per_horizon);
  if (rep.sweep) tables["capital_sweep"] = sweep_json(*rep.sweep);
  if (rep.stationary) tables["stationary"] = stationary_json(*rep.stationary);
  j["tables"] = std::move(tables);
  return j;
}

[[nodiscard]] inline Json corpus_result_json(const CorpusResult& r) {
  const auto witness = [](const std::optional<FailureWitness>& fw) -> Json {
    if (!fw) return nullptr;
    Json w;
    w["instance"] = fw->instance;
    w["d"] = fw->d;
    w["n"] = fw->n;
    w["what"] = fw->what;
    return w;
  };
  Json j;
  j["instances"] = r.instances;
  j["failures"] = r.failures;
  j["first_failure"] = witness(r.first_failure);
  j["converse_gaps"] = r.converse_gaps;
  j["first_converse_gap"] = witness(r.first_gap);
  return j;
}

[[nodiscard]] inline std::string error_envelope(const Error& e) {
  Json j;
  Json inner;
  const std::string code = error_code_name(e.code());
  std::string message = e.what();
  if (message.rfind(code + ": ", 0) == 0) {
    message.erase(0, code.size() + 2);
  }
  inner["code"] = code;
  inner["message"] = message;
  j["error"] = std::move(inner);
  return dump_report(j);
}

// ---------------------------------------------------------------------------
// CSV writers (%.17g, one header row, no trailing spaces).

namespace detail {

inline void csv_vec_header(std::string& out, const char* stem, int d) {
  for (int c = 1; c <= d; ++c) {
    out += ',';
    out += stem;
    out += '_';
    out += std::to_string(c);
  }
}

inline void csv_vec_row(std::string& out, const Vec& v) {
  for (Eigen::Index c = 0; c < v.size(); ++c) {
    out += ',';
    out += format_double(v[c]);
  }
}

inline void csv_blank_row(std::string& out, int d) {
  for (int c = 0; c < d; ++c) out += ',';
}

}  // namespace detail

[[nodiscard]] inline std::string primal_path_csv(const SpPath& path, int d) {
  std::string out = "k";
  detail::csv_vec_header(out, "u", d);
  detail::csv_vec_header(out, "z", d);
  detail::csv_vec_header(out, "dy", d);
  detail::csv_vec_header(out, "y", d);
  out += '\n';
  const int n = path.n();
  for (int k = 0; k <= n; ++k) {
    out += std::to_string(k);
    if (k == 0) {
      detail::csv_blank_row(out, d);
    } else {
      detail::csv_vec_row(out, path.u[static_cast<std::size_t>(k - 1)]);
    }
    detail::csv_vec_row(out, path.z[static_cast<std::size_t>(k)]);
    if (k == 0) {
      detail::csv_blank_row(out, d);
    } else {
      detail::csv_vec_row(out, path.dy[static_cast<std::size_t>(k - 1)]);
    }
    detail::csv_vec_row(out, path.y[static_cast<std::size_t>(k)]);
    out += '\n';
  }
  return out;
}

[[nodiscard]] inline std::string dual_path_csv(const StoragePath& path, int d) {
  std::string out = "k";
  detail::csv_vec_header(out, "uhat", d);
  detail::csv_vec_header(out, "w", d);
  detail::csv_vec_header(out, "dv", d);
  detail::csv_vec_header(out, "v", d);
  out += '\n';
  const int n = path.n();
  for (int k = 0; k <= n; ++k) {
    out += std::to_string(k);
    if (k == 0) {
      detail::csv_blank_row(out, d);
    } else {
      detail::csv_vec_row(out, path.uhat[static_cast<std::size_t>(k - 1)]);
    }
    detail::csv_vec_row(out, path.w[static_cast<std::size_t>(k)]);
    if (k == 0) {
      detail::csv_blank_row(out, d);
    } else {
      detail::csv_vec_row(out, path.dv[static_cast<std::size_t>(k - 1)]);
    }
    detail::csv_vec_row(out, path.v[static_cast<std::size_t>(k)]);
    out += '\n';
  }
  return out;
}

[[nodiscard]] inline std::string per_horizon_csv(const PerHorizonTable& t) {
  std::string out =
      "n,lhs_count,rhs_count,storage_count,surviving_count,lhs,lhs_se,rhs,"
      "rhs_se,z,storage,storage_se,z_storage,rhs_conditional\n";
  for (const auto& r : t.rows) {
    out += std::to_string(r.n);
    out += ',' + std::to_string(r.lhs_count);
    out += ',' + std::to_string(r.rhs_count);
    out += ',' + std::to_string(r.storage_count);
    out += ',' + std::to_string(r.surviving_count);
    out += ',' + format_double(r.lhs);
    out += ',' + format_double(r.lhs_se);
    out += ',' + format_double(r.rhs);
    out += ',' + format_double(r.rhs_se);
    out += ',' + format_double(r.z);
    out += ',' + format_double(r.storage);
    out += ',' + format_double(r.storage_se);
    out += ',' + format_double(r.z_storage);
    out += ',' + format_double(r.rhs_conditional);
    out += '\n';
  }
  return out;
}

[[nodiscard]] inline std::string sigma_table_csv(const SigmaBdTable& t) {
  std::string out = "k,survival,survival_se,geometric_ref,geometric_se,z\n";
  for (const auto& r : t.rows) {
    out += std::to_string(r.k);
    out += ',' + format_double(r.survival);
    out += ',' + format_double(r.survival_se);
    out += ',' + format_double(r.geometric_ref);
    out += ',' + format_double(r.geometric_se);
    out += ',' + format_double(r.z);
    out += '\n';
  }
  return out;
}

[[nodiscard]] inline std::string sweep_csv(const SweepTable& t) {
  std::string out =
      "scale,contact,contact_with_pushing,full_pushing,contact_count,"
      "contact_with_pushing_count,full_pushing_count\n";
  for (const auto& r : t.rows) {
    out += format_double(r.scale);
    out += ',' + format_double(r.ruin);
    out += ',' + format_double(r.sruin);
    out += ',' + format_double(r.ssruin);
    out += ',' + std::to_string(r.ruin_count);
    out += ',' + std::to_string(r.sruin_count);
    out += ',' + std::to_string(r.ssruin_count);
    out += '\n';
  }
  return out;
}

}  // namespace ruinlab
