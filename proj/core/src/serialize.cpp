#include "urnkit/serialize.hpp"

#include <cmath>
#include <cstdio>

#include "urnkit/errors.hpp"

namespace urnkit {

std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

json rowvec_to_json(const RowVec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json colvec_to_json(const ColVec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

bool get_positive_int(const json& j, const char* field, std::int64_t& out,
                      std::vector<std::string>& errors) {
  if (!j.contains(field)) {
    errors.push_back(std::string(field) + ": missing");
    return false;
  }
  if (!j[field].is_number_integer() || j[field].get<std::int64_t>() < 1) {
    errors.push_back(std::string(field) + ": must be a positive integer");
    return false;
  }
  out = j[field].get<std::int64_t>();
  return true;
}

std::vector<double> doubles_from_json(const json& j, const std::string& field,
                                      std::vector<std::string>& errors) {
  std::vector<double> out;
  if (!j.is_array()) {
    errors.push_back(field + ": must be an array of numbers");
    return out;
  }
  for (const auto& x : j) {
    if (!x.is_number()) {
      errors.push_back(field + ": must contain numbers only");
      return {};
    }
    out.push_back(x.get<double>());
  }
  return out;
}

}  // namespace

Matrix matrix_from_json(const json& j, const std::string& field, std::vector<std::string>& errors) {
  if (!j.is_array() || j.empty()) {
    errors.push_back(field + ": must be a nonempty array of rows");
    return Matrix();
  }
  const std::size_t rows = j.size();
  std::size_t cols = 0;
  Matrix m;
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array()) {
      errors.push_back(field + ": row " + std::to_string(r + 1) + " is not an array");
      return Matrix();
    }
    if (r == 0) {
      cols = j[r].size();
      if (cols == 0) {
        errors.push_back(field + ": empty row");
        return Matrix();
      }
      m.resize(static_cast<long>(rows), static_cast<long>(cols));
    } else if (j[r].size() != cols) {
      errors.push_back(field + ": ragged rows");
      return Matrix();
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number()) {
        errors.push_back(field + ": entry (" + std::to_string(r + 1) + "," +
                         std::to_string(c + 1) + ") is not a number");
        return Matrix();
      }
      m(static_cast<long>(r), static_cast<long>(c)) = j[r][c].get<double>();
    }
  }
  return m;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

PolicyPtr policy_from_json(const json& j, std::vector<std::string>& errors) {
  const std::size_t initial_errors = errors.size();
  if (!j.is_object()) {
    errors.push_back("policy: must be an object");
    return nullptr;
  }
  if (!j.contains("kind") || !j["kind"].is_string()) {
    errors.push_back("policy.kind: missing or not a string");
    return nullptr;
  }
  const std::string kind = j["kind"].get<std::string>();

  auto finish = [&](auto&& make) -> PolicyPtr {
    if (errors.size() != initial_errors) return nullptr;
    try {
      return make();
    } catch (const std::exception& e) {
      errors.push_back(std::string("policy: ") + e.what());
      return nullptr;
    }
  };

  if (kind == "deterministic") {
    if (!j.contains("H")) {
      errors.push_back("policy.H: missing");
      return nullptr;
    }
    Matrix h = matrix_from_json(j["H"], "policy.H", errors);
    return finish([&] { return make_deterministic(h); });
  }
  if (kind == "finite_discrete") {
    if (!j.contains("outcomes") || !j["outcomes"].is_array() || j["outcomes"].empty()) {
      errors.push_back("policy.outcomes: missing or empty");
      return nullptr;
    }
    if (!j.contains("probs")) {
      errors.push_back("policy.probs: missing");
      return nullptr;
    }
    std::vector<Matrix> outcomes;
    for (std::size_t i = 0; i < j["outcomes"].size(); ++i)
      outcomes.push_back(matrix_from_json(j["outcomes"][i],
                                          "policy.outcomes[" + std::to_string(i) + "]", errors));
    std::vector<double> probs = doubles_from_json(j["probs"], "policy.probs", errors);
    return finish([&] { return make_finite_discrete(outcomes, probs); });
  }
  if (kind == "diagonal_iid") {
    std::int64_t d = 0;
    if (!get_positive_int(j, "d", d, errors)) return nullptr;
    if (!j.contains("outcomes") || !j.contains("probs")) {
      errors.push_back("policy.outcomes/probs: missing");
      return nullptr;
    }
    std::vector<double> values = doubles_from_json(j["outcomes"], "policy.outcomes", errors);
    std::vector<double> probs = doubles_from_json(j["probs"], "policy.probs", errors);
    return finish([&] { return make_diagonal_iid(values, probs, static_cast<int>(d)); });
  }
  if (kind == "markov_add") {
    if (!j.contains("P")) {
      errors.push_back("policy.P: missing");
      return nullptr;
    }
    Matrix p = matrix_from_json(j["P"], "policy.P", errors);
    return finish([&] { return make_markov_add(p); });
  }
  if (kind == "log_zeta_diagonal") {
    std::int64_t d = 0;
    if (!get_positive_int(j, "d", d, errors)) return nullptr;
    if (!j.contains("beta") || !j["beta"].is_number()) {
      errors.push_back("policy.beta: missing or not a number");
      return nullptr;
    }
    const double beta = j["beta"].get<double>();
    return finish([&] { return make_log_zeta_diagonal(beta, static_cast<int>(d)); });
  }
  if (kind == "nonhomogeneous") {
    if (!j.contains("H")) {
      errors.push_back("policy.H: missing");
      return nullptr;
    }
    Matrix h = matrix_from_json(j["H"], "policy.H", errors);
    if (!j.contains("drift") || !j["drift"].is_object()) {
      errors.push_back("policy.drift: missing object with mode and E");
      return nullptr;
    }
    const json& dj = j["drift"];
    DriftSchedule sched;
    sched.base = h;
    if (!dj.contains("mode") || !dj["mode"].is_string()) {
      errors.push_back("policy.drift.mode: missing or not a string");
      return nullptr;
    }
    const std::string mode = dj["mode"].get<std::string>();
    if (mode == "none")
      sched.mode = DriftMode::none;
    else if (mode == "cesaro_o1")
      sched.mode = DriftMode::cesaro_o1;
    else if (mode == "summable")
      sched.mode = DriftMode::summable;
    else {
      errors.push_back("policy.drift.mode: must be one of none, cesaro_o1, summable");
      return nullptr;
    }
    if (sched.mode == DriftMode::none) {
      sched.perturbation = Matrix::Zero(h.rows(), h.cols());
    } else {
      if (!dj.contains("E")) {
        errors.push_back("policy.drift.E: missing");
        return nullptr;
      }
      sched.perturbation = matrix_from_json(dj["E"], "policy.drift.E", errors);
    }
    return finish([&] { return make_nonhomogeneous(sched); });
  }
  errors.push_back("policy.kind: unknown kind '" + kind + "'");
  return nullptr;
}

PolicyPtr policy_from_json(const json& j) {
  std::vector<std::string> errors;
  PolicyPtr p = policy_from_json(j, errors);
  if (!p) throw ConfigError(errors);
  return p;
}

json policy_to_json(const ReplacementPolicy& policy) {
  json j;
  j["kind"] = policy.kind();
  j["d"] = policy.dim();
  if (policy.has_mean()) j["mean"] = matrix_to_json(policy.limit_mean());
  return j;
}

json profile_to_json(const SpectralProfile& p) {
  json j;
  j["lambda_h"] = p.lambda_h;
  json classes = json::array();
  for (const auto& c : p.classes) {
    json cls;
    json colors = json::array();
    for (int k : c.colors) colors.push_back(k + 1);  // 1-based colors
    cls["colors"] = std::move(colors);
    cls["lambda"] = c.lambda;
    classes.push_back(std::move(cls));
  }
  j["classes"] = std::move(classes);
  j["nu1"] = p.nu1;
  json vb = json::array(), ub = json::array();
  for (const auto& v : p.v_basis) vb.push_back(rowvec_to_json(v));
  for (const auto& u : p.u_basis) ub.push_back(colvec_to_json(u));
  j["v_basis"] = std::move(vb);
  j["u_basis"] = std::move(ub);
  j["u_projection"] = matrix_to_json(p.u_projection);
  if (p.rho)
    j["rho"] = *p.rho;
  else
    j["rho"] = nullptr;
  j["nu_sec"] = p.nu_sec;
  j["irreducible"] = p.irreducible;
  return j;
}

ExperimentDoc parse_experiment_config(const json& j) {
  std::vector<std::string> errors;
  if (!j.is_object()) throw ConfigError(std::string("config: must be a JSON object"));

  ExperimentDoc doc;
  PolicyPtr policy;
  if (!j.contains("policy"))
    errors.push_back("policy: missing");
  else
    policy = policy_from_json(j["policy"], errors);

  RowVec y0;
  if (!j.contains("Y0")) {
    errors.push_back("Y0: missing");
  } else {
    std::vector<double> v = doubles_from_json(j["Y0"], "Y0", errors);
    y0 = Eigen::Map<const RowVec>(v.data(), static_cast<long>(v.size()));
    if (policy && static_cast<int>(v.size()) != policy->dim())
      errors.push_back("Y0: dimension differs from policy dimension");
  }

  std::int64_t n_max = 0;
  get_positive_int(j, "n_max", n_max, errors);

  std::int64_t replications = 1;
  if (j.contains("replications")) get_positive_int(j, "replications", replications, errors);

  std::uint64_t master_seed = 0;
  if (j.contains("master_seed")) {
    if (!j["master_seed"].is_number_unsigned() && !j["master_seed"].is_number_integer())
      errors.push_back("master_seed: must be an integer");
    else
      master_seed = j["master_seed"].get<std::uint64_t>();
  }

  RowVec fallback;
  if (j.contains("fallback_p")) {
    std::vector<double> v = doubles_from_json(j["fallback_p"], "fallback_p", errors);
    fallback = Eigen::Map<const RowVec>(v.data(), static_cast<long>(v.size()));
    if (policy && static_cast<int>(v.size()) != policy->dim())
      errors.push_back("fallback_p: dimension differs from policy dimension");
    double sum = fallback.size() ? fallback.sum() : 0.0;
    if (fallback.size() && ((fallback.array() < 0.0).any() || std::abs(sum - 1.0) > 1e-9))
      errors.push_back("fallback_p: must be a probability vector summing to 1");
  } else if (policy) {
    fallback = RowVec::Constant(policy->dim(), 1.0 / policy->dim());
  }

  std::vector<std::int64_t> checkpoints;
  if (j.contains("checkpoints") && !j["checkpoints"].is_string()) {
    if (!j["checkpoints"].is_array()) {
      errors.push_back("checkpoints: must be an array of indices or \"geometric\"");
    } else {
      for (const auto& x : j["checkpoints"]) {
        if (!x.is_number_integer()) {
          errors.push_back("checkpoints: entries must be integers");
          break;
        }
        checkpoints.push_back(x.get<std::int64_t>());
      }
      for (std::size_t i = 0; i + 1 < checkpoints.size(); ++i)
        if (checkpoints[i] >= checkpoints[i + 1]) {
          errors.push_back("checkpoints: must be strictly increasing");
          break;
        }
      if (!checkpoints.empty() && n_max > 0 && checkpoints.back() != n_max)
        errors.push_back("checkpoints: last entry must equal n_max");
      if (!checkpoints.empty() && checkpoints.front() < 1)
        errors.push_back("checkpoints: entries must be >= 1");
    }
  } else if (n_max > 0) {
    checkpoints = geometric_checkpoints(n_max);
  }

  if (j.contains("Y0") && j["Y0"].is_array() && y0.size() > 0 && !y0.allFinite())
    errors.push_back("Y0: entries must be finite");

  int threads = 0;
  if (j.contains("threads")) {
    if (!j["threads"].is_number_integer() || j["threads"].get<int>() < 0)
      errors.push_back("threads: must be a nonnegative integer");
    else
      threads = j["threads"].get<int>();
  }

  std::optional<int> nu_sec_override;
  if (j.contains("nu_sec_override")) {
    if (!j["nu_sec_override"].is_number_integer() || j["nu_sec_override"].get<int>() < 1)
      errors.push_back("nu_sec_override: must be a positive integer");
    else
      nu_sec_override = j["nu_sec_override"].get<int>();
  }

  if (!errors.empty()) throw ConfigError(errors);

  doc.config.policy = policy;
  doc.config.y0 = y0;
  doc.config.fallback_p = fallback;
  doc.config.n_max = n_max;
  doc.config.checkpoints = checkpoints;
  doc.config.replications = replications;
  doc.config.master_seed = master_seed;
  doc.config.threads = threads;
  try {
    doc.config.profile = analyze_mean_matrix(policy->limit_mean(), policy->structure(),
                                             nu_sec_override);
  } catch (const MeanUnavailableError&) {
    // Mean-divergent policies run without a spectral profile; distance
    // statistics then use a trivial single-point profile at Y0 direction.
    doc.config.profile = SpectralProfile{};
    doc.config.profile.d = policy->dim();
    doc.config.profile.lambda_h = 1.0;
    doc.config.profile.nu1 = 1;
    RowVec v = RowVec::Constant(policy->dim(), 1.0 / policy->dim());
    doc.config.profile.v_basis.push_back(v);
    doc.config.profile.u_basis.push_back(ColVec::Ones(policy->dim()));
    doc.config.profile.u_projection = Matrix::Identity(policy->dim(), policy->dim());
    doc.config.profile.irreducible = true;
  }

  // Normalized echo with all defaults made explicit.
  doc.normalized = j;
  doc.normalized["policy"] = j.at("policy");
  doc.normalized["fallback_p"] = rowvec_to_json(fallback);
  doc.normalized["checkpoints"] = checkpoints;
  doc.normalized["replications"] = replications;
  doc.normalized["master_seed"] = master_seed;
  doc.normalized["threads"] = threads;
  return doc;
}

json summary_to_json(const EnsembleSummary& s) {
  json j;
  j["replications"] = s.replications;
  j["checkpoints"] = s.checkpoint_ns;
  json per = json::array();
  for (const auto& st : s.per_checkpoint) {
    json c;
    c["n"] = st.n;
    c["mean_y_over_n"] = rowvec_to_json(st.mean_y_over_n);
    c["median_y_over_n"] = rowvec_to_json(st.median_y_over_n);
    c["mean_n_over_n"] = rowvec_to_json(st.mean_n_over_n);
    c["median_n_over_n"] = rowvec_to_json(st.median_n_over_n);
    c["mean_dist_scaled"] = st.mean_dist_scaled;
    c["mean_dist_simplex"] = st.mean_dist_simplex;
    c["q05_dist_scaled"] = st.q05_dist_scaled;
    c["q50_dist_scaled"] = st.q50_dist_scaled;
    c["q95_dist_scaled"] = st.q95_dist_scaled;
    c["q05_dist_simplex"] = st.q05_dist_simplex;
    c["q50_dist_simplex"] = st.q50_dist_simplex;
    c["q95_dist_simplex"] = st.q95_dist_simplex;
    per.push_back(std::move(c));
  }
  j["per_checkpoint"] = std::move(per);
  if (!s.varpi.empty()) {
    json v = json::array();
    for (const auto& w : s.varpi) v.push_back(rowvec_to_json(w));
    j["varpi"] = std::move(v);
  }
  if (s.rate_fit) j["rate_fit"] = rate_fit_to_json(*s.rate_fit);
  json fails = json::array();
  for (const auto& [rep, msg] : s.failures) {
    json f;
    f["replication"] = rep;
    f["error"] = msg;
    fails.push_back(std::move(f));
  }
  j["failures"] = std::move(fails);
  return j;
}

std::string summary_to_csv(const EnsembleSummary& s) {
  std::string out = "n,statistic,component,value\n";
  auto emit_vec = [&](std::int64_t n, const char* stat, const RowVec& v) {
    for (int k = 0; k < v.size(); ++k)
      out += std::to_string(n) + "," + stat + "," + std::to_string(k + 1) + "," + fmt17(v(k)) + "\n";
  };
  auto emit_scalar = [&](std::int64_t n, const char* stat, double v) {
    out += std::to_string(n) + "," + stat + ",," + fmt17(v) + "\n";
  };
  for (const auto& st : s.per_checkpoint) {
    emit_vec(st.n, "mean_y_over_n", st.mean_y_over_n);
    emit_vec(st.n, "median_y_over_n", st.median_y_over_n);
    emit_vec(st.n, "mean_n_over_n", st.mean_n_over_n);
    emit_vec(st.n, "median_n_over_n", st.median_n_over_n);
    emit_scalar(st.n, "mean_dist_scaled", st.mean_dist_scaled);
    emit_scalar(st.n, "mean_dist_simplex", st.mean_dist_simplex);
    emit_scalar(st.n, "q05_dist_scaled", st.q05_dist_scaled);
    emit_scalar(st.n, "q50_dist_scaled", st.q50_dist_scaled);
    emit_scalar(st.n, "q95_dist_scaled", st.q95_dist_scaled);
    emit_scalar(st.n, "q05_dist_simplex", st.q05_dist_simplex);
    emit_scalar(st.n, "q50_dist_simplex", st.q50_dist_simplex);
    emit_scalar(st.n, "q95_dist_simplex", st.q95_dist_simplex);
  }
  return out;
}

std::string trajectory_to_csv(const std::vector<TrajectorySnapshot>& snaps, int d,
                              bool with_diagnostics) {
  std::string out = "n";
  for (int k = 1; k <= d; ++k) out += ",Y_" + std::to_string(k);
  for (int k = 1; k <= d; ++k) out += ",N_" + std::to_string(k);
  if (with_diagnostics) {
    out += ",q";
    for (int k = 1; k <= d; ++k) out += ",s_" + std::to_string(k);
  }
  out += "\n";
  for (const auto& snap : snaps) {
    out += std::to_string(snap.n);
    for (int k = 0; k < d; ++k) out += "," + fmt17(snap.Y(k));
    for (int k = 0; k < d; ++k) out += "," + std::to_string(snap.N[static_cast<std::size_t>(k)]);
    if (with_diagnostics && snap.diag) {
      out += "," + fmt17(snap.diag->q);
      for (int k = 0; k < d; ++k) out += "," + fmt17(snap.diag->s(k));
    }
    out += "\n";
  }
  return out;
}

json embedding_report_to_json(const EmbeddingTestReport& r) {
  json j;
  j["chi2"] = r.chi2.stat;
  j["dof"] = r.chi2.dof;
  j["pvalue"] = r.chi2.pvalue;
  j["replications"] = r.reps;
  j["states"] = r.states;
  return j;
}

json atom_report_to_json(const AtomTestReport& r) {
  json j;
  j["max_multiplicity"] = r.max_multiplicity;
  j["min_value"] = r.min_value;
  j["pass"] = r.pass;
  return j;
}

json rate_fit_to_json(const RateFit& f) {
  json j;
  j["slope"] = std::isfinite(f.slope) ? json(f.slope) : json(nullptr);
  j["intercept"] = std::isfinite(f.intercept) ? json(f.intercept) : json(nullptr);
  j["expected_slope"] = f.expected_slope;
  j["residual_rms"] = f.residual_rms;
  j["degenerate"] = f.degenerate;
  return j;
}

json divergence_report_to_json(const DivergenceReport& r) {
  json j;
  j["checkpoints"] = r.ns;
  json med = json::array();
  for (const auto& v : r.median_y_over_n) med.push_back(rowvec_to_json(v));
  j["median_y_over_n"] = std::move(med);
  j["growth_ratio"] = rowvec_to_json(r.growth_ratio);
  return j;
}

json drift_verdict_to_json(const DriftVerdict& v) {
  json j;
  j["ensemble"] = summary_to_json(v.ensemble);
  json traces = json::array();
  for (std::size_t i = 0; i < v.traces.size(); ++i) {
    json t;
    t["n"] = v.ensemble.checkpoint_ns[i];
    t["cesaro"] = v.traces[i].cesaro;
    t["weighted"] = v.traces[i].weighted;
    traces.push_back(std::move(t));
  }
  j["drift_trace"] = std::move(traces);
  j["drift_regime"] = v.drift_regime;
  j["cesaro_vanishes"] = v.cesaro_vanishes;
  j["weighted_sum_finite"] = v.weighted_sum_finite;
  return j;
}

}  // namespace urnkit
