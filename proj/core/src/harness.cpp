#include "urnkit/harness.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <thread>

#include "urnkit/errors.hpp"
#include "urnkit/stats.hpp"
#include "urnkit/urn.hpp"

namespace urnkit {

namespace {

void validate_config(const ExperimentConfig& c) {
  std::vector<std::string> issues;
  if (!c.policy) issues.push_back("policy: missing");
  if (c.replications < 1) issues.push_back("replications: must be >= 1");
  if (c.n_max < 1) issues.push_back("n_max: must be >= 1");
  if (c.checkpoints.empty())
    issues.push_back("checkpoints: must not be empty");
  else {
    for (std::size_t i = 1; i < c.checkpoints.size(); ++i)
      if (c.checkpoints[i] <= c.checkpoints[i - 1]) {
        issues.push_back("checkpoints: must be strictly increasing");
        break;
      }
    if (c.checkpoints.front() < 1) issues.push_back("checkpoints: first entry below 1");
    if (c.checkpoints.back() != c.n_max) issues.push_back("checkpoints: last entry must equal n_max");
  }
  if (c.policy && c.y0.size() != c.policy->dim()) issues.push_back("Y0: dimension mismatch");
  if (c.policy && c.fallback_p.size() != c.policy->dim())
    issues.push_back("fallback_p: dimension mismatch");
  if (!issues.empty()) throw ConfigError(issues);
}

// Static block partition over replication indices; exceptions are caught
// per replication inside the worker, so the ensemble always completes.
void parallel_replications(std::int64_t reps, int threads, const std::function<void(std::int64_t)>& body) {
  int n_threads = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  if (n_threads < 1) n_threads = 1;
  n_threads = static_cast<int>(std::min<std::int64_t>(n_threads, reps));
  if (n_threads == 1) {
    for (std::int64_t r = 0; r < reps; ++r) body(r);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n_threads));
  for (int t = 0; t < n_threads; ++t) {
    const std::int64_t lo = reps * t / n_threads;
    const std::int64_t hi = reps * (t + 1) / n_threads;
    pool.emplace_back([lo, hi, &body] {
      for (std::int64_t r = lo; r < hi; ++r) body(r);
    });
  }
  for (auto& th : pool) th.join();
}

struct RepResult {
  bool ok = false;
  std::string error;
  std::vector<RowVec> y_over_n;   // per checkpoint
  std::vector<RowVec> n_over_n;   // per checkpoint
  std::vector<double> dist_scaled, dist_simplex;
};

RowVec median_by_component(const std::vector<const RowVec*>& rows, int d) {
  RowVec out(d);
  std::vector<double> buf(rows.size());
  for (int k = 0; k < d; ++k) {
    for (std::size_t i = 0; i < rows.size(); ++i) buf[i] = (*rows[i])(k);
    out(k) = quantile(buf, 0.5);
  }
  return out;
}

}  // namespace

std::vector<std::int64_t> geometric_checkpoints(std::int64_t n_max, std::int64_t start) {
  if (n_max < 1) throw DomainError("geometric_checkpoints: n_max must be >= 1");
  std::vector<std::int64_t> out;
  if (start > n_max) {
    out.push_back(n_max);
    return out;
  }
  const double ratio = std::pow(10.0, 0.25);
  double x = static_cast<double>(start);
  while (true) {
    const auto n = static_cast<std::int64_t>(std::llround(x));
    if (n >= n_max) break;
    if (out.empty() || n > out.back()) out.push_back(n);
    x *= ratio;
  }
  out.push_back(n_max);
  return out;
}

EnsembleSummary run_ensemble(const ExperimentConfig& config) {
  validate_config(config);
  const int d = config.policy->dim();
  const std::size_t n_cp = config.checkpoints.size();

  std::vector<RepResult> results(static_cast<std::size_t>(config.replications));
  parallel_replications(config.replications, config.threads, [&](std::int64_t r) {
    RepResult& res = results[static_cast<std::size_t>(r)];
    try {
      UrnState state(config.y0, config.fallback_p,
                     avalanche_mix64(config.master_seed ^ static_cast<std::uint64_t>(r)));
      auto snaps = run_trajectory(state, *config.policy, config.n_max, config.checkpoints,
                                  /*with_diagnostics=*/false);
      res.y_over_n.reserve(n_cp);
      res.n_over_n.reserve(n_cp);
      for (const auto& snap : snaps) {
        const double n = static_cast<double>(snap.n);
        RowVec yn = snap.Y / n;
        RowVec nn(d);
        for (int k = 0; k < d; ++k)
          nn(k) = static_cast<double>(snap.N[static_cast<std::size_t>(k)]) / n;
        res.dist_scaled.push_back(dist_to_limit_set(yn, config.profile, config.profile.lambda_h));
        const RowVec pos = positive_part(snap.Y);
        const double pos_sum = pos.sum();
        RowVec prop = pos_sum > 0.0 ? RowVec(pos / pos_sum) : config.fallback_p;
        res.dist_simplex.push_back(dist_to_limit_set(prop, config.profile, 1.0));
        res.y_over_n.push_back(std::move(yn));
        res.n_over_n.push_back(std::move(nn));
      }
      res.ok = true;
    } catch (const std::exception& e) {
      res.ok = false;
      res.error = e.what();
    }
  });

  EnsembleSummary summary;
  summary.replications = config.replications;
  summary.checkpoint_ns = config.checkpoints;
  for (std::int64_t r = 0; r < config.replications; ++r) {
    const auto& res = results[static_cast<std::size_t>(r)];
    if (!res.ok) summary.failures.emplace_back(r, res.error);
  }

  for (std::size_t c = 0; c < n_cp; ++c) {
    CheckpointStats st;
    st.n = config.checkpoints[c];
    std::vector<const RowVec*> yrows, nrows;
    std::vector<double> dsc, dsi;
    RowVec ysum = RowVec::Zero(d), nsum = RowVec::Zero(d);
    for (const auto& res : results) {
      if (!res.ok) continue;
      yrows.push_back(&res.y_over_n[c]);
      nrows.push_back(&res.n_over_n[c]);
      ysum += res.y_over_n[c];
      nsum += res.n_over_n[c];
      dsc.push_back(res.dist_scaled[c]);
      dsi.push_back(res.dist_simplex[c]);
    }
    if (yrows.empty()) throw Error("run_ensemble: every replication failed");
    const double m = static_cast<double>(yrows.size());
    st.mean_y_over_n = ysum / m;
    st.mean_n_over_n = nsum / m;
    st.median_y_over_n = median_by_component(yrows, d);
    st.median_n_over_n = median_by_component(nrows, d);
    st.mean_dist_scaled = mean(dsc);
    st.mean_dist_simplex = mean(dsi);
    st.q05_dist_scaled = quantile(dsc, 0.05);
    st.q50_dist_scaled = quantile(dsc, 0.50);
    st.q95_dist_scaled = quantile(dsc, 0.95);
    st.q05_dist_simplex = quantile(dsi, 0.05);
    st.q50_dist_simplex = quantile(dsi, 0.50);
    st.q95_dist_simplex = quantile(dsi, 0.95);
    summary.per_checkpoint.push_back(std::move(st));
  }

  for (const auto& res : results)
    if (res.ok) summary.terminal_y_over_n.push_back(res.y_over_n.back());

  if (config.profile.nu1 >= 2) summary.varpi = varpi_samples(summary, config.profile);

  if (config.checkpoints.size() >= 6 &&
      config.checkpoints.back() >= 100 * config.checkpoints.front()) {
    summary.rate_fit = fit_rate(summary, config.profile);
  }
  return summary;
}

std::vector<RowVec> varpi_samples(const EnsembleSummary& summary, const SpectralProfile& profile) {
  if (profile.nu1 < 2)
    throw NotReducibleError("varpi_samples: profile has nu1 == 1 (irreducible limit)");
  std::vector<RowVec> out;
  out.reserve(summary.terminal_y_over_n.size());
  for (const auto& y : summary.terminal_y_over_n) {
    RowVec w(profile.nu1);
    double total = 0.0;
    for (int j = 0; j < profile.nu1; ++j) {
      w(j) = y * profile.u_basis[static_cast<std::size_t>(j)];
      total += w(j);
    }
    if (total == 0.0) throw Error("varpi_samples: zero total dominant weight");
    out.push_back(w / total);
  }
  return out;
}

AtomTestReport atom_and_positivity_test(std::span<const double> samples) {
  if (samples.size() < 500) throw DomainError("atom_and_positivity_test: need at least 500 samples");
  std::map<std::int64_t, int> counts;
  double min_value = samples[0];
  for (double x : samples) {
    min_value = std::min(min_value, x);
    counts[static_cast<std::int64_t>(std::llround(x * 1e12))] += 1;
  }
  AtomTestReport rep;
  for (const auto& [key, c] : counts) rep.max_multiplicity = std::max(rep.max_multiplicity, c);
  rep.min_value = min_value;
  rep.pass = rep.max_multiplicity <= 5 && rep.min_value > 0.0;
  return rep;
}

RateFit fit_rate(const EnsembleSummary& summary, const SpectralProfile& profile) {
  const auto& ns = summary.checkpoint_ns;
  if (ns.size() < 6 || summary.per_checkpoint.size() != ns.size())
    throw InsufficientCheckpointsError("fit_rate: needs at least 6 checkpoints");
  if (ns.back() < 100 * ns.front())
    throw InsufficientCheckpointsError("fit_rate: checkpoints must span at least two decades");

  RateFit fit;
  fit.expected_slope =
      (profile.rho && *profile.rho > 0.5 + 1e-12) ? *profile.rho - 1.0 : -0.5;

  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const double dist = summary.per_checkpoint[i].mean_dist_scaled;
    if (dist < 1e-15) {
      fit.degenerate = true;
      continue;
    }
    xs.push_back(std::log(static_cast<double>(ns[i])));
    ys.push_back(std::log(dist));
  }
  if (xs.size() < 2) {
    fit.degenerate = true;
    fit.slope = std::numeric_limits<double>::quiet_NaN();
    fit.intercept = std::numeric_limits<double>::quiet_NaN();
    return fit;
  }
  const double n = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double denom = n * sxx - sx * sx;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  double rss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    rss += r * r;
  }
  fit.residual_rms = std::sqrt(rss / n);
  return fit;
}

DivergenceReport divergence_probe(const ExperimentConfig& config) {
  if (config.checkpoints.size() < 2)
    throw DomainError("divergence_probe: needs at least two checkpoints");
  const EnsembleSummary summary = run_ensemble(config);
  DivergenceReport rep;
  rep.ns = summary.checkpoint_ns;
  for (const auto& st : summary.per_checkpoint) rep.median_y_over_n.push_back(st.median_y_over_n);
  const RowVec& first = rep.median_y_over_n.front();
  const RowVec& last = rep.median_y_over_n.back();
  rep.growth_ratio = RowVec::Zero(first.size());
  for (int k = 0; k < first.size(); ++k)
    rep.growth_ratio(k) = first(k) != 0.0 ? last(k) / first(k)
                                          : std::numeric_limits<double>::infinity();
  return rep;
}

DriftVerdict nonhomogeneous_verdict(const ExperimentConfig& config, const DriftSchedule& schedule) {
  DriftVerdict v;
  v.ensemble = run_ensemble(config);
  for (std::int64_t n : config.checkpoints) v.traces.push_back(drift_cesaro_diagnostics(schedule, n));
  switch (schedule.mode) {
    case DriftMode::none:
      v.drift_regime = "homogeneous";
      v.cesaro_vanishes = true;
      v.weighted_sum_finite = true;
      break;
    case DriftMode::summable:
      v.drift_regime = "summable";
      v.cesaro_vanishes = true;
      v.weighted_sum_finite = true;  // sum w(m)/m = sum 1/m^2 converges
      break;
    case DriftMode::cesaro_o1:
      v.drift_regime = "cesaro_only";
      v.cesaro_vanishes = true;       // (1/n) sum 1/(1+log m) ~ 1/log n -> 0
      v.weighted_sum_finite = false;  // sum 1/(m (1+log m)) diverges
      break;
  }
  return v;
}

}  // namespace urnkit
