#include "looplab/estimators.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "looplab/rng.hpp"

namespace looplab {

void parallel_for(int jobs, int threads, const std::function<void(int)>& body) {
  threads = std::max(1, std::min(threads, jobs));
  if (threads == 1) {
    for (int j = 0; j < jobs; ++j) body(j);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        int j = next.fetch_add(1);
        if (j >= jobs) return;
        try {
          body(j);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

void stream_configurations(const LatticeSpec& spec, const SamplerParams& params,
                           const Budget& budget,
                           const std::function<void(int chain, const Configuration&)>& sink,
                           RunDiagnostics* diag) {
  auto lattice = std::make_shared<const HexLattice>(spec);
  const int chains = std::max(1, budget.chains);
  std::vector<std::vector<double>> s_series(chains), l_series(chains);
  std::vector<double> acc(chains, 0.0);
  std::vector<int> therm(chains, 0);

  parallel_for(chains, budget.threads, [&](int c) {
    SamplerParams p = params;
    p.seed = derive_seed(params.seed, static_cast<std::uint64_t>(c));
    LoopGasSampler sampler(lattice, p);
    s_series[c].reserve(budget.states);
    l_series[c].reserve(budget.states);
    for (long long i = 0; i < budget.states; ++i) {
      sampler.next_state();
      Configuration cfg = sampler.extract();
      s_series[c].push_back(static_cast<double>(sampler.s()));
      l_series[c].push_back(static_cast<double>(cfg.loops.size()));
      sink(c, cfg);
    }
    acc[c] = sampler.acceptance_rate();
    therm[c] = sampler.thermalization_used();
  });

  if (diag) {
    diag->n = params.n;
    diag->x = params.x > 0.0 ? params.x : critical_x(params.n);
    diag->seed = params.seed;
    diag->lattice_hash = lattice->geometry_hash();
    diag->sweeps = params.sweeps;
    diag->thermalization = therm[0];
    diag->states = budget.states * chains;
    double tau_s = 0.0, tau_l = 0.0, a = 0.0;
    for (int c = 0; c < chains; ++c) {
      tau_s += integrated_autocorr_time(s_series[c]);
      tau_l += integrated_autocorr_time(l_series[c]);
      a += acc[c];
    }
    diag->tau_s = tau_s / chains;
    diag->tau_loops = tau_l / chains;
    diag->acceptance = a / chains;
  }
}

std::vector<Estimate> estimate_probs(const std::vector<EventPtr>& events,
                                     const LatticeSpec& spec, const SamplerParams& params,
                                     const Budget& budget, RunDiagnostics* diag) {
  for (const auto& e : events) {
    SupportSet s = support(*e);
    if (!s.empty() && !s.inside_domain(spec.mask))
      throw std::invalid_argument("estimate_probs: event support exits the domain");
  }
  const int chains = std::max(1, budget.chains);
  std::vector<std::vector<std::vector<double>>> rho(
      events.size(), std::vector<std::vector<double>>(chains));
  stream_configurations(spec, params, budget,
                        [&](int c, const Configuration& cfg) {
                          for (std::size_t k = 0; k < events.size(); ++k)
                            rho[k][c].push_back(evaluate(*events[k], cfg) ? 1.0 : 0.0);
                        },
                        diag);
  std::vector<Estimate> out;
  out.reserve(events.size());
  for (std::size_t k = 0; k < events.size(); ++k) out.push_back(pooled_estimate(rho[k]));
  return out;
}

Estimate estimate_prob(const EventPtr& e, const LatticeSpec& spec, const SamplerParams& params,
                       const Budget& budget, RunDiagnostics* diag) {
  return estimate_probs({e}, spec, params, budget, diag)[0];
}

Estimate estimate_conditional(const EventPtr& X, const EventPtr& Xp, const LatticeSpec& spec,
                              const SamplerParams& params, const Budget& budget,
                              ConditionalMode mode, RunDiagnostics* diag) {
  const int chains = std::max(1, budget.chains);
  std::vector<std::vector<double>> num(chains), den(chains);
  std::vector<std::vector<double>> accepted(chains);
  stream_configurations(spec, params, budget,
                        [&](int c, const Configuration& cfg) {
                          bool xp = evaluate(*Xp, cfg);
                          bool x = xp && evaluate(*X, cfg);
                          num[c].push_back(x ? 1.0 : 0.0);
                          den[c].push_back(xp ? 1.0 : 0.0);
                          if (xp) accepted[c].push_back(x ? 1.0 : 0.0);
                        },
                        diag);
  if (mode == ConditionalMode::Ratio) return ratio_estimate(num, den);
  std::size_t total = 0;
  for (const auto& c : accepted) total += c.size();
  if (total == 0) throw std::runtime_error("estimate_conditional: zero accepted samples");
  std::vector<std::vector<double>> nonempty;
  for (auto& c : accepted)
    if (!c.empty()) nonempty.push_back(std::move(c));
  Estimate e = pooled_estimate(nonempty, "rejection");
  return e;
}

ContinuityTable continuity_probe(const EventPtr& e, const Domain& C,
                                 const std::vector<MobiusMap>& maps, double spacing,
                                 const SamplerParams& params, const Budget& budget,
                                 bool lipschitz) {
  LatticeSpec base_spec{spacing, C};
  ContinuityTable table;
  table.lipschitz = lipschitz;
  table.base = estimate_prob(e, base_spec, params, budget);

  LoopPath boundary = C.boundary_polyline(512);
  std::vector<ContinuityRow> rows(maps.size());
  for (std::size_t i = 0; i < maps.size(); ++i) {
    const MobiusMap& g = maps[i];
    double eps = 0.0;
    for (Complex z : boundary.vertices()) {
      Point w = g.apply(Point(z));
      if (w.at_infinity) throw std::invalid_argument("continuity_probe: map sends boundary to inf");
      eps = std::max(eps, std::abs(w.z - z));
    }
    Domain deformed = C.transformed(g, C.label() + "~g");
    SupportSet s = support(*e);
    if (!s.empty() && !s.inside_domain(deformed))
      throw std::invalid_argument("continuity_probe: support exits a deformed domain");
    LatticeSpec spec_n{spacing, deformed};
    ContinuityRow row;
    row.eps = eps;
    row.prob = estimate_prob(e, spec_n, params, budget);
    row.delta = row.prob.mean - table.base.mean;
    row.delta_se = std::sqrt(row.prob.stderr_ * row.prob.stderr_ +
                             table.base.stderr_ * table.base.stderr_);
    if (eps > 0.0) {
      row.ratio = row.delta / eps;
      row.ratio_se = row.delta_se / eps;
    }
    rows[i] = std::move(row);
  }
  table.rows = std::move(rows);

  if (lipschitz && table.rows.size() >= 2) {
    std::vector<double> xs, ys, se;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      if (table.rows[i].eps <= 0.0) continue;
      xs.push_back(static_cast<double>(i));
      ys.push_back(std::abs(table.rows[i].ratio));
      se.push_back(std::max(table.rows[i].ratio_se, 1e-12));
    }
    if (xs.size() >= 2) table.trend = weighted_linear_fit(xs, ys, se);
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      if (std::abs(table.rows[i].ratio) >= table.sup_ratio) {
        table.sup_ratio = std::abs(table.rows[i].ratio);
        table.sup_ratio_se = table.rows[i].ratio_se;
      }
    }
  }
  return table;
}

LimitFit extrapolate_limit(const std::vector<std::pair<double, Estimate>>& points,
                           LimitFit::Model model) {
  if (points.size() < 3)
    throw std::invalid_argument("extrapolate_limit: need at least 3 abscissae");
  for (std::size_t i = 0; i + 1 < points.size(); ++i)
    if (!(points[i].first > points[i + 1].first) || points[i + 1].first <= 0.0)
      throw std::invalid_argument(
          "extrapolate_limit: abscissae must decrease strictly toward 0");

  LimitFit fit;
  fit.model = model;
  std::vector<double> xs, ys, se;
  for (const auto& [a, est] : points) {
    fit.abscissae.push_back(a);
    fit.estimates.push_back(est);
    xs.push_back(a);
    ys.push_back(est.mean);
    se.push_back(std::max(est.stderr_, 1e-12));
  }
  const int n = static_cast<int>(xs.size());

  auto fill_limit = [&](double mean, double err, double chi2, int dof) {
    fit.limit.mean = mean;
    fit.limit.stderr_ = err;
    fit.limit.n_eff = static_cast<double>(n);
    fit.limit.ci_lo = mean - 1.959963984540054 * err;
    fit.limit.ci_hi = mean + 1.959963984540054 * err;
    fit.limit.method = "extrapolation";
    fit.goodness = dof > 0 ? chi2 / dof : 0.0;
  };

  if (model == LimitFit::Model::Constant) {
    double sw = 0.0, swy = 0.0;
    for (int i = 0; i < n; ++i) {
      double w = 1.0 / (se[i] * se[i]);
      sw += w;
      swy += w * ys[i];
    }
    double mean = swy / sw;
    double chi2 = 0.0;
    for (int i = 0; i < n; ++i) chi2 += (ys[i] - mean) * (ys[i] - mean) / (se[i] * se[i]);
    fill_limit(mean, std::sqrt(1.0 / sw), chi2, n - 1);
    return fit;
  }

  if (model == LimitFit::Model::Linear) {
    LinearFit lf = weighted_linear_fit(xs, ys, se);
    fit.slope = lf.slope;
    fill_limit(lf.intercept, lf.intercept_se, lf.chi2, lf.dof);
    return fit;
  }

  // Power model y = c + b eps^p: golden-section over p, WLS for (c, b).
  auto chi2_for = [&](double p, LinearFit* out) {
    std::vector<double> xp(n);
    for (int i = 0; i < n; ++i) xp[i] = std::pow(xs[i], p);
    LinearFit lf = weighted_linear_fit(xp, ys, se);
    if (out) *out = lf;
    return lf.chi2;
  };
  double lo = 0.25, hi = 3.0;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = hi - gr * (hi - lo), b = lo + gr * (hi - lo);
  double fa = chi2_for(a, nullptr), fb = chi2_for(b, nullptr);
  for (int it = 0; it < 60; ++it) {
    if (fa < fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - gr * (hi - lo);
      fa = chi2_for(a, nullptr);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + gr * (hi - lo);
      fb = chi2_for(b, nullptr);
    }
  }
  double p = 0.5 * (lo + hi);
  LinearFit lf;
  chi2_for(p, &lf);
  fit.exponent = p;
  fit.slope = lf.slope;
  fill_limit(lf.intercept, lf.intercept_se, lf.chi2, std::max(0, lf.dof - 1));
  return fit;
}

}  // namespace looplab
