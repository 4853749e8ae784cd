#pragma once

#include <functional>

#include "looplab/events.hpp"
#include "looplab/lattice.hpp"
#include "looplab/stats.hpp"

namespace looplab {

struct Budget {
  long long states = 2000;  // emitted states per chain
  int chains = 2;
  int threads = 2;
};

// Run manifest data emitted with every estimate.
struct RunDiagnostics {
  double n = 0.0, x = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t lattice_hash = 0;
  int sweeps = 0;
  int thermalization = 0;
  double tau_s = 0.0;
  double tau_loops = 0.0;
  double acceptance = 0.0;
  long long states = 0;
};

// Evaluates all events on one shared state stream (multi-chain, derived
// seeds). Sharing the stream makes complementarity exact and lets callers
// compare events without extra variance.
std::vector<Estimate> estimate_probs(const std::vector<EventPtr>& events,
                                     const LatticeSpec& spec, const SamplerParams& params,
                                     const Budget& budget, RunDiagnostics* diag = nullptr);

Estimate estimate_prob(const EventPtr& e, const LatticeSpec& spec, const SamplerParams& params,
                       const Budget& budget, RunDiagnostics* diag = nullptr);

enum class ConditionalMode { Ratio, Rejection };

// P(X | Xp): ratio-of-means on a shared stream (delta-method errors) or
// rejection mode (thinning the stream to Xp-states). Throws when no state
// satisfies the condition.
Estimate estimate_conditional(const EventPtr& X, const EventPtr& Xp, const LatticeSpec& spec,
                              const SamplerParams& params, const Budget& budget,
                              ConditionalMode mode = ConditionalMode::Ratio,
                              RunDiagnostics* diag = nullptr);

// Generic evaluator plumbing for experiments that need full configurations.
void stream_configurations(const LatticeSpec& spec, const SamplerParams& params,
                           const Budget& budget,
                           const std::function<void(int chain, const Configuration&)>& sink,
                           RunDiagnostics* diag = nullptr);

struct ContinuityRow {
  double eps = 0.0;
  Estimate prob;
  double delta = 0.0;     // P_n - P_0
  double delta_se = 0.0;
  double ratio = 0.0;     // delta / eps
  double ratio_se = 0.0;
};

struct ContinuityTable {
  Estimate base;
  std::vector<ContinuityRow> rows;
  bool lipschitz = false;
  double sup_ratio = 0.0;
  double sup_ratio_se = 0.0;
  LinearFit trend;  // |delta|/eps regressed on the row index (lipschitz mode)
};

// Probes P(e) under domain deformations g_n, re-masking the lattice for each
// deformed domain. eps_n = sup over the boundary of |g_n(z) - z| (maximum
// modulus: the sup over the closure is attained there).
ContinuityTable continuity_probe(const EventPtr& e, const Domain& C,
                                 const std::vector<MobiusMap>& maps, double spacing,
                                 const SamplerParams& params, const Budget& budget,
                                 bool lipschitz);

struct LimitFit {
  enum class Model { Constant, Linear, Power };
  Model model = Model::Linear;
  std::vector<double> abscissae;
  std::vector<Estimate> estimates;
  Estimate limit;
  double slope = 0.0;
  double exponent = 1.0;  // power model only
  double goodness = 0.0;  // reduced chi-square
};

// Weighted extrapolation of estimates to abscissa -> 0. Requires >= 3 points
// with strictly decreasing abscissae.
LimitFit extrapolate_limit(const std::vector<std::pair<double, Estimate>>& points,
                           LimitFit::Model model);

// Deterministic worker pool: jobs indexed 0..n-1, results slotted by index.
void parallel_for(int jobs, int threads, const std::function<void(int)>& body);

}  // namespace looplab
