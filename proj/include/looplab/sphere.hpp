#pragma once

#include "looplab/conditioning.hpp"
#include "looplab/estimators.hpp"

namespace looplab {

// Sampler for the rescaled nearest-surrounding-loop law: draw a configuration
// on the unit-disk mask, draw lambda log-uniformly, pick the innermost loop
// surrounding lambda*D_B, and emit that loop scaled by 1/lambda. D_B is the
// smallest origin-centered closed disk containing B.
struct NuBParams {
  std::vector<Complex> b_set;   // B: finite extent, infinity excluded
  double lambda_min = 0.0;      // <= 0: default 8 * spacing / radius(D_B)
  double lambda_max = 0.25;
  int disk_cells = 64;          // cells across the unit-disk mask
  SamplerParams chain;          // n, x, sweeps, thermalization, seed
  // Macroscopic surrounding loops are rare in the dilute gas (the no-surround
  // probability decays with a tiny power of scale), so high fallback rates
  // are the normal operating regime, not an error. The window is declared too
  // aggressive when the long-run rate exceeds max_fallback_rate or a single
  // emission starves past max_consecutive_fallbacks draws.
  double max_fallback_rate = 0.9999;
  long long max_consecutive_fallbacks = 100000;
  // Chain states skipped after each emission. Surrounding loops persist over
  // many updates, so acceptances arrive in bursts; the gap makes emitted
  // samples usable as i.i.d. draws in KS tests.
  int decorrelation_draws = 48;
};

struct NuBSample {
  LoopPath loop;     // rescaled loop; surrounds D_B by construction
  double lambda;
  long long fallbacks_before = 0;
};

class NuBSampler {
 public:
  explicit NuBSampler(const NuBParams& params);

  double d_b_radius() const { return rb_; }
  double lambda_min() const { return lmin_; }
  double lambda_max() const { return lmax_; }
  NuBSample next();
  long long fallbacks() const { return fallbacks_; }
  long long draws() const { return draws_; }
  double fallback_rate() const {
    return draws_ ? static_cast<double>(fallbacks_) / static_cast<double>(draws_) : 0.0;
  }

 private:
  NuBParams params_;
  double rb_, lmin_, lmax_;
  std::shared_ptr<const HexLattice> lattice_;
  std::unique_ptr<LoopGasSampler> chain_;
  std::mt19937_64 lambda_rng_;
  long long fallbacks_ = 0, draws_ = 0;
};

// Distribution summaries of the nesting chain around the origin on the unit
// disk: successive scale ratios and conformal radii of the rescaled loops.
struct ScaleRatioStats {
  std::vector<double> ratios;           // lambda^(n) / lambda^(n-1), all >= 1
  std::vector<double> conformal_radii;  // of the rescaled loops, from 0
  int max_depth = 0;
  double ratio_max_cdf_jump = 1.0;      // atom detector
};

// min_distance_cells > 0 drops loops closer to the origin than that many
// spacings from the scale chain; at those scales the distances are
// lattice-atomic, so the empirical ratio CDF keeps real atoms no matter the
// sample count (the continuum no-atom statement needs scales the mesh cannot
// host).
ScaleRatioStats scale_ratio_stats(const NuBParams& base, int states, int crad_walks = 1200,
                                  double min_distance_cells = 0.0);

// Whole-plane probability by the nested construction: outer average over
// domains bounded by nu_B loops with B = h(supp X), inner lattice estimate of
// the transported event on each sampled domain. h is any global map sending
// a point outside the support to infinity; it is rescaled so that radius(D_B)
// is 1, which leaves the average unchanged (scaling covariance of nu_B).
struct SpherePlan {
  Point pole = Point::infinity();
  std::optional<MobiusMap> h;         // explicit h wins over pole
  std::vector<Complex> extra_b;       // points adjoined to B (mirror check)
  int outer_samples = 160;
  int inner_cells = 36;
  Budget inner_budget{160, 1, 1};
  NuBParams nu;                       // b_set filled from the support
  int threads = 2;
};

struct SphereEstimate {
  Estimate value;
  double fallback_rate = 0.0;
  double mean_inner_se = 0.0;
  int outer_used = 0;
  MobiusMap h_used;
};

SphereEstimate estimate_prob_sphere(const EventPtr& X, const SpherePlan& plan);

struct CheckReport {
  std::string mode;
  double lhs = 0.0, rhs = 0.0;
  double lhs_se = 0.0, rhs_se = 0.0;
  double discrepancy = 0.0;
  double combined_se = 0.0;
  double sigmas = 0.0;
  bool pass = false;
  std::string detail;
};

CheckReport make_check_report(const std::string& mode, const Estimate& lhs, const Estimate& rhs,
                              double sigma_gate = 3.0);

// The normalized global map used by the sphere construction for X: pole to
// infinity, support image centered with unit enclosing radius.
MobiusMap sphere_normalization(const EventPtr& X, const SpherePlan& plan);

// Direct shrink route: P(scale_lambda(hX)) on the unit-disk mask over a
// decreasing lambda grid, extrapolated to lambda -> 0.
LimitFit sphere_direct_series(const EventPtr& X, const MobiusMap& h,
                              const std::vector<double>& lambdas, int disk_cells,
                              const SamplerParams& params, const Budget& budget);

// Two-route comparison: the nested decomposition evaluated at each lambda of
// the grid against the direct estimates, both extrapolated to lambda -> 0.
struct TwoRouteReport {
  CheckReport agreement;        // extrapolated limits
  LimitFit direct_fit, nested_fit;
  double max_pointwise_sigmas = 0.0;
};
TwoRouteReport check_two_route(const EventPtr& X, SpherePlan plan,
                               const std::vector<double>& lambdas,
                               const SamplerParams& direct_params, const Budget& direct_budget);

// global_invariance: P(X)_C~ vs P(GX)_C~ through the sphere construction.
CheckReport check_global_invariance(const EventPtr& X, const MobiusMap& G, SpherePlan plan);

// factorization: lim_l P(flow_l X, X')_C against P(X)_sphere * P(X')_C.
struct FactorizationInputs {
  EventPtr X, Xprime;
  Point z, zprime;                 // flow endpoints: z inside C, z' outside
  Domain C = Domain::unit_disk();
  double spacing = 0.0;            // <= 0: derived from cells
  int cells = 48;
  std::vector<double> lambdas;     // decreasing grid
  SamplerParams params;
  Budget budget;
};
CheckReport check_factorization(const FactorizationInputs& in, const SpherePlan& plan);

// mirror_symmetry: both sides of the h(z) = (z-i)/(z+i) reflection identity.
CheckReport check_mirror_symmetry(const EventPtr& X, SpherePlan plan);

}  // namespace looplab
