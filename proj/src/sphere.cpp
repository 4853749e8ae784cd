#include "looplab/sphere.hpp"

#include <algorithm>
#include <cmath>

#include "looplab/rng.hpp"

namespace looplab {

namespace {

double origin_disk_radius(const std::vector<Complex>& b_set) {
  if (b_set.empty()) throw std::invalid_argument("nu_B: empty set B");
  double r = 0.0;
  for (Complex p : b_set) r = std::max(r, std::abs(p));
  if (r <= 0.0) throw std::invalid_argument("nu_B: B must have nonzero extent");
  return r;
}

// Innermost loop strictly surrounding the closed disk of radius rho about the
// origin; surrounding loops of a common disk are nested, so area orders them.
std::optional<std::size_t> innermost_surrounding(const Configuration& cfg, double rho) {
  std::optional<std::size_t> best;
  double best_area = 0.0;
  for (std::size_t i = 0; i < cfg.loops.size(); ++i) {
    const LoopPath& l = cfg.loops[i];
    if (l.classify(Complex(0.0, 0.0)) != Side::Inside) continue;
    if (l.distance_to(Complex(0.0, 0.0)) <= rho) continue;
    if (!best || l.area() < best_area) {
      best = i;
      best_area = l.area();
    }
  }
  return best;
}

}  // namespace

NuBSampler::NuBSampler(const NuBParams& params)
    : params_(params), lambda_rng_(make_engine(derive_seed(params.chain.seed, 0x6e75625full))) {
  rb_ = origin_disk_radius(params.b_set);
  LatticeSpec spec = disk_lattice_spec({0.0, 0.0}, 1.0, params.disk_cells);
  lmax_ = params.lambda_max;
  lmin_ = params.lambda_min > 0.0 ? params.lambda_min : 8.0 * spec.spacing / rb_;
  if (!(lmin_ < lmax_))
    throw std::invalid_argument("NuBSampler: empty lambda window (lattice too coarse)");
  if (lmax_ * rb_ >= 1.0)
    throw std::invalid_argument("NuBSampler: lambda_max * radius(D_B) must stay inside D");
  lattice_ = std::make_shared<HexLattice>(spec);
  chain_ = std::make_unique<LoopGasSampler>(lattice_, params.chain);
}

NuBSample NuBSampler::next() {
  std::uniform_real_distribution<double> unif(std::log(lmin_), std::log(lmax_));
  long long fallbacks_at_entry = fallbacks_;
  for (;;) {
    ++draws_;
    chain_->next_state();
    Configuration cfg = chain_->extract();
    double lambda = std::exp(unif(lambda_rng_));
    auto idx = innermost_surrounding(cfg, lambda * rb_);
    if (!idx) {
      ++fallbacks_;
      bool starving = fallbacks_ - fallbacks_at_entry > params_.max_consecutive_fallbacks;
      bool rate_bad = draws_ >= 2048 && fallback_rate() > params_.max_fallback_rate;
      if (starving || rate_bad)
        throw std::runtime_error("NuBSampler: fallback rate above threshold (window too aggressive)");
      continue;
    }
    std::vector<Complex> v = cfg.loops[*idx].vertices();
    for (Complex& p : v) p /= lambda;
    NuBSample s;
    s.loop = LoopPath::make(std::move(v));
    s.lambda = lambda;
    s.fallbacks_before = fallbacks_ - fallbacks_at_entry;
    // construction postcondition: the rescaled loop surrounds D_B
    if (s.loop.classify(Complex(0.0, 0.0)) != Side::Inside ||
        s.loop.distance_to(Complex(0.0, 0.0)) <= rb_)
      throw std::logic_error("NuBSampler: emitted loop fails to surround D_B");
    for (int skip = 0; skip < params_.decorrelation_draws; ++skip) chain_->next_state();
    return s;
  }
}

ScaleRatioStats scale_ratio_stats(const NuBParams& base, int states, int crad_walks,
                                  double min_distance_cells) {
  LatticeSpec spec = disk_lattice_spec({0.0, 0.0}, 1.0, base.disk_cells);
  const double dmin = min_distance_cells * spec.spacing;
  auto lattice = std::make_shared<HexLattice>(spec);
  LoopGasSampler chain(lattice, base.chain);
  ScaleRatioStats out;
  std::uint64_t walk_seed = derive_seed(base.chain.seed, 0x77616c6bull);
  for (int i = 0; i < states; ++i) {
    chain.next_state();
    Configuration cfg = chain.extract();
    // nesting chain around the origin, outermost first
    std::vector<const LoopPath*> around;
    for (const LoopPath& l : cfg.loops)
      if (l.classify(Complex(0.0, 0.0)) == Side::Inside) around.push_back(&l);
    std::sort(around.begin(), around.end(),
              [](const LoopPath* a, const LoopPath* b) { return a->area() > b->area(); });
    out.max_depth = std::max(out.max_depth, static_cast<int>(around.size()));
    double prev_lambda = 0.0;
    for (std::size_t n = 0; n < around.size(); ++n) {
      double d = around[n]->distance_to(Complex(0.0, 0.0));
      if (d <= dmin) continue;  // lattice-atomic scales stay out of the chain
      double lambda = 1.0 / d;
      if (prev_lambda > 0.0) out.ratios.push_back(lambda / prev_lambda);
      prev_lambda = lambda;
    }
    if (!around.empty()) {
      // conformal radius of the outermost rescaled loop (i.i.d.-ish across states)
      const LoopPath* g = around.front();
      double lambda = 1.0 / g->distance_to(Complex(0.0, 0.0));
      auto est = conformal_radius(*g, Point(0.0, 0.0), static_cast<std::size_t>(crad_walks),
                                  derive_seed(walk_seed, static_cast<std::uint64_t>(i)));
      out.conformal_radii.push_back(lambda * est.value);
    }
  }
  if (!out.ratios.empty()) out.ratio_max_cdf_jump = max_cdf_jump(out.ratios);
  return out;
}

// ---------------------------------------------------------------------------
// Whole-plane probabilities

namespace {

MobiusMap pole_map(const Point& pole) {
  if (pole.at_infinity) return MobiusMap::identity();
  // z -> 1 / (z - pole)
  return MobiusMap(0.0, 1.0, 1.0, -pole.z);
}

LatticeSpec polygon_lattice_spec(const LoopPath& boundary, int cells) {
  LatticeSpec spec;
  double ext = std::max(boundary.bbox().width(), boundary.bbox().height());
  spec.spacing = ext / (std::sqrt(3.0) * cells);
  spec.mask = Domain::polygon(boundary, "nu_b-domain");
  return spec;
}

}  // namespace

MobiusMap sphere_normalization(const EventPtr& X, const SpherePlan& plan) {
  SupportSet supp = support(*X);
  if (supp.empty()) return MobiusMap::identity();
  MobiusMap h0 = plan.h ? *plan.h : pole_map(plan.pole);
  SupportSet supp0 = supp.transformed(h0);
  std::vector<Complex> b0;
  for (const auto& c : supp0.components) b0.insert(b0.end(), c.pts.begin(), c.pts.end());
  for (Complex p : plan.extra_b) {
    Point w = h0.apply(Point(p));
    if (w.at_infinity) throw std::invalid_argument("sphere_normalization: extra point at pole");
    b0.push_back(w.z);
  }
  Disk med = minimal_enclosing_disk(b0);
  if (med.radius <= 0.0)
    throw std::invalid_argument("sphere_normalization: support image has zero extent");
  return MobiusMap::scaling(1.0 / med.radius)
      .compose(MobiusMap::translation(-med.center))
      .compose(h0);
}

SphereEstimate estimate_prob_sphere(const EventPtr& X, const SpherePlan& plan) {
  SupportSet supp = support(*X);
  if (supp.empty()) {
    // support-free events are constant; evaluate on the empty configuration
    Configuration empty;
    empty.domain = Domain::unit_disk();
    SphereEstimate out;
    out.value.mean = evaluate(*X, empty) ? 1.0 : 0.0;
    out.value.stderr_ = 0.0;
    out.value.n_eff = 1.0;
    out.value.ci_lo = out.value.ci_hi = out.value.mean;
    out.value.method = "constant";
    out.h_used = MobiusMap::identity();
    return out;
  }

  MobiusMap h0 = plan.h ? *plan.h : pole_map(plan.pole);
  // Affine post-composition freedom of h: center the image support so its
  // minimal enclosing disk is exactly the unit disk about the origin. The
  // origin-centered D_B then matches the support geometry for every pole
  // choice, which keeps lattice-cutoff effects comparable across h.
  SupportSet supp0 = supp.transformed(h0);
  std::vector<Complex> b0;
  for (const auto& c : supp0.components) b0.insert(b0.end(), c.pts.begin(), c.pts.end());
  for (Complex p : plan.extra_b) {
    Point w = h0.apply(Point(p));
    if (w.at_infinity) throw std::invalid_argument("estimate_prob_sphere: extra point at pole");
    b0.push_back(w.z);
  }
  Disk med = minimal_enclosing_disk(b0);
  if (med.radius <= 0.0)
    throw std::invalid_argument("estimate_prob_sphere: support image has zero extent");
  MobiusMap h = MobiusMap::scaling(1.0 / med.radius)
                    .compose(MobiusMap::translation(-med.center))
                    .compose(h0);
  EventPtr hX = transform_event(h, *X);
  SupportSet hsupp = support(*hX);

  std::vector<Complex> b_set;
  for (Complex p : b0) b_set.push_back((p - med.center) / med.radius);

  // Outer stage: one chain on the unit-disk mask. Each draw picks a
  // log-uniform lambda; when a loop surrounds lambda*D_B, the draw contributes
  // the inner estimate of hX on the rescaled domain (nesting
  // re-randomisation). When no such loop exists -- the dominant case on a
  // lattice, where small-scale loops are cut off -- the draw contributes the
  // characteristic function of the lambda-scaled event evaluated directly on
  // the outer configuration, exactly as the re-randomisation identity keeps
  // it. Dropping those draws would estimate a conditioned quantity whose bias
  // depends on h.
  NuBParams nu = plan.nu;
  nu.b_set = b_set;
  double rb = origin_disk_radius(nu.b_set);
  LatticeSpec outer_spec = disk_lattice_spec({0.0, 0.0}, 1.0, nu.disk_cells);
  double lmax = nu.lambda_max;
  double lmin = nu.lambda_min > 0.0 ? nu.lambda_min : 8.0 * outer_spec.spacing / rb;
  if (!(lmin < lmax))
    throw std::invalid_argument("estimate_prob_sphere: empty lambda window");
  auto outer_lattice = std::make_shared<const HexLattice>(outer_spec);
  LoopGasSampler chain(outer_lattice, nu.chain);
  std::mt19937_64 lambda_rng(make_engine(derive_seed(nu.chain.seed, 0x6c616d62ull)));
  std::uniform_real_distribution<double> unif(std::log(lmin), std::log(lmax));

  const int M = plan.outer_samples;
  std::vector<double> contrib(M, 0.0);
  std::vector<int> pending;               // draws needing inner estimates
  std::vector<LoopPath> pending_domain;
  long long fallbacks = 0;
  for (int i = 0; i < M; ++i) {
    chain.next_state();
    Configuration cfg = chain.extract();
    double lambda = std::exp(unif(lambda_rng));
    auto idx = innermost_surrounding(cfg, lambda * rb);
    if (!idx) {
      ++fallbacks;
      EventPtr shrunk = transform_event(MobiusMap::scaling(lambda), *hX);
      contrib[i] = evaluate(*shrunk, cfg) ? 1.0 : 0.0;
      continue;
    }
    std::vector<Complex> v = cfg.loops[*idx].vertices();
    for (Complex& p : v) p /= lambda;
    LoopPath domain_loop = LoopPath::make(std::move(v));
    if (!hsupp.strictly_inside_loop(domain_loop))
      throw std::logic_error("estimate_prob_sphere: support exits a sampled domain");
    pending.push_back(i);
    pending_domain.push_back(std::move(domain_loop));
  }

  std::vector<double> inner_se(pending.size(), 0.0);
  parallel_for(static_cast<int>(pending.size()), plan.threads, [&](int k) {
    LatticeSpec spec = polygon_lattice_spec(pending_domain[k], plan.inner_cells);
    SamplerParams p = nu.chain;
    p.seed = derive_seed(nu.chain.seed, 0x696e6e6572ull + static_cast<std::uint64_t>(k));
    Budget b = plan.inner_budget;
    b.threads = 1;
    Estimate est = estimate_prob(hX, spec, p, b);
    contrib[pending[k]] = est.mean;
    inner_se[k] = est.stderr_;
  });

  // One chain feeds the outer draws, so the series error on the mixed
  // contributions absorbs both layers (law of total variance).
  Estimate value = series_estimate(contrib, "nested-mc");
  double mean_se2 = 0.0;
  for (double s : inner_se) mean_se2 += s * s;
  if (!inner_se.empty()) mean_se2 /= static_cast<double>(inner_se.size());

  SphereEstimate out;
  out.value = value;
  out.fallback_rate = M > 0 ? static_cast<double>(fallbacks) / M : 0.0;
  out.mean_inner_se = std::sqrt(mean_se2);
  out.outer_used = M;
  out.h_used = h;
  return out;
}

CheckReport make_check_report(const std::string& mode, const Estimate& lhs, const Estimate& rhs,
                              double sigma_gate) {
  CheckReport r;
  r.mode = mode;
  r.lhs = lhs.mean;
  r.rhs = rhs.mean;
  r.lhs_se = lhs.stderr_;
  r.rhs_se = rhs.stderr_;
  r.discrepancy = lhs.mean - rhs.mean;
  r.combined_se = std::sqrt(lhs.stderr_ * lhs.stderr_ + rhs.stderr_ * rhs.stderr_);
  r.sigmas = r.combined_se > 0.0 ? std::abs(r.discrepancy) / r.combined_se
                                 : (r.discrepancy == 0.0 ? 0.0 : INFINITY);
  r.pass = r.sigmas <= sigma_gate;
  return r;
}

LimitFit sphere_direct_series(const EventPtr& X, const MobiusMap& h,
                              const std::vector<double>& lambdas, int disk_cells,
                              const SamplerParams& params, const Budget& budget) {
  EventPtr hX = transform_event(h, *X);
  LatticeSpec spec = disk_lattice_spec({0.0, 0.0}, 1.0, disk_cells);
  std::vector<EventPtr> shrunk;
  for (double l : lambdas)
    shrunk.push_back(transform_event(MobiusMap::scaling(l), *hX));
  auto ests = estimate_probs(shrunk, spec, params, budget);
  std::vector<std::pair<double, Estimate>> pts;
  for (std::size_t i = 0; i < lambdas.size(); ++i) pts.push_back({lambdas[i], ests[i]});
  return extrapolate_limit(pts, LimitFit::Model::Linear);
}

TwoRouteReport check_two_route(const EventPtr& X, SpherePlan plan,
                               const std::vector<double>& lambdas,
                               const SamplerParams& direct_params,
                               const Budget& direct_budget) {
  MobiusMap h = sphere_normalization(X, plan);
  LimitFit direct =
      sphere_direct_series(X, h, lambdas, plan.nu.disk_cells, direct_params, direct_budget);

  // Nested decomposition pinned to each lambda: a narrow window around it.
  std::vector<std::pair<double, Estimate>> nested_pts;
  TwoRouteReport rep;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    SpherePlan p = plan;
    p.nu.lambda_min = 0.93 * lambdas[i];
    p.nu.lambda_max = 1.08 * lambdas[i];
    p.nu.chain.seed = derive_seed(plan.nu.chain.seed, 0x2217 + i);
    SphereEstimate nested = estimate_prob_sphere(X, p);
    nested_pts.push_back({lambdas[i], nested.value});
    double sig = nested.value.sigmas_from(direct.estimates[i]);
    rep.max_pointwise_sigmas = std::max(rep.max_pointwise_sigmas, sig);
  }
  LimitFit nested_fit = extrapolate_limit(nested_pts, LimitFit::Model::Linear);
  rep.direct_fit = direct;
  rep.nested_fit = nested_fit;
  // "within combined CI": two-sample 95% compatibility of the limits
  rep.agreement = make_check_report("two_route", nested_fit.limit, direct.limit, 1.96);
  return rep;
}

CheckReport check_global_invariance(const EventPtr& X, const MobiusMap& G, SpherePlan plan) {
  SphereEstimate base = estimate_prob_sphere(X, plan);
  CheckReport r;
  if (G.is_identity()) {
    // same stream by construction: the discrepancy is exactly zero
    r = make_check_report("global_invariance", base.value, base.value);
    r.detail = "identity map shares the stream";
    return r;
  }
  EventPtr GX = transform_event(G, *X);
  SphereEstimate moved = estimate_prob_sphere(GX, plan);
  r = make_check_report("global_invariance", base.value, moved.value);
  return r;
}

CheckReport check_factorization(const FactorizationInputs& in, const SpherePlan& plan) {
  double spacing = in.spacing;
  LatticeSpec spec;
  if (in.C.kind() == Domain::Kind::GeneralizedDisk) {
    BBox bb = in.C.bbox();
    spacing = spacing > 0.0 ? spacing
                            : std::max(bb.width(), bb.height()) / (std::sqrt(3.0) * in.cells);
  }
  spec.spacing = spacing;
  spec.mask = in.C;

  std::vector<std::pair<double, Estimate>> series;
  std::vector<EventPtr> shrunk;
  for (double l : in.lambdas) {
    MobiusMap flow = lambda_flow(in.z, in.zprime, l);
    shrunk.push_back(Event::conjunction({transform_event(flow, *in.X), in.Xprime}));
  }
  auto ests = estimate_probs(shrunk, spec, in.params, in.budget);
  for (std::size_t i = 0; i < in.lambdas.size(); ++i)
    series.push_back({in.lambdas[i], ests[i]});
  LimitFit fit = extrapolate_limit(series, LimitFit::Model::Linear);

  // P(X) on the sphere through its own lambda -> 0 extrapolation. Centering
  // without rescaling keeps the shrunk geometry the same size as the joint
  // series at each lambda, so the finite-scale biases cancel in the ratio.
  SupportSet supp = support(*in.X);
  std::vector<Complex> spts;
  for (const auto& c : supp.components) spts.insert(spts.end(), c.pts.begin(), c.pts.end());
  Disk med = minimal_enclosing_disk(spts);
  MobiusMap h = MobiusMap::translation(-med.center);
  SamplerParams sp = plan.nu.chain;
  sp.seed = derive_seed(plan.nu.chain.seed, 0xfac7ull);
  LimitFit px = sphere_direct_series(in.X, h, in.lambdas, plan.nu.disk_cells, sp, in.budget);
  Estimate pxp = estimate_prob(in.Xprime, spec, in.params, in.budget);
  Estimate product;
  product.mean = px.limit.mean * pxp.mean;
  product.stderr_ =
      std::sqrt(px.limit.stderr_ * px.limit.stderr_ * pxp.mean * pxp.mean +
                pxp.stderr_ * pxp.stderr_ * px.limit.mean * px.limit.mean);
  product.method = "product";
  CheckReport r = make_check_report("factorization", fit.limit, product, 1.96);
  return r;
}

CheckReport check_mirror_symmetry(const EventPtr& X, SpherePlan plan) {
  SupportSet supp = support(*X);
  Complex i_pt(0.0, 1.0), mi_pt(0.0, -1.0);
  for (const auto& c : supp.components)
    for (Complex p : c.pts)
      if (std::abs(p - i_pt) < 1e-6 || std::abs(p - mi_pt) < 1e-6)
        throw std::invalid_argument("check_mirror_symmetry: support touches +-i");

  SpherePlan left = plan;
  left.h = MobiusMap(1.0, Complex(0.0, -1.0), 1.0, Complex(0.0, 1.0));  // (z-i)/(z+i)
  left.extra_b = {i_pt};
  SphereEstimate lhs = estimate_prob_sphere(X, left);

  SpherePlan right = plan;
  right.h = MobiusMap(1.0, Complex(0.0, 1.0), 1.0, Complex(0.0, -1.0));  // (z+i)/(z-i)
  right.extra_b = {mi_pt};
  right.nu.chain.seed = derive_seed(plan.nu.chain.seed, 0x6d6972726f72ull);
  SphereEstimate rhs = estimate_prob_sphere(X, right);

  return make_check_report("mirror_symmetry", lhs.value, rhs.value);
}

}  // namespace looplab
