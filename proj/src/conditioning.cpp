#include "looplab/conditioning.hpp"

#include <algorithm>

#include "looplab/rng.hpp"

namespace looplab {

namespace {

bool loop_strictly_contains_loop(const LoopPath& outer, const LoopPath& inner) {
  if (loops_intersect(outer, inner)) return false;
  return outer.classify(inner.vertices().front()) == Side::Inside;
}

}  // namespace

ChoiceRule ChoiceRule::outermost_around(Complex p) {
  ChoiceRule r;
  r.kind = Kind::OutermostAroundPoint;
  r.point = p;
  return r;
}

ChoiceRule ChoiceRule::last_surrounding(LoopPath alpha, LoopPath beta) {
  ChoiceRule r;
  r.kind = Kind::LastSurrounding;
  r.alpha = std::move(alpha);
  r.beta = std::move(beta);
  return r;
}

std::optional<std::size_t> choose_loop(const Configuration& cfg, const ChoiceRule& rule) {
  std::optional<std::size_t> best;
  double best_area = 0.0;
  switch (rule.kind) {
    case ChoiceRule::Kind::OutermostAroundPoint:
      // Containing loops are totally ordered by nesting: outermost = largest.
      for (std::size_t i = 0; i < cfg.loops.size(); ++i) {
        if (cfg.loops[i].classify(rule.point) != Side::Inside) continue;
        if (!best || cfg.loops[i].area() > best_area) {
          best = i;
          best_area = cfg.loops[i].area();
        }
      }
      return best;
    case ChoiceRule::Kind::LastSurrounding:
      for (std::size_t i = 0; i < cfg.loops.size(); ++i) {
        const LoopPath& l = cfg.loops[i];
        if (!loops_intersect(l, *rule.alpha)) continue;
        if (!loop_strictly_contains_loop(l, *rule.beta)) continue;
        if (!best || l.area() < best_area) {  // "last" = innermost candidate
          best = i;
          best_area = l.area();
        }
      }
      return best;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Conformal restriction

RestrictionResult restriction_components(const Configuration& cfg, const Domain& B,
                                         int boundary_segments) {
  RestrictionResult res;
  res.b_boundary = B.boundary_polyline(boundary_segments);
  const LoopPath& bb = res.b_boundary;

  std::vector<std::size_t> crossing;
  std::vector<char> meets(cfg.loops.size(), 0);
  for (std::size_t i = 0; i < cfg.loops.size(); ++i) {
    const LoopPath& l = cfg.loops[i];
    if (loops_intersect(l, bb)) {
      crossing.push_back(i);
      meets[i] = 1;
    } else if (B.classify(l.vertices().front()) == Side::Inside) {
      meets[i] = 1;  // swallowed whole by B
    }
  }
  // Loops nested inside a crossing loop sit inside b_tilde as well.
  for (std::size_t i = 0; i < cfg.loops.size(); ++i) {
    if (meets[i]) continue;
    for (std::size_t c : crossing)
      if (loop_strictly_contains_loop(cfg.loops[c], cfg.loops[i])) {
        meets[i] = 1;
        break;
      }
  }
  for (std::size_t i = 0; i < cfg.loops.size(); ++i)
    if (meets[i]) res.absorbed.push_back(i);

  LoopPath cpoly = cfg.domain.boundary_polyline(std::max(boundary_segments, 128));
  BBox world = cpoly.bbox();
  world.expand(bb.bbox());
  for (std::size_t c : crossing) world.expand(cfg.loops[c].bbox());
  polyclip::Frame frame(world);

  std::vector<polyclip::IRing> region{frame.quantize_ring(cpoly)};
  try {
    region = polyclip::subtract(region, frame.quantize_ring(bb), -1);
  } catch (const polyclip::ClipDegeneracy& e) {
    throw std::invalid_argument(std::string("restriction_components: C \\ B is not simply "
                                            "connected or is degenerate: ") +
                                e.what());
  }
  for (std::size_t c : crossing)
    region = polyclip::subtract(region, frame.quantize_ring(cfg.loops[c]), static_cast<int>(c));

  std::sort(region.begin(), region.end(), [](const polyclip::IRing& a, const polyclip::IRing& b) {
    return polyclip::ring_area2(a) > polyclip::ring_area2(b);
  });
  for (const auto& ring : region)
    res.components.push_back(Domain::polygon(frame.to_world_loop(ring), "restriction-component"));
  return res;
}

// ---------------------------------------------------------------------------
// Re-randomisation

namespace {

// Fresh draw on the cells strictly inside `region`. The sub-lattice shares
// the parent's global grid (same spacing, absolute cell indexing), so loop
// coordinates match the parent exactly. Returns nullopt when the region holds
// no cell, in which case it cannot hold any loop either.
std::optional<std::vector<LoopPath>> draw_region_loops(const Domain& region, double spacing,
                                                       const SamplerParams& base,
                                                       std::uint64_t seed,
                                                       const Event* restrict_to,
                                                       long long max_reject) {
  LatticeSpec sub;
  sub.spacing = spacing;
  sub.mask = region;
  std::shared_ptr<const HexLattice> lat;
  try {
    lat = std::make_shared<HexLattice>(sub);
  } catch (const std::runtime_error&) {
    return std::nullopt;  // no active cell
  }
  SamplerParams p = base;
  p.seed = seed;
  LoopGasSampler sampler(lat, p);
  long long draws = 0;
  for (;;) {
    sampler.next_state();
    ++draws;
    Configuration inner = sampler.extract();
    if (!restrict_to || evaluate(*restrict_to, inner)) return std::move(inner.loops);
    if (draws >= max_reject)
      throw RejectionCapError("resample: restriction never satisfied within the draw cap",
                              draws);
  }
}

}  // namespace

Configuration resample_interior(const Configuration& cfg, std::size_t gamma_index,
                                double spacing, const SamplerParams& base, std::uint64_t nonce,
                                const Event* restrict_to, long long max_reject) {
  if (gamma_index >= cfg.loops.size())
    throw std::invalid_argument("resample_interior: bad loop index");
  const LoopPath& gamma = cfg.loops[gamma_index];

  Configuration out;
  out.domain = cfg.domain;
  for (std::size_t i = 0; i < cfg.loops.size(); ++i) {
    if (i == gamma_index) continue;
    if (gamma.classify(cfg.loops[i].vertices().front()) == Side::Inside) continue;
    out.loops.push_back(cfg.loops[i]);
  }
  out.loops.push_back(gamma);

  auto fresh = draw_region_loops(Domain::polygon(gamma, "interior"), spacing, base,
                                 derive_seed(base.seed, nonce), restrict_to, max_reject);
  if (fresh)
    out.loops.insert(out.loops.end(), std::make_move_iterator(fresh->begin()),
                     std::make_move_iterator(fresh->end()));
  return out;
}

Configuration resample_component(const Configuration& cfg, const Domain& component,
                                 double spacing, const SamplerParams& base,
                                 std::uint64_t nonce) {
  if (component.kind() != Domain::Kind::Polygon)
    throw std::invalid_argument("resample_component: component must be polygonal");
  const LoopPath& boundary = component.polygon_boundary();

  Configuration out;
  out.domain = cfg.domain;
  // Component boundaries from the clip pipeline carry quantization offsets of
  // order 1e-7 of the extent; loops sharing boundary arcs must be kept.
  const double keep_tol = std::max(kGeomTol, 2e-7 * boundary.bbox().diag());
  for (const LoopPath& l : cfg.loops) {
    if (boundary.classify(l.vertices().front(), keep_tol) == Side::Inside &&
        !loops_intersect(l, boundary, keep_tol))
      continue;  // inside the component: replaced below
    out.loops.push_back(l);
  }
  auto fresh = draw_region_loops(component, spacing, base, derive_seed(base.seed, nonce),
                                 nullptr, 1);
  if (fresh)
    out.loops.insert(out.loops.end(), std::make_move_iterator(fresh->begin()),
                     std::make_move_iterator(fresh->end()));
  return out;
}

// ---------------------------------------------------------------------------
// The gamma loop and its sampler

LoopPath gamma_loop(const Configuration& cfg, const LoopPath& alpha, const LoopPath& beta) {
  const Complex beta_probe = beta.vertices().front();
  if (alpha.classify(beta_probe) != Side::Inside)
    throw std::invalid_argument("gamma_loop: beta must lie inside alpha");

  std::vector<std::size_t> surrounding, blocking;
  for (std::size_t i = 0; i < cfg.loops.size(); ++i) {
    const LoopPath& l = cfg.loops[i];
    if (!loops_intersect(l, alpha)) continue;
    if (loops_intersect(l, beta))
      throw std::invalid_argument("gamma_loop: separation event violated (precondition)");
    if (l.classify(beta_probe) == Side::Inside)
      surrounding.push_back(i);
    else
      blocking.push_back(i);
  }

  BBox world = alpha.bbox();
  for (std::size_t i : surrounding) world.expand(cfg.loops[i].bbox());
  for (std::size_t i : blocking) world.expand(cfg.loops[i].bbox());
  polyclip::Frame frame(world);

  std::vector<polyclip::IRing> region{frame.quantize_ring(alpha)};
  for (std::size_t i : surrounding)
    region = polyclip::intersect(region, frame.quantize_ring(cfg.loops[i]),
                                 static_cast<int>(i));
  for (std::size_t i : blocking)
    region = polyclip::subtract(region, frame.quantize_ring(cfg.loops[i]),
                                static_cast<int>(i));

  polyclip::IPoint bq = frame.quantize(beta_probe);
  for (const auto& ring : region) {
    if (!polyclip::ring_contains(ring, bq)) continue;
    LoopPath gamma = frame.to_world_loop(ring);
    if (loops_intersect(gamma, beta))
      throw std::logic_error("gamma_loop: construction touched beta");
    return gamma;
  }
  throw std::logic_error("gamma_loop: no component contains beta");
}

bool loop_in_annulus(const LoopPath& gamma, const LoopPath& alpha, const LoopPath& beta,
                     double tol) {
  // Clear of beta's closed natural domain: no crossing and no vertex inside.
  if (loops_intersect(gamma, beta, tol)) return false;
  for (Complex p : gamma.vertices())
    if (beta.classify(p, tol) == Side::Inside) return false;
  // Within the closure of alpha's interior: no vertex strictly outside. Gamma
  // vertices produced by the clip pipeline sit on alpha up to the quantization
  // grid, far below the lattice scale.
  double alpha_tol = std::max(tol, 2e-7 * alpha.bbox().diag());
  for (Complex p : gamma.vertices())
    if (alpha.classify(p, alpha_tol) == Side::Outside) return false;
  return true;
}

OmegaSample omega_sample(LoopGasSampler& sampler, const LoopPath& alpha, const LoopPath& beta,
                         long long max_reject) {
  EventPtr sep = Event::separation(alpha, beta);
  for (long long draws = 1; draws <= max_reject; ++draws) {
    sampler.next_state();
    Configuration cfg = sampler.extract();
    if (!evaluate(*sep, cfg)) continue;
    OmegaSample s;
    s.gamma = gamma_loop(cfg, alpha, beta);
    s.draws = draws;
    return s;
  }
  throw RejectionCapError("omega_sample: separation event acceptance below 1/max_reject",
                          max_reject);
}

}  // namespace looplab

