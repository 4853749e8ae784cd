#pragma once

#include <optional>

#include "looplab/events.hpp"
#include "looplab/lattice.hpp"
#include "looplab/polyclip.hpp"

namespace looplab {

struct RejectionCapError : std::runtime_error {
  RejectionCapError(const std::string& what, long long draws_)
      : std::runtime_error(what), draws(draws_) {}
  long long draws;
};

// Loop-choice rules whose output depends only on the chosen loop and its
// exterior, so interior re-randomisation cannot change the choice.
struct ChoiceRule {
  enum class Kind { OutermostAroundPoint, LastSurrounding };
  Kind kind = Kind::OutermostAroundPoint;
  Complex point{0.0, 0.0};
  std::optional<LoopPath> alpha, beta;

  static ChoiceRule outermost_around(Complex p);
  // The loop intersecting alpha and surrounding beta with no such loop inside it.
  static ChoiceRule last_surrounding(LoopPath alpha, LoopPath beta);
};

std::optional<std::size_t> choose_loop(const Configuration& cfg, const ChoiceRule& rule);

struct RestrictionResult {
  std::vector<Domain> components;     // polygonal, pairwise disjoint, open
  std::vector<std::size_t> absorbed;  // loops meeting B or swallowed by b_tilde
  LoopPath b_boundary;                // polygon boundary used for B
};

// Components of C minus b_tilde, where b_tilde is the closure of B together
// with the interiors of all loops that meet B. Requires C \ B simply
// connected (B attached to the domain boundary); an internal B would leave an
// annular complement, which the caller must handle by other means.
RestrictionResult restriction_components(const Configuration& cfg, const Domain& B,
                                         int boundary_segments = 96);

// Replaces the loops strictly inside cfg.loops[gamma_index] by a fresh draw
// on the lattice cells strictly inside that loop, at the parent spacing so
// the sub-lattice grid aligns exactly. When restrict_to is given, draws are
// rejected until the interior configuration satisfies it (up to max_reject).
// The exterior and the chosen loop itself are untouched.
Configuration resample_interior(const Configuration& cfg, std::size_t gamma_index,
                                double spacing, const SamplerParams& base, std::uint64_t nonce,
                                const Event* restrict_to = nullptr,
                                long long max_reject = 1000000);

// Same re-randomisation for a component of an actual domain of restriction.
Configuration resample_component(const Configuration& cfg, const Domain& component,
                                 double spacing, const SamplerParams& base, std::uint64_t nonce);

// The loop bounding the beta-component of the intersection of: the interior
// of alpha, the interiors of loops that cross alpha and surround beta, and
// the exteriors of loops that cross alpha without surrounding beta.
// Precondition: the separation event between alpha and beta holds on cfg.
LoopPath gamma_loop(const Configuration& cfg, const LoopPath& alpha, const LoopPath& beta);

// True iff the loop stays inside the closed annulus between alpha and beta:
// within the closure of alpha's interior and clear of beta's closed natural
// domain (the side of beta away from alpha).
bool loop_in_annulus(const LoopPath& gamma, const LoopPath& alpha, const LoopPath& beta,
                     double tol = kGeomTol);

struct OmegaSample {
  LoopPath gamma;
  long long draws = 0;  // states consumed until acceptance
};

// Rejection sampler for the gamma-loop law: draw configurations, accept on
// the separation event, emit the gamma loop.
OmegaSample omega_sample(LoopGasSampler& sampler, const LoopPath& alpha, const LoopPath& beta,
                         long long max_reject = 1000000);

}  // namespace looplab
