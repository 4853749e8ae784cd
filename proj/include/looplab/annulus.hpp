#pragma once

#include "looplab/sphere.hpp"

namespace looplab {

// Doubly connected domain: the annulus C \ closure(A).
struct AnnularDomain {
  Domain C;
  Domain A;

  AnnularDomain(Domain outer, Domain inner, int check_segments = 128);
};

// Boundary displacement family (eps*u + id)(dA) over a decreasing eps grid.
// u holds one displacement vector per boundary vertex, linearly interpolated
// by the partner construction; every eps must yield a valid partner.
struct PartnerFamily {
  Domain A = Domain::unit_disk();
  std::vector<Complex> u;
  int segments = 96;
  std::vector<double> epsilons;

  EventPtr event_for(double eps) const;
  void validate() const;  // throws when any eps fails to give a partner
};

// Inward radial family, optionally modulated by 1 + amp*sin(k*theta + phi).
PartnerFamily radial_family(const Domain& A, std::vector<double> epsilons, int segments = 96,
                            double amp = 0.0, int k = 0, double phi = 0.0);

// Geometric eps grid from eps0 down to the discretization floor of 4 lattice
// spacings of boundary separation; below that the partner gap is dominated by
// the mesh.
std::vector<double> partner_eps_grid(double spacing, double eps0, int points = 4);

// Conditional estimate with the budget auto-scaled toward `target_accept`
// conditioning hits, capped at cap_states per chain.
Estimate estimate_conditional_adaptive(const EventPtr& X, const EventPtr& cond,
                                       const LatticeSpec& spec, const SamplerParams& params,
                                       long long target_accept, long long cap_states,
                                       int chains, int threads, double* acceptance = nullptr);

struct AnnulusEstimate {
  LimitFit fit;                      // conditional estimates extrapolated to eps -> 0
  std::vector<double> epsilons;
  std::vector<Estimate> conditionals;
  std::vector<double> acceptance;    // P(E(A,eps,u)) per eps
};

struct AnnulusBudget {
  long long target_accept = 600;   // conditioning hits per eps point
  long long cap_states = 40000;    // per chain
  int chains = 2;
  int threads = 2;
};

// P(X) on C \ closure(A) by the conditioned-limit definition.
AnnulusEstimate estimate_prob_annulus(const EventPtr& X, const Domain& C,
                                      const PartnerFamily& fam, double spacing,
                                      const SamplerParams& params, const AnnulusBudget& budget);

// thcr1:  conditioned limit vs the direct estimate on A (X supported in A).
CheckReport verify_thcr1(const EventPtr& X, const Domain& C, const PartnerFamily& fam,
                         double spacing, const SamplerParams& params,
                         const AnnulusBudget& budget);

// thcr2:  conditioning on the inner partner in C vs conditioning on the outer
// partner in the inverted complement of A (Mobius transport makes it bounded).
struct Thcr2Inputs {
  EventPtr X;
  Domain C = Domain::unit_disk();
  Complex a_center{0.0, 0.0};
  double a_radius = 0.3;
  std::vector<double> epsilons;
  int segments = 96;
  double spacing = 0.0;  // <= 0: cells-based
  int cells = 40;
  SamplerParams params;
  AnnulusBudget budget;
};
CheckReport verify_thcr2(const Thcr2Inputs& in);

// theopt: shrink A by the lambda flow and extrapolate the annulus estimates
// toward the plain estimate on C.
struct TheoptInputs {
  EventPtr X;
  Domain C = Domain::unit_disk();
  Domain A = Domain::disk({0.35, 0.0}, 0.22);
  Point z{0.35, 0.0};
  Point zprime = Point::infinity();
  std::vector<double> lambdas;    // decreasing
  std::vector<double> epsilons;   // per-lambda partner grid
  int segments = 96;
  double spacing = 0.0;
  int cells = 40;
  SamplerParams params;
  AnnulusBudget budget;
};
CheckReport verify_theopt(const TheoptInputs& in);

// thcr3: Mobius-image annuli carry the same probabilities.
CheckReport verify_thcr3(const EventPtr& X, const Domain& C, const PartnerFamily& fam,
                         const MobiusMap& g, double spacing, const SamplerParams& params,
                         const AnnulusBudget& budget);

// corss: the two renormalization ratios on nested domains A in B in C.
struct CorssInputs {
  Domain A = Domain::disk({0.0, 0.0}, 0.3);
  Domain B = Domain::disk({0.0, 0.0}, 0.6);
  Domain C = Domain::unit_disk();
  std::vector<double> eps_left;    // for E(A, eps, u)
  std::vector<double> eps_right;   // for E(B, eps', u')
  std::vector<double> eps_inner;   // inner limit defining P(.)_{C \ A}
  int segments = 96;
  double amp_u = 0.0, amp_uprime = 0.0;  // optional field modulations
  double spacing = 0.0;
  int cells = 44;
  SamplerParams params;
  AnnulusBudget budget;
};
struct CorssReport {
  CheckReport agreement;
  LimitFit left, right;
};
CorssReport ratio_limit_corss(const CorssInputs& in);

}  // namespace looplab
