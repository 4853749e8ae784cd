#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "looplab/geometry.hpp"

namespace looplab {

// Critical coupling of the O(n) loop gas on the hexagonal lattice,
// x = 1/sqrt(2 + sqrt(2 - n)), valid on the dilute branch 0 < n <= 2.
double critical_x(double n);

struct LatticeSpec {
  double spacing = 0.1;  // hexagon edge length
  Domain mask = Domain::unit_disk();
};

// Spec for a round mask with `cells_across` hexagon rows across the diameter.
LatticeSpec disk_lattice_spec(Complex center, double radius, int cells_across);

struct SamplerParams {
  double n = 1.0;
  double x = 0.0;             // <= 0 means critical_x(n)
  int sweeps = 1;             // full-lattice passes between emitted states
  int thermalization = -1;    // sweeps; negative = auto (10x measured tau of s)
  std::uint64_t seed = 1;
  // Wolff cluster flips appended to each sweep, n = 1 only. Plaquette moves
  // alone equilibrate the large-loop structure very slowly on big masks; in
  // the face-spin (Ising contour) picture a plaquette flip is a single-spin
  // flip, and cluster flips mix the slow modes.
  int cluster_per_sweep = 0;
};

// Hexagonal patch restricted to a mask. Cells fully inside the mask are
// active; edges touching the mask boundary never exist, so loops stay clear
// of the domain boundary by construction.
class HexLattice {
 public:
  struct Vertex {
    Complex pos;
    std::array<int, 3> edges{-1, -1, -1};
    int degree = 0;  // number of incident active edges
  };
  struct Edge {
    int v0 = -1, v1 = -1;
  };
  struct Face {
    std::array<int, 6> verts;
    std::array<int, 6> edges;
    Complex center;
  };

  explicit HexLattice(const LatticeSpec& spec);

  const LatticeSpec& spec() const { return spec_; }
  const std::vector<Vertex>& vertices() const { return verts_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<Face>& faces() const { return faces_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  int face_count() const { return static_cast<int>(faces_.size()); }
  // True when the active patch has enclosed inactive pockets; on such masks
  // plaquette moves span only the face-generated cycle subspace.
  bool has_holes() const { return has_holes_; }
  std::uint64_t geometry_hash() const { return geometry_hash_; }

 private:
  LatticeSpec spec_;
  std::vector<Vertex> verts_;
  std::vector<Edge> edges_;
  std::vector<Face> faces_;
  bool has_holes_ = false;
  std::uint64_t geometry_hash_ = 0;
};

// Occupied-edge state; every vertex has occupied degree 0 or 2.
struct LoopGasState {
  std::vector<std::uint8_t> occupied;
  long long s = 0;  // occupied edge count
};

Configuration extract_loops(const LoopGasState& state, const HexLattice& lat);
int count_loops(const LoopGasState& state, const HexLattice& lat);

// Metropolis chain over loop-gas states with single-plaquette XOR moves.
// Acceptance min(1, x^ds n^dl) targets the stationary weight x^s n^l; the
// plaquette XOR preserves even vertex degree identically.
class LoopGasSampler {
 public:
  LoopGasSampler(std::shared_ptr<const HexLattice> lattice, const SamplerParams& params);

  // Runs the (possibly auto-sized) thermalization stage; called lazily by
  // next_state() when not invoked explicitly.
  void thermalize();
  // Advances `sweeps` full-lattice passes and returns the current state.
  const LoopGasState& next_state();
  const LoopGasState& state() const { return state_; }
  Configuration extract() const { return extract_loops(state_, *lattice_); }

  const HexLattice& lattice() const { return *lattice_; }
  const SamplerParams& params() const { return params_; }
  double x() const { return x_; }
  long long s() const { return state_.s; }
  int loop_count() const { return count_loops(state_, *lattice_); }
  int thermalization_used() const { return therm_used_; }
  double acceptance_rate() const {
    return attempts_ ? static_cast<double>(accepts_) / static_cast<double>(attempts_) : 0.0;
  }

  void sweep();
  // Verifies the degree invariant and the cached s; throws on violation.
  void validate_state() const;

 private:
  bool attempt_flip(int face);
  int cycles_through_face(const HexLattice::Face& f);
  void apply_xor(const HexLattice::Face& f);
  void wolff_step();

  std::shared_ptr<const HexLattice> lattice_;
  SamplerParams params_;
  double x_;
  LoopGasState state_;
  std::vector<std::uint8_t> vdeg_;
  std::vector<std::uint32_t> visit_epoch_;
  std::uint32_t epoch_ = 0;
  std::mt19937_64 rng_;
  bool thermalized_ = false;
  int therm_used_ = 0;
  std::uint64_t attempts_ = 0, accepts_ = 0;
  std::array<double, 13> xpow_;  // x^(ds+6), ds in [-6,6]
  std::array<double, 13> npow_;  // n^(dl+6), dl in [-6,6]
  // face-spin representation for cluster moves (n = 1); ghost face index = F
  std::vector<std::int8_t> spin_;
  std::vector<std::array<int, 2>> edge_faces_;
  std::vector<std::vector<std::pair<int, int>>> face_nbr_;  // (face-or-ghost, edge)
  std::vector<int> cluster_stack_, cluster_members_;
  std::vector<std::uint8_t> in_cluster_;
};

// Exhaustive ground truth on tiny patches: all plaquette-reachable states
// (equivalently all even-degree edge subsets on hole-free patches) with their
// weights. Rejects patches with more than `kMaxEdges` active edges.
class PatchEnsemble {
 public:
  static constexpr int kMaxEdges = 24;

  explicit PatchEnsemble(std::shared_ptr<const HexLattice> lattice);

  struct State {
    std::uint32_t mask = 0;
    int s = 0;
    int loops = 0;
    Configuration cfg;
  };

  const std::vector<State>& states() const { return states_; }
  const HexLattice& lattice() const { return *lattice_; }

  // Exact probability of `accept` under the weight x^s n^l.
  template <typename Pred>
  double probability(Pred&& accept, double n, double x) const {
    long double num = 0.0L, den = 0.0L;
    for (const State& st : states_) {
      long double w = powl((long double)x, st.s) * powl((long double)n, st.loops);
      den += w;
      if (accept(st.cfg)) num += w;
    }
    return static_cast<double>(num / den);
  }

 private:
  std::shared_ptr<const HexLattice> lattice_;
  std::vector<State> states_;
};

}  // namespace looplab
