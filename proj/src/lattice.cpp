#include "looplab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <unordered_set>

#include "looplab/rng.hpp"
#include "looplab/stats.hpp"

namespace looplab {

double critical_x(double n) {
  if (n <= 0.0 || n > 2.0) throw std::invalid_argument("critical_x: n must be in (0, 2]");
  return 1.0 / std::sqrt(2.0 + std::sqrt(2.0 - n));
}

LatticeSpec disk_lattice_spec(Complex center, double radius, int cells_across) {
  if (cells_across < 1) throw std::invalid_argument("disk_lattice_spec: cells_across < 1");
  LatticeSpec spec;
  // Adjacent cell centers sit sqrt(3)*spacing apart.
  spec.spacing = 2.0 * radius / (std::sqrt(3.0) * cells_across);
  spec.mask = Domain::disk(center, radius);
  return spec;
}

namespace {

// Integer half-step coordinates: vertex (u, v) sits at
// ((sqrt(3)/2) a u, (a/2) v). Hexagon centers carry even v = 3r.
struct IVec {
  long long u, v;
  bool operator<(const IVec& o) const { return u != o.u ? u < o.u : v < o.v; }
};

constexpr std::array<std::pair<int, int>, 6> kCornerOffsets = {
    {{1, 1}, {0, 2}, {-1, 1}, {-1, -1}, {0, -2}, {1, -1}}};

std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 0xcbf29ce484222325ull) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

HexLattice::HexLattice(const LatticeSpec& spec) : spec_(spec) {
  const double a = spec.spacing;
  if (a <= 0.0) throw std::invalid_argument("HexLattice: spacing must be positive");
  const double ux = std::sqrt(3.0) / 2.0 * a;
  const double vy = 0.5 * a;

  BBox box = spec.mask.bbox(256);
  const bool poly_mask = spec.mask.kind() == Domain::Kind::Polygon;
  const LoopPath* mask_poly = poly_mask ? &spec.mask.polygon_boundary() : nullptr;

  long long rmin = static_cast<long long>(std::floor(box.ymin / (3.0 * vy))) - 2;
  long long rmax = static_cast<long long>(std::ceil(box.ymax / (3.0 * vy))) + 2;
  long long umin = static_cast<long long>(std::floor(box.xmin / ux)) - 2;
  long long umax = static_cast<long long>(std::ceil(box.xmax / ux)) + 2;

  std::map<IVec, int> vid;
  std::map<std::pair<int, int>, int> eid;
  auto vertex_of = [&](IVec key) {
    auto it = vid.find(key);
    if (it != vid.end()) return it->second;
    int id = static_cast<int>(verts_.size());
    Vertex vx;
    vx.pos = Complex(ux * key.u, vy * key.v);
    verts_.push_back(vx);
    vid.emplace(key, id);
    return id;
  };
  auto edge_of = [&](int va, int vb) {
    std::pair<int, int> key = std::minmax(va, vb);
    auto it = eid.find(key);
    if (it != eid.end()) return it->second;
    int id = static_cast<int>(edges_.size());
    edges_.push_back(Edge{key.first, key.second});
    eid.emplace(key, id);
    return id;
  };

  for (long long r = rmin; r <= rmax; ++r) {
    for (long long uc = umin; uc <= umax; ++uc) {
      // Center u-coordinate has the parity of r (u = 2q + r).
      if (((uc - r) & 1LL) != 0) continue;
      const long long vc = 3 * r;
      Complex center(ux * uc, vy * vc);
      bool inside = spec.mask.classify(center) == Side::Inside;
      std::array<Complex, 6> corner_pos;
      for (int k = 0; k < 6 && inside; ++k) {
        corner_pos[k] =
            Complex(ux * (uc + kCornerOffsets[k].first), vy * (vc + kCornerOffsets[k].second));
        inside = spec.mask.classify(corner_pos[k]) == Side::Inside;
      }
      if (!inside) continue;
      if (poly_mask) {
        // Non-convex masks: reject cells whose sides cross the boundary.
        bool crossed = false;
        for (int k = 0; k < 6 && !crossed; ++k) {
          const auto& bv = mask_poly->vertices();
          const std::size_t m = bv.size();
          Complex p = corner_pos[k], q = corner_pos[(k + 1) % 6];
          BBox eb;
          eb.expand(p);
          eb.expand(q);
          if (!eb.overlaps(mask_poly->bbox(), kGeomTol)) continue;
          for (std::size_t j = 0; j < m && !crossed; ++j)
            crossed = segments_intersect(p, q, bv[j], bv[(j + 1) % m]);
        }
        if (crossed) continue;
      }
      Face f;
      f.center = center;
      for (int k = 0; k < 6; ++k)
        f.verts[k] = vertex_of(IVec{uc + kCornerOffsets[k].first, vc + kCornerOffsets[k].second});
      for (int k = 0; k < 6; ++k) f.edges[k] = edge_of(f.verts[k], f.verts[(k + 1) % 6]);
      faces_.push_back(f);
    }
  }
  if (faces_.empty())
    throw std::runtime_error("HexLattice: mask admits no active cell (non-ergodic)");

  // Keep the largest edge-connected component of faces.
  {
    std::map<std::pair<int, int>, std::vector<int>> by_edge;
    for (int fi = 0; fi < static_cast<int>(faces_.size()); ++fi)
      for (int e : faces_[fi].edges) by_edge[{e, 0}].push_back(fi);
    std::vector<int> comp(faces_.size(), -1);
    int ncomp = 0;
    for (int start = 0; start < static_cast<int>(faces_.size()); ++start) {
      if (comp[start] >= 0) continue;
      std::vector<int> stack{start};
      comp[start] = ncomp;
      while (!stack.empty()) {
        int f = stack.back();
        stack.pop_back();
        for (int e : faces_[f].edges)
          for (int g : by_edge[{e, 0}])
            if (comp[g] < 0) {
              comp[g] = ncomp;
              stack.push_back(g);
            }
      }
      ++ncomp;
    }
    if (ncomp > 1) {
      std::vector<int> count(ncomp, 0);
      for (int c : comp) ++count[c];
      int keep = static_cast<int>(std::max_element(count.begin(), count.end()) - count.begin());
      std::vector<Face> kept;
      for (int fi = 0; fi < static_cast<int>(faces_.size()); ++fi)
        if (comp[fi] == keep) kept.push_back(faces_[fi]);
      faces_ = std::move(kept);
      // Rebuild vertex/edge tables for the kept faces only.
      std::vector<Vertex> old_verts = std::move(verts_);
      verts_.clear();
      edges_.clear();
      vid.clear();
      eid.clear();
      std::map<int, int> vmap;
      for (Face& f : faces_) {
        for (int k = 0; k < 6; ++k) {
          auto it = vmap.find(f.verts[k]);
          if (it == vmap.end()) {
            int nid = static_cast<int>(verts_.size());
            Vertex vx;
            vx.pos = old_verts[f.verts[k]].pos;
            verts_.push_back(vx);
            it = vmap.emplace(f.verts[k], nid).first;
          }
          f.verts[k] = it->second;
        }
        for (int k = 0; k < 6; ++k) f.edges[k] = edge_of(f.verts[k], f.verts[(k + 1) % 6]);
      }
    }
  }

  for (int e = 0; e < static_cast<int>(edges_.size()); ++e) {
    for (int v : {edges_[e].v0, edges_[e].v1}) {
      Vertex& vx = verts_[v];
      if (vx.degree >= 3) throw std::logic_error("HexLattice: vertex degree exceeds 3");
      vx.edges[vx.degree++] = e;
    }
  }

  // Euler diagnostic: cycle-space dimension vs face count.
  long long dim = static_cast<long long>(edges_.size()) - static_cast<long long>(verts_.size()) + 1;
  has_holes_ = dim != static_cast<long long>(faces_.size());

  std::uint64_t h = fnv1a(&spec_.spacing, sizeof(spec_.spacing));
  for (const Vertex& v : verts_) {
    double xy[2] = {v.pos.real(), v.pos.imag()};
    h = fnv1a(xy, sizeof(xy), h);
  }
  std::size_t ne = edges_.size();
  geometry_hash_ = fnv1a(&ne, sizeof(ne), h);
}

// ---------------------------------------------------------------------------
// Loop extraction

Configuration extract_loops(const LoopGasState& state, const HexLattice& lat) {
  const auto& edges = lat.edges();
  const auto& verts = lat.vertices();
  std::vector<std::uint8_t> vdeg(verts.size(), 0);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (!state.occupied[e]) continue;
    ++vdeg[edges[e].v0];
    ++vdeg[edges[e].v1];
  }
  for (std::uint8_t d : vdeg)
    if (d != 0 && d != 2) throw std::runtime_error("extract_loops: corrupt state (odd degree)");

  Configuration cfg;
  cfg.domain = lat.spec().mask;
  std::vector<std::uint8_t> seen(edges.size(), 0);
  for (std::size_t e0 = 0; e0 < edges.size(); ++e0) {
    if (!state.occupied[e0] || seen[e0]) continue;
    std::vector<Complex> path;
    int edge = static_cast<int>(e0);
    int v = edges[e0].v0;
    do {
      seen[edge] = 1;
      path.push_back(verts[v].pos);
      int next = edges[edge].v0 == v ? edges[edge].v1 : edges[edge].v0;
      int out = -1;
      for (int k = 0; k < verts[next].degree; ++k) {
        int cand = verts[next].edges[k];
        if (cand != edge && state.occupied[cand]) {
          out = cand;
          break;
        }
      }
      if (out < 0) throw std::runtime_error("extract_loops: open strand (corrupt state)");
      v = next;
      edge = out;
    } while (edge != static_cast<int>(e0));
    cfg.loops.push_back(LoopPath::make(std::move(path)));
  }
  return cfg;
}

int count_loops(const LoopGasState& state, const HexLattice& lat) {
  const auto& edges = lat.edges();
  const auto& verts = lat.vertices();
  std::vector<std::uint8_t> seen(edges.size(), 0);
  int loops = 0;
  for (std::size_t e0 = 0; e0 < edges.size(); ++e0) {
    if (!state.occupied[e0] || seen[e0]) continue;
    int edge = static_cast<int>(e0);
    int v = edges[e0].v0;
    do {
      seen[edge] = 1;
      int next = edges[edge].v0 == v ? edges[edge].v1 : edges[edge].v0;
      int out = -1;
      for (int k = 0; k < verts[next].degree; ++k) {
        int cand = verts[next].edges[k];
        if (cand != edge && state.occupied[cand]) {
          out = cand;
          break;
        }
      }
      if (out < 0) throw std::runtime_error("count_loops: open strand");
      v = next;
      edge = out;
    } while (edge != static_cast<int>(e0));
    ++loops;
  }
  return loops;
}

// ---------------------------------------------------------------------------
// Sampler

LoopGasSampler::LoopGasSampler(std::shared_ptr<const HexLattice> lattice,
                               const SamplerParams& params)
    : lattice_(std::move(lattice)), params_(params), rng_(make_engine(params.seed)) {
  if (params_.n <= 0.0 || params_.n > 2.0)
    throw std::invalid_argument("LoopGasSampler: n must be in (0, 2]");
  x_ = params_.x > 0.0 ? params_.x : critical_x(params_.n);
  if (params_.sweeps < 1) params_.sweeps = 1;
  state_.occupied.assign(lattice_->edge_count(), 0);
  state_.s = 0;
  vdeg_.assign(lattice_->vertices().size(), 0);
  visit_epoch_.assign(lattice_->vertices().size(), 0);
  for (int k = 0; k <= 12; ++k) xpow_[k] = std::pow(x_, k - 6);
  for (int k = 0; k <= 12; ++k) npow_[k] = std::pow(params_.n, k - 6);

  if (params_.cluster_per_sweep > 0) {
    if (params_.n != 1.0)
      throw std::invalid_argument("LoopGasSampler: cluster moves require n = 1");
    const int F = lattice_->face_count();
    const int E = lattice_->edge_count();
    edge_faces_.assign(E, {F, F});
    for (int f = 0; f < F; ++f)
      for (int e : lattice_->faces()[f].edges) {
        if (edge_faces_[e][0] == F)
          edge_faces_[e][0] = f;
        else
          edge_faces_[e][1] = f;
      }
    face_nbr_.assign(F + 1, {});
    for (int e = 0; e < E; ++e) {
      int a = edge_faces_[e][0], b = edge_faces_[e][1];
      if (a == F) std::swap(a, b);
      int other = b;
      face_nbr_[a].push_back({other, e});
      face_nbr_[other].push_back({a, e});
    }
    spin_.assign(F + 1, 1);  // empty state: all aligned
    in_cluster_.assign(F + 1, 0);
  }
}

void LoopGasSampler::apply_xor(const HexLattice::Face& f) {
  for (int e : f.edges) {
    if (state_.occupied[e]) {
      state_.occupied[e] = 0;
      --state_.s;
      --vdeg_[lattice_->edges()[e].v0];
      --vdeg_[lattice_->edges()[e].v1];
    } else {
      state_.occupied[e] = 1;
      ++state_.s;
      ++vdeg_[lattice_->edges()[e].v0];
      ++vdeg_[lattice_->edges()[e].v1];
    }
  }
}

int LoopGasSampler::cycles_through_face(const HexLattice::Face& f) {
  ++epoch_;
  const auto& edges = lattice_->edges();
  const auto& verts = lattice_->vertices();
  int cycles = 0;
  for (int v0 : f.verts) {
    if (vdeg_[v0] != 2 || visit_epoch_[v0] == epoch_) continue;
    ++cycles;
    // Walk the cycle through v0, stamping every vertex on it.
    int edge = -1;
    for (int k = 0; k < verts[v0].degree; ++k) {
      int cand = verts[v0].edges[k];
      if (state_.occupied[cand]) {
        edge = cand;
        break;
      }
    }
    int v = v0;
    do {
      visit_epoch_[v] = epoch_;
      int next = edges[edge].v0 == v ? edges[edge].v1 : edges[edge].v0;
      int out = -1;
      for (int k = 0; k < verts[next].degree; ++k) {
        int cand = verts[next].edges[k];
        if (cand != edge && state_.occupied[cand]) {
          out = cand;
          break;
        }
      }
      v = next;
      edge = out;
    } while (v != v0);
  }
  return cycles;
}

bool LoopGasSampler::attempt_flip(int face) {
  const HexLattice::Face& f = lattice_->faces()[face];
  int occ = 0;
  for (int e : f.edges) occ += state_.occupied[e];
  const int ds = 6 - 2 * occ;
  auto uniform = [&] { return (rng_() >> 11) * 0x1.0p-53; };

  double weight;
  if (params_.n == 1.0) {
    weight = xpow_[ds + 6];
    if (weight < 1.0 && uniform() >= weight) return false;
    apply_xor(f);
    if (!spin_.empty()) spin_[face] = -spin_[face];  // keep the spin picture in sync
    return true;
  }

  const int before = cycles_through_face(f);
  apply_xor(f);
  const int after = cycles_through_face(f);
  weight = xpow_[ds + 6] * npow_[after - before + 6];
  if (weight >= 1.0 || uniform() < weight) return true;
  apply_xor(f);  // reject: undo
  return false;
}

void LoopGasSampler::sweep() {
  const int nf = lattice_->face_count();
  std::uniform_int_distribution<int> pick(0, nf - 1);
  for (int i = 0; i < nf; ++i) {
    ++attempts_;
    if (attempt_flip(pick(rng_))) ++accepts_;
  }
  for (int c = 0; c < params_.cluster_per_sweep; ++c) wolff_step();
}

void LoopGasSampler::wolff_step() {
  const int F = lattice_->face_count();
  std::uniform_int_distribution<int> pick(0, F);  // ghost participates
  auto uniform = [&] { return (rng_() >> 11) * 0x1.0p-53; };
  const double p_add = 1.0 - x_;  // pair weight x per disagreeing adjacency

  int seed_site = pick(rng_);
  std::fill(in_cluster_.begin(), in_cluster_.end(), 0);
  cluster_stack_.clear();
  cluster_members_.clear();
  cluster_stack_.push_back(seed_site);
  in_cluster_[seed_site] = 1;
  const std::int8_t s0 = spin_[seed_site];

  while (!cluster_stack_.empty()) {
    int f = cluster_stack_.back();
    cluster_stack_.pop_back();
    cluster_members_.push_back(f);
    spin_[f] = -s0;
    for (auto [g, e] : face_nbr_[f]) {
      (void)e;
      if (in_cluster_[g] || spin_[g] != s0) continue;
      if (uniform() < p_add) {
        in_cluster_[g] = 1;
        cluster_stack_.push_back(g);
      }
    }
  }
  // resync occupancy along edges incident to the flipped cluster
  for (int f : cluster_members_) {
    for (auto [g, e] : face_nbr_[f]) {
      (void)g;
      int a = edge_faces_[e][0], b = edge_faces_[e][1];
      bool occ = spin_[a] != spin_[b];
      if (state_.occupied[e] != static_cast<std::uint8_t>(occ)) {
        if (occ) {
          state_.occupied[e] = 1;
          ++state_.s;
          ++vdeg_[lattice_->edges()[e].v0];
          ++vdeg_[lattice_->edges()[e].v1];
        } else {
          state_.occupied[e] = 0;
          --state_.s;
          --vdeg_[lattice_->edges()[e].v0];
          --vdeg_[lattice_->edges()[e].v1];
        }
      }
    }
  }
}

void LoopGasSampler::thermalize() {
  if (thermalized_) return;
  thermalized_ = true;
  int therm = params_.thermalization;
  if (therm < 0) {
    // Pilot stage: measure tau of s, then run 10x tau further.
    const int pilot = 256;
    std::vector<double> s_series;
    s_series.reserve(pilot);
    for (int i = 0; i < pilot; ++i) {
      sweep();
      s_series.push_back(static_cast<double>(state_.s));
    }
    double tau = integrated_autocorr_time(s_series);
    therm = static_cast<int>(std::ceil(10.0 * tau));
    therm_used_ = pilot + therm;
  } else {
    therm_used_ = therm;
  }
  for (int i = 0; i < therm; ++i) sweep();
}

const LoopGasState& LoopGasSampler::next_state() {
  thermalize();
  for (int i = 0; i < params_.sweeps; ++i) sweep();
  return state_;
}

void LoopGasSampler::validate_state() const {
  long long s = 0;
  std::vector<int> deg(lattice_->vertices().size(), 0);
  for (std::size_t e = 0; e < state_.occupied.size(); ++e) {
    if (!state_.occupied[e]) continue;
    ++s;
    ++deg[lattice_->edges()[e].v0];
    ++deg[lattice_->edges()[e].v1];
  }
  if (s != state_.s) throw std::logic_error("LoopGasSampler: cached s out of sync");
  for (std::size_t v = 0; v < deg.size(); ++v) {
    if (deg[v] != 0 && deg[v] != 2)
      throw std::logic_error("LoopGasSampler: vertex degree invariant violated");
    if (deg[v] != vdeg_[v]) throw std::logic_error("LoopGasSampler: cached degree out of sync");
  }
  if (!spin_.empty()) {
    for (std::size_t e = 0; e < state_.occupied.size(); ++e) {
      bool occ = spin_[edge_faces_[e][0]] != spin_[edge_faces_[e][1]];
      if (occ != static_cast<bool>(state_.occupied[e]))
        throw std::logic_error("LoopGasSampler: spin picture out of sync with edges");
    }
  }
}

// ---------------------------------------------------------------------------
// Exact enumeration

PatchEnsemble::PatchEnsemble(std::shared_ptr<const HexLattice> lattice)
    : lattice_(std::move(lattice)) {
  const int ne = lattice_->edge_count();
  const int nf = lattice_->face_count();
  if (ne > kMaxEdges) throw std::invalid_argument("PatchEnsemble: patch too large (> 24 edges)");
  if (lattice_->has_holes())
    throw std::invalid_argument("PatchEnsemble: patch has holes; enumeration unsupported");

  std::vector<std::uint32_t> face_mask(nf, 0);
  for (int f = 0; f < nf; ++f)
    for (int e : lattice_->faces()[f].edges) face_mask[f] |= 1u << e;

  std::unordered_set<std::uint32_t> seen;
  for (std::uint32_t sub = 0; sub < (1u << nf); ++sub) {
    std::uint32_t mask = 0;
    for (int f = 0; f < nf; ++f)
      if (sub & (1u << f)) mask ^= face_mask[f];
    if (!seen.insert(mask).second) continue;
    State st;
    st.mask = mask;
    st.s = __builtin_popcount(mask);
    LoopGasState gs;
    gs.occupied.assign(ne, 0);
    for (int e = 0; e < ne; ++e) gs.occupied[e] = (mask >> e) & 1u;
    gs.s = st.s;
    st.loops = count_loops(gs, *lattice_);
    st.cfg = extract_loops(gs, *lattice_);
    states_.push_back(std::move(st));
  }
}

}  // namespace looplab
