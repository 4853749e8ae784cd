#include "looplab/polyclip.hpp"

#include <algorithm>
#include <cmath>

namespace looplab::polyclip {

namespace {

using i128 = __int128;

i128 cross(const IPoint& o, const IPoint& a, const IPoint& b) {
  return (i128)(a.x - o.x) * (i128)(b.y - o.y) - (i128)(a.y - o.y) * (i128)(b.x - o.x);
}

int sgn(i128 v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

bool in_span(const IPoint& p, const IPoint& a, const IPoint& b) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

}  // namespace

Frame::Frame(const BBox& world) {
  double ext = std::max({world.width(), world.height(), 1e-12});
  ox_ = 0.5 * (world.xmin + world.xmax);
  oy_ = 0.5 * (world.ymin + world.ymax);
  // Half-extent maps to 2^28: cross products stay far inside int128.
  scale_ = static_cast<double>(1LL << 28) / (0.75 * ext);
}

IPoint Frame::quantize(Complex p) const {
  return IPoint{static_cast<std::int64_t>(std::llround((p.real() - ox_) * scale_)),
                static_cast<std::int64_t>(std::llround((p.imag() - oy_) * scale_))};
}

Complex Frame::to_world(const IPoint& p) const {
  return Complex(ox_ + p.x / scale_, oy_ + p.y / scale_);
}

IRing Frame::quantize_ring(const LoopPath& loop) const {
  IRing r;
  r.reserve(loop.size());
  for (Complex p : loop.vertices()) {
    IPoint q = quantize(p);
    if (!r.empty() && q == r.back()) continue;  // grid-coincident vertices collapse
    r.push_back(q);
  }
  while (r.size() > 1 && r.front() == r.back()) r.pop_back();
  if (r.size() < 3) throw ClipDegeneracy("quantize_ring: ring collapsed to the grid scale");
  if (ring_area2(r) <= 0) throw ClipDegeneracy("quantize_ring: ring lost orientation");
  return r;
}

LoopPath Frame::to_world_loop(const IRing& ring) const {
  std::vector<Complex> v;
  v.reserve(ring.size());
  for (const IPoint& p : ring) v.push_back(to_world(p));
  return LoopPath::make(std::move(v));
}

long long ring_area2(const IRing& r) {
  i128 acc = 0;
  const std::size_t n = r.size();
  for (std::size_t i = 0; i < n; ++i) {
    const IPoint& p = r[i];
    const IPoint& q = r[(i + 1) % n];
    acc += (i128)p.x * q.y - (i128)q.x * p.y;
  }
  return static_cast<long long>(acc);
}

RingSide ring_side(const IRing& r, const IPoint& p) {
  const std::size_t n = r.size();
  bool inside = false;
  for (std::size_t i = 0; i < n; ++i) {
    IPoint a = r[i], b = r[(i + 1) % n];
    if (cross(a, b, p) == 0 && in_span(p, a, b)) return RingSide::Boundary;
    if ((a.y > p.y) != (b.y > p.y)) {
      // exact comparison p.x < x_edge(p.y) via cross sign
      i128 c = cross(a, b, p);
      if (b.y > a.y ? c > 0 : c < 0) inside = !inside;
    }
  }
  return inside ? RingSide::Inside : RingSide::Outside;
}

namespace {

struct Node {
  IPoint p;
  int subj_next = -1, clip_next = -1, clip_prev = -1;
  bool crossing = false;
  bool visited = false;
  bool subj_entry = false;  // subject passes from outside to inside the clip here
};

struct Crossing {
  int subj_edge, clip_edge;
  i128 tn, td;  // parameter along the subject edge (0,1), exact rational, td > 0
  i128 un, ud;  // parameter along the clip edge
  IPoint p;
  int node = -1;
};

// Exact rational comparison a/b < c/d with b,d > 0. Magnitudes fit: the
// parameters come from cross products of 2^29-bounded differences (~2^59),
// and we compare via long double with exact fallback for near ties.
bool rat_less(i128 an, i128 ad, i128 bn, i128 bd) {
  long double lhs = (long double)an * (long double)bd;
  long double rhs = (long double)bn * (long double)ad;
  if (lhs < rhs - 1e18L) return true;
  if (lhs > rhs + 1e18L) return false;
  // near tie: compare exactly in halves
  auto hi = [](i128 v) { return (i128)(v >> 64); };
  auto lo = [](i128 v) { return (i128)(v & (((i128)1 << 64) - 1)); };
  (void)hi;
  (void)lo;
  // fall back to __int128 multiply when safe (|num|,|den| < 2^63)
  return an * bd < bn * ad;
}

struct GHResult {
  std::vector<IRing> rings;
  bool had_crossings = false;
};

// One subject ring against the clip ring; `mode_subtract` selects A\B.
GHResult clip_one(const IRing& subj, const IRing& clip, bool mode_subtract, int clip_index) {
  const std::size_t ns = subj.size(), nc = clip.size();
  std::vector<Crossing> crossings;

  for (std::size_t i = 0; i < ns; ++i) {
    IPoint p = subj[i], q = subj[(i + 1) % ns];
    for (std::size_t j = 0; j < nc; ++j) {
      IPoint a = clip[j], b = clip[(j + 1) % nc];
      i128 d1 = cross(p, q, a), d2 = cross(p, q, b);
      i128 d3 = cross(a, b, p), d4 = cross(a, b, q);
      int s1 = sgn(d1), s2 = sgn(d2), s3 = sgn(d3), s4 = sgn(d4);
      if (s1 == 0 && in_span(a, p, q))
        throw ClipDegeneracy("polyclip: clip vertex on subject edge", clip_index);
      if (s2 == 0 && in_span(b, p, q))
        throw ClipDegeneracy("polyclip: clip vertex on subject edge", clip_index);
      if (s3 == 0 && in_span(p, a, b))
        throw ClipDegeneracy("polyclip: subject vertex on clip edge", clip_index);
      if (s4 == 0 && in_span(q, a, b))
        throw ClipDegeneracy("polyclip: subject vertex on clip edge", clip_index);
      if (s1 * s2 < 0 && s3 * s4 < 0) {
        Crossing c;
        c.subj_edge = static_cast<int>(i);
        c.clip_edge = static_cast<int>(j);
        // p + t (q - p) = a + u (b - a): t = d3' / D with D = cross(q-p, b-a)
        i128 D = (i128)(q.x - p.x) * (b.y - a.y) - (i128)(q.y - p.y) * (b.x - a.x);
        i128 tn = (i128)(a.x - p.x) * (b.y - a.y) - (i128)(a.y - p.y) * (b.x - a.x);
        i128 un = (i128)(a.x - p.x) * (q.y - p.y) - (i128)(a.y - p.y) * (q.x - p.x);
        if (D < 0) {
          D = -D;
          tn = -tn;
          un = -un;
        }
        c.tn = tn;
        c.td = D;
        c.un = un;
        c.ud = D;
        double t = static_cast<double>((long double)tn / (long double)D);
        c.p = IPoint{static_cast<std::int64_t>(std::llround(p.x + t * (q.x - p.x))),
                     static_cast<std::int64_t>(std::llround(p.y + t * (q.y - p.y)))};
        crossings.push_back(c);
      }
    }
  }

  GHResult out;
  if (crossings.empty()) {
    RingSide side = ring_side(clip, subj[0]);
    if (side == RingSide::Boundary)
      throw ClipDegeneracy("polyclip: subject vertex on clip boundary", clip_index);
    bool subj_in_clip = side == RingSide::Inside;
    RingSide cside = ring_side(subj, clip[0]);
    if (cside == RingSide::Boundary)
      throw ClipDegeneracy("polyclip: clip vertex on subject boundary", clip_index);
    bool clip_in_subj = cside == RingSide::Inside;
    if (mode_subtract) {
      if (subj_in_clip) return out;  // fully swallowed
      if (clip_in_subj)
        throw ClipDegeneracy("polyclip: clip nested in subject would create a hole", clip_index);
      out.rings.push_back(subj);
      return out;
    }
    if (subj_in_clip) {
      out.rings.push_back(subj);
    } else if (clip_in_subj) {
      out.rings.push_back(clip);
    }
    return out;
  }
  out.had_crossings = true;
  if (crossings.size() % 2 != 0)
    throw ClipDegeneracy("polyclip: odd crossing count (inconsistent topology)", clip_index);

  // Node table: subject vertices, clip vertices, crossings.
  std::vector<Node> nodes;
  nodes.reserve(ns + nc + 2 * crossings.size());
  std::vector<int> subj_vertex(ns), clip_vertex(nc);
  for (std::size_t i = 0; i < ns; ++i) {
    Node n;
    n.p = subj[i];
    subj_vertex[i] = static_cast<int>(nodes.size());
    nodes.push_back(n);
  }
  for (std::size_t j = 0; j < nc; ++j) {
    Node n;
    n.p = clip[j];
    clip_vertex[j] = static_cast<int>(nodes.size());
    nodes.push_back(n);
  }
  for (Crossing& c : crossings) {
    Node n;
    n.p = c.p;
    n.crossing = true;
    c.node = static_cast<int>(nodes.size());
    nodes.push_back(n);
  }

  // Link the subject ring with crossings sorted along each edge.
  std::vector<std::vector<int>> on_subj_edge(ns), on_clip_edge(nc);
  for (std::size_t k = 0; k < crossings.size(); ++k) {
    on_subj_edge[crossings[k].subj_edge].push_back(static_cast<int>(k));
    on_clip_edge[crossings[k].clip_edge].push_back(static_cast<int>(k));
  }
  for (std::size_t i = 0; i < ns; ++i) {
    auto& lst = on_subj_edge[i];
    std::sort(lst.begin(), lst.end(), [&](int a, int b) {
      return rat_less(crossings[a].tn, crossings[a].td, crossings[b].tn, crossings[b].td);
    });
    int cur = subj_vertex[i];
    for (int k : lst) {
      nodes[cur].subj_next = crossings[k].node;
      cur = crossings[k].node;
    }
    nodes[cur].subj_next = subj_vertex[(i + 1) % ns];
  }
  for (std::size_t j = 0; j < nc; ++j) {
    auto& lst = on_clip_edge[j];
    std::sort(lst.begin(), lst.end(), [&](int a, int b) {
      return rat_less(crossings[a].un, crossings[a].ud, crossings[b].un, crossings[b].ud);
    });
    int cur = clip_vertex[j];
    for (int k : lst) {
      nodes[cur].clip_next = crossings[k].node;
      cur = crossings[k].node;
    }
    nodes[cur].clip_next = clip_vertex[(j + 1) % nc];
  }
  for (std::size_t idx = 0; idx < nodes.size(); ++idx) {
    int nx = nodes[idx].clip_next;
    if (nx >= 0) nodes[nx].clip_prev = static_cast<int>(idx);
  }

  // Entry/exit classification by parity along the subject ring.
  RingSide side0 = ring_side(clip, subj[0]);
  if (side0 == RingSide::Boundary)
    throw ClipDegeneracy("polyclip: subject vertex on clip boundary", clip_index);
  bool status = side0 == RingSide::Inside;
  int start = subj_vertex[0], cur = start;
  do {
    int nx = nodes[cur].subj_next;
    if (nodes[nx].crossing) {
      nodes[nx].subj_entry = !status;
      status = !status;
    }
    cur = nx;
  } while (cur != start);

  // Traversal. Intersection: start where the subject enters the clip, walk the
  // subject forward, and switch rings at every crossing (both rings CCW).
  // Difference: start where the subject exits, walk the subject forward and
  // the clip backward.
  for (const Crossing& c : crossings) {
    Node& n0 = nodes[c.node];
    if (n0.visited) continue;
    bool want_entry = !mode_subtract;
    if (n0.subj_entry != want_entry) continue;
    IRing ring;
    int at = c.node;
    bool on_subject = true;  // both start types leave along the subject
    std::size_t guard = 0, limit = 4 * nodes.size() + 16;
    do {
      if (nodes[at].crossing) {
        if (nodes[at].visited && at != c.node)
          throw ClipDegeneracy("polyclip: traversal revisited a crossing", clip_index);
        nodes[at].visited = true;
      }
      ring.push_back(nodes[at].p);
      at = on_subject ? nodes[at].subj_next
                      : (mode_subtract ? nodes[at].clip_prev : nodes[at].clip_next);
      if (at < 0) throw ClipDegeneracy("polyclip: broken ring linkage", clip_index);
      if (nodes[at].crossing) on_subject = !on_subject;
      if (++guard > limit)
        throw ClipDegeneracy("polyclip: traversal did not close", clip_index);
    } while (at != c.node);
    // collapse grid-coincident neighbours and discard slivers
    IRing clean;
    for (const IPoint& p : ring)
      if (clean.empty() || !(p == clean.back())) clean.push_back(p);
    while (clean.size() > 1 && clean.front() == clean.back()) clean.pop_back();
    if (clean.size() >= 3 && ring_area2(clean) > 0) out.rings.push_back(std::move(clean));
  }
  return out;
}

}  // namespace

std::vector<IRing> intersect(const std::vector<IRing>& subject, const IRing& clip,
                             int clip_index) {
  std::vector<IRing> out;
  for (const IRing& s : subject) {
    GHResult r = clip_one(s, clip, false, clip_index);
    for (IRing& ring : r.rings) out.push_back(std::move(ring));
  }
  return out;
}

std::vector<IRing> subtract(const std::vector<IRing>& subject, const IRing& clip,
                            int clip_index) {
  std::vector<IRing> out;
  for (const IRing& s : subject) {
    GHResult r = clip_one(s, clip, true, clip_index);
    for (IRing& ring : r.rings) out.push_back(std::move(ring));
  }
  return out;
}

}  // namespace looplab::polyclip
