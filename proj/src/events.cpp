#include "looplab/events.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace looplab {

bool PointSet::intersects_loop(const LoopPath& l, double tol) const {
  if (pts.empty()) return false;
  if (pts.size() == 1) return l.distance_to(pts[0]) <= tol;
  return polyline_intersects_loop(pts, closed, l, tol);
}

// ---------------------------------------------------------------------------
// SupportSet

bool SupportSet::empty() const {
  for (const auto& c : components)
    if (!c.pts.empty()) return false;
  return true;
}

BBox SupportSet::bbox() const {
  BBox b;
  for (const auto& c : components)
    for (Complex p : c.pts) b.expand(p);
  return b;
}

std::size_t SupportSet::point_count() const {
  std::size_t n = 0;
  for (const auto& c : components) n += c.pts.size();
  return n;
}

bool SupportSet::inside_domain(const Domain& d, double tol) const {
  for (const auto& c : components)
    for (Complex p : c.pts)
      if (d.classify(p, tol) != Side::Inside) return false;
  return true;
}

bool SupportSet::strictly_inside_loop(const LoopPath& l, double tol) const {
  for (const auto& c : components) {
    for (Complex p : c.pts)
      if (l.classify(p, tol) != Side::Inside) return false;
    if (c.pts.size() > 1 && c.intersects_loop(l, tol)) return false;
  }
  return true;
}

bool SupportSet::strictly_outside_loop(const LoopPath& l, double tol) const {
  for (const auto& c : components) {
    for (Complex p : c.pts)
      if (l.classify(p, tol) != Side::Outside) return false;
    if (c.pts.size() > 1 && c.intersects_loop(l, tol)) return false;
  }
  return true;
}

SupportSet SupportSet::transformed(const MobiusMap& m) const {
  SupportSet out;
  for (const auto& c : components) {
    PointSet t;
    t.closed = c.closed;
    t.pts = densified_transform(m, c.pts, c.closed);
    out.components.push_back(std::move(t));
  }
  return out;
}

void SupportSet::append(const SupportSet& o) {
  components.insert(components.end(), o.components.begin(), o.components.end());
}

// ---------------------------------------------------------------------------
// Event construction

namespace {

struct EventBuilder : Event {
  static std::shared_ptr<EventBuilder> make() { return std::make_shared<EventBuilder>(); }
};

}  // namespace

EventPtr Event::separation(LoopPath alpha, LoopPath beta) {
  if (loops_intersect(alpha, beta))
    throw std::invalid_argument("Event::separation: alpha and beta must be disjoint");
  auto e = EventBuilder::make();
  e->kind_ = Kind::Separation;
  e->alpha_ = std::move(alpha);
  e->beta_ = std::move(beta);
  return e;
}

EventPtr Event::surrounds(std::vector<Complex> target, std::optional<double> radius_cap) {
  if (target.empty()) throw std::invalid_argument("Event::surrounds: empty target");
  if (radius_cap && *radius_cap <= 0.0)
    throw std::invalid_argument("Event::surrounds: radius cap must be positive");
  auto e = EventBuilder::make();
  e->kind_ = Kind::Surrounds;
  e->target_ = std::move(target);
  e->radius_cap_ = radius_cap;
  return e;
}

EventPtr Event::cross_count(std::vector<PointSet> sets, Cmp cmp, int count) {
  if (sets.empty()) throw std::invalid_argument("Event::cross_count: need at least one set");
  if (count < 0) throw std::invalid_argument("Event::cross_count: negative count");
  auto e = EventBuilder::make();
  e->kind_ = Kind::CrossCount;
  e->sets_ = std::move(sets);
  e->cmp_ = cmp;
  e->count_ = count;
  return e;
}

EventPtr Event::fattened(LoopPath outer, LoopPath inner) {
  if (loops_intersect(outer, inner))
    throw std::invalid_argument("Event::fattened: boundaries must be disjoint");
  auto e = EventBuilder::make();
  e->kind_ = Kind::Fattened;
  e->alpha_ = std::move(outer);
  e->beta_ = std::move(inner);
  return e;
}

EventPtr Event::negation(EventPtr child) {
  if (!child) throw std::invalid_argument("Event::negation: null child");
  auto e = EventBuilder::make();
  e->kind_ = Kind::Not;
  e->children_.push_back(std::move(child));
  return e;
}

EventPtr Event::conjunction(std::vector<EventPtr> es) {
  for (const auto& c : es)
    if (!c) throw std::invalid_argument("Event::conjunction: null child");
  auto e = EventBuilder::make();
  e->kind_ = Kind::And;
  e->children_ = std::move(es);
  return e;
}

EventPtr Event::disjunction(std::vector<EventPtr> es) {
  for (const auto& c : es)
    if (!c) throw std::invalid_argument("Event::disjunction: null child");
  auto e = EventBuilder::make();
  e->kind_ = Kind::Or;
  e->children_ = std::move(es);
  return e;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

double loop_chart_radius(const LoopPath& l) {
  // Radius convention of the geometry module with the identity chart on D.
  return extent_radius(l, Domain::unit_disk()).radius;
}

bool loop_contains_all(const LoopPath& l, const std::vector<Complex>& pts) {
  for (Complex p : pts)
    if (!l.bbox().contains(p)) return false;
  for (Complex p : pts)
    if (l.classify(p) != Side::Inside) return false;
  return true;
}

}  // namespace

bool evaluate(const Event& e, const Configuration& cfg) {
  switch (e.kind()) {
    case Event::Kind::And:
      for (const auto& c : e.children())
        if (!evaluate(*c, cfg)) return false;
      return true;
    case Event::Kind::Or:
      for (const auto& c : e.children())
        if (evaluate(*c, cfg)) return true;
      return false;
    case Event::Kind::Not:
      return !evaluate(*e.children()[0], cfg);
    case Event::Kind::Separation:
    case Event::Kind::Fattened: {
      const LoopPath& a = e.alpha();
      const LoopPath& b = e.beta();
      for (const LoopPath& l : cfg.loops)
        if (loops_intersect(l, a) && loops_intersect(l, b)) return false;
      return true;
    }
    case Event::Kind::Surrounds: {
      for (const LoopPath& l : cfg.loops) {
        if (!loop_contains_all(l, e.target())) continue;
        if (e.radius_cap() && loop_chart_radius(l) >= *e.radius_cap()) continue;
        return true;
      }
      return false;
    }
    case Event::Kind::CrossCount: {
      int hits = 0;
      for (const LoopPath& l : cfg.loops) {
        bool all = true;
        for (const PointSet& s : e.sets())
          if (!s.intersects_loop(l)) {
            all = false;
            break;
          }
        if (all) ++hits;
      }
      switch (e.cmp()) {
        case Cmp::EQ: return hits == e.count();
        case Cmp::GE: return hits >= e.count();
        case Cmp::LE: return hits <= e.count();
      }
      return false;
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// Support

SupportSet support(const Event& e) {
  SupportSet s;
  switch (e.kind()) {
    case Event::Kind::And:
    case Event::Kind::Or:
      for (const auto& c : e.children()) s.append(support(*c));
      return s;
    case Event::Kind::Not:
      return support(*e.children()[0]);
    case Event::Kind::Separation:
    case Event::Kind::Fattened:
      s.components.push_back(PointSet::loop(e.alpha()));
      s.components.push_back(PointSet::loop(e.beta()));
      return s;
    case Event::Kind::Surrounds:
      s.components.push_back(PointSet{e.target(), false});
      return s;
    case Event::Kind::CrossCount:
      s.components = e.sets();
      return s;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Mobius transport

std::vector<Complex> densified_transform(const MobiusMap& m, const std::vector<Complex>& pts,
                                         bool closed) {
  const std::size_t n = pts.size();
  std::vector<Complex> out;
  out.reserve(n);
  auto apply = [&](Complex z) {
    Point w = m.apply(Point(z));
    if (w.at_infinity)
      throw std::domain_error("transform_event: payload hits the pole of the map");
    return w.z;
  };
  if (n == 1) return {apply(pts[0])};
  const std::size_t edges = closed ? n : n - 1;
  for (std::size_t i = 0; i < edges; ++i) {
    Complex p = pts[i], q = pts[(i + 1) % n];
    // Recursive refinement: split while the image midpoint sags more than
    // kShapeTol off the image chord.
    struct Frame {
      Complex a, b;
      int depth;
    };
    std::vector<Frame> stack{{p, q, 0}};
    out.push_back(apply(p));
    while (!stack.empty()) {
      Frame f = stack.back();
      stack.pop_back();
      Complex mid = 0.5 * (f.a + f.b);
      Complex ia = apply(f.a), ib = apply(f.b), im = apply(mid);
      if (f.depth < 12 && std::abs(im - 0.5 * (ia + ib)) > kShapeTol) {
        stack.push_back({mid, f.b, f.depth + 1});
        stack.push_back({f.a, mid, f.depth + 1});
      } else if (f.depth > 0 && (f.b.real() != q.real() || f.b.imag() != q.imag())) {
        // interior refinement point; q itself is emitted by the next edge
        out.push_back(ib);
      }
    }
    if (!closed && i + 2 == n) out.push_back(apply(q));
  }
  return out;
}

namespace {

LoopPath transform_loop(const MobiusMap& m, const LoopPath& l) {
  return LoopPath::make(densified_transform(m, l.vertices(), true));
}

}  // namespace

EventPtr transform_event(const MobiusMap& m, const Event& e) {
  switch (e.kind()) {
    case Event::Kind::And: {
      std::vector<EventPtr> cs;
      for (const auto& c : e.children()) cs.push_back(transform_event(m, *c));
      return Event::conjunction(std::move(cs));
    }
    case Event::Kind::Or: {
      std::vector<EventPtr> cs;
      for (const auto& c : e.children()) cs.push_back(transform_event(m, *c));
      return Event::disjunction(std::move(cs));
    }
    case Event::Kind::Not:
      return Event::negation(transform_event(m, *e.children()[0]));
    case Event::Kind::Separation:
      return Event::separation(transform_loop(m, e.alpha()), transform_loop(m, e.beta()));
    case Event::Kind::Fattened:
      return Event::fattened(transform_loop(m, e.alpha()), transform_loop(m, e.beta()));
    case Event::Kind::Surrounds: {
      std::optional<double> cap = e.radius_cap();
      if (cap) {
        if (std::abs(m.c()) > kGeomTol)
          throw std::domain_error(
              "transform_event: radius cap is chart-bound and only transports under similarities");
        cap = *cap * std::abs(m.a() / m.d());
      }
      std::vector<Complex> t;
      t.reserve(e.target().size());
      for (Complex p : e.target()) {
        Point w = m.apply(Point(p));
        if (w.at_infinity) throw std::domain_error("transform_event: target hits the pole");
        t.push_back(w.z);
      }
      return Event::surrounds(std::move(t), cap);
    }
    case Event::Kind::CrossCount: {
      std::vector<PointSet> sets;
      for (const PointSet& s : e.sets()) {
        PointSet ts;
        ts.closed = s.closed;
        ts.pts = densified_transform(m, s.pts, s.closed);
        sets.push_back(std::move(ts));
      }
      return Event::cross_count(std::move(sets), e.cmp(), e.count());
    }
  }
  throw std::logic_error("transform_event: unknown node");
}

// ---------------------------------------------------------------------------
// Partner events

EventPtr make_partner_event(const Domain& A, double eps, const std::vector<Complex>& u,
                            int segments) {
  if (eps <= 0.0) throw std::invalid_argument("make_partner_event: eps must be positive");
  LoopPath outer = A.boundary_polyline(segments);
  const auto& v = outer.vertices();
  if (u.size() != v.size())
    throw std::invalid_argument("make_partner_event: u must have one vector per boundary vertex");
  std::vector<Complex> pv(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) pv[i] = v[i] + eps * u[i];
  LoopPath inner = LoopPath::make(std::move(pv));
  if (!inner.is_simple())
    throw std::invalid_argument("make_partner_event: invalid eps (partner self-intersects)");
  for (Complex p : inner.vertices())
    if (A.classify(p) != Side::Inside)
      throw std::invalid_argument("make_partner_event: invalid eps (partner exits the domain)");
  if (loops_intersect(outer, inner))
    throw std::invalid_argument("make_partner_event: invalid eps (partner touches the boundary)");
  return Event::fattened(std::move(outer), std::move(inner));
}

std::vector<Complex> inward_normal_field(const LoopPath& boundary) {
  const auto& v = boundary.vertices();
  const std::size_t n = v.size();
  std::vector<Complex> u(n);
  for (std::size_t i = 0; i < n; ++i) {
    Complex t = v[(i + 1) % n] - v[(i + n - 1) % n];
    double len = std::abs(t);
    if (len == 0.0) throw std::invalid_argument("inward_normal_field: repeated vertex");
    // Boundary is counterclockwise, so the interior lies to the left of the
    // tangent: rotate by +90 degrees.
    u[i] = Complex(-t.imag() / len, t.real() / len);
  }
  return u;
}

// ---------------------------------------------------------------------------
// Canonical signature / hash

namespace {

void fmt_double(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

void sig_points(std::string& out, const std::vector<Complex>& pts) {
  for (Complex p : pts) {
    fmt_double(out, p.real());
    out += ',';
    fmt_double(out, p.imag());
    out += ';';
  }
}

void build_signature(std::string& out, const Event& e) {
  switch (e.kind()) {
    case Event::Kind::And:
      out += "and(";
      for (const auto& c : e.children()) {
        build_signature(out, *c);
        out += '|';
      }
      out += ')';
      return;
    case Event::Kind::Or:
      out += "or(";
      for (const auto& c : e.children()) {
        build_signature(out, *c);
        out += '|';
      }
      out += ')';
      return;
    case Event::Kind::Not:
      out += "not(";
      build_signature(out, *e.children()[0]);
      out += ')';
      return;
    case Event::Kind::Separation:
    case Event::Kind::Fattened:
      out += e.kind() == Event::Kind::Separation ? "sep(" : "fat(";
      sig_points(out, e.alpha().vertices());
      out += '/';
      sig_points(out, e.beta().vertices());
      out += ')';
      return;
    case Event::Kind::Surrounds:
      out += "surr(";
      sig_points(out, e.target());
      if (e.radius_cap()) {
        out += '<';
        fmt_double(out, *e.radius_cap());
      }
      out += ')';
      return;
    case Event::Kind::CrossCount:
      out += "cross(";
      for (const PointSet& s : e.sets()) {
        sig_points(out, s.pts);
        out += s.closed ? "c/" : "o/";
      }
      out += e.cmp() == Cmp::EQ ? "==" : (e.cmp() == Cmp::GE ? ">=" : "<=");
      out += std::to_string(e.count());
      out += ')';
      return;
  }
}

}  // namespace

std::string event_signature(const Event& e) {
  std::string s;
  build_signature(s, e);
  return s;
}

std::uint64_t event_hash(const Event& e) {
  std::string s = event_signature(e);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace looplab
