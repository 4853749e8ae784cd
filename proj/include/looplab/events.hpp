#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "looplab/geometry.hpp"

namespace looplab {

// A point, a polyline, or a closed curve used as event payload geometry.
struct PointSet {
  std::vector<Complex> pts;
  bool closed = false;

  static PointSet point(Complex p) { return PointSet{{p}, false}; }
  static PointSet polyline(std::vector<Complex> p) { return PointSet{std::move(p), false}; }
  static PointSet loop(const LoopPath& l) { return PointSet{l.vertices(), true}; }
  bool intersects_loop(const LoopPath& l, double tol = kGeomTol) const;
};

class Event;
using EventPtr = std::shared_ptr<const Event>;

enum class Cmp { EQ, GE, LE };

// Closed set that carries an event: loops/components separating it from the
// rest of the configuration fully determine the event's evaluation.
struct SupportSet {
  std::vector<PointSet> components;

  bool empty() const;
  BBox bbox() const;
  std::size_t point_count() const;
  bool inside_domain(const Domain& d, double tol = kGeomTol) const;
  // Surrounded by the loop and disjoint from it.
  bool strictly_inside_loop(const LoopPath& l, double tol = kGeomTol) const;
  // Disjoint from the loop and not surrounded by it.
  bool strictly_outside_loop(const LoopPath& l, double tol = kGeomTol) const;
  SupportSet transformed(const MobiusMap& m) const;
  void append(const SupportSet& o);
};

// Finite event algebra over configurations. Atoms:
//   Separation(alpha, beta)  -- no loop intersects both alpha and beta
//   Surrounds(target, cap)   -- some loop (of radius < cap, if given) strictly
//                               contains every target point
//   CrossCount(sets, cmp, k) -- number of loops meeting all sets at once,
//                               compared against k
//   Fattened(outer, inner)   -- Separation between a domain boundary and its
//                               displaced partner (see make_partner_event)
// plus Not / And / Or combinators; And() is the trivial event.
class Event {
 public:
  enum class Kind { And, Or, Not, Separation, Surrounds, CrossCount, Fattened };

  static EventPtr trivial() { return conjunction({}); }
  static EventPtr never() { return negation(trivial()); }
  static EventPtr separation(LoopPath alpha, LoopPath beta);
  static EventPtr surrounds(std::vector<Complex> target,
                            std::optional<double> radius_cap = std::nullopt);
  static EventPtr cross_count(std::vector<PointSet> sets, Cmp cmp, int count);
  static EventPtr fattened(LoopPath outer, LoopPath inner);
  static EventPtr negation(EventPtr e);
  static EventPtr conjunction(std::vector<EventPtr> es);
  static EventPtr disjunction(std::vector<EventPtr> es);

  Kind kind() const { return kind_; }
  const std::vector<EventPtr>& children() const { return children_; }
  const LoopPath& alpha() const { return *alpha_; }
  const LoopPath& beta() const { return *beta_; }
  const std::vector<Complex>& target() const { return target_; }
  const std::optional<double>& radius_cap() const { return radius_cap_; }
  const std::vector<PointSet>& sets() const { return sets_; }
  Cmp cmp() const { return cmp_; }
  int count() const { return count_; }

 protected:
  Event() = default;
  Kind kind_ = Kind::And;
  std::vector<EventPtr> children_;
  std::optional<LoopPath> alpha_, beta_;
  std::vector<Complex> target_;
  std::optional<double> radius_cap_;
  std::vector<PointSet> sets_;
  Cmp cmp_ = Cmp::GE;
  int count_ = 0;
};

// Characteristic function: is cfg an element of the event.
bool evaluate(const Event& e, const Configuration& cfg);
inline bool evaluate(const EventPtr& e, const Configuration& cfg) { return evaluate(*e, cfg); }

SupportSet support(const Event& e);
inline SupportSet support(const EventPtr& e) { return support(*e); }

// Pointwise Mobius transport of all payload geometry, with edges re-densified
// so images stay within kShapeTol of the true arcs. Radius caps only
// transport under similarity maps (c = 0); otherwise throws.
inline constexpr double kShapeTol = 1e-6;
EventPtr transform_event(const MobiusMap& m, const Event& e);
inline EventPtr transform_event(const MobiusMap& m, const EventPtr& e) {
  return transform_event(m, *e);
}

// Separation event between the boundary of A and the displaced partner
// boundary (eps*u + id)(dA); u holds one displacement vector per boundary
// vertex of boundary_polyline(segments). Throws on self-intersecting or
// touching partners (invalid eps).
EventPtr make_partner_event(const Domain& A, double eps, const std::vector<Complex>& u,
                            int segments = 128);

// Unit inward normals of a counterclockwise boundary, one per vertex; the
// standard displacement field for partner construction.
std::vector<Complex> inward_normal_field(const LoopPath& boundary);

std::vector<Complex> densified_transform(const MobiusMap& m, const std::vector<Complex>& pts,
                                         bool closed);

// Canonical deterministic hash for result keying.
std::uint64_t event_hash(const Event& e);
std::string event_signature(const Event& e);

}  // namespace looplab
