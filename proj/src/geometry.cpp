#include "looplab/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "looplab/rng.hpp"

namespace looplab {

namespace {

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

double cross(Complex o, Complex a, Complex b) {
  return (a.real() - o.real()) * (b.imag() - o.imag()) -
         (a.imag() - o.imag()) * (b.real() - o.real());
}

}  // namespace

// ---------------------------------------------------------------------------
// MobiusMap

MobiusMap::MobiusMap(Complex a, Complex b, Complex c, Complex d) : a_(a), b_(b), c_(c), d_(d) {
  Complex det = a_ * d_ - b_ * c_;
  double scale = std::max({std::abs(a_), std::abs(b_), std::abs(c_), std::abs(d_)});
  if (scale <= 0.0 || std::abs(det) < 1e-14 * scale * scale)
    throw std::invalid_argument("MobiusMap: degenerate coefficients (ad - bc ~ 0)");
  Complex s = std::sqrt(det);
  a_ /= s;
  b_ /= s;
  c_ /= s;
  d_ /= s;
}

MobiusMap MobiusMap::scaling(Complex s) {
  if (std::abs(s) == 0.0) throw std::invalid_argument("MobiusMap::scaling: zero factor");
  return MobiusMap(s, 0.0, 0.0, 1.0);
}

MobiusMap MobiusMap::rotation(double angle) {
  return scaling(std::polar(1.0, angle));
}

MobiusMap MobiusMap::disk(Complex center, double radius) {
  if (radius <= 0.0) throw std::invalid_argument("MobiusMap::disk: radius must be positive");
  return MobiusMap(radius, center, 0.0, 1.0);
}

Point MobiusMap::apply(const Point& p) const {
  if (p.at_infinity) {
    if (std::abs(c_) == 0.0) return Point::infinity();
    return Point(a_ / c_);
  }
  Complex num = a_ * p.z + b_;
  Complex den = c_ * p.z + d_;
  if (std::abs(den) == 0.0) return Point::infinity();
  Complex w = num / den;
  if (!finite(w)) return Point::infinity();
  return Point(w);
}

Complex MobiusMap::apply_finite(Complex z) const {
  return (a_ * z + b_) / (c_ * z + d_);
}

MobiusMap MobiusMap::compose(const MobiusMap& inner) const {
  return MobiusMap(a_ * inner.a_ + b_ * inner.c_, a_ * inner.b_ + b_ * inner.d_,
                   c_ * inner.a_ + d_ * inner.c_, c_ * inner.b_ + d_ * inner.d_);
}

MobiusMap MobiusMap::inverse() const { return MobiusMap(d_, -b_, -c_, a_); }

Point MobiusMap::pole() const {
  if (std::abs(c_) == 0.0) return Point::infinity();
  return Point(-d_ / c_);
}

bool MobiusMap::is_identity(double tol) const {
  // Projective comparison against +-I.
  for (double sign : {1.0, -1.0}) {
    if (std::abs(a_ - sign) <= tol && std::abs(b_) <= tol && std::abs(c_) <= tol &&
        std::abs(d_ - sign) <= tol)
      return true;
  }
  return false;
}

MobiusMap lambda_flow(const Point& z1, const Point& z2, double lambda) {
  if (lambda <= 0.0) throw std::invalid_argument("lambda_flow: lambda must be positive");
  if (approx_equal(z1, z2)) throw std::invalid_argument("lambda_flow: z1 == z2");
  if (z1.at_infinity) {
    // z2 + (x - z2)/lambda
    return MobiusMap(1.0, z2.z * (lambda - 1.0), 0.0, lambda);
  }
  if (z2.at_infinity) {
    // z1 + lambda (x - z1)
    return MobiusMap(lambda, z1.z * (1.0 - lambda), 0.0, 1.0);
  }
  Complex p = z1.z, q = z2.z;
  return MobiusMap(p - lambda * q, (lambda - 1.0) * p * q, 1.0 - lambda, lambda * p - q);
}

// ---------------------------------------------------------------------------
// LoopPath

double signed_area(const std::vector<Complex>& poly) {
  double twice = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Complex& p = poly[i];
    const Complex& q = poly[(i + 1) % n];
    twice += p.real() * q.imag() - q.real() * p.imag();
  }
  return 0.5 * twice;
}

LoopPath LoopPath::make(std::vector<Complex> vertices) {
  if (vertices.size() < 3) throw std::invalid_argument("LoopPath: need at least 3 vertices");
  for (const Complex& v : vertices)
    if (!finite(v)) throw std::invalid_argument("LoopPath: vertices must be finite");
  // Drop an explicit closing vertex if present.
  if (vertices.size() > 3 && std::abs(vertices.front() - vertices.back()) <= kGeomTol)
    vertices.pop_back();
  double area = signed_area(vertices);
  if (std::abs(area) <= kGeomTol * kGeomTol)
    throw std::invalid_argument("LoopPath: enclosed area is zero");
  if (area < 0.0) std::reverse(vertices.begin(), vertices.end());
  LoopPath l;
  l.verts_ = std::move(vertices);
  l.area_ = std::abs(area);
  for (const Complex& v : l.verts_) l.bbox_.expand(v);
  return l;
}

LoopPath LoopPath::circle(Complex center, double radius, int segments, double phase) {
  if (radius <= 0.0) throw std::invalid_argument("LoopPath::circle: radius must be positive");
  if (segments < 3) segments = 3;
  std::vector<Complex> v;
  v.reserve(segments);
  for (int k = 0; k < segments; ++k)
    v.push_back(center + std::polar(radius, phase + 2.0 * M_PI * k / segments));
  return make(std::move(v));
}

double point_segment_distance(Complex p, Complex a, Complex b) {
  Complex ab = b - a;
  double len2 = std::norm(ab);
  if (len2 == 0.0) return std::abs(p - a);
  double t = ((p.real() - a.real()) * ab.real() + (p.imag() - a.imag()) * ab.imag()) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return std::abs(p - (a + t * ab));
}

double LoopPath::distance_to(Complex p) const {
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = verts_.size();
  for (std::size_t i = 0; i < n; ++i)
    best = std::min(best, point_segment_distance(p, verts_[i], verts_[(i + 1) % n]));
  return best;
}

Side LoopPath::classify(Complex p, double tol) const {
  if (!bbox_.contains(p, tol)) return Side::Outside;
  if (distance_to(p) <= tol) return Side::Boundary;  // boundary wins over inside/outside
  // Crossing-number test; safe because p is at least tol away from every edge.
  bool inside = false;
  const std::size_t n = verts_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Complex& a = verts_[i];
    const Complex& b = verts_[(i + 1) % n];
    if ((a.imag() > p.imag()) != (b.imag() > p.imag())) {
      double x = a.real() + (p.imag() - a.imag()) * (b.real() - a.real()) / (b.imag() - a.imag());
      if (x > p.real()) inside = !inside;
    }
  }
  return inside ? Side::Inside : Side::Outside;
}

bool segments_intersect(Complex a, Complex b, Complex c, Complex d, double tol) {
  double d1 = cross(a, b, c);
  double d2 = cross(a, b, d);
  double d3 = cross(c, d, a);
  double d4 = cross(c, d, b);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
    return true;
  // Near-degenerate: treat an endpoint lying within tol of the other segment as contact.
  if (point_segment_distance(c, a, b) <= tol) return true;
  if (point_segment_distance(d, a, b) <= tol) return true;
  if (point_segment_distance(a, c, d) <= tol) return true;
  if (point_segment_distance(b, c, d) <= tol) return true;
  return false;
}

bool LoopPath::is_simple(double tol) const {
  const std::size_t n = verts_.size();
  for (std::size_t i = 0; i < n; ++i) {
    Complex a = verts_[i], b = verts_[(i + 1) % n];
    for (std::size_t j = i + 1; j < n; ++j) {
      if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;  // adjacent edges share a vertex
      Complex c = verts_[j], d = verts_[(j + 1) % n];
      if (segments_intersect(a, b, c, d, tol)) return false;
    }
  }
  return true;
}

LoopPath LoopPath::translated(Complex t) const {
  std::vector<Complex> v = verts_;
  for (Complex& p : v) p += t;
  return make(std::move(v));
}

Side point_in_loop(const LoopPath& loop, const Point& p, double tol) {
  if (p.at_infinity) return Side::Outside;  // loops store finite vertices
  return loop.classify(p.z, tol);
}

bool loops_intersect(const LoopPath& l1, const LoopPath& l2, double tol) {
  if (!l1.bbox().overlaps(l2.bbox(), tol)) return false;
  const auto& u = l1.vertices();
  const auto& v = l2.vertices();
  const std::size_t n = u.size(), m = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    Complex a = u[i], b = u[(i + 1) % n];
    BBox eb;
    eb.expand(a);
    eb.expand(b);
    if (!eb.overlaps(l2.bbox(), tol)) continue;
    for (std::size_t j = 0; j < m; ++j) {
      if (segments_intersect(a, b, v[j], v[(j + 1) % m], tol)) return true;
    }
  }
  return false;
}

bool polyline_intersects_loop(const std::vector<Complex>& path, bool closed, const LoopPath& loop,
                              double tol) {
  const std::size_t n = path.size();
  if (n == 0) return false;
  if (n == 1) return loop.distance_to(path[0]) <= tol;
  const auto& v = loop.vertices();
  const std::size_t m = v.size();
  const std::size_t edges = closed ? n : n - 1;
  for (std::size_t i = 0; i < edges; ++i) {
    Complex a = path[i], b = path[(i + 1) % n];
    for (std::size_t j = 0; j < m; ++j)
      if (segments_intersect(a, b, v[j], v[(j + 1) % m], tol)) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Domain

Domain Domain::unit_disk(std::string label) {
  Domain d;
  d.kind_ = Kind::GeneralizedDisk;
  d.map_ = MobiusMap::identity();
  d.label_ = std::move(label);
  return d;
}

Domain Domain::disk(Complex center, double radius, std::string label) {
  Domain d;
  d.kind_ = Kind::GeneralizedDisk;
  d.map_ = MobiusMap::disk(center, radius);
  d.label_ = std::move(label);
  return d;
}

Domain Domain::generalized_disk(const MobiusMap& map_from_disk, std::string label) {
  Domain d;
  d.kind_ = Kind::GeneralizedDisk;
  d.map_ = map_from_disk;
  d.label_ = std::move(label);
  return d;
}

Domain Domain::polygon(LoopPath boundary, std::string label) {
  Domain d;
  d.kind_ = Kind::Polygon;
  d.poly_ = std::move(boundary);
  d.label_ = std::move(label);
  return d;
}

const MobiusMap& Domain::disk_map() const {
  if (kind_ != Kind::GeneralizedDisk)
    throw std::logic_error("Domain: not a generalized disk");
  return map_;
}

const LoopPath& Domain::polygon_boundary() const {
  if (kind_ != Kind::Polygon) throw std::logic_error("Domain: not a polygon");
  return *poly_;
}

Side Domain::classify(Complex p, double tol) const {
  if (kind_ == Kind::Polygon) return poly_->classify(p, tol);
  Point w = map_.inverse().apply(Point(p));
  if (w.at_infinity) return Side::Outside;
  double r = std::abs(w.z);
  if (std::abs(r - 1.0) <= tol) return Side::Boundary;
  return r < 1.0 ? Side::Inside : Side::Outside;
}

bool Domain::contains(Complex p, double tol) const { return classify(p, tol) == Side::Inside; }

LoopPath Domain::boundary_polyline(int segments) const {
  if (kind_ == Kind::Polygon) return *poly_;
  std::vector<Complex> v;
  v.reserve(segments);
  for (int k = 0; k < segments; ++k) {
    Point w = map_.apply(Point(std::polar(1.0, 2.0 * M_PI * k / segments)));
    if (w.at_infinity)
      throw std::domain_error("Domain::boundary_polyline: boundary passes through infinity");
    v.push_back(w.z);
  }
  return LoopPath::make(std::move(v));
}

BBox Domain::bbox(int segments) const { return boundary_polyline(segments).bbox(); }

Domain Domain::transformed(const MobiusMap& m, std::string label) const {
  if (kind_ == Kind::GeneralizedDisk)
    return generalized_disk(m.compose(map_), std::move(label));
  std::vector<Complex> v;
  v.reserve(poly_->size());
  for (Complex p : poly_->vertices()) {
    Point w = m.apply(Point(p));
    if (w.at_infinity) throw std::domain_error("Domain::transformed: vertex maps to infinity");
    v.push_back(w.z);
  }
  return polygon(LoopPath::make(std::move(v)), std::move(label));
}

// ---------------------------------------------------------------------------
// Configuration

void Configuration::validate(double tol) const {
  for (std::size_t i = 0; i < loops.size(); ++i) {
    for (const Complex& v : loops[i].vertices())
      if (domain.classify(v, tol) != Side::Inside)
        throw std::runtime_error("Configuration: loop touches or exits the domain");
    for (std::size_t j = i + 1; j < loops.size(); ++j)
      if (loops_intersect(loops[i], loops[j], tol))
        throw std::runtime_error("Configuration: loops intersect");
  }
}

std::vector<int> nesting_forest(const std::vector<LoopPath>& loops) {
  const std::size_t n = loops.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return loops[a].area() < loops[b].area(); });
  std::vector<int> parent(n, -1);
  // Disjoint loops: containment is tested on a single vertex, and the parent
  // is the smallest-area container.
  for (std::size_t oi = 0; oi < n; ++oi) {
    std::size_t i = order[oi];
    Complex probe = loops[i].vertices().front();
    for (std::size_t oj = oi + 1; oj < n; ++oj) {
      std::size_t j = order[oj];
      if (loops[j].area() <= loops[i].area()) continue;
      if (loops[j].contains(probe)) {
        parent[i] = static_cast<int>(j);
        break;
      }
    }
  }
  return parent;
}

std::vector<int> nesting_forest(const Configuration& cfg) { return nesting_forest(cfg.loops); }

// ---------------------------------------------------------------------------
// Minimal enclosing disk (Welzl, randomized incremental)

namespace {

Disk disk_from2(Complex a, Complex b) {
  Disk d;
  d.center = 0.5 * (a + b);
  d.radius = 0.5 * std::abs(a - b);
  return d;
}

Disk disk_from3(Complex a, Complex b, Complex c) {
  double ax = a.real(), ay = a.imag(), bx = b.real(), by = b.imag(), cx = c.real(), cy = c.imag();
  double dd = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by));
  if (std::abs(dd) < 1e-300) {  // collinear: fall back to the widest pair
    Disk d1 = disk_from2(a, b), d2 = disk_from2(a, c), d3 = disk_from2(b, c);
    Disk best = d1;
    if (d2.radius > best.radius) best = d2;
    if (d3.radius > best.radius) best = d3;
    return best;
  }
  double ux = ((ax * ax + ay * ay) * (by - cy) + (bx * bx + by * by) * (cy - ay) +
               (cx * cx + cy * cy) * (ay - by)) / dd;
  double uy = ((ax * ax + ay * ay) * (cx - bx) + (bx * bx + by * by) * (ax - cx) +
               (cx * cx + cy * cy) * (bx - ax)) / dd;
  Disk d;
  d.center = Complex(ux, uy);
  d.radius = std::abs(d.center - a);
  return d;
}

bool in_disk(const Disk& d, Complex p) {
  return std::abs(p - d.center) <= d.radius * (1.0 + 1e-12) + 1e-300;
}

}  // namespace

Disk minimal_enclosing_disk(const std::vector<Complex>& points) {
  if (points.empty()) throw std::invalid_argument("minimal_enclosing_disk: empty point set");
  std::vector<Complex> pts = points;
  auto rng = make_engine(0x7b2f9d31c4e8a655ull);  // fixed shuffle seed, deterministic output
  std::shuffle(pts.begin(), pts.end(), rng);

  Disk d{pts[0], 0.0};
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (in_disk(d, pts[i])) continue;
    d = Disk{pts[i], 0.0};
    for (std::size_t j = 0; j < i; ++j) {
      if (in_disk(d, pts[j])) continue;
      d = disk_from2(pts[i], pts[j]);
      for (std::size_t k = 0; k < j; ++k) {
        if (in_disk(d, pts[k])) continue;
        d = disk_from3(pts[i], pts[j], pts[k]);
      }
    }
  }
  return d;
}

// ---------------------------------------------------------------------------
// extent / radius

namespace {

std::vector<Complex> map_to_chart(const std::vector<Complex>& pts, const Domain& d) {
  if (d.kind() == Domain::Kind::Polygon)
    throw std::domain_error("extent_radius: unsupported domain (no canonical map for polygons)");
  MobiusMap inv = d.disk_map().inverse();
  std::vector<Complex> out;
  out.reserve(pts.size());
  for (Complex p : pts) {
    Point w = inv.apply(Point(p));
    if (w.at_infinity) throw std::domain_error("extent_radius: point maps to infinity");
    out.push_back(w.z);
  }
  return out;
}

}  // namespace

ExtentRadius extent_radius(const std::vector<Complex>& points, const Domain& d) {
  if (points.empty()) throw std::invalid_argument("extent_radius: empty set");
  Disk md = minimal_enclosing_disk(map_to_chart(points, d));
  return ExtentRadius{md.radius, 2.0 * md.radius};
}

ExtentRadius extent_radius(const LoopPath& loop, const Domain& d) {
  // Vertices plus edge midpoints: midpoints track the chord sag of the mapped edges.
  std::vector<Complex> pts;
  const auto& v = loop.vertices();
  const std::size_t n = v.size();
  pts.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    pts.push_back(v[i]);
    pts.push_back(0.5 * (v[i] + v[(i + 1) % n]));
  }
  return extent_radius(pts, d);
}

// ---------------------------------------------------------------------------
// Hausdorff distance

namespace {

// Directed sup over sample points of `a` (vertices + midpoints) of the
// distance to polyline `b`.
double directed_loop_hausdorff(const LoopPath& a, const LoopPath& b) {
  double worst = 0.0;
  const auto& v = a.vertices();
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    worst = std::max(worst, b.distance_to(v[i]));
    worst = std::max(worst, b.distance_to(0.5 * (v[i] + v[(i + 1) % n])));
  }
  return worst;
}

}  // namespace

double loop_hausdorff(const LoopPath& a, const LoopPath& b) {
  return std::max(directed_loop_hausdorff(a, b), directed_loop_hausdorff(b, a));
}

double hausdorff_distance(const Configuration& a, const Configuration& b) {
  if (a.loops.empty() && b.loops.empty()) return 0.0;
  if (a.loops.empty() || b.loops.empty()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (const LoopPath& la : a.loops) {
    double best = std::numeric_limits<double>::infinity();
    for (const LoopPath& lb : b.loops) best = std::min(best, loop_hausdorff(la, lb));
    worst = std::max(worst, best);
  }
  for (const LoopPath& lb : b.loops) {
    double best = std::numeric_limits<double>::infinity();
    for (const LoopPath& la : a.loops) best = std::min(best, loop_hausdorff(lb, la));
    worst = std::max(worst, best);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Conformal radius by walk-on-spheres

ConformalRadiusEstimate conformal_radius(const LoopPath& loop, const Point& z0,
                                         std::size_t walks, std::uint64_t seed) {
  if (z0.at_infinity || loop.classify(z0.z) != Side::Inside)
    throw std::invalid_argument("conformal_radius: z0 must be strictly inside the loop");
  if (walks == 0) throw std::invalid_argument("conformal_radius: need at least one walk");

  const double scale = loop.bbox().diag();
  const double shell = 1e-6 * scale;
  auto rng = make_engine(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);

  double sum = 0.0, sum2 = 0.0;
  for (std::size_t w = 0; w < walks; ++w) {
    Complex x = z0.z;
    double r = loop.distance_to(x);
    int guard = 0;
    while (r > shell && ++guard < 20000) {
      x += std::polar(r, angle(rng));
      r = loop.distance_to(x);
    }
    // Project to the nearest boundary point: with r <= shell the projection
    // error is negligible against the statistical error.
    double best = std::numeric_limits<double>::infinity();
    Complex hit = x;
    const auto& v = loop.vertices();
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
      Complex a = v[i], b = v[(i + 1) % n];
      Complex ab = b - a;
      double len2 = std::norm(ab);
      double t = len2 == 0.0 ? 0.0
                             : std::clamp(((x.real() - a.real()) * ab.real() +
                                           (x.imag() - a.imag()) * ab.imag()) / len2, 0.0, 1.0);
      Complex p = a + t * ab;
      double dd = std::abs(x - p);
      if (dd < best) {
        best = dd;
        hit = p;
      }
    }
    double lg = std::log(std::abs(hit - z0.z));
    sum += lg;
    sum2 += lg * lg;
  }
  double mean = sum / static_cast<double>(walks);
  double var = std::max(0.0, sum2 / static_cast<double>(walks) - mean * mean);
  double se_log = std::sqrt(var / static_cast<double>(walks));
  ConformalRadiusEstimate est;
  est.log_mean = mean;
  est.log_stderr = se_log;
  est.value = std::exp(mean);
  est.stderr_ = est.value * se_log;
  est.walks = walks;
  return est;
}

}  // namespace looplab
