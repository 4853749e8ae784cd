#pragma once

#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace looplab {

using Complex = std::complex<double>;

// Geometric tolerance for incidence tests, in chart units. Lattice coordinates
// are rational multiples of the spacing, far above this scale.
inline constexpr double kGeomTol = 1e-9;

// A point of the Riemann sphere: a finite complex number or the point at infinity.
struct Point {
  Complex z{0.0, 0.0};
  bool at_infinity = false;

  Point() = default;
  Point(double re, double im) : z(re, im) {}
  Point(Complex w) : z(w) {}
  static Point infinity() {
    Point p;
    p.at_infinity = true;
    return p;
  }
  bool finite() const { return !at_infinity; }
};

inline bool approx_equal(const Point& p, const Point& q, double tol = kGeomTol) {
  if (p.at_infinity || q.at_infinity) return p.at_infinity == q.at_infinity;
  return std::abs(p.z - q.z) <= tol;
}

struct BBox {
  double xmin = std::numeric_limits<double>::infinity();
  double ymin = std::numeric_limits<double>::infinity();
  double xmax = -std::numeric_limits<double>::infinity();
  double ymax = -std::numeric_limits<double>::infinity();

  void expand(Complex p) {
    xmin = std::min(xmin, p.real());
    xmax = std::max(xmax, p.real());
    ymin = std::min(ymin, p.imag());
    ymax = std::max(ymax, p.imag());
  }
  void expand(const BBox& o) {
    xmin = std::min(xmin, o.xmin);
    xmax = std::max(xmax, o.xmax);
    ymin = std::min(ymin, o.ymin);
    ymax = std::max(ymax, o.ymax);
  }
  bool overlaps(const BBox& o, double pad = 0.0) const {
    return xmin - pad <= o.xmax && o.xmin - pad <= xmax && ymin - pad <= o.ymax &&
           o.ymin - pad <= ymax;
  }
  bool contains(Complex p, double pad = 0.0) const {
    return p.real() >= xmin - pad && p.real() <= xmax + pad && p.imag() >= ymin - pad &&
           p.imag() <= ymax + pad;
  }
  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  double diag() const { return std::hypot(width(), height()); }
};

// Normalized Mobius transformation z -> (az+b)/(cz+d) with ad - bc = 1.
class MobiusMap {
 public:
  MobiusMap() : a_(1.0), b_(0.0), c_(0.0), d_(1.0) {}
  MobiusMap(Complex a, Complex b, Complex c, Complex d);

  static MobiusMap identity() { return MobiusMap(); }
  static MobiusMap translation(Complex t) { return MobiusMap(1.0, t, 0.0, 1.0); }
  static MobiusMap scaling(Complex s);
  static MobiusMap rotation(double angle);
  static MobiusMap inversion() { return MobiusMap(0.0, 1.0, 1.0, 0.0); }
  // Maps the unit disk onto the round disk |w - center| < radius.
  static MobiusMap disk(Complex center, double radius);

  Point apply(const Point& p) const;
  Complex apply_finite(Complex z) const;  // caller guarantees z is not the pole
  MobiusMap compose(const MobiusMap& inner) const;  // this after inner
  MobiusMap inverse() const;
  Complex det() const { return a_ * d_ - b_ * c_; }
  Point pole() const;   // preimage of infinity
  bool is_identity(double tol = kGeomTol) const;

  Complex a() const { return a_; }
  Complex b() const { return b_; }
  Complex c() const { return c_; }
  Complex d() const { return d_; }

 private:
  Complex a_, b_, c_, d_;
};

// The generalized scale flow fixing z1 and z2: conjugate of w -> lambda*w by
// g(x) = (x - z1)/(x - z2). lambda = 1 gives the identity, and
// flow(z1,z2,l) o flow(z1,z2,l') = flow(z1,z2,l*l').
MobiusMap lambda_flow(const Point& z1, const Point& z2, double lambda);

enum class Side { Inside, Outside, Boundary };

// Closed simple polyline on the plane chart. The closing edge last->first is
// implicit; orientation is normalized counterclockwise on construction.
class LoopPath {
 public:
  LoopPath() = default;  // empty placeholder; real loops come from make()

  // Validates: >= 3 vertices, all finite, nonzero enclosed area. Does not run
  // the quadratic simplicity check; call is_simple() where that matters.
  static LoopPath make(std::vector<Complex> vertices);
  // Regular n-gon approximation of a circle (counterclockwise). A nonzero
  // phase keeps vertices off lattice symmetry lines in clip pipelines.
  static LoopPath circle(Complex center, double radius, int segments = 64, double phase = 0.0);

  const std::vector<Complex>& vertices() const { return verts_; }
  std::size_t size() const { return verts_.size(); }
  const BBox& bbox() const { return bbox_; }
  double area() const { return area_; }  // positive after normalization

  Side classify(Complex p, double tol = kGeomTol) const;
  bool contains(Complex p, double tol = kGeomTol) const {
    return classify(p, tol) == Side::Inside;
  }
  double distance_to(Complex p) const;  // Euclidean distance to the polyline
  bool is_simple(double tol = kGeomTol) const;
  LoopPath translated(Complex t) const;

 private:
  std::vector<Complex> verts_;
  BBox bbox_;
  double area_ = 0.0;
};

double signed_area(const std::vector<Complex>& poly);
double point_segment_distance(Complex p, Complex a, Complex b);
bool segments_intersect(Complex a, Complex b, Complex c, Complex d, double tol = kGeomTol);

Side point_in_loop(const LoopPath& loop, const Point& p, double tol = kGeomTol);
bool loops_intersect(const LoopPath& l1, const LoopPath& l2, double tol = kGeomTol);
bool polyline_intersects_loop(const std::vector<Complex>& path, bool closed,
                              const LoopPath& loop, double tol = kGeomTol);

// Simply connected region: either a Mobius image of the unit disk or a
// polygonal Jordan domain. The selected side is the image of |z|<1 for disks
// and the bounded interior for polygons.
class Domain {
 public:
  enum class Kind { GeneralizedDisk, Polygon };

  static Domain unit_disk(std::string label = "D");
  static Domain disk(Complex center, double radius, std::string label = "");
  static Domain generalized_disk(const MobiusMap& map_from_disk, std::string label = "");
  static Domain polygon(LoopPath boundary, std::string label = "");

  Kind kind() const { return kind_; }
  const std::string& label() const { return label_; }
  const MobiusMap& disk_map() const;          // GeneralizedDisk only
  const LoopPath& polygon_boundary() const;   // Polygon only

  bool contains(Complex p, double tol = kGeomTol) const;
  Side classify(Complex p, double tol = kGeomTol) const;
  // Polyline tracing the boundary (sampled circle image for disks).
  LoopPath boundary_polyline(int segments = 128) const;
  BBox bbox(int segments = 128) const;
  // Image domain under a Mobius map (pole must lie outside the closure).
  Domain transformed(const MobiusMap& m, std::string label = "") const;

 private:
  Domain() = default;
  Kind kind_ = Kind::GeneralizedDisk;
  MobiusMap map_;
  std::optional<LoopPath> poly_;
  std::string label_;
};

// Finite set of pairwise disjoint loops together with its domain of definition.
struct Configuration {
  std::vector<LoopPath> loops;
  Domain domain = Domain::unit_disk();

  // Checks disjointness and strict containment in the domain; used by tests,
  // not on the hot path.
  void validate(double tol = kGeomTol) const;
};

// parent[i] = index of the innermost loop strictly containing loop i, or -1
// for outer loops. Requires pairwise disjoint loops.
std::vector<int> nesting_forest(const Configuration& cfg);
std::vector<int> nesting_forest(const std::vector<LoopPath>& loops);

struct ExtentRadius {
  double radius = 0.0;  // in [0,1]
  double extent = 0.0;  // 2 * radius
};

// Radius/extent convention: map the set to the unit disk through the domain's
// canonical chart (identity for D, the stored Mobius inverse for generalized
// disks) and take the minimal enclosing disk. Polygonal domains have no
// canonical map in scope and are rejected.
ExtentRadius extent_radius(const std::vector<Complex>& points, const Domain& d);
ExtentRadius extent_radius(const LoopPath& loop, const Domain& d);

struct Disk {
  Complex center{0.0, 0.0};
  double radius = 0.0;
};

// Exact minimal enclosing disk of a finite point set (randomized incremental).
Disk minimal_enclosing_disk(const std::vector<Complex>& points);

// Two-level max-min Hausdorff distance: loops are compared as point sets, and
// configurations as sets of loops. Returns +infinity when exactly one side is
// empty, 0 when both are.
double hausdorff_distance(const Configuration& a, const Configuration& b);
double loop_hausdorff(const LoopPath& a, const LoopPath& b);

struct ConformalRadiusEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
  double log_mean = 0.0;
  double log_stderr = 0.0;
  std::size_t walks = 0;
};

// Conformal radius of the interior of `loop` seen from z0, estimated by
// harmonic-measure sampling: log r = E[log|W - z0|] over walk-on-spheres exit
// points W. Throws if z0 is not strictly inside.
ConformalRadiusEstimate conformal_radius(const LoopPath& loop, const Point& z0,
                                         std::size_t walks, std::uint64_t seed);

}  // namespace looplab
