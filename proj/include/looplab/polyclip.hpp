#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "looplab/geometry.hpp"

namespace looplab::polyclip {

// Inputs that violate the transversality assumptions (touching vertices,
// collinear overlaps, boundary-incident probes) are reported, not guessed at.
struct ClipDegeneracy : std::runtime_error {
  explicit ClipDegeneracy(const std::string& what, int index = -1)
      : std::runtime_error(what), loop_index(index) {}
  int loop_index;
};

struct IPoint {
  std::int64_t x = 0, y = 0;
  friend bool operator==(const IPoint& a, const IPoint& b) { return a.x == b.x && a.y == b.y; }
};

// Counterclockwise simple ring on the integer grid.
using IRing = std::vector<IPoint>;

// Fixed quantization frame: all polygons of one boolean pipeline must be
// quantized through the same frame so predicates stay exact and consistent.
class Frame {
 public:
  explicit Frame(const BBox& world);
  IPoint quantize(Complex p) const;
  Complex to_world(const IPoint& p) const;
  IRing quantize_ring(const LoopPath& loop) const;
  LoopPath to_world_loop(const IRing& ring) const;
  double resolution() const { return 1.0 / scale_; }

 private:
  double ox_, oy_, scale_;
};

long long ring_area2(const IRing& r);  // twice the signed area
enum class RingSide { Inside, Outside, Boundary };
RingSide ring_side(const IRing& r, const IPoint& p);
inline bool ring_contains(const IRing& r, const IPoint& p) {
  return ring_side(r, p) == RingSide::Inside;
}

// Boolean operations between a multi-ring subject (disjoint simple CCW rings)
// and one simple CCW clip ring, assuming transversal boundary crossings.
// subtract() throws ClipDegeneracy when the clip is strictly nested inside a
// subject ring (that would create a hole, which the restriction pipelines
// never produce).
std::vector<IRing> intersect(const std::vector<IRing>& subject, const IRing& clip,
                             int clip_index = -1);
std::vector<IRing> subtract(const std::vector<IRing>& subject, const IRing& clip,
                            int clip_index = -1);

}  // namespace looplab::polyclip
