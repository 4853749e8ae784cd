#include "looplab/geometry.hpp"

#include <random>

#include "doctest.h"
#include "looplab/rng.hpp"
#include "oracles.hpp"

using namespace looplab;

namespace {

Complex rand_pt(std::mt19937_64& rng, double box = 1.0) {
  std::uniform_real_distribution<double> d(-box, box);
  return Complex(d(rng), d(rng));
}

MobiusMap rand_mobius(std::mt19937_64& rng) {
  for (;;) {
    Complex a = rand_pt(rng), b = rand_pt(rng), c = 0.3 * rand_pt(rng), d = rand_pt(rng);
    if (std::abs(a * d - b * c) > 0.1) return MobiusMap(a, b, c, d);
  }
}

}  // namespace

TEST_CASE("mobius basics") {
  MobiusMap id = MobiusMap::identity();
  Point p(0.3, 0.4);
  CHECK(approx_equal(id.apply(p), p));

  MobiusMap inv = MobiusMap::inversion();  // z -> 1/z
  CHECK(approx_equal(inv.apply(Point::infinity()), Point(0.0, 0.0)));
  CHECK(inv.apply(Point(0.0, 0.0)).at_infinity);

  // compose z+1 with 2z, apply to 1: first scale then shift -> 3.
  MobiusMap shift = MobiusMap::translation(1.0);
  MobiusMap scale = MobiusMap::scaling(2.0);
  CHECK(approx_equal(shift.compose(scale).apply(Point(1.0, 0.0)), Point(3.0, 0.0)));

  CHECK_THROWS_AS(MobiusMap(1.0, 2.0, 2.0, 4.0), std::invalid_argument);
}

TEST_CASE("mobius determinant stays normalized") {
  auto rng = make_engine(11);
  for (int i = 0; i < 200; ++i) {
    MobiusMap m = rand_mobius(rng).compose(rand_mobius(rng)).inverse();
    CHECK(std::abs(m.det() - Complex(1.0, 0.0)) < 1e-12);
  }
}

TEST_CASE("mobius group laws on random maps and points") {
  auto rng = make_engine(42);
  for (int i = 0; i < 200; ++i) {
    MobiusMap m1 = rand_mobius(rng), m2 = rand_mobius(rng);
    Point p = Point(rand_pt(rng));
    Point lhs = m1.compose(m2).apply(p);
    Point rhs = m1.apply(m2.apply(p));
    if (lhs.at_infinity || rhs.at_infinity) {
      CHECK(lhs.at_infinity == rhs.at_infinity);
    } else {
      CHECK(std::abs(lhs.z - rhs.z) < 1e-9 * (1.0 + std::abs(rhs.z)));
    }
    Point q = m1.inverse().apply(m1.apply(p));
    if (!q.at_infinity) CHECK(std::abs(q.z - p.z) < 1e-8);
  }
}

TEST_CASE("lambda flow fixes endpoints and matches printed forms") {
  // scale flow about 0, infinity
  MobiusMap f = lambda_flow(Point(0.0, 0.0), Point::infinity(), 2.0);
  CHECK(approx_equal(f.apply(Point(3.0, 0.0)), Point(6.0, 0.0)));

  // z1 + lambda (x - z1) for z2 = infinity
  Point z1(0.7, -0.2);
  MobiusMap g = lambda_flow(z1, Point::infinity(), 0.25);
  Complex x(1.5, 0.4);
  CHECK(std::abs(g.apply(Point(x)).z - (z1.z + 0.25 * (x - z1.z))) < 1e-12);

  // lambda = 1 is the identity
  MobiusMap h = lambda_flow(Point(0.3, 0.1), Point(-0.5, 0.2), 1.0);
  CHECK(h.is_identity(1e-12));

  auto rng = make_engine(7);
  for (int i = 0; i < 100; ++i) {
    Point a(rand_pt(rng)), b(rand_pt(rng));
    if (std::abs(a.z - b.z) < 1e-3) continue;
    double l = std::exp(std::uniform_real_distribution<double>(-1.5, 1.5)(rng));
    MobiusMap fl = lambda_flow(a, b, l);
    CHECK(std::abs(fl.apply(a).z - a.z) < 1e-9);
    CHECK(std::abs(fl.apply(b).z - b.z) < 1e-9);
  }
  CHECK_THROWS_AS(lambda_flow(Point(0.0, 0.0), Point(0.0, 0.0), 2.0), std::invalid_argument);
}

TEST_CASE("lambda flow semigroup") {
  auto rng = make_engine(1234);
  std::uniform_real_distribution<double> ld(0.2, 3.0);
  for (int i = 0; i < 100; ++i) {
    Point a(rand_pt(rng)), b(rand_pt(rng));
    if (std::abs(a.z - b.z) < 1e-3) continue;
    double l1 = ld(rng), l2 = ld(rng);
    MobiusMap lhs = lambda_flow(a, b, l1).compose(lambda_flow(a, b, l2));
    MobiusMap rhs = lambda_flow(a, b, l1 * l2);
    for (int k = 0; k < 5; ++k) {
      Point p(rand_pt(rng));
      Point u = lhs.apply(p), v = rhs.apply(p);
      if (u.at_infinity || v.at_infinity) continue;
      CHECK(std::abs(u.z - v.z) < 1e-9 * (1.0 + std::abs(v.z)));
    }
  }
}

TEST_CASE("point in loop: unit square") {
  LoopPath sq = LoopPath::make({{-1, -1}, {1, -1}, {1, 1}, {-1, 1}});
  CHECK(point_in_loop(sq, Point(0.0, 0.0)) == Side::Inside);
  CHECK(point_in_loop(sq, Point(5.0, 0.0)) == Side::Outside);
  CHECK(point_in_loop(sq, Point(1.0, 0.0)) == Side::Boundary);
  CHECK(point_in_loop(sq, Point::infinity()) == Side::Outside);
}

TEST_CASE("point in loop invariant under relabeling and orientation flip") {
  auto rng = make_engine(99);
  LoopPath base = LoopPath::circle({0.1, -0.2}, 0.8, 17);
  std::vector<Complex> v = base.vertices();
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Complex> rot = v;
    std::rotate(rot.begin(), rot.begin() + (trial % v.size()), rot.end());
    if (trial % 2) std::reverse(rot.begin(), rot.end());
    LoopPath alt = LoopPath::make(rot);
    for (int k = 0; k < 50; ++k) {
      Point p(rand_pt(rng, 1.2));
      CHECK(point_in_loop(base, p) == point_in_loop(alt, p));
    }
  }
}

TEST_CASE("loops_intersect basics") {
  LoopPath c1 = LoopPath::circle({0, 0}, 1.0, 64);
  LoopPath c2 = LoopPath::circle({0, 0}, 2.0, 64);
  CHECK_FALSE(loops_intersect(c1, c2));
  LoopPath c3 = LoopPath::circle({0.5, 0}, 1.0, 64);
  CHECK(loops_intersect(c1, c3));
  LoopPath t1 = LoopPath::make({{0, 0}, {1, 0}, {0, 1}});
  LoopPath t2 = LoopPath::make({{10, 10}, {11, 10}, {10, 11}});
  CHECK_FALSE(loops_intersect(t1, t2));
}

TEST_CASE("nesting forest: chains and siblings") {
  Configuration cfg;
  cfg.domain = Domain::disk({0, 0}, 10.0);
  cfg.loops.push_back(LoopPath::circle({0, 0}, 1.0));
  cfg.loops.push_back(LoopPath::circle({0, 0}, 2.0));
  cfg.loops.push_back(LoopPath::circle({0, 0}, 3.0));
  auto parent = nesting_forest(cfg);
  CHECK(parent[0] == 1);
  CHECK(parent[1] == 2);
  CHECK(parent[2] == -1);

  Configuration two;
  two.domain = cfg.domain;
  two.loops.push_back(LoopPath::circle({-2, 0}, 1.0));
  two.loops.push_back(LoopPath::circle({2, 0}, 1.0));
  auto p2 = nesting_forest(two);
  CHECK(p2[0] == -1);
  CHECK(p2[1] == -1);
}

TEST_CASE("nesting forest matches brute-force containment oracle") {
  auto rng = make_engine(2024);
  std::uniform_real_distribution<double> rd(0.08, 0.5);
  for (int trial = 0; trial < 12; ++trial) {
    std::vector<LoopPath> loops;
    int guard = 0;
    while (static_cast<int>(loops.size()) < 10 && ++guard < 4000) {
      Complex c = rand_pt(rng, 2.0);
      double r = rd(rng);
      LoopPath cand = LoopPath::circle(c, r, 24);
      bool ok = true;
      for (const LoopPath& l : loops)
        if (loops_intersect(cand, l)) {
          ok = false;
          break;
        }
      if (ok) loops.push_back(cand);
    }
    const int n = static_cast<int>(loops.size());
    std::vector<std::vector<bool>> contains(n, std::vector<bool>(n, false));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j) {
          bool all = true;
          for (const Complex& p : loops[i].vertices())
            if (loops[j].classify(p) != Side::Inside) {
              all = false;
              break;
            }
          contains[i][j] = all;
        }
    auto expect = oracles::containment_forest(n, contains);
    auto got = nesting_forest(loops);
    CHECK(got == expect);
  }
}

TEST_CASE("extent_radius conventions") {
  Domain disk = Domain::unit_disk();
  LoopPath c = LoopPath::circle({0, 0}, 0.25, 64);
  CHECK(extent_radius(c, disk).radius == doctest::Approx(0.25).epsilon(1e-9));

  std::vector<Complex> two = {{0.5, 0.0}, {-0.5, 0.0}};
  auto er = extent_radius(two, disk);
  CHECK(er.radius == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(er.extent == doctest::Approx(1.0).epsilon(1e-12));

  // Pull back through the stored map: image of D under 2z, set = circle r=0.5.
  Domain big = Domain::generalized_disk(MobiusMap::scaling(2.0));
  LoopPath c2 = LoopPath::circle({0, 0}, 0.5, 64);
  CHECK(extent_radius(c2, big).radius == doctest::Approx(0.25).epsilon(1e-9));

  Domain poly = Domain::polygon(LoopPath::make({{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}));
  CHECK_THROWS_AS(extent_radius(two, poly), std::domain_error);
}

TEST_CASE("extent_radius monotone under inclusion") {
  auto rng = make_engine(5);
  Domain disk = Domain::unit_disk();
  for (int t = 0; t < 50; ++t) {
    std::vector<Complex> s;
    for (int k = 0; k < 8; ++k) s.push_back(0.7 * rand_pt(rng));
    std::vector<Complex> s2 = s;
    for (int k = 0; k < 4; ++k) s2.push_back(0.7 * rand_pt(rng));
    CHECK(extent_radius(s, disk).radius <= extent_radius(s2, disk).radius + 1e-12);
  }
}

TEST_CASE("minimal enclosing disk is exact on known sets") {
  Disk d = minimal_enclosing_disk({{1, 0}, {-1, 0}, {0, 0.2}});
  CHECK(d.radius == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(d.center) < 1e-12);
  Disk d3 = minimal_enclosing_disk({{1, 0}, {-0.5, std::sqrt(3.0) / 2}, {-0.5, -std::sqrt(3.0) / 2}});
  CHECK(d3.radius == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("hausdorff distance") {
  Configuration a, b;
  a.domain = b.domain = Domain::disk({0, 0}, 10.0);
  a.loops.push_back(LoopPath::circle({0, 0}, 1.0, 48));
  b.loops.push_back(LoopPath::circle({0, 0}, 1.0, 48));
  CHECK(hausdorff_distance(a, b) == doctest::Approx(0.0));

  Configuration shifted = a;
  shifted.loops[0] = a.loops[0].translated({0.05, 0.0});
  CHECK(hausdorff_distance(a, shifted) == doctest::Approx(0.05).epsilon(1e-6));

  Configuration empty;
  empty.domain = a.domain;
  CHECK(std::isinf(hausdorff_distance(a, empty)));
  CHECK(hausdorff_distance(empty, empty) == 0.0);
}

TEST_CASE("hausdorff matches exhaustive pairing oracle on 3-loop fixtures") {
  auto rng = make_engine(77);
  for (int trial = 0; trial < 6; ++trial) {
    Configuration a, b;
    a.domain = b.domain = Domain::disk({0, 0}, 10.0);
    std::vector<std::vector<Complex>> pa, pb;
    auto dense = [](const LoopPath& l) {
      std::vector<Complex> pts;
      const auto& v = l.vertices();
      for (std::size_t i = 0; i < v.size(); ++i) {
        Complex p = v[i], q = v[(i + 1) % v.size()];
        for (int k = 0; k < 12; ++k) pts.push_back(p + (q - p) * (k / 12.0));
      }
      return pts;
    };
    for (int k = 0; k < 3; ++k) {
      LoopPath la = LoopPath::circle(rand_pt(rng, 2.0), 0.3 + 0.2 * k, 40);
      LoopPath lb = LoopPath::circle(rand_pt(rng, 2.0), 0.25 + 0.2 * k, 40);
      a.loops.push_back(la);
      b.loops.push_back(lb);
      pa.push_back(dense(la));
      pb.push_back(dense(lb));
    }
    double got = hausdorff_distance(a, b);
    double expect = oracles::dense_hausdorff(pa, pb);
    // Dense sampling bounds the true value from below within the sampling gap.
    CHECK(std::abs(got - expect) < 0.02);
  }
}

TEST_CASE("conformal radius of disks within 3 stderr at 1e5 walks") {
  // The loop is the inscribed 96-gon, whose exact radius the SC closed form gives.
  double exact96 = oracles::regular_polygon_conformal_radius(96, 1.0);
  LoopPath unit = LoopPath::circle({0, 0}, 1.0, 96);
  auto est = conformal_radius(unit, Point(0.0, 0.0), 100000, 31337);
  CHECK(std::abs(est.value - exact96) < 3.0 * est.stderr_);

  LoopPath c = LoopPath::circle({0.3, -0.4}, 0.55, 96);
  auto est2 = conformal_radius(c, Point(0.3, -0.4), 100000, 555);
  CHECK(std::abs(est2.value - 0.55 * exact96) < 3.0 * est2.stderr_);

  CHECK_THROWS_AS(conformal_radius(unit, Point(2.0, 0.0), 10, 1), std::invalid_argument);
}

TEST_CASE("conformal radius of the square matches the quadrature oracle") {
  double expect = oracles::square_conformal_radius();  // = sqrt(2)/K, about 1.0787
  CHECK(expect == doctest::Approx(1.07870).epsilon(2e-4));
  LoopPath sq = LoopPath::make({{-1, -1}, {1, -1}, {1, 1}, {-1, 1}});
  auto est = conformal_radius(sq, Point(0.0, 0.0), 100000, 2718);
  CHECK(std::abs(est.value - expect) < 3.0 * est.stderr_);
}

TEST_CASE("configuration validate flags bad input") {
  Configuration cfg;
  cfg.domain = Domain::unit_disk();
  cfg.loops.push_back(LoopPath::circle({0, 0}, 0.4, 32));
  CHECK_NOTHROW(cfg.validate());
  cfg.loops.push_back(LoopPath::circle({0.2, 0}, 0.4, 32));
  CHECK_THROWS_AS(cfg.validate(), std::runtime_error);
}
