#include "looplab/events.hpp"

#include <random>

#include "doctest.h"
#include "looplab/lattice.hpp"
#include "looplab/rng.hpp"

using namespace looplab;

namespace {

Configuration demo_config() {
  Configuration cfg;
  cfg.domain = Domain::disk({0, 0}, 10.0);
  cfg.loops.push_back(LoopPath::circle({0, 0}, 1.0, 48));
  cfg.loops.push_back(LoopPath::circle({3, 0}, 0.5, 48));
  cfg.loops.push_back(LoopPath::circle({0, 0}, 0.3, 48));
  return cfg;
}

}  // namespace

TEST_CASE("separation semantics") {
  LoopPath alpha = LoopPath::circle({0, 0}, 2.0, 48);
  LoopPath beta = LoopPath::circle({0, 0}, 0.5, 48);
  EventPtr sep = Event::separation(alpha, beta);

  Configuration empty;
  empty.domain = Domain::disk({0, 0}, 10.0);
  CHECK(evaluate(sep, empty));  // vacuous

  Configuration crossing = empty;
  // ring through both alpha and beta: a circle centered between them crossing both
  crossing.loops.push_back(LoopPath::circle({1.25, 0}, 1.1, 64));
  REQUIRE(loops_intersect(crossing.loops[0], alpha));
  REQUIRE(loops_intersect(crossing.loops[0], beta));
  CHECK_FALSE(evaluate(sep, crossing));

  Configuration harmless = empty;
  harmless.loops.push_back(LoopPath::circle({0, 0}, 1.2, 64));  // between them
  CHECK(evaluate(sep, harmless));

  CHECK_THROWS_AS(Event::separation(alpha, LoopPath::circle({2.0, 0}, 0.5, 48)),
                  std::invalid_argument);
}

TEST_CASE("boolean identities") {
  Configuration cfg = demo_config();
  EventPtr x = Event::surrounds({Complex(0.0, 0.0)});
  EventPtr contradiction = Event::conjunction({x, Event::negation(x)});
  CHECK_FALSE(evaluate(contradiction, cfg));
  EventPtr tautology = Event::disjunction({x, Event::negation(x)});
  CHECK(evaluate(tautology, cfg));
  CHECK(evaluate(Event::trivial(), cfg));
  CHECK_FALSE(evaluate(Event::never(), cfg));

  // De Morgan on random payloads
  EventPtr y = Event::surrounds({Complex(3.0, 0.0)});
  EventPtr lhs = Event::negation(Event::conjunction({x, y}));
  EventPtr rhs = Event::disjunction({Event::negation(x), Event::negation(y)});
  CHECK(evaluate(lhs, cfg) == evaluate(rhs, cfg));
}

TEST_CASE("surrounds with and without radius caps") {
  Configuration cfg = demo_config();
  CHECK(evaluate(Event::surrounds({Complex(0.0, 0.0)}), cfg));
  CHECK(evaluate(Event::surrounds({Complex(3.0, 0.0)}), cfg));
  CHECK_FALSE(evaluate(Event::surrounds({Complex(6.0, 0.0)}), cfg));
  // the loop around 3+0i has radius 0.5 in the identity chart
  CHECK(evaluate(Event::surrounds({Complex(3.0, 0.0)}, 0.6), cfg));
  CHECK_FALSE(evaluate(Event::surrounds({Complex(3.0, 0.0)}, 0.4), cfg));
  // multiple target points must be inside one common loop
  CHECK(evaluate(Event::surrounds({Complex(0.0, 0.0), Complex(0.5, 0.0)}), cfg));
  CHECK_FALSE(evaluate(Event::surrounds({Complex(0.0, 0.0), Complex(3.0, 0.0)}), cfg));
}

TEST_CASE("cross count") {
  Configuration cfg = demo_config();
  PointSet seg1 = PointSet::polyline({{0.8, 0.0}, {1.2, 0.0}});   // crosses loop r=1
  PointSet seg2 = PointSet::polyline({{0.0, 0.8}, {0.0, 1.2}});   // crosses loop r=1
  CHECK(evaluate(Event::cross_count({seg1, seg2}, Cmp::EQ, 1), cfg));
  CHECK(evaluate(Event::cross_count({seg1}, Cmp::GE, 1), cfg));
  PointSet far = PointSet::polyline({{7.0, 0.0}, {8.0, 0.0}});
  CHECK(evaluate(Event::cross_count({far}, Cmp::EQ, 0), cfg));
}

TEST_CASE("support calculus") {
  LoopPath alpha = LoopPath::circle({0, 0}, 2.0, 32);
  LoopPath beta = LoopPath::circle({0, 0}, 0.5, 32);
  EventPtr sep = Event::separation(alpha, beta);
  SupportSet s = support(sep);
  CHECK(s.components.size() == 2);
  CHECK(s.point_count() == 64);

  EventPtr surr = Event::surrounds({Complex(0.1, 0.1)});
  SupportSet s2 = support(Event::conjunction({sep, surr}));
  CHECK(s2.components.size() == 3);

  CHECK(support(Event::trivial()).empty());
  CHECK(support(Event::negation(Event::trivial())).empty());
  CHECK_FALSE(s.empty());

  // monotonicity: support(And(a,b)) contains support(a)'s components
  CHECK(s2.point_count() >= s.point_count());
}

TEST_CASE("transform_event: identity, rotation, and the double-evaluation oracle") {
  LoopPath alpha = LoopPath::circle({0, 0}, 0.8, 32);
  LoopPath beta = LoopPath::circle({0, 0}, 0.3, 32);
  EventPtr sep = Event::separation(alpha, beta);

  EventPtr same = transform_event(MobiusMap::identity(), sep);
  CHECK(event_hash(*same) == event_hash(*sep));

  EventPtr rot = transform_event(MobiusMap::rotation(M_PI), sep);
  CHECK(rot->kind() == Event::Kind::Separation);
  CHECK(rot->alpha().size() == alpha.size());

  // evaluate(transform(m, e), m(cfg)) == evaluate(e, cfg) on random draws
  auto lat = std::make_shared<HexLattice>(disk_lattice_spec({0, 0}, 1.0, 12));
  SamplerParams p;
  p.n = 1.0;
  p.thermalization = 64;
  p.sweeps = 2;
  p.seed = 31;
  LoopGasSampler sampler(lat, p);
  auto rng = make_engine(123);
  std::uniform_real_distribution<double> ang(0.0, 2 * M_PI), sc(0.6, 1.7), tr(-0.2, 0.2);
  int checked = 0;
  for (int i = 0; i < 100; ++i) {
    sampler.next_state();
    Configuration cfg = sampler.extract();
    MobiusMap m = MobiusMap::translation({tr(rng), tr(rng)})
                      .compose(MobiusMap::rotation(ang(rng)))
                      .compose(MobiusMap::scaling(sc(rng)));
    EventPtr te = transform_event(m, sep);
    Configuration tcfg;
    tcfg.domain = cfg.domain.transformed(m);
    for (const LoopPath& l : cfg.loops)
      tcfg.loops.push_back(LoopPath::make(densified_transform(m, l.vertices(), true)));
    CHECK(evaluate(te, tcfg) == evaluate(sep, cfg));
    ++checked;
  }
  CHECK(checked == 100);
}

TEST_CASE("make_partner_event") {
  Domain disk = Domain::unit_disk();
  LoopPath boundary = disk.boundary_polyline(96);
  auto u = inward_normal_field(boundary);
  EventPtr e = make_partner_event(disk, 0.1, u, 96);
  CHECK(e->kind() == Event::Kind::Fattened);
  // radial field on a circle: partner is the concentric circle of radius 0.9
  for (Complex p : e->beta().vertices()) CHECK(std::abs(p) == doctest::Approx(0.9).epsilon(1e-9));

  // eps beyond the self-intersection threshold on a nonconvex polygon
  LoopPath wedge = LoopPath::make({{0, 0}, {2, 0}, {2, 1}, {0.2, 0.35}, {0, 1}});
  Domain wd = Domain::polygon(wedge);
  auto wu = inward_normal_field(wedge);
  CHECK_THROWS_AS(make_partner_event(wd, 0.9, wu, 5), std::invalid_argument);

  // definitional equality: evaluate(partner event) == evaluate(explicit separation)
  EventPtr sep = Event::separation(e->alpha(), e->beta());
  auto lat = std::make_shared<HexLattice>(disk_lattice_spec({0, 0}, 1.0, 16));
  SamplerParams p;
  p.n = 1.0;
  p.thermalization = 64;
  p.sweeps = 2;
  p.seed = 99;
  LoopGasSampler sampler(lat, p);
  for (int i = 0; i < 100; ++i) {
    sampler.next_state();
    Configuration cfg = sampler.extract();
    CHECK(evaluate(e, cfg) == evaluate(sep, cfg));
  }
}

TEST_CASE("evaluation locality inside a surrounding loop") {
  // If a loop gamma strictly surrounds supp(e), evaluation only depends on
  // the configuration inside gamma.
  LoopPath alpha = LoopPath::circle({0, 0}, 0.2, 32);
  LoopPath beta = LoopPath::circle({0, 0}, 0.07, 32);
  EventPtr sep = Event::separation(alpha, beta);
  SupportSet supp = support(sep);

  auto lat = std::make_shared<HexLattice>(disk_lattice_spec({0, 0}, 1.0, 32));
  SamplerParams p;
  p.n = 2.0;
  p.thermalization = 128;
  p.sweeps = 2;
  p.seed = 7;
  LoopGasSampler sampler(lat, p);
  int found = 0;
  for (int i = 0; i < 300 && found < 40; ++i) {
    sampler.next_state();
    Configuration cfg = sampler.extract();
    auto forest = nesting_forest(cfg);
    for (std::size_t g = 0; g < cfg.loops.size(); ++g) {
      if (!supp.strictly_inside_loop(cfg.loops[g])) continue;
      ++found;
      // interior restriction: keep only loops strictly inside gamma
      Configuration inner;
      inner.domain = cfg.domain;
      for (std::size_t j = 0; j < cfg.loops.size(); ++j) {
        if (j == g) continue;
        if (cfg.loops[g].contains(cfg.loops[j].vertices().front())) inner.loops.push_back(cfg.loops[j]);
      }
      CHECK(evaluate(sep, cfg) == evaluate(sep, inner));
      // exteriority: deleting loops inside a disjoint non-surrounding loop changes nothing
      for (std::size_t h = 0; h < cfg.loops.size(); ++h) {
        if (h == g || forest[h] != -1) continue;
        if (!supp.strictly_outside_loop(cfg.loops[h])) continue;
        Configuration pruned;
        pruned.domain = cfg.domain;
        for (std::size_t j = 0; j < cfg.loops.size(); ++j) {
          if (j != h && cfg.loops[h].contains(cfg.loops[j].vertices().front())) continue;
          pruned.loops.push_back(cfg.loops[j]);
        }
        CHECK(evaluate(sep, cfg) == evaluate(sep, pruned));
        break;
      }
      break;
    }
  }
  CHECK(found > 0);
}

TEST_CASE("event hashing is canonical and sensitive") {
  EventPtr a = Event::surrounds({Complex(0.5, 0.5)});
  EventPtr b = Event::surrounds({Complex(0.5, 0.5)});
  EventPtr c = Event::surrounds({Complex(0.5, 0.50000001)});
  CHECK(event_hash(*a) == event_hash(*b));
  CHECK(event_hash(*a) != event_hash(*c));
  CHECK(event_signature(*Event::trivial()) == "and()");
}
