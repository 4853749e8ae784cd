#include "looplab/estimators.hpp"

#include <cmath>

#include "doctest.h"
#include "looplab/rng.hpp"

using namespace looplab;

namespace {

// Shared tiny patch and matching event set for oracle comparisons.
struct PatchFixture {
  LatticeSpec spec;
  std::shared_ptr<const HexLattice> lattice;
  std::unique_ptr<PatchEnsemble> exact;

  PatchFixture() {
    spec.spacing = 1.0;
    spec.mask = Domain::polygon(
        LoopPath::make({{-1.2, -1.5}, {4.8, -1.5}, {4.8, 1.5}, {-1.2, 1.5}}), "patch");
    lattice = std::make_shared<HexLattice>(spec);
    exact = std::make_unique<PatchEnsemble>(lattice);
  }
};

}  // namespace

TEST_CASE("estimate_prob matches the enumeration oracle on the patch") {
  PatchFixture fx;
  REQUIRE(fx.lattice->edge_count() <= 24);

  Complex center = fx.lattice->faces()[0].center;
  EventPtr surr = Event::surrounds({center});
  EventPtr cross = Event::cross_count(
      {PointSet::polyline({center, center + Complex(0.9, 0.45)})}, Cmp::GE, 1);
  EventPtr combo = Event::disjunction({surr, Event::negation(cross)});

  SamplerParams p;
  p.n = 1.6;
  p.x = critical_x(1.6);
  p.sweeps = 2;
  p.thermalization = 128;
  p.seed = 31415;
  Budget b;
  b.states = 6000;
  b.chains = 2;
  b.threads = 2;

  auto ests = estimate_probs({surr, cross, combo}, fx.spec, p, b);
  std::vector<EventPtr> events{surr, cross, combo};
  for (std::size_t k = 0; k < events.size(); ++k) {
    double exact = fx.exact->probability(
        [&](const Configuration& cfg) { return evaluate(*events[k], cfg); }, p.n, p.x);
    CHECK(std::abs(ests[k].mean - exact) < 3.0 * std::max(ests[k].stderr_, 5e-4));
  }
}

TEST_CASE("trivial and empty events are exact; complementarity holds on one stream") {
  PatchFixture fx;
  SamplerParams p;
  p.n = 1.0;
  p.sweeps = 1;
  p.thermalization = 32;
  p.seed = 7;
  Budget b;
  b.states = 500;
  b.chains = 2;

  Complex center = fx.lattice->faces()[0].center;
  EventPtr e = Event::surrounds({center});
  auto ests = estimate_probs({Event::trivial(), Event::never(), e, Event::negation(e)},
                             fx.spec, p, b);
  CHECK(ests[0].mean == 1.0);
  CHECK(ests[1].mean == 0.0);
  CHECK(ests[2].mean + ests[3].mean == doctest::Approx(1.0).epsilon(1e-15));
  // Wilson interval on the extreme estimates stays in [0,1]
  CHECK(ests[0].ci_hi <= 1.0);
  CHECK(ests[1].ci_lo >= 0.0);
}

TEST_CASE("monotonicity under And-weakening on a shared stream") {
  PatchFixture fx;
  SamplerParams p;
  p.n = 1.3;
  p.sweeps = 1;
  p.thermalization = 64;
  p.seed = 99;
  Budget b;
  b.states = 2000;
  b.chains = 1;
  Complex center = fx.lattice->faces()[0].center;
  EventPtr a = Event::surrounds({center});
  EventPtr c = Event::cross_count({PointSet::polyline({center, center + Complex(1.2, 0.0)})},
                                  Cmp::GE, 1);
  auto ests = estimate_probs({Event::conjunction({a, c}), a}, fx.spec, p, b);
  CHECK(ests[0].mean <= ests[1].mean);
}

TEST_CASE("conditional estimation: ratio and rejection modes agree") {
  PatchFixture fx;
  SamplerParams p;
  p.n = 1.6;
  p.x = critical_x(1.6);
  p.sweeps = 2;
  p.thermalization = 128;
  p.seed = 2024;
  Budget b;
  b.states = 6000;
  b.chains = 2;

  Complex center = fx.lattice->faces()[0].center;
  EventPtr X = Event::surrounds({center});
  EventPtr Xp = Event::cross_count(
      {PointSet::polyline({center + Complex(1.5, 0.0), center + Complex(2.4, 0.9)})}, Cmp::EQ,
      0);

  Estimate ratio = estimate_conditional(X, Xp, fx.spec, p, b, ConditionalMode::Ratio);
  Estimate rej = estimate_conditional(X, Xp, fx.spec, p, b, ConditionalMode::Rejection);
  CHECK(ratio.compatible(rej, 3.0));

  double exact_joint = fx.exact->probability(
      [&](const Configuration& cfg) { return evaluate(*X, cfg) && evaluate(*Xp, cfg); }, p.n,
      p.x);
  double exact_cond = fx.exact->probability(
                          [&](const Configuration& cfg) { return evaluate(*Xp, cfg); }, p.n,
                          p.x);
  double expect = exact_joint / exact_cond;
  CHECK(std::abs(ratio.mean - expect) < 3.0 * std::max(ratio.stderr_, 5e-4));

  // X = Xp gives exactly 1; conditioning on the trivial event is estimate_prob
  Estimate one = estimate_conditional(X, X, fx.spec, p, b, ConditionalMode::Ratio);
  CHECK(one.mean == doctest::Approx(1.0));
  Estimate plain = estimate_conditional(X, Event::trivial(), fx.spec, p, b);
  Estimate direct = estimate_prob(X, fx.spec, p, b);
  CHECK(plain.mean == doctest::Approx(direct.mean));
}

TEST_CASE("support outside the domain is rejected") {
  PatchFixture fx;
  SamplerParams p;
  Budget b;
  b.states = 10;
  EventPtr outside = Event::surrounds({Complex(50.0, 50.0)});
  CHECK_THROWS_AS(estimate_prob(outside, fx.spec, p, b), std::invalid_argument);
}

TEST_CASE("extrapolate_limit models and preconditions") {
  auto mk = [](double m, double s) {
    Estimate e;
    e.mean = m;
    e.stderr_ = s;
    return e;
  };

  SUBCASE("constant data recovers the common value with zero slope") {
    std::vector<std::pair<double, Estimate>> pts = {
        {0.4, mk(0.5, 0.01)}, {0.2, mk(0.5, 0.01)}, {0.1, mk(0.5, 0.01)}};
    LimitFit f = extrapolate_limit(pts, LimitFit::Model::Linear);
    CHECK(f.limit.mean == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::abs(f.slope) < 1e-10);
  }

  SUBCASE("synthetic linear data recovers the intercept") {
    auto rng = make_engine(4321);
    std::normal_distribution<double> noise(0.0, 0.004);
    std::vector<std::pair<double, Estimate>> pts;
    for (double eps : {0.32, 0.16, 0.08, 0.04, 0.02})
      pts.push_back({eps, mk(0.5 + 0.3 * eps + noise(rng), 0.004)});
    LimitFit f = extrapolate_limit(pts, LimitFit::Model::Linear);
    CHECK(std::abs(f.limit.mean - 0.5) < 3.0 * f.limit.stderr_);
    CHECK(f.slope == doctest::Approx(0.3).epsilon(0.35));
  }

  SUBCASE("power model fits a known exponent") {
    std::vector<std::pair<double, Estimate>> pts;
    for (double eps : {0.64, 0.32, 0.16, 0.08, 0.04, 0.02})
      pts.push_back({eps, mk(0.25 + 0.5 * std::pow(eps, 1.5), 0.002)});
    LimitFit f = extrapolate_limit(pts, LimitFit::Model::Power);
    CHECK(f.exponent == doctest::Approx(1.5).epsilon(0.1));
    CHECK(std::abs(f.limit.mean - 0.25) < 4.0 * std::max(f.limit.stderr_, 1e-3));
  }

  SUBCASE("preconditions") {
    std::vector<std::pair<double, Estimate>> two = {{0.2, mk(0.5, 0.01)}, {0.1, mk(0.5, 0.01)}};
    CHECK_THROWS_AS(extrapolate_limit(two, LimitFit::Model::Linear), std::invalid_argument);
    std::vector<std::pair<double, Estimate>> unsorted = {
        {0.1, mk(0.5, 0.01)}, {0.2, mk(0.5, 0.01)}, {0.05, mk(0.5, 0.01)}};
    CHECK_THROWS_AS(extrapolate_limit(unsorted, LimitFit::Model::Linear),
                    std::invalid_argument);
  }
}

TEST_CASE("continuity probe: identity maps give exactly zero shift") {
  auto spec = disk_lattice_spec({0, 0}, 1.0, 14);
  SamplerParams p;
  p.n = 1.0;
  p.sweeps = 2;
  p.thermalization = 64;
  p.seed = 5150;
  Budget b;
  b.states = 400;
  b.chains = 1;
  EventPtr e = Event::surrounds({Complex(0.0, 0.0)});
  std::vector<MobiusMap> maps = {MobiusMap::identity(), MobiusMap::identity()};
  ContinuityTable t = continuity_probe(e, spec.mask, maps, spec.spacing, p, b, false);
  REQUIRE(t.rows.size() == 2);
  for (const auto& row : t.rows) {
    CHECK(row.eps == 0.0);
    CHECK(row.delta == 0.0);  // identical mask and seed reproduce the stream
  }
}

TEST_CASE("continuity probe: disk rotations are symmetries up to remasking") {
  auto spec = disk_lattice_spec({0, 0}, 1.0, 16);
  SamplerParams p;
  p.n = 1.0;
  p.sweeps = 2;
  p.thermalization = 64;
  p.seed = 31337;
  Budget b;
  b.states = 1500;
  b.chains = 2;
  EventPtr e = Event::surrounds({Complex(0.05, 0.02)});
  std::vector<MobiusMap> maps = {MobiusMap::rotation(0.3), MobiusMap::rotation(1.1)};
  ContinuityTable t = continuity_probe(e, spec.mask, maps, spec.spacing, p, b, false);
  for (const auto& row : t.rows) {
    CHECK(row.eps > 0.0);
    CHECK(std::abs(row.delta) < 3.0 * std::max(row.delta_se, 1e-3));
  }
}
