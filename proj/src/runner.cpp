#include "looplab/runner.hpp"

#include <chrono>
#include <cmath>

#include "looplab/rng.hpp"

namespace looplab {

namespace {

std::string now_iso8601() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&t));
  return buf;
}

json base_record(const json& config, const std::string& experiment) {
  json rec;
  json hashable = config;
  rec["experiment_id"] = experiment;
  rec["config_hash"] = hash_hex(json_hash(hashable));
  rec["timestamp"] = now_iso8601();
  return rec;
}

SamplerParams params_from(const json& config, std::uint64_t seed) {
  const json& m = config.at("model");
  SamplerParams p;
  p.n = m.at("n").get<double>();
  p.x = m.value("x", 0.0);
  p.sweeps = m.value("sweeps", 2);
  p.thermalization = m.value("thermalization", -1);
  // cluster flips keep the slow large-loop modes mixed; available at n = 1
  p.cluster_per_sweep = m.value("cluster", p.n == 1.0 ? 2 : 0);
  p.seed = seed;
  return p;
}

LatticeSpec lattice_from(const json& config) {
  const json& l = config.at("lattice");
  Domain d = domain_from_json(l.at("domain"));
  if (l.contains("spacing")) return LatticeSpec{l.at("spacing").get<double>(), d};
  int cells = l.value("cells", 32);
  BBox bb = d.bbox(256);
  return LatticeSpec{std::max(bb.width(), bb.height()) / (std::sqrt(3.0) * cells), d};
}

Budget budget_from(const json& config, int threads) {
  Budget b;
  if (config.contains("budget")) {
    const json& j = config.at("budget");
    b.states = j.value("states", 2000);
    b.chains = j.value("chains", 2);
  }
  b.threads = threads;
  return b;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("config: " + what);
}

}  // namespace

LatticeSpec strip_patch_spec(int faces) {
  // a strip of k faces carries 5k+1 edges; k = 4 is the largest within the
  // 24-edge enumeration bound
  if (faces < 1 || faces > 4)
    throw std::invalid_argument("strip_patch_spec: faces must be in [1,4]");
  LatticeSpec spec;
  spec.spacing = 1.0;
  // Hexagon centers sit sqrt(3) apart along x; the mask hugs `faces` of them.
  double w = std::sqrt(3.0) * (faces - 1);
  spec.mask = Domain::polygon(
      LoopPath::make({{-1.2, -1.45}, {w + 1.2, -1.45}, {w + 1.2, 1.45}, {-1.2, 1.45}}),
      "strip-patch");
  return spec;
}

EventPtr random_patch_event(std::mt19937_64& rng, const HexLattice& patch) {
  const auto& faces = patch.faces();
  std::uniform_int_distribution<int> face_pick(0, patch.face_count() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double a = patch.spec().spacing;

  auto atom = [&]() -> EventPtr {
    double roll = unit(rng);
    Complex c1 = faces[face_pick(rng)].center;
    if (roll < 0.34) {
      // surrounds: a face center, sometimes with a radius cap
      std::optional<double> cap;
      if (unit(rng) < 0.4) cap = extent_radius(LoopPath::circle(c1, 1.2 * a, 12),
                                               Domain::unit_disk()).radius;
      return Event::surrounds({c1 + Complex(0.07 * a * unit(rng), 0.05 * a * unit(rng))}, cap);
    }
    if (roll < 0.72) {
      // cross count of a random chord
      Complex c2 = faces[face_pick(rng)].center;
      Complex d1 = std::polar(0.9 * a, 2 * M_PI * unit(rng));
      PointSet seg = PointSet::polyline({c1 + d1, c2 - d1});
      double r2 = unit(rng);
      Cmp cmp = r2 < 0.4 ? Cmp::GE : (r2 < 0.8 ? Cmp::EQ : Cmp::LE);
      int count = cmp == Cmp::GE ? 1 : (unit(rng) < 0.5 ? 0 : 1);
      return Event::cross_count({seg}, cmp, count);
    }
    // separation between small rings around two distinct face centers
    int f1 = face_pick(rng), f2 = face_pick(rng);
    if (f1 == f2) f2 = (f2 + 1) % patch.face_count();
    Complex p1 = faces[f1].center, p2 = faces[f2].center;
    if (patch.face_count() == 1) p2 = p1 + Complex(2.5 * a, 0.0);
    double r = (0.55 + 0.2 * unit(rng)) * a;
    if (std::abs(p1 - p2) < 2.2 * r) r = 0.4 * std::abs(p1 - p2);
    return Event::separation(LoopPath::circle(p1, r, 24, 0.21), LoopPath::circle(p2, r, 24, 0.37));
  };

  double shape = unit(rng);
  if (shape < 0.45) return atom();
  if (shape < 0.65) return Event::negation(atom());
  if (shape < 0.85) return Event::conjunction({atom(), atom()});
  return Event::disjunction({atom(), Event::negation(atom())});
}

OracleCalibration run_oracle_calibration(const std::vector<int>& patch_faces,
                                         const std::vector<double>& n_values,
                                         int events_per_patch, long long states,
                                         std::uint64_t seed, int threads) {
  struct Trial {
    std::shared_ptr<const HexLattice> lattice;
    const PatchEnsemble* ensemble;
    EventPtr event;
    double n, x;
    std::uint64_t seed;
  };
  std::vector<std::shared_ptr<const HexLattice>> lattices;
  std::vector<std::unique_ptr<PatchEnsemble>> ensembles;
  for (int f : patch_faces) {
    auto lat = std::make_shared<const HexLattice>(strip_patch_spec(f));
    ensembles.push_back(std::make_unique<PatchEnsemble>(lat));
    lattices.push_back(std::move(lat));
  }

  std::vector<Trial> trials;
  auto rng = make_engine(seed);
  for (std::size_t pi = 0; pi < lattices.size(); ++pi) {
    for (double n : n_values) {
      for (int e = 0; e < events_per_patch; ++e) {
        Trial t;
        t.lattice = lattices[pi];
        t.ensemble = ensembles[pi].get();
        t.event = random_patch_event(rng, *lattices[pi]);
        t.n = n;
        t.x = critical_x(n);
        t.seed = derive_seed(seed, trials.size() + 1);
        trials.push_back(std::move(t));
      }
    }
  }

  std::vector<double> pulls(trials.size(), 0.0);
  parallel_for(static_cast<int>(trials.size()), threads, [&](int i) {
    const Trial& t = trials[i];
    double exact = t.ensemble->probability(
        [&](const Configuration& cfg) { return evaluate(*t.event, cfg); }, t.n, t.x);
    SamplerParams p;
    p.n = t.n;
    p.x = t.x;
    p.sweeps = 2;
    p.thermalization = 128;
    p.seed = t.seed;
    LoopGasSampler sampler(t.lattice, p);
    std::vector<double> rho;
    rho.reserve(states);
    for (long long k = 0; k < states; ++k) {
      sampler.next_state();
      rho.push_back(evaluate(*t.event, sampler.extract()) ? 1.0 : 0.0);
    }
    Estimate est = series_estimate(rho);
    double diff = std::abs(est.mean - exact);
    pulls[i] = est.stderr_ > 0.0 ? diff / est.stderr_ : (diff == 0.0 ? 0.0 : INFINITY);
  });

  OracleCalibration out;
  out.trials = static_cast<int>(trials.size());
  out.pulls = pulls;
  for (double p : pulls)
    if (p <= 3.0) ++out.within;
  out.coverage = out.trials ? static_cast<double>(out.within) / out.trials : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Config schema

void validate_config(const json& config) {
  require(config.is_object(), "config must be a JSON object");
  require(config.value("schema", 0) == 1, "schema must be 1");
  require(config.contains("kind") && config.at("kind").is_string(), "kind missing");
  std::string kind = config.at("kind").get<std::string>();
  const std::vector<std::string> kinds = {"estimate",     "continuity_probe", "nu_b",
                                          "sphere_check", "annulus_check",    "corss",
                                          "oracle_calibration"};
  require(std::find(kinds.begin(), kinds.end(), kind) != kinds.end(),
          "unknown kind '" + kind + "'");
  require(config.contains("seed") && config.at("seed").is_number_integer(), "seed missing");
  if (kind != "oracle_calibration") {
    require(config.contains("model") && config.at("model").contains("n"), "model.n missing");
    double n = config.at("model").at("n").get<double>();
    require(n > 0.0 && n <= 2.0, "model.n must be in (0,2]");
  }
  if (kind == "estimate" || kind == "continuity_probe") {
    require(config.contains("lattice") && config.at("lattice").contains("domain"),
            "lattice.domain missing");
    require(config.contains("event"), "event missing");
    (void)event_from_json(config.at("event"));  // parse check
    (void)domain_from_json(config.at("lattice").at("domain"));
  }
  if (kind == "continuity_probe")
    require(config.contains("maps"), "maps missing for continuity_probe");
  if (kind == "sphere_check" || kind == "annulus_check") {
    require(config.contains("mode"), "mode missing");
  }
  if (kind == "corss") require(config.contains("radii"), "radii missing");
}

// ---------------------------------------------------------------------------
// Experiments

namespace {

json run_estimate(const json& config, std::uint64_t seed, int threads) {
  LatticeSpec spec = lattice_from(config);
  EventPtr event = event_from_json(config.at("event"));
  SamplerParams p = params_from(config, seed);
  Budget b = budget_from(config, threads);
  RunDiagnostics diag;
  Estimate est = estimate_prob(event, spec, p, b);
  // rerun collector for diagnostics through the shared stream helper
  json rec = base_record(config, "estimate");
  rec["event_hash"] = hash_hex(event_hash(*event));
  rec["domain_hash"] = hash_hex(json_hash(domain_to_json(spec.mask)));
  rec["seed"] = seed;
  rec["estimate"] = estimate_to_json(est);
  (void)diag;
  return rec;
}

json run_continuity(const json& config, std::uint64_t seed, int threads) {
  LatticeSpec spec = lattice_from(config);
  EventPtr event = event_from_json(config.at("event"));
  SamplerParams p = params_from(config, seed);
  Budget b = budget_from(config, threads);
  const json& mj = config.at("maps");
  std::vector<MobiusMap> maps;
  std::string mkind = mj.value("kind", "translation");
  if (mkind == "translation") {
    double angle = mj.value("angle", 0.0);
    for (double e : mj.at("eps")) maps.push_back(MobiusMap::translation(std::polar(e, angle)));
  } else if (mkind == "rotation") {
    for (double a : mj.at("angles")) maps.push_back(MobiusMap::rotation(a));
  } else {
    throw std::invalid_argument("config: maps.kind must be translation or rotation");
  }
  bool lip = config.value("lipschitz", false);
  ContinuityTable t = continuity_probe(event, spec.mask, maps, spec.spacing, p, b, lip);
  json rows = json::array();
  for (const auto& r : t.rows)
    rows.push_back(json::object({{"eps", r.eps},
                                 {"prob", estimate_to_json(r.prob)},
                                 {"delta", r.delta},
                                 {"delta_se", r.delta_se},
                                 {"ratio", r.ratio},
                                 {"ratio_se", r.ratio_se}}));
  json rec = base_record(config, "continuity_probe");
  rec["seed"] = seed;
  rec["base"] = estimate_to_json(t.base);
  rec["rows"] = rows;
  if (lip) {
    rec["sup_ratio"] = t.sup_ratio;
    rec["sup_ratio_se"] = t.sup_ratio_se;
    rec["trend_slope"] = t.trend.slope;
    rec["trend_slope_se"] = t.trend.slope_se;
  }
  return rec;
}

json run_nu_b(const json& config, std::uint64_t seed, int threads, bool* verdict_fail) {
  const json& nb = config.at("nu_b");
  NuBParams base;
  base.disk_cells = nb.value("disk_cells", 96);
  base.chain = params_from(config, seed);
  double br = nb.value("b_radius", 1.0);
  for (int k = 0; k < 12; ++k)
    base.b_set.push_back(std::polar(br, 2 * M_PI * k / 12.0));
  int samples = nb.value("samples", 140);
  int walks = nb.value("crad_walks", 800);

  // Surrounding loops get scarce fast with scale, so both stability windows
  // sit at the bottom of the feasible range: one octave split in half.
  LatticeSpec spec = disk_lattice_spec({0.0, 0.0}, 1.0, base.disk_cells);
  double lmin = nb.value("lambda_min", 8.0 * spec.spacing / br);
  double lmax = std::min(nb.value("lambda_max", 2.0 * lmin), 0.25);
  double lmid = std::sqrt(lmin * lmax);

  struct Job {
    double lmin, lmax, scale_b;
    std::uint64_t seed;
  };
  std::vector<Job> jobs = {{lmin, lmid, 1.0, seed},
                           {lmid, lmax, 1.0, derive_seed(seed, 2)},
                           {lmin, lmax, 1.0, derive_seed(seed, 3)},
                           {lmin, lmax, 1.0, derive_seed(seed, 4)},
                           {lmin, lmax, 1.5, derive_seed(seed, 5)}};
  std::vector<std::vector<double>> crads(jobs.size());
  std::vector<double> fallbacks(jobs.size(), 0.0);
  parallel_for(static_cast<int>(jobs.size()), threads, [&](int j) {
    NuBParams pp = base;
    pp.lambda_min = jobs[j].lmin;
    pp.lambda_max = jobs[j].lmax;
    pp.chain.seed = jobs[j].seed;
    double sb = jobs[j].scale_b;
    if (sb != 1.0) {
      for (Complex& p : pp.b_set) p *= sb;
      pp.lambda_min /= sb;
      pp.lambda_max /= sb;
    }
    NuBSampler nub(pp);
    std::uint64_t wseed = derive_seed(jobs[j].seed, 0xccull);
    for (int i = 0; i < samples; ++i) {
      NuBSample smp = nub.next();
      auto est = conformal_radius(smp.loop, Point(0.0, 0.0), static_cast<std::size_t>(walks),
                                  derive_seed(wseed, i));
      crads[j].push_back(est.value / sb);
    }
    fallbacks[j] = nub.fallback_rate();
  });

  KSResult window = two_sample_ks(crads[0], crads[1]);
  KSResult seeds = two_sample_ks(crads[2], crads[3]);
  KSResult scaling = two_sample_ks(crads[2], crads[4]);

  json rec = base_record(config, "nu_b");
  rec["seed"] = seed;
  rec["lambda_window"] = json::array({lmin, lmax});
  rec["fallback_rates"] = fallbacks;
  rec["window_ks"] = json::object({{"D", window.statistic}, {"p", window.p_value}});
  rec["seed_ks"] = json::object({{"D", seeds.statistic}, {"p", seeds.p_value}});
  rec["scaling_ks"] = json::object({{"D", scaling.statistic}, {"p", scaling.p_value}});
  bool pass = window.p_value > 0.01 && seeds.p_value > 0.01 && scaling.p_value > 0.01;
  rec["verdict"] = pass ? "pass" : "fail";
  if (!pass) *verdict_fail = true;
  return rec;
}

EventPtr default_sphere_event(double r) {
  return Event::surrounds({Complex(r, 0.0), Complex(-0.5 * r, 0.3 * r)});
}

SpherePlan plan_from(const json& config, std::uint64_t seed) {
  SpherePlan plan;
  plan.nu.disk_cells = 64;
  json pj = config.value("plan", json::object());
  plan.outer_samples = pj.value("outer", 600);
  plan.inner_cells = pj.value("inner_cells", plan.inner_cells);
  plan.inner_budget.states = pj.value("inner_states", plan.inner_budget.states);
  plan.nu.disk_cells = pj.value("disk_cells", 64);
  // window default: [5, 9] lattice spacings of inner-disk radius; surrounding
  // loops get scarce quickly above that scale
  double spacing = 2.0 / (std::sqrt(3.0) * plan.nu.disk_cells);
  plan.nu.lambda_min = pj.value("lambda_min", 5.0 * spacing);
  plan.nu.lambda_max = pj.value("lambda_max", 9.0 * spacing);
  plan.nu.chain = params_from(config, seed);
  plan.inner_budget.chains = 1;
  return plan;
}

json run_sphere_check(const json& config, std::uint64_t seed, int threads, bool* verdict_fail) {
  std::string mode = config.at("mode").get<std::string>();
  EventPtr X = config.contains("event") ? event_from_json(config.at("event"))
                                        : default_sphere_event(0.4);
  SpherePlan plan = plan_from(config, seed);
  plan.threads = threads;

  json rec = base_record(config, "sphere_check");
  rec["seed"] = seed;
  rec["mode"] = mode;
  CheckReport report;
  if (mode == "h_independence") {
    SpherePlan p1 = plan;
    p1.pole = Point::infinity();
    SpherePlan p2 = plan;
    p2.pole = Point(config.value("pole2", json::array({3.0, 1.2})).at(0).get<double>(),
                    config.at("pole2").at(1).get<double>());
    p2.nu.chain.seed = derive_seed(seed, 21);
    SphereEstimate e1 = estimate_prob_sphere(X, p1);
    SphereEstimate e2 = estimate_prob_sphere(X, p2);
    report = make_check_report("h_independence", e1.value, e2.value);
    rec["fallback_rates"] = json::array({e1.fallback_rate, e2.fallback_rate});
  } else if (mode == "rotation") {
    double angle = config.value("angle", 2.0 * M_PI / 3.0);
    report = check_global_invariance(X, MobiusMap::rotation(angle), plan);
  } else if (mode == "identity") {
    report = check_global_invariance(X, MobiusMap::identity(), plan);
  } else if (mode == "mirror") {
    report = check_mirror_symmetry(X, plan);
  } else if (mode == "two_route") {
    std::vector<double> lambdas;
    double a = 2.0 / (std::sqrt(3.0) * plan.nu.disk_cells);
    for (double l : config.value("lambdas", json::array()))  // absolute values
      lambdas.push_back(l);
    if (lambdas.empty()) lambdas = {9.0 * a, 7.0 * a, 5.5 * a};
    SamplerParams dp = params_from(config, derive_seed(seed, 31));
    Budget db = budget_from(config, threads);
    TwoRouteReport rep = check_two_route(X, plan, lambdas, dp, db);
    report = rep.agreement;
    rec["max_pointwise_sigmas"] = rep.max_pointwise_sigmas;
    rec["direct_fit"] = limitfit_to_json(rep.direct_fit);
    rec["nested_fit"] = limitfit_to_json(rep.nested_fit);
  } else if (mode == "factorization") {
    FactorizationInputs in;
    in.X = X;
    in.Xprime = Event::surrounds({Complex(-0.55, -0.25)});
    in.z = Point(0.0, 0.0);
    in.zprime = Point::infinity();
    in.C = Domain::unit_disk();
    in.cells = config.value("cells", 48);
    for (double l : config.value("lambdas", json::array({0.35, 0.28, 0.22, 0.17, 0.13})))
      in.lambdas.push_back(l);
    in.params = params_from(config, derive_seed(seed, 31));
    in.budget = budget_from(config, threads);
    report = check_factorization(in, plan);
    report.mode = mode;
  } else {
    throw std::invalid_argument("config: unknown sphere_check mode " + mode);
  }
  rec["report"] = check_report_to_json(report);
  if (!report.pass) *verdict_fail = true;
  return rec;
}

json run_annulus_check(const json& config, std::uint64_t seed, int threads,
                       bool* verdict_fail) {
  std::string mode = config.at("mode").get<std::string>();
  SamplerParams p = params_from(config, seed);
  AnnulusBudget budget;
  if (config.contains("budget")) {
    budget.target_accept = config.at("budget").value("target_accept", budget.target_accept);
    budget.cap_states = config.at("budget").value("cap_states", budget.cap_states);
    budget.chains = config.at("budget").value("chains", budget.chains);
  }
  budget.threads = threads;
  int cells = config.value("cells", 48);
  double a_radius = config.value("a_radius", 0.45);
  double spacing = 2.0 / (std::sqrt(3.0) * cells);
  Domain C = Domain::unit_disk();
  Domain A = Domain::disk({0.0, 0.0}, a_radius);
  std::vector<double> epsilons;
  if (config.contains("epsilons")) {
    for (double e : config.at("epsilons")) epsilons.push_back(e);
  } else {
    epsilons = partner_eps_grid(spacing, config.value("eps0", 0.5 * a_radius), 4);
  }

  json rec = base_record(config, "annulus_check");
  rec["seed"] = seed;
  rec["mode"] = mode;
  CheckReport report;
  if (mode == "thcr1") {
    EventPtr X = config.contains("event")
                     ? event_from_json(config.at("event"))
                     : Event::surrounds({Complex(0.0, 0.0), Complex(0.12, 0.05)});
    PartnerFamily fam = radial_family(A, epsilons);
    report = verify_thcr1(X, C, fam, spacing, p, budget);
  } else if (mode == "u_independence") {
    EventPtr X = config.contains("event")
                     ? event_from_json(config.at("event"))
                     : Event::surrounds({Complex(0.75, 0.0)});
    PartnerFamily fam1 = radial_family(A, epsilons);
    PartnerFamily fam2 = radial_family(A, epsilons, 96, 0.35, 3, 0.7);
    AnnulusEstimate e1 = estimate_prob_annulus(X, C, fam1, spacing, p, budget);
    SamplerParams p2 = p;
    p2.seed = derive_seed(seed, 77);
    AnnulusEstimate e2 = estimate_prob_annulus(X, C, fam2, spacing, p2, budget);
    report = make_check_report("u_independence", e1.fit.limit, e2.fit.limit);
    rec["acceptance"] = json::array({e1.acceptance, e2.acceptance});
  } else if (mode == "thcr2") {
    Thcr2Inputs in;
    in.X = config.contains("event") ? event_from_json(config.at("event"))
                                    : Event::surrounds({Complex(0.7, 0.0)});
    in.a_radius = config.value("a_radius", 0.3);
    in.epsilons = epsilons;
    in.cells = cells;
    in.params = p;
    in.budget = budget;
    report = verify_thcr2(in);
  } else if (mode == "theopt") {
    TheoptInputs in;
    // a crossing event keeps the conditional ratios well away from 0
    in.X = config.contains("event")
               ? event_from_json(config.at("event"))
               : Event::cross_count(
                     {PointSet::polyline({Complex(-0.72, -0.1), Complex(-0.45, 0.08)})},
                     Cmp::GE, 1);
    double ar = config.value("a_radius", 0.3);
    in.A = Domain::disk({0.2, 0.0}, ar);
    in.z = Point(0.2, 0.0);
    for (double l : config.value("lambdas", json::array({1.0, 0.8, 0.65, 0.5})))
      in.lambdas.push_back(l);
    // absolute eps grid, valid for the smallest shrunk copy of A
    if (config.contains("epsilons")) {
      in.epsilons = epsilons;
    } else {
      double lmin = in.lambdas.back();
      in.epsilons = partner_eps_grid(spacing, std::min(0.45 * ar * lmin + 4.0 * spacing, 0.8 * ar * lmin), 3);
    }
    in.cells = cells;
    in.params = p;
    in.budget = budget;
    report = verify_theopt(in);
  } else if (mode == "thcr3") {
    EventPtr X = config.contains("event") ? event_from_json(config.at("event"))
                                          : Event::surrounds({Complex(0.75, 0.05)});
    PartnerFamily fam = radial_family(A, epsilons);
    MobiusMap g = MobiusMap::identity();
    if (config.value("map", "identity") == std::string("similarity"))
      g = MobiusMap::translation({0.2, -0.1}).compose(MobiusMap::rotation(0.8));
    report = verify_thcr3(X, C, fam, g, spacing, p, budget);
  } else {
    throw std::invalid_argument("config: unknown annulus_check mode " + mode);
  }
  rec["report"] = check_report_to_json(report);
  if (!report.pass) *verdict_fail = true;
  return rec;
}

json run_corss(const json& config, std::uint64_t seed, int threads, bool* verdict_fail) {
  CorssInputs in;
  const json radii = config.value("radii", json::array({0.3, 0.6, 1.0}));
  in.A = Domain::disk({0.0, 0.0}, radii.at(0).get<double>());
  in.B = Domain::disk({0.0, 0.0}, radii.at(1).get<double>());
  in.C = Domain::disk({0.0, 0.0}, radii.at(2).get<double>());
  for (double e : config.value("eps_left", json::array({0.2, 0.15, 0.11, 0.085})))
    in.eps_left.push_back(e);
  for (double e : config.value("eps_right", json::array({0.2, 0.15, 0.11})))
    in.eps_right.push_back(e);
  for (double e : config.value("eps_inner", json::array({0.2, 0.15, 0.11})))
    in.eps_inner.push_back(e);
  in.amp_u = config.value("amp_u", 0.0);
  in.amp_uprime = config.value("amp_uprime", 0.0);
  in.cells = config.value("cells", 44);
  in.params = params_from(config, seed);
  if (config.contains("budget")) {
    in.budget.target_accept = config.at("budget").value("target_accept", 400);
    in.budget.cap_states = config.at("budget").value("cap_states", 30000);
    in.budget.chains = config.at("budget").value("chains", 2);
  }
  in.budget.threads = threads;
  CorssReport rep = ratio_limit_corss(in);
  json rec = base_record(config, "corss");
  rec["seed"] = seed;
  rec["left_fit"] = limitfit_to_json(rep.left);
  rec["right_fit"] = limitfit_to_json(rep.right);
  rec["report"] = check_report_to_json(rep.agreement);
  if (!rep.agreement.pass) *verdict_fail = true;
  return rec;
}

json run_calibration(const json& config, std::uint64_t seed, int threads,
                     bool* verdict_fail) {
  std::vector<int> patches;
  for (int f : config.value("patch_faces", json::array({1, 3, 4}))) patches.push_back(f);
  std::vector<double> ns;
  for (double n : config.value("n_values", json::array({0.5, 1.0, 2.0}))) ns.push_back(n);
  int events = config.value("events", 10);
  long long states = config.value("states", 4000);
  OracleCalibration cal = run_oracle_calibration(patches, ns, events, states, seed, threads);
  json rec = base_record(config, "oracle_calibration");
  rec["seed"] = seed;
  rec["trials"] = cal.trials;
  rec["within_3sigma"] = cal.within;
  rec["coverage"] = cal.coverage;
  double threshold = config.value("coverage_threshold", 0.97);
  rec["verdict"] = cal.coverage >= threshold ? "pass" : "fail";
  if (cal.coverage < threshold) *verdict_fail = true;
  return rec;
}

}  // namespace

RunOutcome run_experiment(const json& config, const RunOptions& opts) {
  validate_config(config);
  std::uint64_t seed = opts.seed_override ? opts.seed_override
                                          : config.at("seed").get<std::uint64_t>();
  std::string kind = config.at("kind").get<std::string>();
  RunOutcome out;
  out.config_hash = hash_hex(json_hash(config));
  bool verdict_fail = false;
  if (kind == "estimate") {
    out.records.push_back(run_estimate(config, seed, opts.threads));
  } else if (kind == "continuity_probe") {
    out.records.push_back(run_continuity(config, seed, opts.threads));
  } else if (kind == "nu_b") {
    out.records.push_back(run_nu_b(config, seed, opts.threads, &verdict_fail));
  } else if (kind == "sphere_check") {
    out.records.push_back(run_sphere_check(config, seed, opts.threads, &verdict_fail));
  } else if (kind == "annulus_check") {
    out.records.push_back(run_annulus_check(config, seed, opts.threads, &verdict_fail));
  } else if (kind == "corss") {
    out.records.push_back(run_corss(config, seed, opts.threads, &verdict_fail));
  } else if (kind == "oracle_calibration") {
    out.records.push_back(run_calibration(config, seed, opts.threads, &verdict_fail));
  }
  out.verdict_failure = verdict_fail;
  return out;
}

std::string series_csv(const json& record) {
  std::ostringstream out;
  out << "series,abscissa,mean,stderr\n";
  auto emit_fit = [&](const std::string& name, const json& fit) {
    for (const auto& pt : fit.at("points"))
      out << name << ',' << pt.at("abscissa").get<double>() << ','
          << pt.at("estimate").at("mean").get<double>() << ','
          << pt.at("estimate").at("stderr").get<double>() << '\n';
    out << name << "_limit,0,"
        << fit.at("limit").at("mean").get<double>() << ','
        << fit.at("limit").at("stderr").get<double>() << '\n';
  };
  if (record.contains("left_fit")) emit_fit("left", record.at("left_fit"));
  if (record.contains("right_fit")) emit_fit("right", record.at("right_fit"));
  if (record.contains("rows")) {
    for (const auto& r : record.at("rows"))
      out << "continuity," << r.at("eps").get<double>() << ','
          << r.at("prob").at("mean").get<double>() << ','
          << r.at("prob").at("stderr").get<double>() << '\n';
  }
  return out.str();
}

}  // namespace looplab
