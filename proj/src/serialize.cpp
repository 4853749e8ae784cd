#include "looplab/serialize.hpp"

#include <cmath>
#include <sstream>

namespace looplab {

namespace {

json complex_list(const std::vector<Complex>& pts) {
  json arr = json::array();
  for (Complex p : pts) arr.push_back(json::array({p.real(), p.imag()}));
  return arr;
}

std::vector<Complex> complex_list_from(const json& arr) {
  std::vector<Complex> pts;
  for (const auto& p : arr) pts.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
  return pts;
}

json complex_to_json(Complex z) { return json::array({z.real(), z.imag()}); }

Complex complex_from(const json& j) { return Complex(j.at(0).get<double>(), j.at(1).get<double>()); }

}  // namespace

json loop_to_json(const LoopPath& l) { return complex_list(l.vertices()); }

LoopPath loop_from_json(const json& j) { return LoopPath::make(complex_list_from(j)); }

json domain_to_json(const Domain& d) {
  json j;
  j["label"] = d.label();
  if (d.kind() == Domain::Kind::GeneralizedDisk) {
    j["kind"] = "generalized_disk";
    const MobiusMap& m = d.disk_map();
    j["map"] = json::object({{"a", complex_to_json(m.a())},
                             {"b", complex_to_json(m.b())},
                             {"c", complex_to_json(m.c())},
                             {"d", complex_to_json(m.d())}});
  } else {
    j["kind"] = "polygon";
    j["boundary"] = loop_to_json(d.polygon_boundary());
  }
  return j;
}

Domain domain_from_json(const json& j) {
  std::string kind = j.at("kind").get<std::string>();
  std::string label = j.value("label", "");
  if (kind == "generalized_disk") {
    const json& m = j.at("map");
    return Domain::generalized_disk(MobiusMap(complex_from(m.at("a")), complex_from(m.at("b")),
                                              complex_from(m.at("c")), complex_from(m.at("d"))),
                                    label);
  }
  if (kind == "polygon") return Domain::polygon(loop_from_json(j.at("boundary")), label);
  if (kind == "disk")
    return Domain::disk(complex_from(j.at("center")), j.at("radius").get<double>(), label);
  throw std::invalid_argument("domain_from_json: unknown kind " + kind);
}

json config_to_json(const Configuration& cfg) {
  json j;
  j["domain"] = domain_to_json(cfg.domain);
  json loops = json::array();
  for (const LoopPath& l : cfg.loops) loops.push_back(loop_to_json(l));
  j["loops"] = loops;
  return j;
}

Configuration config_from_json(const json& j) {
  Configuration cfg;
  cfg.domain = domain_from_json(j.at("domain"));
  for (const auto& l : j.at("loops")) cfg.loops.push_back(loop_from_json(l));
  return cfg;
}

json event_to_json(const Event& e) {
  json j;
  switch (e.kind()) {
    case Event::Kind::And:
    case Event::Kind::Or: {
      j["type"] = e.kind() == Event::Kind::And ? "and" : "or";
      json args = json::array();
      for (const auto& c : e.children()) args.push_back(event_to_json(*c));
      j["args"] = args;
      return j;
    }
    case Event::Kind::Not:
      j["type"] = "not";
      j["arg"] = event_to_json(*e.children()[0]);
      return j;
    case Event::Kind::Separation:
    case Event::Kind::Fattened:
      j["type"] = e.kind() == Event::Kind::Separation ? "separation" : "fattened";
      j["alpha"] = loop_to_json(e.alpha());
      j["beta"] = loop_to_json(e.beta());
      return j;
    case Event::Kind::Surrounds:
      j["type"] = "surrounds";
      j["target"] = complex_list(e.target());
      if (e.radius_cap()) j["radius_cap"] = *e.radius_cap();
      return j;
    case Event::Kind::CrossCount: {
      j["type"] = "cross_count";
      json sets = json::array();
      for (const PointSet& s : e.sets())
        sets.push_back(json::object({{"points", complex_list(s.pts)}, {"closed", s.closed}}));
      j["sets"] = sets;
      j["cmp"] = e.cmp() == Cmp::EQ ? "eq" : (e.cmp() == Cmp::GE ? "ge" : "le");
      j["count"] = e.count();
      return j;
    }
  }
  throw std::logic_error("event_to_json: unknown node");
}

EventPtr event_from_json(const json& j) {
  std::string type = j.at("type").get<std::string>();
  if (type == "and" || type == "or") {
    std::vector<EventPtr> args;
    for (const auto& a : j.at("args")) args.push_back(event_from_json(a));
    return type == "and" ? Event::conjunction(std::move(args))
                         : Event::disjunction(std::move(args));
  }
  if (type == "not") return Event::negation(event_from_json(j.at("arg")));
  if (type == "separation")
    return Event::separation(loop_from_json(j.at("alpha")), loop_from_json(j.at("beta")));
  if (type == "fattened")
    return Event::fattened(loop_from_json(j.at("alpha")), loop_from_json(j.at("beta")));
  if (type == "surrounds") {
    std::optional<double> cap;
    if (j.contains("radius_cap")) cap = j.at("radius_cap").get<double>();
    return Event::surrounds(complex_list_from(j.at("target")), cap);
  }
  if (type == "cross_count") {
    std::vector<PointSet> sets;
    for (const auto& s : j.at("sets")) {
      PointSet ps;
      ps.pts = complex_list_from(s.at("points"));
      ps.closed = s.value("closed", false);
      sets.push_back(std::move(ps));
    }
    std::string cmp = j.at("cmp").get<std::string>();
    Cmp c = cmp == "eq" ? Cmp::EQ : (cmp == "ge" ? Cmp::GE : Cmp::LE);
    return Event::cross_count(std::move(sets), c, j.at("count").get<int>());
  }
  throw std::invalid_argument("event_from_json: unknown type " + type);
}

json estimate_to_json(const Estimate& e) {
  return json::object({{"mean", e.mean},
                       {"stderr", e.stderr_},
                       {"n_eff", e.n_eff},
                       {"ci95", json::array({e.ci_lo, e.ci_hi})},
                       {"method", e.method}});
}

json limitfit_to_json(const LimitFit& f) {
  json pts = json::array();
  for (std::size_t i = 0; i < f.abscissae.size(); ++i)
    pts.push_back(json::object(
        {{"abscissa", f.abscissae[i]}, {"estimate", estimate_to_json(f.estimates[i])}}));
  const char* model = f.model == LimitFit::Model::Constant
                          ? "constant"
                          : (f.model == LimitFit::Model::Linear ? "linear" : "power");
  return json::object({{"model", model},
                       {"points", pts},
                       {"limit", estimate_to_json(f.limit)},
                       {"slope", f.slope},
                       {"exponent", f.exponent},
                       {"goodness", f.goodness}});
}

json diagnostics_to_json(const RunDiagnostics& d) {
  return json::object({{"n", d.n},
                       {"x", d.x},
                       {"seed", d.seed},
                       {"lattice_hash", hash_hex(d.lattice_hash)},
                       {"sweeps", d.sweeps},
                       {"thermalization", d.thermalization},
                       {"tau_s", d.tau_s},
                       {"tau_loops", d.tau_loops},
                       {"acceptance", d.acceptance},
                       {"states", d.states}});
}

json check_report_to_json(const CheckReport& r) {
  return json::object({{"mode", r.mode},
                       {"lhs", r.lhs},
                       {"rhs", r.rhs},
                       {"lhs_se", r.lhs_se},
                       {"rhs_se", r.rhs_se},
                       {"discrepancy", r.discrepancy},
                       {"combined_se", r.combined_se},
                       {"sigmas", r.sigmas},
                       {"verdict", r.pass ? "pass" : "fail"},
                       {"detail", r.detail}});
}

std::uint64_t json_hash(const json& j) {
  std::string s = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

std::string svg_render(const Configuration& cfg, const std::vector<SvgOverlay>& overlays) {
  BBox box = cfg.domain.bbox(256);
  for (const LoopPath& l : cfg.loops) box.expand(l.bbox());
  for (const SvgOverlay& o : overlays)
    if (o.loop) box.expand(o.loop->bbox());
  double pad = 0.05 * std::max(box.width(), box.height());
  double w = box.width() + 2 * pad, h = box.height() + 2 * pad;
  double scale = 900.0 / std::max(w, h);

  auto X = [&](double x) { return (x - box.xmin + pad) * scale; };
  auto Y = [&](double y) { return (box.ymax + pad - y) * scale; };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w * scale << "\" height=\""
      << h * scale << "\" viewBox=\"0 0 " << w * scale << " " << h * scale << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  auto path = [&](const LoopPath& l, const std::string& stroke, double width, bool dashed) {
    out << "<path d=\"";
    const auto& v = l.vertices();
    for (std::size_t i = 0; i < v.size(); ++i)
      out << (i == 0 ? 'M' : 'L') << X(v[i].real()) << ' ' << Y(v[i].imag());
    out << "Z\" fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << width << "\"";
    if (dashed) out << " stroke-dasharray=\"6 4\"";
    out << "/>\n";
  };

  path(cfg.domain.boundary_polyline(256), "#000", 2.0, false);
  for (const LoopPath& l : cfg.loops) path(l, "#2469b3", 1.0, false);
  for (const SvgOverlay& o : overlays)
    if (o.loop) path(*o.loop, o.color, 1.8, o.dashed);
  out << "</svg>\n";
  return out.str();
}

}  // namespace looplab
