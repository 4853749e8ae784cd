#pragma once

#include <string>

#include "json.hpp"
#include "looplab/annulus.hpp"

namespace looplab {

using json = nlohmann::json;

json loop_to_json(const LoopPath& l);
LoopPath loop_from_json(const json& j);

json domain_to_json(const Domain& d);
Domain domain_from_json(const json& j);

// {domain: {kind, ...}, loops: [[[x,y], ...], ...]}
json config_to_json(const Configuration& cfg);
Configuration config_from_json(const json& j);

json event_to_json(const Event& e);
inline json event_to_json(const EventPtr& e) { return event_to_json(*e); }
EventPtr event_from_json(const json& j);

json estimate_to_json(const Estimate& e);
json limitfit_to_json(const LimitFit& f);
json diagnostics_to_json(const RunDiagnostics& d);
json check_report_to_json(const CheckReport& r);

// FNV-1a over the canonical (sorted-key) dump.
std::uint64_t json_hash(const json& j);
std::string hash_hex(std::uint64_t h);

struct SvgOverlay {
  const LoopPath* loop = nullptr;
  std::string color = "#d22";
  bool dashed = false;
};

// One path per loop, domain boundary stroked separately.
std::string svg_render(const Configuration& cfg, const std::vector<SvgOverlay>& overlays = {});

}  // namespace looplab
