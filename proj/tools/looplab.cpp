// looplab: batch experiment runner for the critical loop-gas laboratory.
//
//   looplab run <config.json> [--seed S] [--out DIR] [--threads T]
//   looplab render <record.jsonl> (--svg FILE | --csv FILE) [--line N]
//   looplab validate <config.json>
//
// Exit codes: 0 success (scientific verdicts live inside the records),
// 2 config/schema error, 3 runtime or precondition error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "looplab/runner.hpp"

namespace fs = std::filesystem;
using looplab::json;

namespace {

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  json j;
  in >> j;
  return j;
}

int do_run(const std::string& config_path, std::uint64_t seed, const std::string& out_dir,
           int threads) {
  json config;
  try {
    config = load_json(config_path);
    looplab::validate_config(config);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  try {
    looplab::RunOptions opts;
    opts.seed_override = seed;
    opts.threads = threads;
    opts.out_dir = out_dir;
    looplab::RunOutcome outcome = looplab::run_experiment(config, opts);

    fs::create_directories(out_dir);
    fs::path rec_path = fs::path(out_dir) / "records.jsonl";
    std::ofstream out(rec_path, std::ios::app);
    for (const json& rec : outcome.records) out << rec.dump() << "\n";
    std::cout << "wrote " << outcome.records.size() << " record(s) to " << rec_path.string()
              << " (config " << outcome.config_hash << ")\n";
    for (const json& rec : outcome.records) {
      if (rec.contains("report"))
        std::cout << "  " << rec.value("mode", rec.value("experiment_id", "check")) << ": "
                  << rec.at("report").at("verdict").get<std::string>()
                  << " (|d|=" << rec.at("report").at("sigmas").get<double>() << " sigma)\n";
      if (rec.contains("verdict"))
        std::cout << "  verdict: " << rec.at("verdict").get<std::string>() << "\n";
    }
    if (outcome.verdict_failure)
      std::cout << "note: at least one scientific verdict failed (see records)\n";
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "precondition error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 3;
  }
}

int do_render(const std::string& record_path, const std::string& svg_out,
              const std::string& csv_out, int line) {
  try {
    std::ifstream in(record_path);
    if (!in) throw std::invalid_argument("cannot open " + record_path);
    std::string row;
    json rec;
    int at = 0;
    bool found = false;
    while (std::getline(in, row)) {
      if (row.empty()) continue;
      if (at++ == line) {
        rec = json::parse(row);
        found = true;
        break;
      }
    }
    if (!found) throw std::invalid_argument("record line not found");
    if (!rec.contains("config_hash"))
      throw std::invalid_argument("orphan record: missing config_hash");

    if (!csv_out.empty()) {
      std::ofstream out(csv_out);
      out << looplab::series_csv(rec);
      std::cout << "wrote " << csv_out << "\n";
    }
    if (!svg_out.empty()) {
      looplab::Configuration cfg;
      std::vector<looplab::SvgOverlay> overlays;
      looplab::LoopPath alpha, beta;
      if (rec.contains("configuration")) {
        cfg = looplab::config_from_json(rec.at("configuration"));
      } else if (rec.contains("sample")) {
        cfg = looplab::config_from_json(rec.at("sample"));
      } else {
        // no stored sample: draw one from the recorded seed on a default disk
        auto spec = looplab::disk_lattice_spec({0, 0}, 1.0, 32);
        auto lat = std::make_shared<looplab::HexLattice>(spec);
        looplab::SamplerParams p;
        p.seed = rec.value("seed", 1);
        p.thermalization = 256;
        looplab::LoopGasSampler sampler(lat, p);
        sampler.next_state();
        cfg = sampler.extract();
      }
      if (rec.contains("overlays")) {
        const json& ov = rec.at("overlays");
        if (ov.contains("alpha")) {
          alpha = looplab::loop_from_json(ov.at("alpha"));
          overlays.push_back({&alpha, "#d22", false});
        }
        if (ov.contains("beta")) {
          beta = looplab::loop_from_json(ov.at("beta"));
          overlays.push_back({&beta, "#2a2", true});
        }
      }
      std::ofstream out(svg_out);
      out << looplab::svg_render(cfg, overlays);
      std::cout << "wrote " << svg_out << "\n";
    }
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "render error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo laboratory for the critical O(n) loop gas"};
  app.require_subcommand(1);

  std::string config_path, record_path;
  std::string out_dir = std::getenv("LOOPLAB_OUT") ? std::getenv("LOOPLAB_OUT") : "out";
  std::string svg_out, csv_out;
  std::uint64_t seed = 0;
  int threads = 2, line = 0;

  CLI::App* run = app.add_subcommand("run", "execute an experiment config");
  run->add_option("config", config_path, "experiment config (JSON)")->required();
  run->add_option("--seed", seed, "override the config seed");
  run->add_option("--out", out_dir, "output directory (env LOOPLAB_OUT)");
  run->add_option("--threads", threads, "worker threads");

  CLI::App* render = app.add_subcommand("render", "render a result record");
  render->add_option("record", record_path, "records.jsonl path")->required();
  render->add_option("--svg", svg_out, "write an SVG of a configuration");
  render->add_option("--csv", csv_out, "write the eps/lambda series as CSV");
  render->add_option("--line", line, "record line number (default 0)");

  CLI::App* validate = app.add_subcommand("validate", "schema-check a config");
  validate->add_option("config", config_path, "experiment config (JSON)")->required();

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return do_run(config_path, seed, out_dir, threads);
  if (render->parsed()) {
    if (svg_out.empty() && csv_out.empty()) {
      std::cerr << "render: need --svg or --csv\n";
      return 2;
    }
    return do_render(record_path, svg_out, csv_out, line);
  }
  if (validate->parsed()) {
    try {
      looplab::validate_config(load_json(config_path));
      std::cout << "ok\n";
      return 0;
    } catch (const std::exception& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return 2;
    }
  }
  return 0;
}
