#pragma once

#include "config.hpp"

#include <functional>
#include <string>
#include <vector>

namespace cocyclab::cli {

struct TraceRow {
  long long step = 0;
  std::string quantity;
  double value = 0.0;
};

/// Everything a scenario may read; the config is already validated at the top level.
struct Context {
  const json& config;
  Node root;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string dir;  // directory of the config file
};

struct Outcome {
  json results = json::object();
  json verdicts = json::object();
  json witnesses = json::array();
  std::vector<TraceRow> trace;

  void verdict(const std::string& name, bool pass) { verdicts[name] = pass ? "PASS" : "FAIL"; }
};

struct ScenarioInfo {
  std::string name;
  std::string summary;
  std::function<Outcome(const Context&)> run;
};

const std::vector<ScenarioInfo>& scenarios();

/// Rebuilds the cocycle a witness was measured on from the run's config.
Cocycle rebuild_stage(const json& stage, const Context& ctx);

}  // namespace cocyclab::cli
