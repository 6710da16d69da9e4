#include "cocyclab/cli.hpp"

#include "config.hpp"
#include "scenarios.hpp"

#include "cocyclab/errors.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace cocyclab {
namespace {

namespace fs = std::filesystem;
using cli::ConfigError;
using cli::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json load_json(const fs::path& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw UsageError(std::string(what) + ": cannot open " + path.string());
  try {
    return json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw UsageError(std::string(what) + ": " + path.string() + ": " + e.what());
  }
}

std::string error_type(const Error& e) {
  if (dynamic_cast<const UnderflowError*>(&e)) return "underflow";
  if (dynamic_cast<const RankLossError*>(&e)) return "rank_loss";
  if (dynamic_cast<const UnresolvedSplitting*>(&e)) return "unresolved_splitting";
  if (dynamic_cast<const IncompleteEvidence*>(&e)) return "incomplete_evidence";
  if (dynamic_cast<const InsufficientHorizon*>(&e)) return "insufficient_horizon";
  if (dynamic_cast<const ParameterError*>(&e)) return "parameter";
  if (dynamic_cast<const ShapeError*>(&e)) return "shape";
  if (dynamic_cast<const PreconditionError*>(&e)) return "precondition";
  return "numerical";
}

const cli::ScenarioInfo* find_scenario(const std::string& name) {
  for (const auto& s : cli::scenarios()) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

/// Validates the top level and returns the scenario it names.
const cli::ScenarioInfo& validate_top(const cli::Node& root) {
  root.allow({"scenario", "description", "seed", "threads", "base", "cocycle", "splitting", "parameters",
              "tolerances", "outputs"});
  root.text("description", "");
  root.integer("seed", 0, std::numeric_limits<long long>::max());
  root.integer("threads", 1, 1, 256);
  if (auto o = root.optional_child("outputs")) {
    o->allow({"directory", "trace"});
    o->text("directory", "");
    o->flag("trace", true);
  }
  const std::string name = root.text("scenario");
  const cli::ScenarioInfo* s = find_scenario(name);
  if (!s) root.fail("scenario", "unknown scenario '" + name + "' (see list-scenarios)");
  return *s;
}

void write_trace(const fs::path& path, const std::vector<cli::TraceRow>& rows) {
  std::ofstream f(path);
  f << std::setprecision(17) << "step,quantity,value\n";
  for (const auto& r : rows) f << r.step << ',' << r.quantity << ',' << r.value << '\n';
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream f(path);
  f << j.dump(2) << '\n';
}

struct RunOptions {
  std::string config;
  std::string out;
  std::optional<long long> seed;
  std::optional<int> threads;
};

int do_run(const RunOptions& o, std::ostream& out, std::ostream& err) {
  const fs::path config_path = fs::absolute(o.config);
  json config = load_json(config_path, "config");
  if (!config.is_object()) throw ConfigError("config: expected an object");
  if (o.seed) config["seed"] = *o.seed;
  if (o.threads) config["threads"] = *o.threads;

  const cli::Node root(config, "config");
  const cli::ScenarioInfo& scenario = validate_top(root);
  cli::Context ctx{config, root, static_cast<std::uint64_t>(config["seed"].get<long long>()),
                   static_cast<int>(root.integer("threads", 1, 1, 256)), config_path.parent_path().string()};

  fs::path out_dir = o.out;
  if (out_dir.empty()) {
    const auto outputs = root.optional_child("outputs");
    out_dir = outputs ? outputs->text("directory", "cocyclab-out") : "cocyclab-out";
  }
  const auto outputs = root.optional_child("outputs");
  const bool want_trace = outputs ? outputs->flag("trace", true) : true;

  json report = {{"schema_version", kReportSchemaVersion},
                 {"tool", {{"name", kToolName}, {"version", kToolVersion}}},
                 {"scenario", scenario.name},
                 {"config", config},
                 {"config_digest", cli::digest(config)},
                 {"source", {{"config_dir", ctx.dir}}}};

  const auto t0 = std::chrono::steady_clock::now();
  cli::Outcome outcome;
  int code = exit_pass;
  try {
    outcome = scenario.run(ctx);
  } catch (const Error& e) {
    const json reason = {{"status", "error"}, {"type", error_type(e)}, {"message", e.what()}};
    err << reason.dump() << '\n';
    report["status"] = "error";
    report["error"] = {{"type", error_type(e)}, {"message", e.what()}};
    code = exit_numerical;
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (code == exit_pass) {
    bool all = true;
    for (const auto& [name, v] : outcome.verdicts.items()) all = all && v == "PASS";
    report["results"] = outcome.results;
    report["verdicts"] = outcome.verdicts;
    report["witnesses"] = outcome.witnesses;
    report["status"] = all ? "PASS" : "FAIL";
    code = all ? exit_pass : exit_fail;
  }
  report["timings"] = {{"total_seconds", seconds}};

  fs::create_directories(out_dir);
  write_json(out_dir / "report.json", report);
  if (want_trace && code != exit_numerical) write_trace(out_dir / "trace.csv", outcome.trace);

  out << "scenario: " << scenario.name << '\n';
  for (const auto& [name, v] : outcome.verdicts.items()) out << name << ": " << v.get<std::string>() << '\n';
  out << "status: " << report["status"].get<std::string>() << '\n';
  out << "report: " << (out_dir / "report.json").string() << '\n';
  return code;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string fmt(const Eigen::VectorXd& v) {
  std::ostringstream os;
  os << '[';
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << fmt(v(i));
  return os.str() + ']';
}

double json_number(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    return std::numeric_limits<double>::quiet_NaN();
  }
  return j.get<double>();
}

BasePoint point_from(const json& j) {
  return j.size() == 1 ? make_point({j[0].get<double>()}) : make_point({j[0].get<double>(), j[1].get<double>()});
}

int replay_domination(const json& w, const Cocycle& a, const BaseSystem& sys, std::ostream& out) {
  const int ell = w.at("ell").get<int>();
  BasePoint x = point_from(w.at("point"));
  HVector u = cli::hvector_from(w.at("u"));
  HVector v = cli::hvector_from(w.at("v"));
  out << "u = " << fmt(u.head) << " tail " << fmt(u.tail) << "  |u| = " << fmt(u.norm()) << '\n';
  out << "v = " << fmt(v.head) << " tail " << fmt(v.tail) << "  |v| = " << fmt(v.norm()) << '\n';
  double first_u = 0.0;
  for (int j = 1; j <= ell; ++j) {
    const Operator op = a(x);
    u = apply(op, u);
    v = apply(op, v);
    if (j == 1) first_u = u.norm();
    out << "step " << j << ": x = " << fmt(Eigen::VectorXd(x)) << "  |A^" << j << " u| = " << fmt(u.norm())
        << "  |A^" << j << " v| = " << fmt(v.norm()) << '\n';
    x = step(sys, x);
  }
  const double ratio = v.norm() / u.norm();
  const double recorded = json_number(w.at("ratio"));
  const double diff = std::abs(ratio - recorded);
  out << "ratio |A^" << ell << " v| / |A^" << ell << " u| = " << fmt(ratio) << '\n';
  out << "recorded ratio = " << fmt(recorded) << "  difference = " << fmt(diff) << '\n';
  if (!w.at("alpha_required").is_null()) {
    const double alpha = json_number(w.at("alpha_required"));
    out << "ratio <= alpha = " << fmt(alpha) << ": " << (ratio <= alpha ? "holds" : "violated") << '\n';
  }
  if (!w.at("theta_required").is_null()) {
    const double theta = json_number(w.at("theta_required"));
    out << "|A u| = " << fmt(first_u) << " >= theta = " << fmt(theta) << ": "
        << (first_u >= theta ? "holds" : "violated") << '\n';
  }
  const bool same = diff <= 1e-9 * std::max(1.0, std::abs(recorded));
  out << "status: " << (same ? "reproduced" : "not reproduced") << '\n';
  return same ? exit_pass : exit_fail;
}

int replay_norm_distance(const json& w, const Cocycle& a, const Cocycle& b, std::ostream& out) {
  const BasePoint x = point_from(w.at("point"));
  const double value = operator_distance(a(x), b(x));
  const double recorded = json_number(w.at("value"));
  const double bound = json_number(w.at("bound"));
  const double diff = std::abs(value - recorded);
  out << "x = " << fmt(Eigen::VectorXd(x)) << '\n';
  out << "|A(x)| = " << fmt(operator_norm(a(x))) << "  |B(x)| = " << fmt(operator_norm(b(x))) << '\n';
  out << "|A(x) - B(x)| = " << fmt(value) << '\n';
  out << "recorded = " << fmt(recorded) << "  difference = " << fmt(diff) << '\n';
  out << "|A(x) - B(x)| <= epsilon = " << fmt(bound) << ": " << (value <= bound * (1 + 1e-12) ? "holds" : "violated")
      << '\n';
  const bool same = diff <= 1e-12 * std::max(1.0, recorded);
  out << "status: " << (same ? "reproduced" : "not reproduced") << '\n';
  return same ? exit_pass : exit_fail;
}

int do_replay(const std::string& report_path, const std::string& id, std::ostream& out, std::ostream& err) {
  const fs::path path = fs::absolute(report_path);
  const json report = load_json(path, "report");
  if (!report.is_object() || !report.contains("config") || !report.contains("config_digest")) {
    throw UsageError("report: " + path.string() + " lacks config or config_digest");
  }
  const json& config = report["config"];
  const std::string recorded = report["config_digest"].is_string() ? report["config_digest"].get<std::string>() : "";
  const std::string actual = cli::digest(config);
  if (recorded != actual) {
    err << "refusing to replay: report digest " << recorded << " does not match its embedded config (digest "
        << actual << "); the report was edited or belongs to another config\n";
    return exit_replay_refused;
  }
  const json* witness = nullptr;
  if (report.contains("witnesses") && report["witnesses"].is_array()) {
    for (const auto& w : report["witnesses"]) {
      if (w.is_object() && w.value("id", "") == id) witness = &w;
    }
  }
  if (!witness) throw UsageError("report has no witness with id '" + id + "'");

  std::string dir = path.parent_path().string();
  if (report.contains("source") && report["source"].contains("config_dir")) {
    dir = report["source"]["config_dir"].get<std::string>();
  }
  const cli::Node root(config, "config");
  validate_top(root);
  const cli::Context ctx{config, root, static_cast<std::uint64_t>(config["seed"].get<long long>()), 1, dir};
  const BaseSystem sys = make_base(root.child("base"));
  const json& stage = witness->at("stage");
  const std::string kind = witness->value("kind", "");

  out << "witness " << id << " (" << kind << ", stage " << stage.at("name").get<std::string>() << ")\n";
  out << "config digest " << actual << " matches\n";
  if (kind == "domination") return replay_domination(*witness, cli::rebuild_stage(stage, ctx), sys, out);
  if (kind == "norm_distance") {
    return replay_norm_distance(*witness, cli::rebuild_stage({{"name", "A"}}, ctx), cli::rebuild_stage(stage, ctx),
                                out);
  }
  throw UsageError("witness kind '" + kind + "' has no replay");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Experiments on linear cocycles of compact operators", kToolName};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  RunOptions run;
  long long seed = 0;
  int threads = 1;
  auto* run_cmd = app.add_subcommand("run", "Run the scenario a config names and write report.json and trace.csv");
  run_cmd->add_option("--config", run.config, "Config file (JSON, comments allowed)")->required();
  run_cmd->add_option("--out", run.out, "Output directory");
  auto* seed_opt = run_cmd->add_option("--seed", seed, "Override the config seed")->check(CLI::NonNegativeNumber);
  auto* threads_opt = run_cmd->add_option("--threads", threads, "Override the config thread count")
                          ->check(CLI::Range(1, 256));

  std::string report_path;
  std::string witness_id;
  auto* replay_cmd = app.add_subcommand("replay-witness", "Recompute a witness recorded in a report");
  replay_cmd->add_option("--report", report_path, "report.json of a previous run")->required();
  replay_cmd->add_option("--id", witness_id, "Witness id")->required();

  auto* list_cmd = app.add_subcommand("list-scenarios", "List the scenarios a config may name");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_pass : exit_usage;
  }

  try {
    if (*list_cmd) {
      for (const auto& s : cli::scenarios()) out << s.name << "  " << s.summary << '\n';
      return exit_pass;
    }
    if (*run_cmd) {
      if (*seed_opt) run.seed = seed;
      if (*threads_opt) run.threads = threads;
      return do_run(run, out, err);
    }
    return do_replay(report_path, witness_id, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const json::exception& e) {
    err << "error: malformed report or config: " << e.what() << '\n';
    return exit_usage;
  } catch (const Error& e) {
    err << json{{"status", "error"}, {"type", error_type(e)}, {"message", e.what()}}.dump() << '\n';
    return exit_numerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  }
}

}  // namespace cocyclab
