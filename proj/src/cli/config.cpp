#include "config.hpp"

#include "cocyclab/fixtures.hpp"
#include "cocyclab/table_io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <set>
#include <sstream>

namespace cocyclab::cli {

Node::Node(const json& j, std::string path) : j_(&j), path_(std::move(path)) {
  if (!j.is_object()) throw ConfigError(path_ + ": expected an object");
}

void Node::allow(std::initializer_list<const char*> allowed) const {
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j_->items()) {
    if (!ok.count(key)) throw ConfigError(path_ + "." + key + ": unknown field");
  }
}

void Node::fail(const std::string& key, const std::string& what) const {
  throw ConfigError(path_ + "." + key + ": " + what);
}

const json& Node::at(const std::string& key) const {
  if (!j_->contains(key)) fail(key, "required field is missing");
  return (*j_)[key];
}

Node Node::child(const std::string& key) const {
  const json& v = at(key);
  if (!v.is_object()) fail(key, "expected an object");
  return Node(v, path_ + "." + key);
}

std::optional<Node> Node::optional_child(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  return child(key);
}

std::vector<Node> Node::children(const std::string& key) const {
  const json& v = at(key);
  if (!v.is_array()) fail(key, "expected an array of objects");
  std::vector<Node> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_object()) fail(key + "[" + std::to_string(i) + "]", "expected an object");
    out.emplace_back(v[i], path_ + "." + key + "[" + std::to_string(i) + "]");
  }
  return out;
}

std::string Node::text(const std::string& key) const {
  const json& v = at(key);
  if (!v.is_string()) fail(key, "expected a string");
  return v.get<std::string>();
}

std::string Node::text(const std::string& key, const std::string& fallback) const {
  return has(key) ? text(key) : fallback;
}

double Node::number(const std::string& key) const {
  const json& v = at(key);
  if (!v.is_number()) fail(key, "expected a number");
  return v.get<double>();
}

double Node::number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

double Node::number_in(const std::string& key, double fallback, double lo, double hi) const {
  const double v = number(key, fallback);
  if (!(v >= lo && v <= hi)) {
    std::ostringstream os;
    os << "expected a number in [" << lo << ", " << hi << "], got " << v;
    fail(key, os.str());
  }
  return v;
}

long long Node::integer(const std::string& key, long long lo, long long hi) const {
  const json& v = at(key);
  if (!v.is_number_integer()) fail(key, "expected an integer");
  const long long n = v.get<long long>();
  if (n < lo || n > hi) fail(key, "expected an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return n;
}

long long Node::integer(const std::string& key, long long fallback, long long lo, long long hi) const {
  return has(key) ? integer(key, lo, hi) : fallback;
}

bool Node::flag(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const json& v = at(key);
  if (!v.is_boolean()) fail(key, "expected true or false");
  return v.get<bool>();
}

std::vector<double> Node::numbers(const std::string& key) const {
  const json& v = at(key);
  if (!v.is_array()) fail(key, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) fail(key, "expected an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::vector<int> Node::integers(const std::string& key) const {
  const json& v = at(key);
  if (!v.is_array()) fail(key, "expected an array of integers");
  std::vector<int> out;
  for (const auto& e : v) {
    if (!e.is_number_integer()) fail(key, "expected an array of integers");
    out.push_back(e.get<int>());
  }
  return out;
}

BaseSystem make_base(const Node& node) {
  node.allow({"kind", "angles"});
  const std::string kind = node.text("kind");
  if (kind == "circle_rotation") {
    if (!node.has("angles")) return circle_rotation();
    const auto a = node.numbers("angles");
    if (a.size() != 1) node.fail("angles", "circle_rotation takes one angle");
    return circle_rotation(a[0]);
  }
  if (kind == "torus_translation") {
    if (!node.has("angles")) return torus_translation();
    const auto a = node.numbers("angles");
    if (a.size() != 2) node.fail("angles", "torus_translation takes two angles");
    return torus_translation(a[0], a[1]);
  }
  if (kind == "cat_map") {
    if (node.has("angles")) node.fail("angles", "cat_map takes no angles");
    return cat_map();
  }
  node.fail("kind", "expected circle_rotation, torus_translation or cat_map");
}

BasePoint make_point_from(const Node& node, const std::string& key, const BaseSystem& sys) {
  const auto c = node.numbers(key);
  if (static_cast<int>(c.size()) != sys.dim()) node.fail(key, "point dimension must match the base");
  for (double v : c) {
    if (!(v >= 0.0 && v < 1.0)) node.fail(key, "coordinates must lie in [0,1)");
  }
  return c.size() == 1 ? make_point({c[0]}) : make_point({c[0], c[1]});
}

CocycleSetup make_cocycle(const Node& node, const std::string& dir) {
  const std::string kind = node.text("kind");
  auto tail_of = [&](const char* fallback) {
    try {
      return parse_tail(node.text("tail", fallback));
    } catch (const Error& e) {
      node.fail("tail", e.what());
    }
  };
  if (kind == "doubling_harmonic") {
    node.allow({"kind", "truncation"});
    return {doubling_harmonic_cocycle(node.integer("truncation", 32, 2, 4096)), kind};
  }
  if (kind == "constant_diagonal") {
    node.allow({"kind", "diagonal", "tail"});
    const auto d = node.numbers("diagonal");
    if (d.empty()) node.fail("diagonal", "must not be empty");
    const Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(d.data(), static_cast<Eigen::Index>(d.size()));
    return {Cocycle::constant(Operator(Eigen::MatrixXd(diag.asDiagonal()), tail_of("zero"))), kind};
  }
  if (kind == "constant") {
    node.allow({"kind", "block", "tail"});
    const auto flat = node.numbers("block");
    const auto m = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(flat.size()))));
    if (m < 1 || static_cast<std::size_t>(m * m) != flat.size()) {
      node.fail("block", "expected M*M numbers in row-major order");
    }
    Eigen::MatrixXd b(m, m);
    for (Eigen::Index r = 0; r < m; ++r) {
      for (Eigen::Index c = 0; c < m; ++c) b(r, c) = flat[static_cast<std::size_t>(r * m + c)];
    }
    return {Cocycle::constant(Operator(b, tail_of("zero"))), kind};
  }
  if (kind == "random_table") {
    node.allow({"kind", "truncation", "cells", "spread", "noise", "seed", "tail"});
    RandomTableOptions o;
    o.truncation = node.integer("truncation", 6, 1, 512);
    o.cells = static_cast<int>(node.integer("cells", 16, 1, 4096));
    o.spread = node.number_in("spread", 0.5, 0.0, 50.0);
    o.noise = node.number_in("noise", 0.3, 0.0, 50.0);
    o.tail = tail_of("zero");
    const auto seed = static_cast<std::uint64_t>(node.integer("seed", 0, std::numeric_limits<long long>::max()));
    return {random_table_cocycle(seed, o), kind};
  }
  if (kind == "table") {
    node.allow({"kind", "path"});
    std::filesystem::path p = node.text("path");
    if (p.is_relative()) p = std::filesystem::path(dir) / p;
    try {
      return {Cocycle::table(read_table(p.string())), kind};
    } catch (const Error& e) {
      node.fail("path", e.what());
    }
  }
  node.fail("kind", "expected doubling_harmonic, constant_diagonal, constant, random_table or table");
}

SplittingSpec make_splitting(const Node& node, Eigen::Index m) {
  node.allow({"unstable_axes", "central_axes"});
  const auto u = node.integers("unstable_axes");
  const auto c = node.integers("central_axes");
  std::set<int> seen;
  for (int a : u) seen.insert(a);
  for (int a : c) seen.insert(a);
  if (seen.size() != u.size() + c.size()) node.fail("central_axes", "axes must be distinct");
  for (int a : seen) {
    if (a < 0 || a >= m) node.fail("unstable_axes", "axes must lie in [0, M)");
  }
  return SplittingSpec::from_axes(m, u, c);
}

SamplingPlan make_sampling(const std::optional<Node>& node, std::uint64_t seed, int threads,
                           std::size_t measure_default, long long orbit_default) {
  SamplingPlan plan;
  plan.seed = seed;
  plan.threads = threads;
  plan.measure_samples = measure_default;
  plan.orbit_length = orbit_default;
  if (node) {
    node->allow({"measure_samples", "orbit_length"});
    plan.measure_samples = static_cast<std::size_t>(node->integer("measure_samples", static_cast<long long>(measure_default), 0, 10000000));
    plan.orbit_length = node->integer("orbit_length", orbit_default, 0, 100000000);
    if (plan.measure_samples == 0 && plan.orbit_length == 0) node->fail("orbit_length", "sampling selects no points");
  }
  return plan;
}

Bundle bundle_by_name(const SplittingSpec& split, const std::string& name) {
  if (name == "unstable") return split.unstable_bundle();
  if (name == "central") return split.central_bundle();
  if (name == "center_unstable") return split.center_unstable_bundle();
  if (name == "stable") return split.stable_bundle();
  throw ConfigError("unknown bundle '" + name + "' (expected unstable, central, center_unstable or stable)");
}

std::string digest(const json& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : config.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json number_json(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number_json(v(i)));
  return out;
}

json point_json(const BasePoint& x) { return vector_json(Eigen::VectorXd(x)); }

json hvector_json(const HVector& v) { return {{"head", vector_json(v.head)}, {"tail", vector_json(v.tail)}}; }

HVector hvector_from(const json& j) {
  auto vec = [](const json& a) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
    return v;
  };
  return {vec(j.at("head")), vec(j.at("tail"))};
}

json exponent_json(const Exponent& e) { return e.is_finite() ? json(e.value) : json("-inf"); }

json perturbation_json(const PerturbationParams& p) {
  return {{"center", point_json(p.p)},  {"r", p.r},         {"inner_fraction", p.inner_fraction},
          {"omega", p.omega},           {"epsilon", p.epsilon}, {"delta", p.delta},
          {"plane", {p.plane_first, p.plane_second}}};
}

PerturbationParams perturbation_from(const json& j) {
  PerturbationParams p;
  const auto& c = j.at("center");
  p.p = c.size() == 1 ? make_point({c[0].get<double>()}) : make_point({c[0].get<double>(), c[1].get<double>()});
  p.r = j.at("r").get<double>();
  p.inner_fraction = j.at("inner_fraction").get<double>();
  p.omega = j.at("omega").get<double>();
  p.epsilon = j.at("epsilon").get<double>();
  p.delta = j.at("delta").get<double>();
  p.plane_first = j.at("plane")[0].get<int>();
  p.plane_second = j.at("plane")[1].get<int>();
  return p;
}

}  // namespace cocyclab::cli
