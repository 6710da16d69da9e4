#pragma once

#include "cocyclab/cocycle.hpp"
#include "cocyclab/domination.hpp"
#include "cocyclab/perturb.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cocyclab::cli {

using nlohmann::json;

/// Schema violation; the message starts with the offending field path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Read-only view on a JSON object that validates as it reads.
class Node {
 public:
  Node(const json& j, std::string path);

  const std::string& path() const { return path_; }
  bool has(const std::string& key) const { return j_->contains(key); }
  /// Rejects keys outside `allowed`.
  void allow(std::initializer_list<const char*> allowed) const;

  Node child(const std::string& key) const;
  std::optional<Node> optional_child(const std::string& key) const;
  std::vector<Node> children(const std::string& key) const;

  std::string text(const std::string& key) const;
  std::string text(const std::string& key, const std::string& fallback) const;
  double number(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  double number_in(const std::string& key, double fallback, double lo, double hi) const;
  long long integer(const std::string& key, long long lo, long long hi) const;
  long long integer(const std::string& key, long long fallback, long long lo, long long hi) const;
  bool flag(const std::string& key, bool fallback) const;
  std::vector<double> numbers(const std::string& key) const;
  std::vector<int> integers(const std::string& key) const;

  [[noreturn]] void fail(const std::string& key, const std::string& what) const;

 private:
  const json& at(const std::string& key) const;
  const json* j_;
  std::string path_;
};

BaseSystem make_base(const Node& node);

/// Point from a coordinate array, validated against the base dimension.
BasePoint make_point_from(const Node& node, const std::string& key, const BaseSystem& sys);

struct CocycleSetup {
  Cocycle cocycle;
  std::string kind;
};

/// `dir` resolves relative table paths.
CocycleSetup make_cocycle(const Node& node, const std::string& dir);

SplittingSpec make_splitting(const Node& node, Eigen::Index m);

SamplingPlan make_sampling(const std::optional<Node>& node, std::uint64_t seed, int threads,
                           std::size_t measure_default, long long orbit_default);

/// One of "unstable", "central", "center_unstable", "stable".
Bundle bundle_by_name(const SplittingSpec& split, const std::string& name);

/// Hex FNV-1a 64 of the canonical dump of `config`.
std::string digest(const json& config);

/// JSON for doubles that may be infinite or NaN ("inf", "-inf", "nan").
json number_json(double v);
json vector_json(const Eigen::VectorXd& v);
json point_json(const BasePoint& x);
json hvector_json(const HVector& v);
HVector hvector_from(const json& j);
json exponent_json(const Exponent& e);

/// Serialized construction stage of a derived cocycle, replayable from the config cocycle.
json perturbation_json(const PerturbationParams& p);
PerturbationParams perturbation_from(const json& j);

}  // namespace cocyclab::cli
