#include "cocyclab/cocycle.hpp"

#include <cmath>
#include <variant>

namespace cocyclab {

FrameField FrameField::constant(Eigen::MatrixXd q) {
  FrameField f;
  f.rows_ = q.rows();
  f.cols_ = q.cols();
  f.value_ = std::move(q);
  return f;
}

FrameField FrameField::from_function(Eigen::Index rows, Eigen::Index cols, Fn fn) {
  FrameField f;
  f.rows_ = rows;
  f.cols_ = cols;
  f.fn_ = std::move(fn);
  return f;
}

Eigen::MatrixXd FrameField::at(const BasePoint& x) const {
  if (!fn_) return value_;
  Eigen::MatrixXd q = fn_(x);
  if (q.rows() != rows_ || q.cols() != cols_) throw ShapeError("frame field returned a frame of the wrong shape");
  return q;
}

SplittingSpec SplittingSpec::from_frames(FrameField unstable, FrameField central) {
  if (unstable.rows() != central.rows()) throw ShapeError("unstable and central frames live in different heads");
  SplittingSpec s;
  s.d = static_cast<int>(unstable.cols());
  s.c = static_cast<int>(central.cols());
  if (unstable.is_constant() && central.is_constant()) {
    Eigen::MatrixXd both(unstable.rows(), s.D());
    both << unstable.constant_value(), central.constant_value();
    s.center_unstable = FrameField::constant(orthonormalize(both));
  } else {
    s.center_unstable = FrameField::from_function(unstable.rows(), s.D(), [unstable, central](const BasePoint& x) {
      Eigen::MatrixXd both(unstable.rows(), unstable.cols() + central.cols());
      both << unstable.at(x), central.at(x);
      return Eigen::MatrixXd(orthonormalize(both));
    });
  }
  s.unstable = std::move(unstable);
  s.central = std::move(central);
  return s;
}

SplittingSpec SplittingSpec::from_axes(Eigen::Index m, const std::vector<int>& unstable_axes,
                                       const std::vector<int>& central_axes) {
  auto frame = [m](const std::vector<int>& axes) {
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(m, static_cast<Eigen::Index>(axes.size()));
    for (std::size_t c = 0; c < axes.size(); ++c) {
      if (axes[c] < 0 || axes[c] >= m) throw ShapeError("splitting axis outside the truncation");
      q(axes[c], static_cast<Eigen::Index>(c)) = 1.0;
    }
    return q;
  };
  return from_frames(FrameField::constant(frame(unstable_axes)), FrameField::constant(frame(central_axes)));
}

Bundle SplittingSpec::stable_bundle() const {
  const FrameField cu = center_unstable;
  if (cu.is_constant()) return {FrameField::constant(orthogonal_complement(cu.constant_value())), true};
  return {FrameField::from_function(cu.rows(), cu.rows() - cu.cols(),
                                    [cu](const BasePoint& x) { return orthogonal_complement(cu.at(x)); }),
          true};
}

namespace detail {

struct ConstantNode {
  Operator op;
};

struct TableNode {
  TableGrid grid;
};

struct RotationBumpNode {
  Cocycle inner;
  PerturbationParams params;
  SplittingSpec split;
  BaseSystem sys;
};

struct CentralScalingNode {
  Cocycle inner;
  Eigen::VectorXd log_factors;
  SplittingSpec split;
};

struct BlockPerturbationNode {
  Cocycle inner;
  std::vector<FrameField> frames;
  std::vector<Eigen::MatrixXd> blocks;
  BaseSystem sys;
};

struct CocycleNode {
  std::variant<ConstantNode, TableNode, RotationBumpNode, CentralScalingNode, BlockPerturbationNode> v;
  Eigen::Index truncation = 0;
  Tail<> tail;
};

}  // namespace detail

namespace {

Eigen::MatrixXd interpolate(const TableGrid& g, const BasePoint& x) {
  if (static_cast<std::size_t>(x.size()) != g.nodes.size()) throw ShapeError("table grid dimension differs from the base");
  auto locate = [](double coord, int n, int& i0, int& i1, double& w) {
    const double s = coord * n;
    const double fl = std::floor(s);
    i0 = static_cast<int>(fl) % n;
    if (i0 < 0) i0 += n;
    i1 = (i0 + 1) % n;
    w = s - fl;
  };
  int a0, a1;
  double wa;
  locate(x(0), g.nodes[0], a0, a1, wa);
  if (g.nodes.size() == 1) return (1.0 - wa) * g.blocks[a0] + wa * g.blocks[a1];
  int b0, b1;
  double wb;
  locate(x(1), g.nodes[1], b0, b1, wb);
  const int n0 = g.nodes[0];
  return (1.0 - wa) * (1.0 - wb) * g.blocks[a0 + n0 * b0] + wa * (1.0 - wb) * g.blocks[a1 + n0 * b0] +
         (1.0 - wa) * wb * g.blocks[a0 + n0 * b1] + wa * wb * g.blocks[a1 + n0 * b1];
}

}  // namespace

Cocycle Cocycle::constant(Operator op) {
  auto node = std::make_shared<detail::CocycleNode>();
  node->truncation = op.truncation();
  node->tail = op.tail();
  node->v = detail::ConstantNode{std::move(op)};
  return Cocycle(std::move(node));
}

Cocycle Cocycle::table(TableGrid grid) {
  if (grid.nodes.empty() || grid.nodes.size() > 2) throw ShapeError("table grids are 1- or 2-dimensional");
  std::size_t expected = 1;
  for (int n : grid.nodes) {
    if (n < 1) throw ShapeError("table grid needs at least one node per axis");
    expected *= static_cast<std::size_t>(n);
  }
  if (grid.blocks.size() != expected) throw ShapeError("table grid has the wrong number of blocks");
  const Eigen::Index m = grid.truncation();
  for (const auto& b : grid.blocks) {
    if (b.rows() != m || b.cols() != m) throw ShapeError("table blocks must share one square shape");
  }
  auto node = std::make_shared<detail::CocycleNode>();
  node->truncation = m;
  node->tail = grid.tail;
  node->v = detail::TableNode{std::move(grid)};
  return Cocycle(std::move(node));
}

Cocycle Cocycle::rotation_bump(Cocycle inner, PerturbationParams params, SplittingSpec split, BaseSystem sys) {
  if (split.center_unstable.rows() != inner.truncation()) throw ShapeError("splitting frames do not match the truncation");
  rotation_isotopy(params, 0.0, split.D());  // validates the plane
  auto node = std::make_shared<detail::CocycleNode>();
  node->truncation = inner.truncation();
  node->tail = inner.tail();
  node->v = detail::RotationBumpNode{std::move(inner), std::move(params), std::move(split), std::move(sys)};
  return Cocycle(std::move(node));
}

Cocycle Cocycle::central_scaling(Cocycle inner, Eigen::VectorXd log_factors, SplittingSpec split) {
  if (split.center_unstable.rows() != inner.truncation()) throw ShapeError("splitting frames do not match the truncation");
  if (log_factors.size() != split.D()) throw ShapeError("one scaling factor per E^cu direction is required");
  auto node = std::make_shared<detail::CocycleNode>();
  node->truncation = inner.truncation();
  node->tail = inner.tail();
  node->v = detail::CentralScalingNode{std::move(inner), std::move(log_factors), std::move(split)};
  return Cocycle(std::move(node));
}

Cocycle Cocycle::frame_block_perturbation(Cocycle inner, std::vector<FrameField> frames,
                                          std::vector<Eigen::MatrixXd> blocks, BaseSystem sys) {
  if (frames.size() != blocks.size()) throw ShapeError("one perturbation block per frame field");
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (frames[i].rows() != inner.truncation() || blocks[i].rows() != frames[i].cols() ||
        blocks[i].cols() != frames[i].cols()) {
      throw ShapeError("perturbation block does not match its frame field");
    }
  }
  auto node = std::make_shared<detail::CocycleNode>();
  node->truncation = inner.truncation();
  node->tail = inner.tail();
  node->v = detail::BlockPerturbationNode{std::move(inner), std::move(frames), std::move(blocks), std::move(sys)};
  return Cocycle(std::move(node));
}

Operator Cocycle::operator()(const BasePoint& x) const {
  if (!node_) throw PreconditionError("evaluating an empty cocycle");
  return std::visit(
      [&](const auto& n) -> Operator {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, detail::ConstantNode>) {
          return n.op;
        } else if constexpr (std::is_same_v<T, detail::TableNode>) {
          return {interpolate(n.grid, x), n.grid.tail};
        } else if constexpr (std::is_same_v<T, detail::RotationBumpNode>) {
          Operator a = n.inner(x);
          const double eta = bump(n.params, n.sys, x);
          if (eta == 0.0) return a;
          const Eigen::MatrixXd q = n.split.center_unstable.at(x);
          const Eigen::MatrixXd rot = rotation_isotopy(n.params, eta, q.cols());
          const Eigen::MatrixXd aq = a.block() * q;
          Eigen::MatrixXd shift = rot - Eigen::MatrixXd::Identity(q.cols(), q.cols());
          a.block() += aq * shift * q.transpose();
          return a;
        } else if constexpr (std::is_same_v<T, detail::CentralScalingNode>) {
          Operator a = n.inner(x);
          const Eigen::MatrixXd q = n.split.center_unstable.at(x);
          const Eigen::VectorXd gain = n.log_factors.array().exp() - 1.0;
          a.block() += (a.block() * q) * gain.asDiagonal() * q.transpose();
          return a;
        } else {
          Operator a = n.inner(x);
          const BasePoint fx = step(n.sys, x, 1);
          for (std::size_t b = 0; b < n.frames.size(); ++b) {
            a.block() += n.frames[b].at(fx) * n.blocks[b] * n.frames[b].at(x).transpose();
          }
          return a;
        }
      },
      node_->v);
}

Eigen::Index Cocycle::truncation() const { return node_ ? node_->truncation : 0; }

const Tail<>& Cocycle::tail() const {
  if (!node_) throw PreconditionError("empty cocycle has no tail");
  return node_->tail;
}

std::string Cocycle::variant() const {
  if (!node_) return "empty";
  static constexpr const char* names[] = {"constant", "table", "rotation_bump", "central_scaling",
                                          "frame_block_perturbation"};
  return names[node_->v.index()];
}

bool Cocycle::is_constant() const {
  if (!node_) return false;
  if (const auto* c = std::get_if<detail::CentralScalingNode>(&node_->v)) {
    return c->inner.is_constant() && c->split.center_unstable.is_constant();
  }
  return node_->v.index() == 0;
}

Operator cocycle_product(const Cocycle& a, const BaseSystem& sys, const BasePoint& x, int n) {
  if (n < 0) throw PreconditionError("cocycle_product: n must be non-negative");
  Operator acc = Operator::identity(a.truncation());
  BasePoint y = x;
  for (int j = 0; j < n; ++j) {
    Operator next = a(y);
    if (next.truncation() != acc.truncation()) throw ShapeError("mixed truncation dimensions along the orbit");
    acc = compose(next, acc);
    y = step(sys, y, 1);
  }
  return acc;
}

double integrability_estimate(const Cocycle& a, const BaseSystem& sys, std::uint64_t seed, std::size_t count) {
  if (count < 100) throw PreconditionError("integrability_estimate: at least 100 samples required");
  double sum = 0.0;
  for (const BasePoint& x : sample_measure(sys, seed, count)) sum += std::max(0.0, std::log(operator_norm(a(x))));
  return sum / static_cast<double>(count);
}

double restricted_norm_sup(const Cocycle& a, const FrameField& frames, const std::vector<BasePoint>& points) {
  double best = 0.0;
  for (const BasePoint& x : points) {
    best = std::max(best, spectral_norm(Eigen::MatrixXd(a(x).block() * frames.at(x))));
  }
  return best;
}

}  // namespace cocyclab
