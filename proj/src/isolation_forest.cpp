#include "anoml/detect/isolation_forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace anoml::detect {

std::string_view to_string(DetectErrc code) {
  switch (code) {
    case DetectErrc::TooFewSamples: return "TooFewSamples";
    case DetectErrc::DimensionMismatch: return "DimensionMismatch";
    case DetectErrc::InvalidNu: return "InvalidNu";
    case DetectErrc::BadArchitecture: return "BadArchitecture";
    case DetectErrc::InvalidParameter: return "InvalidParameter";
    case DetectErrc::CorruptPayload: return "CorruptPayload";
  }
  return "?";
}

double harmonic_approx(double i) { return std::log(i) + kEulerGamma; }

double average_path_length(double m) {
  if (m <= 1.0) return 0.0;
  return 2.0 * harmonic_approx(m - 1.0) - 2.0 * (m - 1.0) / m;
}

namespace {

class TreeBuilder {
 public:
  TreeBuilder(const MatrixXd& data, std::size_t height_limit, std::mt19937_64& rng)
      : data_(data), height_limit_(height_limit), rng_(rng) {}

  IsolationTree build(std::vector<Eigen::Index> idx) {
    IsolationTree tree;
    grow(tree, idx, 0);
    return tree;
  }

 private:
  std::int32_t grow(IsolationTree& tree, std::vector<Eigen::Index>& idx, std::size_t depth) {
    const auto id = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.push_back(IsolationNode{});
    tree.nodes[static_cast<std::size_t>(id)].size = static_cast<std::uint32_t>(idx.size());
    if (depth >= height_limit_ || idx.size() <= 1) return id;

    // Only features that vary inside the node can separate it.
    std::vector<std::pair<Eigen::Index, std::pair<double, double>>> candidates;
    for (Eigen::Index f = 0; f < data_.cols(); ++f) {
      double lo = data_(idx[0], f);
      double hi = lo;
      for (auto i : idx) {
        lo = std::min(lo, data_(i, f));
        hi = std::max(hi, data_(i, f));
      }
      if (hi > lo) candidates.push_back({f, {lo, hi}});
    }
    if (candidates.empty()) return id;

    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    const auto& [feature, range] = candidates[pick(rng_)];
    std::uniform_real_distribution<double> cut(range.first, range.second);
    const double split = cut(rng_);

    std::vector<Eigen::Index> left;
    std::vector<Eigen::Index> right;
    for (auto i : idx) (data_(i, feature) < split ? left : right).push_back(i);
    idx.clear();
    idx.shrink_to_fit();

    const auto l = grow(tree, left, depth + 1);
    const auto r = grow(tree, right, depth + 1);
    auto& node = tree.nodes[static_cast<std::size_t>(id)];
    node.feature = static_cast<std::int32_t>(feature);
    node.split = split;
    node.left = l;
    node.right = r;
    node.size = 0;
    return id;
  }

  const MatrixXd& data_;
  std::size_t height_limit_;
  std::mt19937_64& rng_;
};

}  // namespace

IsolationForest IsolationForest::fit(const MatrixXd& train, const Params& params) {
  const auto n = static_cast<std::size_t>(train.rows());
  if (n < 2) throw DetectError(DetectErrc::TooFewSamples, "isolation forest needs at least 2 rows");
  if (params.n_trees < 1 || params.subsample_size < 2)
    throw DetectError(DetectErrc::InvalidParameter, "need n_trees >= 1 and subsample_size >= 2");

  IsolationForest model;
  model.n_features_ = static_cast<std::size_t>(train.cols());
  model.subsample_size_ = params.subsample_size;
  model.height_limit_ =
      static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(params.subsample_size))));
  model.seed_ = params.seed;
  model.trees_.reserve(params.n_trees);

  for (std::size_t t = 0; t < params.n_trees; ++t) {
    std::mt19937_64 rng(mix_seed(params.seed ^ mix_seed(t)));
    std::vector<Eigen::Index> sample;
    sample.reserve(params.subsample_size);
    if (n >= params.subsample_size) {
      // Partial Fisher-Yates.
      std::vector<Eigen::Index> all(n);
      std::iota(all.begin(), all.end(), Eigen::Index{0});
      for (std::size_t k = 0; k < params.subsample_size; ++k) {
        std::uniform_int_distribution<std::size_t> pick(k, n - 1);
        std::swap(all[k], all[pick(rng)]);
        sample.push_back(all[k]);
      }
    } else {
      std::uniform_int_distribution<Eigen::Index> pick(0, static_cast<Eigen::Index>(n) - 1);
      for (std::size_t k = 0; k < params.subsample_size; ++k) sample.push_back(pick(rng));
    }
    TreeBuilder builder(train, model.height_limit_, rng);
    model.trees_.push_back(builder.build(std::move(sample)));
  }
  return model;
}

double IsolationForest::path_length(const ConstVectorRef& x) const {
  check_dim(x.size(), static_cast<Eigen::Index>(n_features_));
  double total = 0;
  for (const auto& tree : trees_) {
    std::size_t depth = 0;
    const IsolationNode* node = &tree.nodes[0];
    while (!node->external()) {
      node = &tree.nodes[static_cast<std::size_t>(x(node->feature) < node->split ? node->left
                                                                                  : node->right)];
      ++depth;
    }
    total += static_cast<double>(depth) + average_path_length(node->size);
  }
  return total / static_cast<double>(trees_.size());
}

AnomalyScore IsolationForest::score(const ConstVectorRef& x) const {
  const double c = average_path_length(static_cast<double>(subsample_size_));
  // A one-point subsample isolates nothing; every point scores neutral.
  if (!(c > 0)) return {0.5, true};
  return {std::exp2(-path_length(x) / c), true};
}

VectorXd IsolationForest::score_all(const MatrixXd& rows) const {
  VectorXd out(rows.rows());
  for (Eigen::Index i = 0; i < rows.rows(); ++i) out(i) = score(rows.row(i).transpose()).value;
  return out;
}

void IsolationForest::set_contamination(const VectorXd& train_scores, double contamination) {
  if (!(contamination > 0 && contamination < 1) || train_scores.size() == 0)
    throw DetectError(DetectErrc::InvalidParameter, "contamination must lie in (0, 1)");
  std::vector<double> s(train_scores.data(), train_scores.data() + train_scores.size());
  std::sort(s.begin(), s.end());
  const double pos = (1.0 - contamination) * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, s.size() - 1);
  threshold_ = s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

void IsolationForest::save(bytes::Writer& out) const {
  out.put<std::uint64_t>(n_features_);
  out.put<std::uint64_t>(subsample_size_);
  out.put<std::uint64_t>(height_limit_);
  out.put<std::uint64_t>(seed_);
  out.put<double>(threshold_);
  out.put<std::uint64_t>(trees_.size());
  for (const auto& tree : trees_) {
    out.put<std::uint64_t>(tree.nodes.size());
    for (const auto& n : tree.nodes) {
      out.put<std::int32_t>(n.feature);
      out.put<double>(n.split);
      out.put<std::int32_t>(n.left);
      out.put<std::int32_t>(n.right);
      out.put<std::uint32_t>(n.size);
    }
  }
}

IsolationForest IsolationForest::load(bytes::Reader& in) {
  IsolationForest m;
  m.n_features_ = in.get<std::uint64_t>();
  m.subsample_size_ = in.get<std::uint64_t>();
  m.height_limit_ = in.get<std::uint64_t>();
  m.seed_ = in.get<std::uint64_t>();
  m.threshold_ = in.get<double>();
  const auto n_trees = in.get<std::uint64_t>();
  if (n_trees == 0 || n_trees > in.remaining() || m.subsample_size_ < 2)
    throw DetectError(DetectErrc::CorruptPayload, "bad isolation forest header");
  m.trees_.resize(n_trees);
  for (auto& tree : m.trees_) {
    const auto n_nodes = in.get<std::uint64_t>();
    if (n_nodes == 0 || n_nodes > in.remaining())
      throw DetectError(DetectErrc::CorruptPayload, "bad tree size");
    tree.nodes.resize(n_nodes);
    for (auto& n : tree.nodes) {
      n.feature = in.get<std::int32_t>();
      n.split = in.get<double>();
      n.left = in.get<std::int32_t>();
      n.right = in.get<std::int32_t>();
      n.size = in.get<std::uint32_t>();
    }
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
      const auto& n = tree.nodes[i];
      if (n.external()) continue;
      // Children always follow their parent, which also rules out cycles.
      const auto limit = static_cast<std::int64_t>(tree.nodes.size());
      if (n.feature >= static_cast<std::int32_t>(m.n_features_) || n.left <= static_cast<std::int64_t>(i) ||
          n.right <= static_cast<std::int64_t>(i) || n.left >= limit || n.right >= limit)
        throw DetectError(DetectErrc::CorruptPayload, "bad tree node");
    }
  }
  return m;
}

}  // namespace anoml::detect
