#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ingrex/distill.hpp"

namespace ingrex {

enum class ShapMethod { Kernel, Exact };

std::string to_string(ShapMethod m);

struct FeatureAttribution {
  int node_id = -1;
  int explained_class = 0;
  Eigen::VectorXd phi;
  double base_value = 0.0;  // f(background)
  double value = 0.0;       // f(x)
  ShapMethod method = ShapMethod::Kernel;
};

inline constexpr int kMaxExactFeatures = 16;
inline constexpr int kMaxKernelFeatures = 63;

namespace detail {

/// x on the coalition bits, background elsewhere.
inline Eigen::VectorXd blend(const Eigen::VectorXd& x, const Eigen::VectorXd& background, std::uint64_t coalition) {
  Eigen::VectorXd z = background;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (coalition >> i & 1U) z[i] = x[i];
  return z;
}

inline void check_inputs(const Eigen::VectorXd& x, const Eigen::VectorXd& background) {
  if (x.size() != background.size())
    throw Error(ErrorCode::DimensionMismatch, "shapley: x and background differ in length");
  if (x.size() == 0) throw Error(ErrorCode::DimensionMismatch, "shapley: no features");
}

}  // namespace detail

/// Exact Shapley values by enumerating all 2^M coalitions of `f`, with
/// absent features replaced by the background.
template <typename F>
FeatureAttribution exact_shapley(F&& f, const Eigen::VectorXd& x, const Eigen::VectorXd& background) {
  detail::check_inputs(x, background);
  const int m = static_cast<int>(x.size());
  if (m > kMaxExactFeatures)
    throw Error(ErrorCode::TooManyFeatures, "exact_shapley supports at most " + std::to_string(kMaxExactFeatures) +
                                                " features, got " + std::to_string(m));
  const std::uint64_t full = (std::uint64_t{1} << m) - 1;
  std::vector<double> v(full + 1);
  for (std::uint64_t s = 0; s <= full; ++s) v[s] = f(detail::blend(x, background, s));

  // |S|! (M - |S| - 1)! / M!
  std::vector<double> weight(m);
  for (int s = 0; s < m; ++s) {
    double w = 1.0 / m;
    for (int k = 1; k <= s; ++k) w *= static_cast<double>(k) / static_cast<double>(m - k);
    weight[s] = w;
  }

  FeatureAttribution out;
  out.method = ShapMethod::Exact;
  out.phi = Eigen::VectorXd::Zero(m);
  out.base_value = v[0];
  out.value = v[full];
  for (std::uint64_t s = 0; s <= full; ++s) {
    const int size = std::popcount(s);
    for (int i = 0; i < m; ++i)
      if (!(s >> i & 1U)) out.phi[i] += weight[size] * (v[s | std::uint64_t{1} << i] - v[s]);
  }
  return out;
}

/// Kernel SHAP. Coalitions are enumerated exhaustively when n_samples covers
/// all 2^M - 2 proper ones (weighted by the Shapley kernel); otherwise
/// n_samples are drawn from the kernel distribution and weighted by count.
/// Efficiency is imposed exactly through the constrained least squares.
template <typename F>
FeatureAttribution kernel_shap(F&& f, const Eigen::VectorXd& x, const Eigen::VectorXd& background, int n_samples,
                               std::uint64_t seed) {
  detail::check_inputs(x, background);
  const int m = static_cast<int>(x.size());
  if (m > kMaxKernelFeatures)
    throw Error(ErrorCode::TooManyFeatures, "kernel_shap supports at most " + std::to_string(kMaxKernelFeatures) +
                                                " features");
  if (n_samples < 2 * m)
    throw Error(ErrorCode::TooFewSamples, "kernel_shap needs at least " + std::to_string(2 * m) +
                                              " samples for " + std::to_string(m) + " features");
  FeatureAttribution out;
  out.method = ShapMethod::Kernel;
  out.base_value = f(background);
  out.value = f(x);
  const double delta = out.value - out.base_value;
  if (m == 1) {
    out.phi = Eigen::VectorXd::Constant(1, delta);
    return out;
  }

  std::map<std::uint64_t, double> coalitions;
  const bool exhaustive = m < 62 && static_cast<double>(n_samples) >= std::ldexp(1.0, m) - 2.0;
  if (exhaustive) {
    for (std::uint64_t s = 1; s + 1 < (std::uint64_t{1} << m); ++s) {
      const int k = std::popcount(s);
      double binom = 1.0;
      for (int j = 1; j <= k; ++j) binom = binom * (m - k + j) / j;
      coalitions[s] = (m - 1) / (binom * k * (m - k));
    }
  } else {
    std::vector<double> size_weight(m - 1);
    for (int k = 1; k < m; ++k) size_weight[k - 1] = (m - 1.0) / (k * (m - k));
    std::mt19937_64 rng(seed);
    std::discrete_distribution<int> pick_size(size_weight.begin(), size_weight.end());
    std::vector<int> idx(m);
    for (int n = 0; n < n_samples; ++n) {
      const int k = pick_size(rng) + 1;
      std::iota(idx.begin(), idx.end(), 0);
      std::uint64_t s = 0;
      for (int j = 0; j < k; ++j) {
        std::uniform_int_distribution<int> pick(j, m - 1);
        std::swap(idx[j], idx[pick(rng)]);
        s |= std::uint64_t{1} << idx[j];
      }
      coalitions[s] += 1.0;
    }
  }

  // Eliminate the last feature with phi_M = delta - sum(phi_<M).
  const Eigen::Index rows = static_cast<Eigen::Index>(coalitions.size());
  Eigen::MatrixXd a(rows, m - 1);
  Eigen::VectorXd y(rows);
  Eigen::Index r = 0;
  for (const auto& [s, w] : coalitions) {
    const double sw = std::sqrt(w);
    const double last = static_cast<double>(s >> (m - 1) & 1U);
    for (int i = 0; i < m - 1; ++i) a(r, i) = sw * (static_cast<double>(s >> i & 1U) - last);
    y[r] = sw * (f(detail::blend(x, background, s)) - out.base_value - last * delta);
    ++r;
  }
  const Eigen::VectorXd head = a.completeOrthogonalDecomposition().solve(y);
  out.phi.resize(m);
  out.phi.head(m - 1) = head;
  out.phi[m - 1] = delta - head.sum();
  return out;
}

/// Surrogate probability of `cls` at feature vector z.
double surrogate_probability(const MlpParams& student, const Eigen::VectorXd& z, int cls);

/// Explains the surrogate's probability of `explained_class` (its own
/// predicted class when negative).
FeatureAttribution attribute_exact(const MlpParams& student, const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& background, int explained_class = -1);
FeatureAttribution attribute_kernel(const MlpParams& student, const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& background, int n_samples, std::uint64_t seed,
                                    int explained_class = -1);

/// Mean of the train-split feature rows (every row if the split is empty).
Eigen::VectorXd training_background(const DatasetBundle& dataset);

/// Kernel SHAP of one node against the training background.
FeatureAttribution attribute_node(const SurrogateBundle& surrogate, const DatasetBundle& dataset, int node_id,
                                  int n_samples, std::uint64_t seed);

struct AttributionSummary {
  Eigen::VectorXd mean_abs_phi;
  std::vector<int> feature_ranking;  // by mean |phi| descending, ties by index
  std::vector<int> sample_ids;
};

AttributionSummary summarize_attributions(const SurrogateBundle& surrogate, const DatasetBundle& dataset,
                                          std::span<const int> sample_ids, int n_samples, std::uint64_t seed);

/// Feature indices ordered by value descending, ties by index.
std::vector<int> rank_features(const Eigen::VectorXd& values);

}  // namespace ingrex
