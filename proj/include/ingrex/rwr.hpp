#pragma once

#include <cmath>
#include <string>

#include "ingrex/sparse.hpp"

namespace ingrex {

struct RwrConfig {
  double d = 0.85;  // keep-going probability
  int max_iters = 1000;
  double tolerance = 1e-9;  // L1 change between iterates
  int top_k = 10;

  void validate() const {
    if (!(d >= 0.0 && d < 1.0)) throw Error(ErrorCode::BadDistribution, "rwr: d must lie in [0, 1)");
    if (!(tolerance > 0.0)) throw Error(ErrorCode::InvalidConfig, "rwr: tolerance must be > 0");
    if (max_iters < 1) throw Error(ErrorCode::InvalidConfig, "rwr: max_iters must be >= 1");
    if (top_k < 1) throw Error(ErrorCode::InvalidConfig, "rwr: top_k must be >= 1");
  }
};

template <typename Scalar = double>
struct RwrResult {
  Vector<Scalar> scores;
  int iterations_used = 0;
  Scalar residual = 0;
  bool converged = false;
};

/// Tolerance applied when checking that r0 is a distribution.
inline constexpr double kDistributionTolerance = 1e-9;

template <typename Scalar, typename Derived>
void check_distribution(const Eigen::MatrixBase<Derived>& r0, int n) {
  if (r0.size() != n)
    throw Error(ErrorCode::BadDistribution, "rwr: r0 has " + std::to_string(r0.size()) + " entries, graph has " +
                                                std::to_string(n));
  if ((r0.array() < Scalar(0)).any() || !r0.allFinite())
    throw Error(ErrorCode::BadDistribution, "rwr: r0 has negative or non-finite entries");
  if (std::abs(r0.sum() - Scalar(1)) > Scalar(kDistributionTolerance))
    throw Error(ErrorCode::BadDistribution, "rwr: r0 does not sum to 1");
}

/// Random walk with restart by power iteration:
///   r_{t+1} = (1 - d) r0 + d * A r_t
/// with A column-normalized. Stops once ||r_{t+1} - r_t||_1 <= tolerance or
/// after max_iters; the latter returns the last iterate with converged = false.
/// `observer(t, r_t, residual)` sees every iterate.
template <typename Scalar, typename Derived, typename Observer>
RwrResult<Scalar> rwr(const CsrMatrix<Scalar>& a, const Eigen::MatrixBase<Derived>& r0, const RwrConfig& config,
                      Observer&& observer) {
  config.validate();
  if (a.n_rows != a.n_cols) throw Error(ErrorCode::DimensionMismatch, "rwr: adjacency must be square");
  check_distribution<Scalar>(r0, a.n_rows);

  const Scalar d(config.d);
  const Vector<Scalar> restart = (Scalar(1) - d) * r0;
  RwrResult<Scalar> out;
  out.scores = r0;
  for (int t = 1; t <= config.max_iters; ++t) {
    Vector<Scalar> next = restart + d * spmv(a, out.scores);
    out.residual = (next - out.scores).template lpNorm<1>();
    out.scores = std::move(next);
    out.iterations_used = t;
    observer(t, static_cast<const Vector<Scalar>&>(out.scores), out.residual);
    if (out.residual <= Scalar(config.tolerance)) {
      out.converged = true;
      break;
    }
  }
  return out;
}

template <typename Scalar, typename Derived>
RwrResult<Scalar> rwr(const CsrMatrix<Scalar>& a, const Eigen::MatrixBase<Derived>& r0, const RwrConfig& config) {
  return rwr(a, r0, config, [](int, const Vector<Scalar>&, Scalar) {});
}

}  // namespace ingrex
