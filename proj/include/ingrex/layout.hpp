#pragma once

#include <string>

#include <Eigen/Dense>

#include "ingrex/gcn.hpp"

namespace ingrex {

/// Projects the rows of `points` onto the two leading principal axes of the
/// centered data. Each axis is signed so its first non-negligible loading is
/// positive; missing axes (fewer than two dimensions) are zero columns.
template <typename Derived>
Matrix<typename Derived::Scalar> pca_2d(const Eigen::MatrixBase<Derived>& points) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = points.rows(), dim = points.cols();
  Matrix<Scalar> out = Matrix<Scalar>::Zero(n, 2);
  if (n == 0 || dim == 0) return out;
  const Matrix<Scalar> centered = points.rowwise() - points.colwise().mean();
  const Matrix<Scalar> cov = centered.transpose() * centered / Scalar(n);
  const Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(cov);
  const Scalar eps = Scalar(1e-12) * std::max(Scalar(1), cov.cwiseAbs().maxCoeff());
  for (Eigen::Index k = 0; k < std::min<Eigen::Index>(2, dim); ++k) {
    Vector<Scalar> axis = eig.eigenvectors().col(dim - 1 - k);
    for (Eigen::Index i = 0; i < dim; ++i)
      if (std::abs(axis[i]) > Scalar(1e-9)) {
        if (axis[i] < 0) axis = -axis;
        break;
      }
    if (eig.eigenvalues()[dim - 1 - k] > eps) out.col(k) = centered * axis;
  }
  return out;
}

struct LayoutResult {
  Eigen::MatrixXd positions;  // node_count x 2
  std::string method = "pca_embeddings";
};

/// PCA of the model's last hidden node embeddings for one graph.
LayoutResult layout_embeddings(const GcnModel& model, const Graph& g);

}  // namespace ingrex
