#ifndef RIGIDITY_LINALG_HPP
#define RIGIDITY_LINALG_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

namespace rigidity {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Singular values below kRankTolerance * sigma_max are treated as zero.
inline constexpr double kRankTolerance = 1e-10;

/// Row space / null space split of a dense matrix, computed once by SVD.
///
/// `nullspace` holds an orthonormal basis of {x : A x = 0} as columns,
/// `left_nullspace` an orthonormal basis of {w : w^T A = 0}.
struct SpectralSplit {
  Matrix nullspace;
  Matrix left_nullspace;
  Vector singular_values;
  int rank = 0;

  // Cached factors for minimum-norm solves.
  Matrix u_range;
  Matrix v_range;
  Vector inv_sigma;

  /// Minimum-norm least-squares solution of A x = b.
  Vector solve(const Vector& b) const {
    if (rank == 0) return Vector::Zero(v_range.rows());
    return v_range * (inv_sigma.asDiagonal() * (u_range.transpose() * b));
  }
};

/// Flips each column so its first significant entry is positive.
inline void canonicalize_signs(Matrix& basis) {
  for (Eigen::Index j = 0; j < basis.cols(); ++j) {
    const double peak = basis.col(j).cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < basis.rows(); ++i) {
      if (std::abs(basis(i, j)) > 1e-8 * peak) {
        if (basis(i, j) < 0.0) basis.col(j) *= -1.0;
        break;
      }
    }
  }
}

inline SpectralSplit spectral_split(const Matrix& a, double relative_tol = kRankTolerance) {
  SpectralSplit out;
  const auto rows = a.rows();
  const auto cols = a.cols();
  if (rows == 0 || cols == 0) {
    out.nullspace = Matrix::Identity(cols, cols);
    out.left_nullspace = Matrix::Identity(rows, rows);
    out.singular_values = Vector::Zero(0);
    out.u_range = Matrix::Zero(rows, 0);
    out.v_range = Matrix::Zero(cols, 0);
    out.inv_sigma = Vector::Zero(0);
    return out;
  }
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  out.singular_values = svd.singularValues();
  const double sigma_max = out.singular_values.size() > 0 ? out.singular_values(0) : 0.0;
  int rank = 0;
  if (sigma_max > 0.0) {
    for (Eigen::Index i = 0; i < out.singular_values.size(); ++i) {
      if (out.singular_values(i) > relative_tol * sigma_max) ++rank;
    }
  }
  out.rank = rank;
  out.nullspace = svd.matrixV().rightCols(cols - rank);
  out.left_nullspace = svd.matrixU().rightCols(rows - rank);
  canonicalize_signs(out.nullspace);
  canonicalize_signs(out.left_nullspace);
  out.u_range = svd.matrixU().leftCols(rank);
  out.v_range = svd.matrixV().leftCols(rank);
  out.inv_sigma = out.singular_values.head(rank).cwiseInverse();
  return out;
}

inline std::vector<Vector> columns_of(const Matrix& m) {
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index j = 0; j < m.cols(); ++j) out.emplace_back(m.col(j));
  return out;
}

inline Matrix matrix_from_columns(const std::vector<Vector>& cols, Eigen::Index rows) {
  Matrix m(rows, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) m.col(static_cast<Eigen::Index>(j)) = cols[j];
  return m;
}

}  // namespace rigidity

#endif  // RIGIDITY_LINALG_HPP
