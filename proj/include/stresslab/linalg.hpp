#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "stresslab/errors.hpp"

namespace stresslab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct JacobiOptions {
  int max_sweeps = 100;
  double off_diagonal_tol = 1e-12;
};

struct SymmetricEigen {
  std::vector<double> values;  // ascending
  Mat vectors;                 // column i belongs to values[i]
  int sweeps = 0;
};

/// Cyclic Jacobi rotations on a symmetric matrix. Convergence is declared when
/// the off-diagonal Frobenius norm drops below tol * max(1, |A|_F).
inline SymmetricEigen jacobi_eigen(const Mat& input, const JacobiOptions& opt = {}) {
  const Eigen::Index n = input.rows();
  if (input.cols() != n) fail(ErrorCode::InvalidArgument, "jacobi_eigen needs a square matrix");
  Mat a = 0.5 * (input + input.transpose());
  Mat v = Mat::Identity(n, n);
  const double scale = std::max(1.0, a.norm());

  auto off_norm = [&] {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  int sweep = 0;
  bool converged = off_norm() <= opt.off_diagonal_tol * scale;
  while (!converged && sweep < opt.max_sweeps) {
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
    ++sweep;
    converged = off_norm() <= opt.off_diagonal_tol * scale;
  }
  if (!converged)
    fail(ErrorCode::EigenFailure, "Jacobi iteration did not converge in " + std::to_string(opt.max_sweeps) + " sweeps");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) { return a(i, i) < a(j, j); });

  SymmetricEigen out;
  out.sweeps = sweep;
  out.vectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values.push_back(a(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]));
    out.vectors.col(i) = v.col(order[static_cast<std::size_t>(i)]);
  }
  return out;
}

/// Lower Cholesky factor of a symmetric positive definite matrix.
inline Mat cholesky_lower(const Mat& g) {
  Eigen::LLT<Mat> llt(0.5 * (g + g.transpose()));
  if (llt.info() != Eigen::Success) fail(ErrorCode::SingularMetric, "metric is not positive definite");
  Mat l = llt.matrixL();
  for (Eigen::Index i = 0; i < l.rows(); ++i)
    if (!(l(i, i) > 1e-300)) fail(ErrorCode::SingularMetric, "metric is numerically singular");
  return l;
}

/// Columns form a g-orthonormal frame: E^T g E = I.
inline Mat orthonormal_frame(const Mat& g) {
  const Mat l = cholesky_lower(g);
  return l.transpose().triangularView<Eigen::Upper>().solve(Mat::Identity(g.rows(), g.cols()));
}

inline Mat spd_inverse(const Mat& g) {
  const Mat l = cholesky_lower(g);
  const Mat linv = l.triangularView<Eigen::Lower>().solve(Mat::Identity(g.rows(), g.cols()));
  Mat inv = linv.transpose() * linv;
  return 0.5 * (inv + inv.transpose());
}

/// Eigenvalues of h v = lambda g v by Cholesky reduction to a standard
/// symmetric problem followed by cyclic Jacobi rotations.
inline std::vector<double> generalized_eigenvalues(const Mat& h, const Mat& g, const JacobiOptions& opt = {}) {
  const Mat l = cholesky_lower(g);
  const Mat sym = 0.5 * (h + h.transpose());
  const Mat tmp = l.triangularView<Eigen::Lower>().solve(sym);
  const Mat c = l.triangularView<Eigen::Lower>().solve(tmp.transpose());
  return jacobi_eigen(c, opt).values;
}

/// Contraction g^{ia} g^{jb} s_ij t_ab.
inline double tensor_inner(const Mat& s, const Mat& t, const Mat& ginv) {
  return (ginv * s * ginv).cwiseProduct(t).sum();
}

}  // namespace stresslab
