#include "wfp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace wfp {

double asymmetry(const Matrix& a) {
  if (a.rows() != a.cols()) return INFINITY;
  double scale = 1.0;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      scale = std::max(scale, std::abs(a(i, j)));
      worst = std::max(worst, std::abs(a(i, j) - a(j, i)));
    }
  }
  return worst / scale;
}

SymmetricEigen jacobi_eigen(const Matrix& input) {
  if (input.rows() != input.cols())
    throw Error(ErrorKind::NotSymmetric, "matrix is not square");
  if (asymmetry(input) > 1e-12)
    throw Error(ErrorKind::NotSymmetric, "matrix asymmetry exceeds 1e-12");

  const Eigen::Index n = input.rows();
  Matrix a = 0.5 * (input + input.transpose());
  Matrix v = Matrix::Identity(n, n);

  const double frob = a.norm();
  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off == 0.0 || std::sqrt(off) <= 1e-15 * frob) break;

    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Rotation angle that zeroes a(p, q); stable tangent form.
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
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
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i) < a(j, j); });

  SymmetricEigen out{Vector(n), Matrix(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = a(order[static_cast<size_t>(k)], order[static_cast<size_t>(k)]);
    out.vectors.col(k) = v.col(order[static_cast<size_t>(k)]);
  }
  return out;
}

std::vector<double> dense_spectrum_oracle(const Matrix& a) {
  const auto eig = jacobi_eigen(a);
  return {eig.values.data(), eig.values.data() + eig.values.size()};
}

Matrix symmetric_sqrt_psd(const Matrix& a, double clip) {
  const auto eig = jacobi_eigen(a);
  const double scale = std::max(1.0, eig.values.cwiseAbs().maxCoeff());
  Vector roots(eig.values.size());
  for (Eigen::Index k = 0; k < eig.values.size(); ++k) {
    const double lam = eig.values(k);
    if (lam < -clip * scale)
      throw Error(ErrorKind::NotPSD, "negative eigenvalue " + std::to_string(lam));
    roots(k) = lam > 0.0 ? std::sqrt(lam) : 0.0;
  }
  return eig.vectors * roots.asDiagonal() * eig.vectors.transpose();
}

Sqrt2x2 sqrt_psd_2x2(double a, double b, double c) {
  const double det = a * c - b * b;
  const double scale = std::abs(a * c) + b * b;
  if (a < 0.0 || c < 0.0 || det < -1e-12 * scale)
    throw Error(ErrorKind::NotPSD, "2x2 block is not positive semidefinite");
  // sqrt(M) = (M + sqrt(det) I) / sqrt(tr M + 2 sqrt(det)) for 2x2 PSD M.
  const double root_det = std::sqrt(std::max(det, 0.0));
  const double denom = std::sqrt(a + c + 2.0 * root_det);
  if (denom == 0.0) return {0.0, 0.0, 0.0};
  return {(a + root_det) / denom, b / denom, (c + root_det) / denom};
}

BlockAverages block_averages(const Matrix& cov) {
  const Eigen::Index d = cov.rows() / 2;
  BlockAverages out{0.0, 0.0, 0.0};
  for (Eigen::Index j = 0; j < d; ++j) {
    out.cxx += cov(j, j);
    out.cxp += cov(j, d + j);
    out.cpp += cov(d + j, d + j);
  }
  const double inv = 1.0 / static_cast<double>(d);
  out.cxx *= inv;
  out.cxp *= inv;
  out.cpp *= inv;
  return out;
}

}  // namespace wfp
