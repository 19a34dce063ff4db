#pragma once

#include <vector>

#include "wfp/model.hpp"

namespace wfp {

struct SymmetricEigen {
  Vector values;   // ascending
  Matrix vectors;  // column k pairs with values(k)
};

/// Largest |a_ij - a_ji| relative to max(1, max |a_ij|).
double asymmetry(const Matrix& a);

/// Cyclic Jacobi rotations. Throws Error(NotSymmetric) beyond 1e-12 asymmetry.
SymmetricEigen jacobi_eigen(const Matrix& a);

/// All eigenvalues of a dense symmetric matrix, ascending.
std::vector<double> dense_spectrum_oracle(const Matrix& a);

/// Symmetric PSD square root. Eigenvalues down to -clip * scale are clipped to
/// zero; anything more negative raises Error(NotPSD).
Matrix symmetric_sqrt_psd(const Matrix& a, double clip = 1e-12);

/// Symmetric square root of a 2x2 PSD matrix [[a, b], [b, c]] in closed form.
struct Sqrt2x2 {
  double s11, s12, s22;
};
Sqrt2x2 sqrt_psd_2x2(double a, double b, double c);

/// Diagonal-block averages of a 2d x 2d covariance: mean of S(j,j), S(j,d+j),
/// S(d+j,d+j) over j.
struct BlockAverages {
  double cxx, cxp, cpp;
};
BlockAverages block_averages(const Matrix& cov);

}  // namespace wfp
