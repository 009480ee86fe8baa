#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "hoi/kernel.hpp"

namespace hoi {

struct GaussianCase {
  enum class Variant {
    Sigma1,  // P = P1 P2345, equicorrelated block {2,3,4,5}
    Sigma2,  // P = P12 P345
  };
  Variant variant = Variant::Sigma1;
  double beta = 0.0;
  int n = 80;
  std::uint64_t seed = 0;
};

/// Largest admissible beta for Sigma1; the 4x4 equicorrelated block is only
/// positive definite for beta < 1/3.
inline constexpr double kSigma1BetaMax = 0.33;

Eigen::MatrixXd gaussian_covariance(GaussianCase::Variant variant, double beta);

/// Five scalar N(0, Sigma) coordinates drawn through a Cholesky factor.
Dataset gen_gaussian(const GaussianCase& c);

struct XorCase {
  int n = 80;
  double proportion = 1.0;
  int modulus = 4;
  std::uint64_t seed = 0;
};

/// V, W, X, Y ~ U(0, modulus); Z is their sum mod `modulus` on
/// round(proportion * n) rows and independent noise elsewhere. Rows are
/// shuffled so the constrained rows are not contiguous.
Dataset gen_xor(const XorCase& c);

/// Number of rows of gen_xor output that satisfy the modular constraint.
int xor_constrained_rows(const Dataset& data, int modulus);

/// d i.i.d. U(0, 1) scalar variables.
Dataset gen_null(int n, int d, std::uint64_t seed);

}  // namespace hoi
