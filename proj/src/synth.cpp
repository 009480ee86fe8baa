#include "hoi/synth.hpp"

#include <cmath>

#include <Eigen/Cholesky>

#include "hoi/error.hpp"
#include "hoi/rng.hpp"

namespace hoi {

namespace {

void check_n(int n) {
  if (n < 2) throw ParameterError("need at least 2 samples, got " + std::to_string(n));
}

Dataset scalar_dataset(const Eigen::MatrixXd& columns, const std::vector<std::string>& names) {
  std::vector<VariableSamples> vars;
  for (Eigen::Index j = 0; j < columns.cols(); ++j) {
    vars.push_back({columns.col(j), names[static_cast<std::size_t>(j)]});
  }
  return Dataset(std::move(vars));
}

}  // namespace

Eigen::MatrixXd gaussian_covariance(GaussianCase::Variant variant, double beta) {
  if (!(beta >= 0.0 && beta < 1.0)) throw ParameterError("beta must lie in [0, 1)");
  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(5, 5);
  if (variant == GaussianCase::Variant::Sigma1) {
    if (beta > kSigma1BetaMax) {
      throw ParameterError("Sigma1 requires beta <= 0.33 (equicorrelated 4x4 block is positive definite only for beta < 1/3)");
    }
    for (int i = 1; i < 5; ++i) {
      for (int j = 1; j < 5; ++j) {
        if (i != j) s(i, j) = beta;
      }
    }
  } else {
    s(0, 1) = s(1, 0) = beta;
    for (int i = 2; i < 5; ++i) {
      for (int j = 2; j < 5; ++j) {
        if (i != j) s(i, j) = beta;
      }
    }
  }
  return s;
}

Dataset gen_gaussian(const GaussianCase& c) {
  check_n(c.n);
  const Eigen::MatrixXd sigma = gaussian_covariance(c.variant, c.beta);
  const Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) throw ParameterError("covariance is not positive definite");
  const Eigen::MatrixXd L = llt.matrixL();

  CounterRng rng(derive_seed(c.seed, 0x6761757373ULL));
  Eigen::MatrixXd z(c.n, 5);
  for (int a = 0; a < c.n; ++a) {
    for (int j = 0; j < 5; ++j) z(a, j) = rng.normal();
  }
  const Eigen::MatrixXd x = z * L.transpose();
  return scalar_dataset(x, {"X1", "X2", "X3", "X4", "X5"});
}

Dataset gen_xor(const XorCase& c) {
  check_n(c.n);
  if (!(c.proportion >= 0.0 && c.proportion <= 1.0)) throw ParameterError("XOR proportion must lie in [0, 1]");
  if (c.modulus < 2) throw ParameterError("XOR modulus must be at least 2");
  const auto m = static_cast<double>(c.modulus);
  const auto constrained = static_cast<int>(std::lround(c.proportion * c.n));

  CounterRng rng(derive_seed(c.seed, 0x786f72ULL));
  Eigen::MatrixXd rows(c.n, 5);
  for (int a = 0; a < c.n; ++a) {
    double sum = 0.0;
    for (int j = 0; j < 4; ++j) {
      rows(a, j) = rng.uniform(0.0, m);
      sum += rows(a, j);
    }
    rows(a, 4) = a < constrained ? std::fmod(sum, m) : rng.uniform(0.0, m);
  }
  const std::vector<int> order = rng.permutation(c.n);
  Eigen::MatrixXd shuffled(c.n, 5);
  for (int a = 0; a < c.n; ++a) shuffled.row(a) = rows.row(order[static_cast<std::size_t>(a)]);
  return scalar_dataset(shuffled, {"V", "W", "X", "Y", "Z"});
}

int xor_constrained_rows(const Dataset& data, int modulus) {
  const auto m = static_cast<double>(modulus);
  int count = 0;
  for (Eigen::Index a = 0; a < data.n(); ++a) {
    double sum = 0.0;
    for (int j = 0; j < 4; ++j) sum += data.variable(j).values(a, 0);
    if (std::abs(std::fmod(sum, m) - data.variable(4).values(a, 0)) < 1e-12) ++count;
  }
  return count;
}

Dataset gen_null(int n, int d, std::uint64_t seed) {
  check_n(n);
  if (d < 2) throw ParameterError("need at least 2 variables");
  CounterRng rng(derive_seed(seed, 0x6e756c6cULL));
  Eigen::MatrixXd x(n, d);
  for (int a = 0; a < n; ++a) {
    for (int j = 0; j < d; ++j) x(a, j) = rng.uniform();
  }
  std::vector<std::string> names;
  for (int j = 1; j <= d; ++j) names.push_back("X" + std::to_string(j));
  return scalar_dataset(x, names);
}

}  // namespace hoi
