#pragma once

#include <random>

#include "adiabatica/matrixkit.hpp"

namespace adiabatica::test {

inline CMatrix random_matrix(int n, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> g(0.0, scale / std::sqrt(2.0 * n));
  CMatrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = cplx(g(rng), g(rng));
  return a;
}

inline CMatrix random_hermitian(int n, std::mt19937_64& rng, double scale) {
  const CMatrix a = random_matrix(n, rng, scale);
  return 0.5 * (a + a.adjoint());
}

inline CMatrix random_unitary(int n, std::mt19937_64& rng) {
  const CMatrix a = random_matrix(n, rng, 1.0);
  Eigen::HouseholderQR<CMatrix> qr(a);
  return qr.householderQ() * CMatrix::Identity(n, n);
}

}  // namespace adiabatica::test
