#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

#include "landau/collision_kernel.hpp"

using namespace landau;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index k = 0;
  for (double x : xs) v[k++] = x;
  return v;
}

Vector random_vector(std::mt19937_64& gen, int d) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vector v(d);
  for (int k = 0; k < d; ++k) v[k] = n(gen);
  return v;
}

// Row divergence Σ_c ∂M_rc/∂z_c by central differences.
template <class F>
Vector fd_row_divergence(F matrix_fn, const Vector& z, double h) {
  const auto d = z.size();
  Vector out = Vector::Zero(d);
  for (Eigen::Index c = 0; c < d; ++c) {
    Vector zp = z, zm = z;
    zp[c] += h;
    zm[c] -= h;
    out += (matrix_fn(zp).col(c) - matrix_fn(zm).col(c)) / (2.0 * h);
  }
  return out;
}

}  // namespace

TEST(CollisionKernel, MaxwellKernelAtThreeFour) {
  const auto A = eval_A(make_landau(1.0, 0.0, 2), vec({3, 4}));
  Matrix expected(2, 2);
  expected << 16, -12, -12, 9;
  EXPECT_LT((A - expected).norm(), 1e-12);
}

TEST(CollisionKernel, ScaledKernelOnAxis) {
  const auto A = eval_A(make_landau(1.0 / 16.0, 0.0, 2), vec({1, 0}));
  Matrix expected(2, 2);
  expected << 0, 0, 0, 1.0 / 16.0;
  EXPECT_LT((A - expected).norm(), 1e-15);
}

TEST(CollisionKernel, IdentityDoubleReturnsIdentity) {
  const auto A = eval_A(IdentityKernel{3}, vec({5, -1, 2}));
  EXPECT_EQ(A, Matrix::Identity(3, 3));
}

TEST(CollisionKernel, DivergenceThreeDimensional) {
  const auto K = eval_K(make_landau(1.0, 0.0, 3), vec({1, 0, 0}));
  EXPECT_LT((K - vec({-2, 0, 0})).norm(), 1e-15);
}

TEST(CollisionKernel, DivergenceOfIdentityIsZero) {
  EXPECT_EQ(eval_K(IdentityKernel{2}, vec({0.3, -7})), Vector::Zero(2));
}

TEST(CollisionKernel, DivergenceTwoDimensional) {
  const auto K = eval_K(make_landau(1.0, 0.0, 2), vec({0, 1}));
  EXPECT_LT((K - vec({0, -1})).norm(), 1e-15);
}

TEST(CollisionKernel, ProjectionDivergenceExamples) {
  const auto k2 = make_landau(1.0, 0.0, 2);
  const auto k3 = make_landau(1.0, 0.0, 3);
  EXPECT_LT((eval_div_Pi(k2, vec({2, 0})) - vec({-0.5, 0})).norm(), 1e-15);
  EXPECT_LT((eval_div_Pi(k3, vec({0, 0, 1})) - vec({0, 0, -2})).norm(), 1e-15);
  EXPECT_LT((eval_div_Pi(k2, vec({1, 1})) - vec({-0.5, -0.5})).norm(), 1e-15);
}

TEST(CollisionKernel, CoulombBelowFloorIsDegenerate) {
  const auto k = make_landau(1.0, -3.0, 3);
  const Vector tiny = vec({1e-13, 0, 0});
  for (auto fn : {+[](const KernelKind& kk, const Vector& z) { (void)eval_A(kk, z); },
                  +[](const KernelKind& kk, const Vector& z) { (void)eval_K(kk, z); },
                  +[](const KernelKind& kk, const Vector& z) { (void)eval_div_Pi(kk, z); }}) {
    try {
      fn(k, tiny);
      FAIL() << "expected DegeneratePair";
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::DegeneratePair);
    }
  }
  EXPECT_NO_THROW((void)eval_A(k, vec({1e-6, 0, 0})));
}

TEST(CollisionKernel, MaxwellAtOriginIsZero) {
  EXPECT_EQ(eval_A(make_landau(1.0, 0.0, 2), Vector::Zero(2)), Matrix::Zero(2, 2));
}

TEST(CollisionKernel, ParameterValidation) {
  EXPECT_THROW(make_landau(0.0, 0.0, 2), Error);
  EXPECT_THROW(make_landau(1.0, 0.0, 1), Error);
  EXPECT_THROW(make_landau(1.0, -4.5, 3), Error);
  EXPECT_THROW(make_landau(1.0, 1.5, 3), Error);
  EXPECT_NO_THROW(make_landau(1.0, -4.0, 3));
}

TEST(CollisionKernel, ProjectionSymmetryAndSpectrum) {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 200; ++trial) {
    for (int d : {2, 3}) {
      for (double gamma : {0.0, -3.0, 0.5}) {
        const double c = 0.3 + trial * 0.01;
        const auto k = make_landau(c, gamma, d);
        const Vector z = random_vector(gen, d);
        const Matrix A = eval_A(k, z);
        const double r = z.norm();
        const double scale = c * std::pow(r, gamma + 4.0);
        EXPECT_LE(std::abs(z.dot(A * z)), 1e-12 * scale);
        EXPECT_LE((A - A.transpose()).norm(), 1e-14 * A.norm());
        Eigen::SelfAdjointEigenSolver<Matrix> es(A);
        const Vector ev = es.eigenvalues();
        const double lam = c * std::pow(r, gamma + 2.0);
        EXPECT_NEAR(ev[0], 0.0, 1e-12 * lam);
        for (int i = 1; i < d; ++i) EXPECT_NEAR(ev[i], lam, 1e-12 * lam);
      }
    }
  }
}

TEST(CollisionKernel, DivergenceMatchesFiniteDifferences) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 100; ++trial) {
    for (int d : {2, 3}) {
      for (double gamma : {0.0, -3.0, -1.0}) {
        const auto k = make_landau(1.0 + trial, gamma, d);
        const Vector z = random_vector(gen, d);
        const double h = 1e-5 * z.norm();
        const Vector fd = fd_row_divergence([&](const Vector& x) { return eval_A(k, x); }, z, h);
        const Vector K = eval_K(k, z);
        EXPECT_LE((fd - K).norm(), 1e-6 * K.norm()) << "d=" << d << " gamma=" << gamma;

        const Vector fd_pi = fd_row_divergence([&](const Vector& x) { return eval_Pi(x); }, z, h);
        const Vector dpi = eval_div_Pi(k, z);
        EXPECT_LE((fd_pi - dpi).norm(), 1e-6 * dpi.norm());
      }
    }
  }
}

namespace {

// Smallest eigenvalue over grid nodes of h^d Σ_k A(v_i − v_k) ρ_k on a
// periodic box, with minimum-image displacements.
double min_eigenvalue_on_periodic_grid(int d, int n1, double gamma, std::uint64_t seed) {
  const auto kernel = make_landau(1.0, gamma, d);
  const double L = 1.0;
  const double h = 2.0 * L / n1;
  int n = 1;
  for (int k = 0; k < d; ++k) n *= n1;
  Matrix nodes(d, n);
  for (int idx = 0; idx < n; ++idx) {
    int rem = idx;
    for (int k = 0; k < d; ++k) {
      nodes(k, idx) = -L + h * (rem % n1 + 0.5);
      rem /= n1;
    }
  }
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector rho(n);
  for (int i = 0; i < n; ++i) rho[i] = u(gen) < 0.3 ? 0.0 : u(gen);
  rho /= rho.sum() * std::pow(h, d);
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    Matrix M = Matrix::Zero(d, d);
    for (int k = 0; k < n; ++k) {
      if (k == i || rho[k] == 0.0) continue;
      Vector z = nodes.col(i) - nodes.col(k);
      for (int c = 0; c < d; ++c) z[c] -= 2.0 * L * std::round(z[c] / (2.0 * L));
      M += eval_A(kernel, z) * rho[k] * std::pow(h, d);
    }
    worst = std::min(worst, Eigen::SelfAdjointEigenSolver<Matrix>(M).eigenvalues()[0]);
  }
  return worst;
}

}  // namespace

TEST(CollisionKernel, AveragedKernelIsPositiveDefinite) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    EXPECT_GT(min_eigenvalue_on_periodic_grid(2, 16, 0.0, seed), 0.0);
    EXPECT_GT(min_eigenvalue_on_periodic_grid(2, 16, -3.0, seed), 0.0);
    EXPECT_GT(min_eigenvalue_on_periodic_grid(3, 6, 0.0, seed), 0.0);
    EXPECT_GT(min_eigenvalue_on_periodic_grid(3, 6, -3.0, seed), 0.0);
  }
}
