#include <gtest/gtest.h>

#include <cmath>

#include "landau/analytic_solutions.hpp"
#include "landau/density_tracker.hpp"
#include "landau/diagnostics.hpp"
#include "landau/sampling.hpp"
#include "landau/score_model.hpp"
#include "landau/score_provider.hpp"
#include "test_support.hpp"

using namespace landau;
using landau::testing::AffineScore;
using landau::testing::gaussian_sample;
using landau::testing::vec;

namespace {

LearnedScore random_network(int d, std::uint64_t seed) {
  Rng rng(seed);
  auto m = ScoreModel::initialize(MlpArchitecture{d, 2, 8, Activation::Swish, false, false}, rng);
  return LearnedScore(std::move(m));
}

// ∇_x·U(x) at x = v_i with U(x) = −(1/N) Σ_{j≠i} A(x − v_j)(s(x) − s_j), by central differences.
double fd_rate(const KernelKind& k, const ScoreProvider& p, const Matrix& v, Eigen::Index i, double h) {
  const Matrix s = p.evaluate(v);
  const int d = static_cast<int>(v.rows());
  auto U = [&](const Vector& x) {
    const Vector sx = score_eval(p, x);
    Vector u = Vector::Zero(d);
    for (Eigen::Index j = 0; j < v.cols(); ++j)
      if (j != i) u -= eval_A(k, x - v.col(j)) * (sx - s.col(j));
    return Vector(u / static_cast<double>(v.cols()));
  };
  double div = 0.0;
  for (int c = 0; c < d; ++c) {
    Vector xp = v.col(i), xm = v.col(i);
    xp[c] += h;
    xm[c] -= h;
    div += (U(xp)[c] - U(xm)[c]) / (2.0 * h);
  }
  return div;
}

}  // namespace

TEST(DensityTracker, TwoParticleHandExample) {
  ParticleEnsemble ens{(Matrix(2, 2) << 1, 0, 0, 0).finished(), 0.0};
  const Vector rate = logdet_increment(ens, make_landau(1.0, 0.0, 2), AffineScore(Matrix::Identity(2, 2)));
  EXPECT_NEAR(rate[0], 0.0, 1e-15);
  EXPECT_NEAR(rate[1], 0.0, 1e-15);
}

TEST(DensityTracker, ConstantScoreGivesZeroRate) {
  ParticleEnsemble ens{gaussian_sample(2, 30, 1), 0.0};
  for (const Vector& b : {Vector(Vector::Zero(2)), vec({0.5, -2.0})}) {
    const Vector rate = logdet_increment(ens, make_landau(1.0, 0.0, 2), AffineScore(Matrix::Zero(2, 2), b));
    EXPECT_EQ(rate.cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(DensityTracker, IdentityKernelRateIsNegativeDivergence) {
  for (int d : {2, 3}) {
    const auto p = random_network(d, 7 + d);
    ParticleEnsemble ens{gaussian_sample(d, 25, 3), 0.0};
    const Vector rate = logdet_increment(ens, IdentityKernel{d}, p);
    for (Eigen::Index i = 0; i < ens.size(); ++i)
      EXPECT_NEAR(rate[i], -score_divergence(p, ens.velocities.col(i)), 1e-12);
  }
}

TEST(DensityTracker, RateMatchesProjectionDivergenceForm) {
  // A(z):∇sᵀ with K written as C|z|^{γ+2} ∇·Π(z); the network score has a
  // nonsymmetric Jacobian, so the transpose matters entrywise.
  for (int d : {2, 3}) {
    for (double gamma : {0.0, -3.0, -1.0}) {
      const double C = 0.3;
      const auto k = make_landau(C, gamma, d);
      const auto p = random_network(d, 11 + d);
      const Matrix v = gaussian_sample(d, 20, 13);
      Matrix s, jac;
      p.evaluate_with_jacobian(v, s, jac);
      const Vector rate = logdet_increment_from(v, s, jac, k);
      for (Eigen::Index i = 0; i < v.cols(); ++i) {
        const Matrix J = jacobian_block(jac, i, d);
        double acc = 0.0;
        for (Eigen::Index j = 0; j < v.cols(); ++j) {
          if (j == i) continue;
          const Vector z = v.col(i) - v.col(j);
          acc += eval_A(k, z).cwiseProduct(J.transpose()).sum();
          acc += C * std::pow(z.norm(), gamma + 2.0) * eval_div_Pi(k, z).dot(s.col(i) - s.col(j));
        }
        EXPECT_NEAR(rate[i], -acc / v.cols(), 1e-12 * (1.0 + std::abs(acc)));
      }
    }
  }
}

TEST(DensityTracker, RateIsDivergenceOfParticleVelocityField) {
  for (double gamma : {0.0, -3.0}) {
    const auto k = make_landau(1.0 / 16.0, gamma, 2);
    const auto p = random_network(2, 17);
    const Matrix v = gaussian_sample(2, 15, 19);
    const Vector rate = logdet_increment(ParticleEnsemble{v, 0.0}, k, p);
    for (Eigen::Index i = 0; i < v.cols(); ++i)
      EXPECT_NEAR(rate[i], fd_rate(k, p, v, i, 1e-5), 1e-7 * (1.0 + std::abs(rate[i])));
  }
}

TEST(DensityTracker, CombinedSweepMatchesSeparateCalls) {
  const auto k = make_landau(1.0 / 16.0, -3.0, 3);
  const auto p = random_network(3, 23);
  ParticleEnsemble ens{gaussian_sample(3, 40, 29), 0.0};
  DriftField g;
  Vector rate;
  drift_and_logdet_rate(ens, k, p, g, rate);
  EXPECT_LT((g - compute_drift(ens, k, p)).norm(), 1e-14);
  EXPECT_LT((rate - logdet_increment(ens, k, p)).norm(), 1e-14);
}

// ---------------------------------------------------------------------------
// Tracker state

TEST(DensityTracker, AdvanceExamples) {
  auto tr = TrajectoryDensity::start(vec({1.0, 2.0}));
  advance_density(tr, Vector::Zero(2), 0.3);
  EXPECT_EQ(tr.density, vec({1.0, 2.0}));
  advance_density(tr, vec({0.5, 0.5}), 0.2);
  EXPECT_NEAR(tr.density[0], 0.904837418035960, 1e-15);
  EXPECT_NEAR(tr.density[0], 1.0 / std::exp(0.1), 1e-16);
  EXPECT_NEAR(tr.logdet[0], 0.1, 1e-16);
}

TEST(DensityTracker, RoundTripRestoresDensity) {
  const Vector f0 = vec({0.3, 1.7, 12.0});
  auto tr = TrajectoryDensity::start(f0);
  const Vector c = vec({2.5, -0.7, 13.0});
  advance_density(tr, c, 0.05);
  advance_density(tr, -c, 0.05);
  for (Eigen::Index i = 0; i < f0.size(); ++i) EXPECT_NEAR(tr.density[i], f0[i], 1e-14 * f0[i]);
}

TEST(DensityTracker, DensityMatchesLogdetInvariant) {
  auto tr = TrajectoryDensity::start(vec({0.2, 0.4}));
  for (int k = 0; k < 100; ++k) advance_density(tr, vec({0.3 * std::sin(k), -0.1}), 0.01);
  for (Eigen::Index i = 0; i < 2; ++i)
    EXPECT_NEAR(tr.density[i], tr.initial_density[i] / std::exp(tr.logdet[i]), 1e-15);
}

TEST(DensityTracker, OverflowNamesParticle) {
  auto tr = TrajectoryDensity::start(vec({1.0, 1.0, 1.0}));
  try {
    advance_density(tr, vec({0.0, 0.0, -1e4}), 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DensityOverflow);
    ASSERT_TRUE(e.index().has_value());
    EXPECT_EQ(*e.index(), 2u);
  }
  auto under = TrajectoryDensity::start(vec({1.0, 1.0}));
  try {
    advance_density(under, vec({1e4, 0.0}), 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DensityOverflow);
    EXPECT_EQ(*e.index(), 0u);
  }
}

TEST(DensityTracker, StartRequiresDensities) {
  try {
    (void)TrajectoryDensity::start(Vector());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InitialDensityUnavailable);
  }
  try {
    (void)TrajectoryDensity::start(vec({1.0, 0.0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DensityInvalid);
  }
}

TEST(DensityTracker, EntropyExamples) {
  EXPECT_EQ(ensemble_entropy(TrajectoryDensity::start(vec({1, 1, 1}))), 0.0);
  EXPECT_NEAR(ensemble_entropy(TrajectoryDensity::start(vec({std::exp(1.0), std::exp(1.0)}))), 1.0, 1e-15);
  auto tr = TrajectoryDensity::start(vec({1, 1}));
  tr.density[1] = -1.0;
  try {
    (void)ensemble_entropy(tr);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DensityInvalid);
  }
}

TEST(DensityTracker, BkwInitialEntropyMatchesQuadrature) {
  const AnalyticSolution sol(SolutionKind::BKW2D);
  const int n = 10000;
  SamplerConfig cfg;
  cfg.seed = 99;
  const SampleSet set = sample(sol, 0.0, n, cfg);
  const auto tr = TrajectoryDensity::start(set.density);
  const Eigen::ArrayXd logs = set.density.array().log();
  const double sd = std::sqrt((logs - logs.mean()).square().sum() / (n - 1));
  const double ref = entropy_reference(sol, 0.0);
  EXPECT_NEAR(ensemble_entropy(tr), ref, 5.0 * sd / std::sqrt(static_cast<double>(n)));
}

// ---------------------------------------------------------------------------
// Flow-map oracle

TEST(DensityTracker, LogdetMatchesFiniteDifferenceFlowMap) {
  const AnalyticSolution sol(SolutionKind::BKW2D);
  SamplerConfig cfg;
  cfg.seed = 5;
  const SampleSet set = sample(sol, 0.0, 12, cfg);
  const AnalyticScore frozen(sol, 0.0);
  const auto cmp = landau::testing::tracer_logdet(set.velocities, set.density, make_landau(1.0 / 16.0, 0.0, 2),
                                                  frozen, 1e-3, 100, 1e-6);
  EXPECT_GT(cmp.tracked.cwiseAbs().maxCoeff(), 1e-4);  // nontrivial evolution
  EXPECT_LE((cmp.tracked - cmp.oracle).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(DensityTracker, IdentityKernelLogdetMatchesFlowMap) {
  const auto p = random_network(2, 31);
  const Matrix v = gaussian_sample(2, 8, 37);
  const Vector f0 = Vector::Ones(8);
  const auto cmp = landau::testing::tracer_logdet(v, f0, IdentityKernel{2}, p, 1e-3, 100, 1e-6);
  EXPECT_GT(cmp.tracked.cwiseAbs().maxCoeff(), 1e-3);
  EXPECT_LE((cmp.tracked - cmp.oracle).cwiseAbs().maxCoeff(), 1e-3);
}
