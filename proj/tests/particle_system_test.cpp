#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "landau/analytic_solutions.hpp"
#include "landau/particle_system.hpp"
#include "landau/score_model.hpp"
#include "landau/score_provider.hpp"
#include "test_support.hpp"

using namespace landau;
using landau::testing::AffineScore;
using landau::testing::FunctionScore;
using landau::testing::gaussian_sample;
using landau::testing::vec;

namespace {

Matrix swap2() { return (Matrix(2, 2) << 0, 1, 1, 0).finished(); }

// Scores of a BKW-type law at K = 3/4, used as a generic smooth nonlinear score.
Matrix bkw_scores(const Matrix& v) {
  Matrix s(v.rows(), v.cols());
  for (Eigen::Index i = 0; i < v.cols(); ++i) s.col(i) = bkw2d_score(8.0 * std::log(2.0), v.col(i));
  return s;
}

Matrix radial_scores3(const Matrix& v) {
  Matrix s(3, v.cols());
  for (Eigen::Index i = 0; i < v.cols(); ++i) s.col(i) = -v.col(i) * (1.0 + 0.3 * std::sin(v.col(i).norm()));
  return s;
}

double max_norm(const Matrix& v) { return v.colwise().norm().maxCoeff(); }

}  // namespace

TEST(ParticleSystem, SingleParticleHasZeroDrift) {
  const auto k = make_landau(1.0 / 16.0, 0.0, 2);
  EXPECT_EQ(compute_drift_from_scores(vec({0.4, 1.0}), vec({3.0, -2.0}), k), Matrix::Zero(2, 1));
}

TEST(ParticleSystem, TwoParticleHandExample) {
  ParticleEnsemble ens{(Matrix(2, 2) << 1, 0, 0, 0).finished(), 0.0};
  const auto k = make_landau(1.0 / 16.0, 0.0, 2);
  const AffineScore s(swap2());
  const DriftField g = compute_drift(ens, k, s);
  EXPECT_LT((g.col(0) - vec({0, 1.0 / 32.0})).norm(), 1e-16);
  EXPECT_LT((g.col(1) + vec({0, 1.0 / 32.0})).norm(), 1e-16);
  euler_step(ens, g, 0.1);
  EXPECT_LT((ens.velocities.col(0) - vec({1.0, -0.003125})).norm(), 1e-16);
  EXPECT_DOUBLE_EQ(ens.time, 0.1);
}

TEST(ParticleSystem, ConstantScoreGivesZeroDrift) {
  const Matrix v = gaussian_sample(3, 50, 1);
  const Matrix s = vec({0.2, -1.0, 4.0}).replicate(1, 50);
  for (double gamma : {0.0, -3.0}) {
    const DriftField g = compute_drift_from_scores(v, s, make_landau(1.0, gamma, 3));
    EXPECT_EQ(g.cwiseAbs().maxCoeff(), 0.0);
  }
  ParticleEnsemble ens{v, 0.0};
  euler_step(ens, Matrix::Zero(3, 50), 0.5);
  EXPECT_EQ(ens.velocities, v);
}

TEST(ParticleSystem, DriftSumsToZero) {
  for (int d : {2, 3}) {
    const Matrix v = gaussian_sample(d, 300, 3 + d);
    const Matrix s = d == 2 ? bkw_scores(v) : radial_scores3(v);
    for (double gamma : {0.0, -3.0}) {
      const DriftField g = compute_drift_from_scores(v, s, make_landau(1.0 / 16.0, gamma, d));
      EXPECT_LE(g.rowwise().sum().norm(), 1e-12 * g.cwiseAbs().sum());
    }
  }
}

TEST(ParticleSystem, EulerConservesMomentum) {
  for (int d : {2, 3}) {
    for (double gamma : {0.0, -3.0}) {
      const int n = 400;
      ParticleEnsemble ens{gaussian_sample(d, n, 11 + d), 0.0};
      const Vector p0 = moments(ens).momentum;
      for (int step = 0; step < 5; ++step) {
        const Matrix s = d == 2 ? bkw_scores(ens.velocities) : radial_scores3(ens.velocities);
        euler_step(ens, compute_drift_from_scores(ens.velocities, s, make_landau(1.0 / 16.0, gamma, d)), 0.01);
      }
      const double drift = (moments(ens).momentum - p0).norm();
      EXPECT_LE(drift, 1e-12 * n * max_norm(ens.velocities)) << "d=" << d << " gamma=" << gamma;
    }
  }
}

// Exact up to the rounding of v − ΔtG, an absolute error near 1e−16·|v|²/√N;
// the step sizes here keep Δt²|G|² well above that.
TEST(ParticleSystem, EulerEnergyIncrementIdentity) {
  for (int d : {2, 3}) {
    for (double gamma : {0.0, -3.0}) {
      for (double dt : {0.05, 0.1}) {
        const Matrix v = gaussian_sample(d, 300, 21 + d);
        const Matrix s = d == 2 ? bkw_scores(v) : radial_scores3(v);
        const DriftField g = compute_drift_from_scores(v, s, make_landau(1.0, gamma, d));
        ParticleEnsemble ens{v, 0.0};
        euler_step(ens, g, dt);
        const double lhs = energy_increment(v, ens.velocities);
        const double rhs = dt * dt * g.colwise().squaredNorm().mean();
        EXPECT_GT(rhs, 0.0);
        EXPECT_LE(std::abs(lhs - rhs), 1e-10 * rhs) << "d=" << d << " gamma=" << gamma << " dt=" << dt;
      }
    }
  }
}

TEST(ParticleSystem, EnergyIncrementIsPlainEnergyDifference) {
  const Matrix a = gaussian_sample(2, 10, 1), b = gaussian_sample(2, 10, 2);
  const double direct = (b.colwise().squaredNorm().sum() - a.colwise().squaredNorm().sum()) / 10.0;
  EXPECT_NEAR(energy_increment(a, b), direct, 1e-13);
}

TEST(ParticleSystem, DriftIsPermutationEquivariant) {
  const int n = 60;
  const Matrix v = gaussian_sample(2, n, 31);
  const Matrix s = bkw_scores(v);
  std::vector<Eigen::Index> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(5));
  Matrix vp(2, n), sp(2, n);
  for (int i = 0; i < n; ++i) {
    vp.col(i) = v.col(perm[i]);
    sp.col(i) = s.col(perm[i]);
  }
  const auto k = make_landau(1.0 / 16.0, -3.0, 2);
  const DriftField g = compute_drift_from_scores(v, s, k);
  const DriftField gp = compute_drift_from_scores(vp, sp, k);
  for (int i = 0; i < n; ++i) EXPECT_LE((gp.col(i) - g.col(perm[i])).norm(), 1e-14 * (1.0 + g.col(perm[i]).norm()));
}

TEST(ParticleSystem, IdentityKernelDriftIsCenteredScore) {
  const Matrix v = gaussian_sample(3, 40, 41);
  const Matrix s = radial_scores3(v);
  const DriftField g = compute_drift_from_scores(v, s, IdentityKernel{3});
  const Vector mean = s.rowwise().mean();
  for (Eigen::Index i = 0; i < v.cols(); ++i) EXPECT_LE((g.col(i) - (s.col(i) - mean)).norm(), 1e-13);
}

TEST(ParticleSystem, DriftMatchesDirectPairSum) {
  const Matrix v = gaussian_sample(3, 25, 43);
  const Matrix s = radial_scores3(v);
  for (double gamma : {0.0, -3.0, 0.5}) {
    const auto k = make_landau(0.2, gamma, 3);
    const DriftField g = compute_drift_from_scores(v, s, k);
    for (Eigen::Index i = 0; i < v.cols(); ++i) {
      Vector direct = Vector::Zero(3);
      for (Eigen::Index j = 0; j < v.cols(); ++j)
        if (j != i) direct += eval_A(k, v.col(i) - v.col(j)) * (s.col(i) - s.col(j));
      direct /= static_cast<double>(v.cols());
      EXPECT_LE((g.col(i) - direct).norm(), 1e-13 * (1.0 + direct.norm()));
    }
  }
}

TEST(ParticleSystem, GalileanShiftLeavesDriftUnchanged) {
  const Vector u = vec({1.5, -0.7});
  const Matrix v = gaussian_sample(2, 80, 47);
  const Matrix shifted = v.colwise() + u;
  // score of a Gaussian centered at the origin and of the same Gaussian centered at u
  const FunctionScore centered(2, [](const Vector& x) { return Vector(-x / (1.0 + 0.1 * x.squaredNorm())); });
  const FunctionScore moved(2, [u](const Vector& x) {
    const Vector y = x - u;
    return Vector(-y / (1.0 + 0.1 * y.squaredNorm()));
  });
  const auto k = make_landau(1.0 / 16.0, 0.0, 2);
  const DriftField g0 = compute_drift(ParticleEnsemble{v, 0.0}, k, centered);
  const DriftField g1 = compute_drift(ParticleEnsemble{shifted, 0.0}, k, moved);
  EXPECT_LE((g0 - g1).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(ParticleSystem, CoincidentCoulombParticlesAreSkipped) {
  Matrix v(3, 3);
  v << 0.1, 0.1, 1.0,  //
      0.2, 0.2, 0.0,   //
      0.3, 0.3, -1.0;
  const Matrix s = radial_scores3(v);
  const DriftField g = compute_drift_from_scores(v, s, make_landau(1.0, -3.0, 3));
  EXPECT_TRUE(g.allFinite());
  EXPECT_LE(g.rowwise().sum().norm(), 1e-14);
}

TEST(ParticleSystem, NonFiniteScoreIsModelDiverged) {
  Matrix s = Matrix::Zero(2, 3);
  s(1, 2) = std::numeric_limits<double>::quiet_NaN();
  try {
    (void)compute_drift_from_scores(gaussian_sample(2, 3, 1), s, make_landau(1.0, 0.0, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ModelDiverged);
  }
}

// ---------------------------------------------------------------------------
// Midpoint

TEST(ParticleSystem, MidpointWithZeroDriftConvergesImmediately) {
  ParticleEnsemble ens{gaussian_sample(2, 20, 51), 0.0};
  const Matrix before = ens.velocities;
  const AffineScore constant(Matrix::Zero(2, 2), vec({1.0, 2.0}));
  const MidpointResult r = midpoint_step(ens, make_landau(1.0, 0.0, 2), constant, 0.1);
  EXPECT_EQ(r.iterations, 1);
  EXPECT_EQ(ens.velocities, before);
  EXPECT_DOUBLE_EQ(ens.time, 0.1);
}

TEST(ParticleSystem, MidpointConservesEnergyAndMomentum) {
  for (double gamma : {0.0, -3.0}) {
    ParticleEnsemble ens{gaussian_sample(2, 200, 53), 0.0};
    const Moments m0 = moments(ens);
    const Matrix v0 = ens.velocities;
    const FunctionScore score(2, [](const Vector& x) { return bkw2d_score(8.0 * std::log(2.0), x); });
    const MidpointResult r = midpoint_step(ens, make_landau(1.0 / 16.0, gamma, 2), score, 0.05, 1e-13, 200);
    EXPECT_GT(r.iterations, 1);
    const Moments m1 = moments(ens);
    EXPECT_LE(std::abs(energy_increment(v0, ens.velocities)), 1e-11);
    EXPECT_LE((m1.momentum - m0.momentum).norm(), 1e-13);
    // the Euler step from the same state changes the energy visibly
    const DriftField g = compute_drift(ParticleEnsemble{v0, 0.0}, make_landau(1.0 / 16.0, gamma, 2), score);
    EXPECT_GT(0.05 * 0.05 * g.colwise().squaredNorm().mean(), 1e3 * std::abs(energy_increment(v0, ens.velocities)));
  }
}

TEST(ParticleSystem, MidpointStallSignalsFixedPointNotConverged) {
  ParticleEnsemble ens{gaussian_sample(2, 50, 57), 0.0};
  const FunctionScore score(2, [](const Vector& x) { return bkw2d_score(8.0 * std::log(2.0), x); });
  try {
    (void)midpoint_step(ens, make_landau(1.0, 0.0, 2), score, 0.5, 1e-14, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::FixedPointNotConverged);
  }
}

// ---------------------------------------------------------------------------
// Moments and entropy decay

TEST(ParticleSystem, MomentsExamples) {
  const Moments one = moments(ParticleEnsemble{vec({1, 2}), 0.0});
  EXPECT_EQ(one.mass, 1.0);
  EXPECT_EQ(one.momentum, vec({1, 2}));
  EXPECT_DOUBLE_EQ(one.energy, 5.0);
  const Moments pair = moments(ParticleEnsemble{(Matrix(2, 2) << 0.3, -0.3, -2, 2).finished(), 0.0});
  EXPECT_EQ(pair.momentum, Vector::Zero(2));
}

TEST(ParticleSystem, GaussianSampleEnergy) {
  const int n = 10000;
  const Moments m = moments(ParticleEnsemble{gaussian_sample(2, n, 61), 0.0});
  EXPECT_NEAR(m.energy, 2.0, 5.0 / std::sqrt(static_cast<double>(n)));
}

TEST(ParticleSystem, EntropyDecayOfZeroScoreIsZero) {
  const Matrix v = gaussian_sample(2, 30, 63);
  EXPECT_EQ(entropy_decay_from_scores(v, Matrix::Zero(2, 30), make_landau(1.0, 0.0, 2)), 0.0);
  EXPECT_EQ(entropy_decay_estimate(ParticleEnsemble{v, 0.0}, make_landau(1.0, 0.0, 2),
                                   AffineScore(Matrix::Zero(2, 2))),
            0.0);
}

TEST(ParticleSystem, EntropyDecayIsNonpositiveAndMatchesBothForms) {
  for (int trial = 0; trial < 20; ++trial) {
    const int d = trial % 2 == 0 ? 2 : 3;
    const Matrix v = gaussian_sample(d, 40, 100 + trial);
    // arbitrary (non-gradient) scores from a random network
    Rng rng(200 + trial);
    const ScoreModel net = ScoreModel::initialize(MlpArchitecture{d, 2, 8, Activation::Swish, false, false}, rng);
    const Matrix s = net.score(v) + gaussian_sample(d, 40, 300 + trial);
    for (const KernelKind& k :
         {make_landau(0.5, 0.0, d), make_landau(0.5, -3.0, d), KernelKind(IdentityKernel{d})}) {
      const double sym = entropy_decay_from_scores(v, s, k);
      const double direct = entropy_decay_estimate_direct(v, s, k);
      EXPECT_LE(sym, 1e-12);
      EXPECT_LE(direct, 1e-12);
      // −(1/2N²) Σ_ij Δs·A Δs evaluated independently
      double acc = 0.0;
      for (Eigen::Index i = 0; i < v.cols(); ++i)
        for (Eigen::Index j = 0; j < v.cols(); ++j) {
          if (i == j) continue;
          const Vector ds = s.col(i) - s.col(j);
          acc += ds.dot(eval_A(k, v.col(i) - v.col(j)) * ds);
        }
      const double half = -acc / (2.0 * 40 * 40);
      EXPECT_LE(std::abs(sym - half), 1e-10 * std::max(1.0, std::abs(half)));
      EXPECT_LE(std::abs(direct - half), 1e-10 * std::max(1.0, std::abs(half)));
    }
  }
}
