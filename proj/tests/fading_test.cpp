#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "cellcov/fading.hpp"
#include "oracles.hpp"

using cellcov::FadingModel;
using cellcov::Stream;
namespace fd = cellcov::fading;

namespace {

FadingModel uniform_table() { return FadingModel::tabulated({0.0, 2.0}, {0.5, 0.5}); }

double sample_mean(const FadingModel& m, int n, std::uint64_t seed) {
  Stream s(seed, 0);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += fd::sample_power(m, s);
  return sum / n;
}

}  // namespace

TEST(FadingModel, FactoriesValidate) {
  EXPECT_THROW(FadingModel::exponential(0.0), std::invalid_argument);
  EXPECT_THROW(FadingModel::exponential(-1.0), std::invalid_argument);
  EXPECT_THROW(FadingModel::lognormal_db(0.0, -1.0), std::invalid_argument);
  EXPECT_THROW(FadingModel::tabulated({0.0, 1.0}, {0.5, 0.5}), std::invalid_argument);
  EXPECT_THROW(FadingModel::tabulated({0.0, 0.0, 2.0}, {0.5, 0.5, 0.5}), std::invalid_argument);
  EXPECT_THROW(FadingModel::tabulated({-1.0, 1.0}, {0.5, 0.5}), std::invalid_argument);
  EXPECT_THROW(FadingModel::tabulated({0.0, 2.0}, {1.5, -0.5}), std::invalid_argument);
  EXPECT_NO_THROW(uniform_table());
}

TEST(MeanPower, ClosedForms) {
  EXPECT_DOUBLE_EQ(fd::mean_power(FadingModel::exponential(1.0)), 1.0);
  EXPECT_DOUBLE_EQ(fd::mean_power(FadingModel::exponential(4.0)), 0.25);
  EXPECT_DOUBLE_EQ(fd::mean_power(FadingModel::lognormal_db(0.0, 0.0)), 1.0);
  EXPECT_NEAR(fd::mean_power(uniform_table()), 1.0, 1e-15);
}

TEST(MeanPower, LognormalSixDbAgainstGaussianQuadrature) {
  const double kappa = 6.0, c = std::numbers::ln10 / 10.0;
  const double ref = oracle::simpson(
      [&](double x) {
        return std::exp(c * x) * std::exp(-0.5 * x * x / (kappa * kappa)) /
               (kappa * std::sqrt(2.0 * std::numbers::pi));
      },
      -12.0 * kappa, 12.0 * kappa, 200000);
  EXPECT_NEAR(fd::mean_power(FadingModel::lognormal_db(0.0, kappa)), ref, 1e-10);
  EXPECT_NEAR(ref, std::exp(std::pow(0.6 * std::numbers::ln10, 2) / 2.0), 1e-10);
}

TEST(MeanPower, SampleMeansWithinThreeStandardErrors) {
  const int n = 1000000;
  {
    const auto m = FadingModel::exponential(2.0);
    EXPECT_NEAR(sample_mean(m, n, 11), 0.5, 3.0 * 0.5 / std::sqrt(n));
  }
  {
    const auto m = FadingModel::lognormal_db(0.0, 6.0);
    const double sd = std::sqrt(fd::second_moment(m) - std::pow(fd::mean_power(m), 2));
    EXPECT_NEAR(sample_mean(m, n, 12), fd::mean_power(m), 3.0 * sd / std::sqrt(n));
  }
  {
    const auto m = FadingModel::tabulated({0.0, 1.0, 2.0}, {0.0, 1.0, 0.0});
    EXPECT_NEAR(sample_mean(m, n, 13), 1.0, 3.0 * std::sqrt(1.0 / 6.0) / std::sqrt(n));
  }
}

TEST(SamplePower, DegenerateLognormalIsOne) {
  Stream s(1, 1);
  const auto m = FadingModel::lognormal_db(0.0, 0.0);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(fd::sample_power(m, s), 1.0);
}

TEST(SamplePower, ReproducibleForFixedStream) {
  Stream a(99, 3), b(99, 3);
  const auto m = FadingModel::exponential(1.0);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(fd::sample_power(m, a), fd::sample_power(m, b));
}

TEST(SamplePower, TabulatedStaysInSupport) {
  Stream s(5, 5);
  const auto m = FadingModel::tabulated({0.5, 1.0, 3.0}, {0.0, 0.8, 0.0});
  for (int i = 0; i < 10000; ++i) {
    const double g = fd::sample_power(m, s);
    ASSERT_GE(g, 0.5);
    ASSERT_LE(g, 3.0);
  }
}

TEST(NormalizeToMean, Cases) {
  const auto e = fd::normalize_to_mean(FadingModel::exponential(2.0), 1.0);
  EXPECT_DOUBLE_EQ(e.as<fd::Exponential>().rate, 1.0);

  const auto l = fd::normalize_to_mean(FadingModel::lognormal_db(0.0, 6.0), 1.0);
  const double c = std::numbers::ln10 / 10.0;
  EXPECT_NEAR(l.as<fd::LognormalDb>().mean_db, -10.0 * std::log10(std::numbers::e) * std::pow(6.0 * c, 2) / 2.0,
              1e-12);
  EXPECT_EQ(l.as<fd::LognormalDb>().std_db, 6.0);
  EXPECT_NEAR(fd::mean_power(l), 1.0, 1e-12);

  const auto p = fd::normalize_to_mean(FadingModel::lognormal_db(3.0, 0.0), 1.0);
  EXPECT_NEAR(p.as<fd::LognormalDb>().mean_db, 0.0, 1e-12);

  const auto t = fd::normalize_to_mean(uniform_table(), 3.0);
  EXPECT_NEAR(fd::mean_power(t), 3.0, 1e-9);
  EXPECT_THROW(fd::normalize_to_mean(e, 0.0), std::invalid_argument);
}

TEST(NormalizeToMean, Idempotent) {
  for (const auto& m : {FadingModel::lognormal_db(2.0, 3.0), uniform_table()}) {
    const auto once = fd::normalize_to_mean(m, 1.7);
    const auto twice = fd::normalize_to_mean(once, 1.7);
    EXPECT_NEAR(fd::mean_power(once), fd::mean_power(twice), 1e-12);
  }
}

TEST(OneMinusLaplace, ExponentialClosedFormAndGenericPathAgree) {
  const auto m = FadingModel::exponential(1.5);
  for (double s : {1e-8, 0.1, 1.0, 30.0}) {
    const double generic =
        fd::expectation(m, [s](double g) { return -std::expm1(-s * g); }, {1e-12, 1e-300, 2000});
    EXPECT_NEAR(fd::one_minus_laplace(m, s), generic, 1e-10 * generic);
  }
  EXPECT_EQ(fd::one_minus_laplace(m, 0.0), 0.0);
  EXPECT_NEAR(fd::laplace_of_power(m, 1.0), 1.5 / 2.5, 1e-15);
}

TEST(BetaExpectation, ExponentialCollapsesToOnePlusRho) {
  const auto m = FadingModel::exponential(1.0);
  for (double alpha : {2.5, 3.0, 4.0, 5.0}) {
    for (double tdb : {-10.0, -3.0, 0.0, 7.0, 20.0}) {
      const double T = std::pow(10.0, tdb / 10.0);
      const double ref = 1.0 + oracle::rho(T, alpha);
      EXPECT_NEAR(fd::beta_expectation(m, T, alpha, 1.0), ref, 1e-6 * ref)
          << "alpha=" << alpha << " T_dB=" << tdb;
    }
  }
}

TEST(BetaExpectation, AlphaFourUnitThreshold) {
  EXPECT_NEAR(fd::beta_expectation(FadingModel::exponential(1.0), 1.0, 4.0, 1.0),
              1.0 + std::numbers::pi / 4.0, 1e-9);
}

TEST(BetaExpectation, PointMassMatchesIncompleteGammaOracle) {
  // g = 1: beta = (2/alpha) x^{2/alpha} (Gamma(-2/alpha, x) - Gamma(-2/alpha)), x = mu T.
  const auto m = FadingModel::lognormal_db(0.0, 0.0);
  for (double alpha : {3.0, 4.0}) {
    for (double x : {0.2, 1.0, 6.0}) {
      const double a = -2.0 / alpha;
      const double ref = 2.0 / alpha * std::pow(x, -a) *
                         (oracle::upper_gamma(a, x) - oracle::gamma_negative(a));
      EXPECT_NEAR(fd::beta_expectation(m, x, alpha, 1.0), ref, 1e-8 * ref);
    }
  }
}

TEST(BetaExpectation, TendsToOneAtSmallThreshold) {
  EXPECT_NEAR(fd::beta_expectation(FadingModel::exponential(1.0), 1e-10, 4.0, 1.0), 1.0, 1e-4);
}

TEST(BetaExpectation, MonotoneInThreshold) {
  for (const auto& m : {FadingModel::exponential(1.0), fd::normalize_to_mean(FadingModel::lognormal_db(0, 6), 1.0),
                        FadingModel::tabulated({0.0, 1.0, 2.0}, {0.0, 1.0, 0.0})}) {
    double prev = 0.0;
    for (double tdb = -10.0; tdb <= 20.0; tdb += 2.5) {
      const double b = fd::beta_expectation(m, std::pow(10.0, tdb / 10.0), 4.0, 1.0);
      EXPECT_GE(b, prev);
      prev = b;
    }
  }
}

TEST(BetaExpectation, AlphaAtMostTwoDiverges) {
  EXPECT_THROW(fd::beta_expectation(FadingModel::exponential(1.0), 1.0, 2.0, 1.0),
               cellcov::DivergenceError);
  EXPECT_THROW(fd::beta_expectation(FadingModel::exponential(1.0), 1.0, 1.5, 1.0),
               cellcov::DivergenceError);
}

TEST(LoadTabulated, ParsesCommentsAndReportsLine) {
  std::istringstream ok("# power,pdf\n0,0.5\n\n2,0.5\n");
  EXPECT_NEAR(fd::mean_power(fd::load_tabulated_csv(ok, "ok.csv")), 1.0, 1e-15);

  std::istringstream bad("# power,pdf\n0,0.5\n1,abc\n2,0.5\n");
  try {
    fd::load_tabulated_csv(bad, "bad.csv");
    FAIL() << "expected ParseError";
  } catch (const cellcov::ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(fd::load_tabulated_csv(std::string("/nonexistent/table.csv")), cellcov::IoError);
}
