#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gmq/discretize.hpp"
#include "gmq/error.hpp"
#include "gmq/oracle.hpp"
#include "gmq/special.hpp"
#include "support.hpp"

using namespace gmq;

TEST(Quadrature, Examples) {
  EXPECT_NEAR(quadrature_cell_cost(-INFINITY, INFINITY, 0.0), 1.0, 1e-10);
  EXPECT_NEAR(quadrature_cell_cost(0.0, INFINITY, std::sqrt(2.0 / M_PI)), 0.18169011381620933, 1e-11);
  EXPECT_NEAR(quadrature_cell_prob(-1.0, 1.0), 0.68268949213708590, 1e-11);
  EXPECT_THROW(quadrature_cell_cost(1.0, 0.0, 0.0), Error);
}

TEST(Quadrature, AdaptiveSimpsonPolynomialIsExact) {
  EXPECT_NEAR(adaptive_simpson([](double x) { return x * x * x - x; }, -1.0, 2.0, 1e-13), 2.25, 1e-12);
}

TEST(Rng, DeterministicReplay) {
  Rng a(123), b(123), c(124);
  for (int i = 0; i < 1000; ++i) {
    double x = a.normal();
    EXPECT_EQ(x, b.normal());
    (void)c;
  }
  EXPECT_NE(Rng(1).uniform(), Rng(2).uniform());
  EXPECT_NE(derive_seed(5, 0), derive_seed(5, 1));
  auto mix = test::paper_mixture();
  Matrix loc{{0.0, 0.0}, {1.0, 1.0}};
  auto e1 = mc_coupling_cost(mix, loc, 50000, 9);
  auto e2 = mc_coupling_cost(mix, loc, 50000, 9);
  EXPECT_EQ(e1.value, e2.value);
  EXPECT_EQ(e1.std_error, e2.std_error);
  EXPECT_EQ(e1.seed, 9u);
  EXPECT_EQ(e1.samples, 50000u);
}

TEST(Rng, UniformAndNormalMoments) {
  Rng r(77);
  const int n = 400000;
  double su = 0.0, sn = 0.0, sn2 = 0.0;
  for (int i = 0; i < n; ++i) {
    double u = r.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
    double z = r.normal();
    sn += z;
    sn2 += z * z;
  }
  EXPECT_NEAR(su / n, 0.5, 4 * std::sqrt(1.0 / 12 / n));
  EXPECT_NEAR(sn / n, 0.0, 4 / std::sqrt(n));
  EXPECT_NEAR(sn2 / n, 1.0, 4 * std::sqrt(2.0 / n));
}

TEST(McCoupling, Examples) {
  GaussianMixture n01(GaussianComponent(Vector::Zero(1), Matrix::Identity(1, 1)));
  const double c = std::sqrt(2.0 / M_PI);
  auto two = mc_coupling_cost(n01, Matrix{{-c}, {c}}, 1000000, 1);
  EXPECT_NEAR(two.value, std::sqrt(1.0 - 2.0 / M_PI), 3 * two.std_error);
  EXPECT_GT(two.std_error, 0.0);

  GaussianMixture iso(GaussianComponent(Vector::Zero(2), Matrix::Identity(2, 2)));
  auto one = mc_coupling_cost(iso, Matrix::Zero(1, 2), 1000000, 2);
  EXPECT_NEAR(one.value, std::sqrt(2.0), 3 * one.std_error);

  GaussianMixture tight({0.5, 0.5}, {GaussianComponent(Vector{{0.0, 1.0}}, 1e-14 * Matrix::Identity(2, 2)),
                                     GaussianComponent(Vector{{3.0, 1.0}}, 1e-14 * Matrix::Identity(2, 2))});
  auto collapse = mc_coupling_cost(tight, Matrix{{0.0, 1.0}, {3.0, 1.0}}, 10000, 3);
  EXPECT_LT(collapse.value, 1e-6);

  EXPECT_THROW(mc_coupling_cost(n01, Matrix{{0.0}}, 999, 1), Error);
}

TEST(McRegion, Examples) {
  GaussianComponent iso(Vector::Zero(2), Matrix::Identity(2, 2));
  auto quad = mc_region_prob(iso, [](const Vector& x) { return x[0] > 0 && x[1] > 0; }, 200000, 4);
  EXPECT_NEAR(quad.value, 0.25, 4 * quad.std_error);
  const double k = 2.0 * std::log(2.0);
  auto disk = mc_region_prob(iso, [k](const Vector& x) { return x.squaredNorm() <= k; }, 200000, 5);
  EXPECT_NEAR(disk.value, 0.5, 4 * disk.std_error);
}

TEST(McRegion, GridCellsMatchClosedForm) {
  std::mt19937_64 gen(10);
  for (int t = 0; t < 20; ++t) {
    Index d = 1 + t % 3;
    Matrix q = test::random_orthogonal(d, gen);
    Vector lam = test::random_vector(d, gen).cwiseAbs().array() + 0.2;
    Matrix cov = q * lam.asDiagonal() * q.transpose();
    GaussianComponent c(test::random_vector(d, gen), 0.5 * (cov + cov.transpose()));
    std::vector<std::vector<double>> pts;
    for (Index j = 0; j < d; ++j) pts.push_back({-1.0, 0.0, 0.7});
    GridScheme g(pts, Axes(q, lam.cwiseSqrt(), test::random_vector(d, gen, 0.3)));
    auto exact = discretize_gaussian_grid(c, g);
    auto mc = mc_partition_probs(c, [&](const Vector& x) { return g.flatten(g.locate(x)); }, g.size(), 100000,
                                 static_cast<std::uint64_t>(t));
    for (std::size_t k = 0; k < g.size(); ++k)
      EXPECT_NEAR(mc[k].value, exact.discrete.probabilities()[static_cast<Index>(k)],
                  4 * std::max(mc[k].std_error, 1.0 / 100000));
  }
}

TEST(Sampler, DegenerateDrawsStayOnSubspace) {
  GaussianComponent line(Vector{{1.0, 2.0}}, Matrix{{1.0, 1.0}, {1.0, 1.0}});
  MixtureSampler s{GaussianMixture(line)};
  Rng r(8);
  Vector x(2);
  for (int i = 0; i < 1000; ++i) {
    s.draw(r, x);
    EXPECT_NEAR((x[0] - 1.0) - (x[1] - 2.0), 0.0, 1e-12);
  }
}
