#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gmq/error.hpp"
#include "gmq/schemes.hpp"
#include "gmq/special.hpp"
#include "support.hpp"

using namespace gmq;

TEST(Axes, Validation) {
  EXPECT_THROW(Axes(Matrix{{1.0, 0.1}, {0.0, 1.0}}, Vector::Ones(2), Vector::Zero(2)), Error);
  EXPECT_THROW(Axes(Matrix::Identity(2, 2), Vector{{1.0, 0.0}}, Vector::Zero(2)), Error);
  EXPECT_THROW(Axes(Matrix::Identity(2, 2), Vector::Ones(3), Vector::Zero(2)), Error);
}

TEST(Axes, FrameRoundTrip) {
  std::mt19937_64 gen(3);
  for (int t = 0; t < 200; ++t) {
    Index d = 1 + t % 6;
    Vector scales = test::random_vector(d, gen).cwiseAbs().array() + 0.1;
    Axes a(test::random_orthogonal(d, gen), scales, test::random_vector(d, gen, 3.0));
    Vector x = test::random_vector(d, gen, 5.0);
    EXPECT_LE((a.to_world(a.to_local(x)) - x).norm(), 1e-10 * std::max(1.0, x.norm()));
  }
}

TEST(GridScheme, CellBounds1D) {
  GridScheme g({{-1.0, 1.0}}, Axes::identity(1));
  std::size_t idx0[] = {0};
  auto cell = g.cell(idx0);
  EXPECT_EQ(cell.bounds[0].first, -INFINITY);
  EXPECT_EQ(cell.bounds[0].second, 0.0);
  EXPECT_EQ(cell.location[0], -1.0);
  std::size_t bad[] = {2};
  try {
    g.cell(bad);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::IndexOutOfRange);
  }
}

TEST(GridScheme, IdentityLocation) {
  GridScheme g({{-2.0, 0.5, 3.0}, {-1.0, 4.0}}, Axes::identity(2));
  std::size_t idx[] = {0, 0};
  EXPECT_EQ(g.location(idx), (Vector{{-2.0, -1.0}}));
  EXPECT_EQ(g.size(), 6u);
}

TEST(GridScheme, ManualFrameFromListing) {
  Axes a(Matrix{{0.0, 1.0}, {1.0, 0.0}}, Vector{{0.5, 1.3}}, Vector{{-0.2, 0.2}});
  GridScheme g({{-0.6, 0.6}, {-0.5, 0.5}}, a);
  std::size_t idx[] = {0, 0};
  Vector w = g.location(idx);
  EXPECT_NEAR(w[0], -0.85, 1e-15);
  EXPECT_NEAR(w[1], -0.1, 1e-15);
  EXPECT_LE((a.to_local(w) - Vector{{-0.6, -0.5}}).norm(), 1e-15);
}

TEST(GridScheme, RejectsUnsortedPoints) {
  EXPECT_THROW(GridScheme({{1.0, 0.0}}, Axes::identity(1)), Error);
  EXPECT_THROW(GridScheme({{}}, Axes::identity(1)), Error);
}

TEST(GridScheme, FlattenRowMajor) {
  GridScheme g({{0.0, 1.0}, {0.0, 1.0, 2.0}}, Axes::identity(2));
  std::size_t idx[] = {1, 2};
  EXPECT_EQ(g.flatten(idx), 5u);
  EXPECT_EQ(g.unflatten(4), (std::vector<std::size_t>{1, 1}));
}

TEST(GridScheme, PartitionProperty) {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  Axes a(test::random_orthogonal(3, gen), Vector{{0.5, 1.0, 2.0}}, test::random_vector(3, gen));
  GridScheme g({{-1.0, 0.2, 1.5}, {0.0}, {-2.0, -1.0, 0.0, 1.0}}, a);
  // brute force over every cell for a subset, then the cheap bound check on 1e5 points
  for (int t = 0; t < 2000; ++t) {
    Vector x = a.to_world(Vector{{u(gen), u(gen), u(gen)}});
    auto idx = g.locate(x);
    auto cell = g.cell(idx);
    Vector y = a.to_local(x);
    int claims = 0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      auto c = g.cell(g.unflatten(k));
      bool in = true;
      for (Index j = 0; j < 3; ++j) in = in && y[j] > c.bounds[j].first && y[j] <= c.bounds[j].second;
      claims += in;
    }
    EXPECT_EQ(claims, 1);
    for (Index j = 0; j < 3; ++j) {
      EXPECT_GE(y[j], cell.bounds[j].first - 1e-12);
      EXPECT_LE(y[j], cell.bounds[j].second + 1e-12);
    }
  }
  for (int t = 0; t < 100000; ++t) {
    Vector y{{u(gen), u(gen), u(gen)}};
    auto cell = g.cell(g.locate(a.to_world(y)));
    for (Index j = 0; j < 3; ++j) {
      EXPECT_GE(y[j], cell.bounds[j].first - 1e-12);
      EXPECT_LE(y[j], cell.bounds[j].second + 1e-12);
    }
  }
}

TEST(CrossScheme, FourQuadrants) {
  CrossScheme c(Axes::identity(2), {}, false, 2);
  ASSERT_EQ(c.size(), 4u);
  for (const auto& r : c.regions()) EXPECT_NEAR(r.mass, 0.25, 1e-15);
  // sector of (1, 0.5) is +x; of (0.2, -3) is -y
  EXPECT_EQ(c.locate(Vector{{1.0, 0.5}}), 0u);
  EXPECT_EQ(c.locate(Vector{{0.2, -3.0}}), 3u);
  EXPECT_NEAR(c.regions()[0].location[0], std::sqrt(M_PI / 2.0), 1e-14);
}

TEST(CrossScheme, CenterHalfMass) {
  CrossScheme c(Axes::identity(2), {2.0 * std::log(2.0)}, true, 2);
  ASSERT_EQ(c.size(), 5u);
  EXPECT_TRUE(c.regions()[0].center);
  EXPECT_NEAR(c.regions()[0].mass, 0.5, 1e-15);
  double total = 0.0;
  for (const auto& r : c.regions()) total += r.mass;
  EXPECT_NEAR(total, 1.0, 1e-15);
}

TEST(CrossScheme, OneDimensionalIsSymmetricIntervals) {
  CrossScheme c(Axes::identity(1), {1.0}, true, 1);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_NEAR(c.regions()[0].mass, std::erf(1.0 / std::sqrt(2.0)), 1e-15);
  EXPECT_NEAR(c.regions()[1].location[0], -c.regions()[2].location[0], 1e-15);
  EXPECT_EQ(c.locate(Vector{{0.5}}), 0u);
  EXPECT_EQ(c.locate(Vector{{-1.5}}), 2u);
  // location is the conditional mean of the tail
  double tail = std_normal_pdf(1.0) / std_normal_sf(1.0);
  EXPECT_NEAR(c.regions()[1].location[0], tail, 1e-13);
}

TEST(CrossScheme, InvalidThresholds) {
  EXPECT_THROW(CrossScheme(Axes::identity(2), {2.0, 1.0}, true, 2), Error);
  EXPECT_THROW(CrossScheme(Axes::identity(2), {-1.0}, true, 2), Error);
}

TEST(CrossScheme, PartitionProperty) {
  std::mt19937_64 gen(9);
  Axes a(test::random_orthogonal(3, gen), Vector{{2.0, 1.0, 0.5}}, test::random_vector(3, gen));
  CrossScheme c(a, {0.5, 2.0, 5.0}, true, 3);
  for (int t = 0; t < 100000; ++t) {
    Vector y = test::random_vector(3, gen, 1.5);
    std::size_t k = c.locate(a.to_world(y));
    ASSERT_LT(k, c.size());
    const auto& r = c.regions()[k];
    double m = y.squaredNorm();
    EXPECT_GT(m, r.lower - 1e-12);
    EXPECT_LE(m, r.upper + 1e-12);
    if (!r.center) {
      Index axis;
      y.cwiseAbs().maxCoeff(&axis);
      EXPECT_EQ(axis, r.axis);
      EXPECT_EQ(y[axis] < 0 ? -1 : 1, r.sign);
    }
  }
}

TEST(Alignment, Examples) {
  GaussianComponent diag(Vector::Zero(2), Matrix{{0.5, 0.0}, {0.0, 0.6}});
  GaussianComponent corr(Vector::Zero(2), Matrix{{1.0, 0.5}, {0.5, 1.0}});
  EXPECT_TRUE(alignment_check(Axes::identity(2), diag));
  EXPECT_FALSE(alignment_check(Axes::identity(2), corr));
  Axes eig(corr.spectrum().eigenvectors, Vector::Ones(2), Vector::Zero(2));
  EXPECT_TRUE(alignment_check(eig, corr));
  // repeated eigenvalues: any basis is aligned
  std::mt19937_64 gen(1);
  GaussianComponent iso(Vector::Zero(3), 2.0 * Matrix::Identity(3, 3));
  EXPECT_TRUE(alignment_check(Axes(test::random_orthogonal(3, gen), Vector::Ones(3), Vector::Zero(3)), iso));
  EXPECT_THROW(alignment_check(Axes::identity(3), diag), Error);
}
