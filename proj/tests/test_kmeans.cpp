#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace fedspectral;
using namespace fedspectral::testing;

TEST(KMeans, SeparatedPairs) {
  const Matrix pts{{0, 0}, {0.1, 0}, {10, 0}, {10.1, 0}};
  for (Seed s = 0; s < 10; ++s) {
    const Labeling l = kmeans(pts, 2, s);
    EXPECT_EQ(l[0], l[1]);
    EXPECT_EQ(l[2], l[3]);
    EXPECT_NE(l[0], l[2]);
  }
}

TEST(KMeans, KEqualsNGivesDistinctLabels) {
  const Matrix pts = random_matrix(9, 3, 4);
  const Labeling l = kmeans(pts, 9, 2);
  EXPECT_EQ(count_clusters(l), 9u);
}

TEST(KMeans, Deterministic) {
  const Matrix pts = random_matrix(200, 4, 12);
  EXPECT_EQ(kmeans(pts, 7, 99), kmeans(pts, 7, 99));
}

TEST(KMeans, ObjectiveNeverIncreases) {
  for (Seed s = 0; s < 15; ++s) {
    const Matrix pts = random_matrix(150, 3, 50 + s);
    const KMeansResult r = kmeans_detailed(pts, 8, s);
    for (std::size_t i = 1; i < r.objective_history.size(); ++i)
      EXPECT_LE(r.objective_history[i], r.objective_history[i - 1] + 1e-12);
    EXPECT_TRUE(r.converged);
  }
}

TEST(KMeans, DuplicateRowsShareLabels) {
  // three distinct locations, five clusters requested
  const Matrix pts{{0, 0}, {0, 0}, {1, 1}, {1, 1}, {1, 1}, {5, 5}};
  const Labeling l = kmeans(pts, 5, 3);
  EXPECT_EQ(l[0], l[1]);
  EXPECT_EQ(l[2], l[3]);
  EXPECT_EQ(l[3], l[4]);
  for (int x : l) {
    EXPECT_GE(x, 0);
    EXPECT_LT(x, 5);
  }
}

TEST(KMeans, AllIdenticalRows) {
  const Matrix pts(10, 2, 0.25);
  const Labeling l = kmeans(pts, 3, 8);
  EXPECT_EQ(count_clusters(l), 1u);
  EXPECT_EQ(l, kmeans(pts, 3, 8));
}

TEST(KMeans, EmptyClusterIsRepaired) {
  // seeds that collide on a tight group leave a cluster empty after the first assignment;
  // the repair moves the farthest point there, so all k labels end up used
  Matrix pts(40, 1);
  for (std::size_t i = 0; i < 40; ++i) pts(i, 0) = i < 38 ? 0.001 * static_cast<double>(i) : 100.0 + static_cast<double>(i);
  for (Seed s = 0; s < 10; ++s) EXPECT_EQ(count_clusters(kmeans(pts, 4, s)), 4u);
}

TEST(KMeans, RejectsBadK) {
  EXPECT_THROW(kmeans(Matrix(3, 2), 0, 1), ContractError);
  EXPECT_THROW(kmeans(Matrix(3, 2), 4, 1), ContractError);
}
