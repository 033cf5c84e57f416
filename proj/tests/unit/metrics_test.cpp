#include <gtest/gtest.h>

#include "apptopic/metrics.hpp"

using namespace apptopic;

TEST(Confusion, RatesAndF1) {
  const ConfusionCounts c{114, 88, 412, 110};
  EXPECT_NEAR(c.tpr(), 100.0 * 114 / 224, 1e-12);
  EXPECT_NEAR(c.tnr(), 82.4, 1e-12);
  EXPECT_NEAR(c.fpr(), 17.6, 1e-12);
  EXPECT_NEAR(c.fnr(), 100.0 * 110 / 224, 1e-12);
  EXPECT_NEAR(c.f1(), 228.0 / 426.0, 1e-15);
  EXPECT_NEAR(f1_from_rates(c.tpr(), c.fpr(), 224, 500), c.f1(), 1e-9);
  EXPECT_EQ(ConfusionCounts{}.f1(), 0.0);
  EXPECT_EQ(ConfusionCounts{}.tpr(), 0.0);
}

TEST(RoundTo, HalfAwayFromZero) {
  EXPECT_DOUBLE_EQ(round_to(0.5352, 2), 0.54);
  EXPECT_DOUBLE_EQ(round_to(50.8928, 2), 50.89);
  EXPECT_DOUBLE_EQ(round_to(0.125, 2), 0.13);
}

TEST(Ari, KnownValues) {
  EXPECT_DOUBLE_EQ(adjusted_rand_index({0, 0, 1, 1}, {5, 5, 7, 7}), 1.0);
  // sklearn reference: adjusted_rand_score([0,0,1,1],[0,0,1,2]) = 0.5714285714
  EXPECT_NEAR(adjusted_rand_index({0, 0, 1, 1}, {0, 0, 1, 2}), 4.0 / 7.0, 1e-12);
  EXPECT_NEAR(adjusted_rand_index({0, 0, 0, 1, 1, 1}, {0, 1, 2, 0, 1, 2}), -4.0 / 11.0, 1e-12);
  EXPECT_THROW(adjusted_rand_index({0}, {0, 1}), std::invalid_argument);
}

TEST(Purity, Basic) {
  EXPECT_DOUBLE_EQ(purity({0, 0, 1, 1}, {3, 3, 4, 4}), 1.0);
  EXPECT_DOUBLE_EQ(purity({0, 0, 0, 0}, {1, 1, 2, 2}), 0.5);
}

TEST(Spearman, Basic) {
  EXPECT_NEAR(spearman_correlation({1, 2, 3, 4}, {10, 20, 30, 40}), 1.0, 1e-12);
  EXPECT_NEAR(spearman_correlation({1, 2, 3, 4}, {4, 3, 2, 1}), -1.0, 1e-12);
  // Ties take average ranks: x ranks (1.5,1.5,3), y ranks (1,2,3).
  EXPECT_NEAR(spearman_correlation({1, 1, 2}, {1, 2, 3}), 0.8660254037844386, 1e-12);
}
