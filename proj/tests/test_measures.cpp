#include <algorithm>
#include <random>
#include <set>
#include <string>

#include <gtest/gtest.h>

#include "crea/measures.hpp"
#include "support/shapes.hpp"

namespace crea {
namespace {

const DistanceMetric& unit_null_metric() {
  // distance 1 to the nullconcept, payload-discrete otherwise
  static const DistanceMetric m(
      [](const Concept& x, const Concept& y) {
        if (x.is_null && y.is_null) return 0.0;
        if (x.is_null || y.is_null) return 1.0;
        return x == y ? 0.0 : 1.0;
      },
      false, "unit-null");
  return m;
}

Product random_product(std::mt19937& rng, std::size_t max_size, int alphabet) {
  std::uniform_int_distribution<std::size_t> len(0, max_size);
  std::uniform_int_distribution<int> sym(0, alphabet - 1);
  std::vector<Concept> c;
  const std::size_t n = len(rng);
  for (std::size_t i = 0; i < n; ++i) c.push_back(Concept::symbol("c" + std::to_string(sym(rng))));
  return Product(std::move(c));
}

TEST(Fluency, StickFigure) {
  const auto metric = network_metric(testing::shapes_network());
  EXPECT_EQ(fluency(testing::stick_figure(), metric), 6.0);
  EXPECT_EQ(fluency(Product(), metric), 0.0);
}

TEST(Fluency, SquaredUsesSquaredNullDistance) {
  const auto metric = euclidean_metric();
  const Product p({Concept::vector("a", {3, 4}), Concept::vector("b", {1, 0})});
  EXPECT_DOUBLE_EQ(fluency(p, metric, {.squared = true}), 26.0);
  EXPECT_DOUBLE_EQ(fluency(p, metric), 6.0);
}

TEST(Fluency, UnitNullMetricCountsConcepts) {
  std::mt19937 rng(1);
  for (int t = 0; t < 100; ++t) {
    const auto p = random_product(rng, 30, 5);
    EXPECT_EQ(fluency(p, unit_null_metric()), static_cast<double>(p.size()));
  }
}

TEST(Flexibility, StickFigureWithoutDedup) {
  const auto metric = network_metric(testing::shapes_network());
  EXPECT_DOUBLE_EQ(flexibility(testing::stick_figure(), metric), 28.0 / 5.0);
  const auto terms = flexibility_terms(std::span<const Concept>(testing::stick_figure().concepts()),
                                       concept_cost(metric), false, false);
  EXPECT_EQ(terms.sum, 28.0);
  EXPECT_EQ(terms.count, 6u);
}

TEST(Flexibility, StickFigureWithDedup) {
  // distinct {circle, square, triangle}: 2 * (2 + 2 + 1) / 2
  const auto metric = network_metric(testing::shapes_network());
  EXPECT_EQ(flexibility(testing::stick_figure(), metric, {.dedup = true}), 5.0);
}

TEST(Flexibility, DiscreteMetricWithDedupCountsDistinct) {
  std::mt19937 rng(2);
  for (int t = 0; t < 100; ++t) {
    const auto p = random_product(rng, 25, 8);
    std::set<std::string> distinct_labels;
    for (const auto& c : p.concepts()) distinct_labels.insert(*c.as_symbol());
    const double expected = distinct_labels.size() <= 1 ? 0.0 : static_cast<double>(distinct_labels.size());
    EXPECT_EQ(flexibility(p, discrete_metric(), {.dedup = true}), expected);
  }
}

TEST(Flexibility, SingleConceptIsZero) {
  EXPECT_EQ(flexibility(Product({Concept::symbol("triangle")}), network_metric(testing::shapes_network())), 0.0);
  // duplicates collapse to one class
  EXPECT_EQ(flexibility(Product({Concept::symbol("a"), Concept::symbol("a")}), discrete_metric(), {.dedup = true}),
            0.0);
}

TEST(Flexibility, MatchesLiteralDoubleSum) {
  std::mt19937 rng(3);
  const auto metric = testing::shapes_table_metric();
  const std::vector<std::string> shapes{"triangle", "square", "circle"};
  for (int t = 0; t < 200; ++t) {
    std::vector<Concept> c;
    const int n = t % 9;
    for (int i = 0; i < n; ++i) c.push_back(Concept::symbol(shapes[rng() % 3]));
    double literal = 0.0;
    for (const auto& x : c)
      for (const auto& y : c) literal += metric(x, y);
    const double expected = n <= 1 ? 0.0 : literal / (n - 1);
    EXPECT_EQ(flexibility(Product(c), metric), expected);
  }
}

TEST(Originality, StickFigureAgainstHouse) {
  const auto metric = network_metric(testing::shapes_network());
  const auto s = testing::stick_figure();
  EXPECT_EQ(originality(s, {testing::house()}, metric), 4.0);
  EXPECT_EQ(originality(s, {s}, metric), 0.0);
  EXPECT_EQ(originality(s, {testing::house(), testing::house()}, metric), 4.0);
}

TEST(Originality, EmptySampleIsAnError) {
  EXPECT_THROW(originality(testing::stick_figure(), {}, discrete_metric()), InvalidArgument);
}

TEST(Originality, SampleUnionIsWeightedAverage) {
  std::mt19937 rng(4);
  const auto metric = testing::shapes_table_metric();
  for (int t = 0; t < 50; ++t) {
    const auto s = random_product(rng, 5, 3);
    std::vector<Product> s1, s2;
    for (int i = 0; i < 1 + t % 3; ++i) s1.push_back(random_product(rng, 5, 3));
    for (int i = 0; i < 1 + t % 4; ++i) s2.push_back(random_product(rng, 5, 3));
    std::vector<Product> both = s1;
    both.insert(both.end(), s2.begin(), s2.end());
    const auto dm = discrete_metric();
    const double o1 = originality(s, s1, dm), o2 = originality(s, s2, dm), o = originality(s, both, dm);
    EXPECT_GE(o, std::min(o1, o2) - 1e-12);
    EXPECT_LE(o, std::max(o1, o2) + 1e-12);
    EXPECT_NEAR(o * both.size(), o1 * s1.size() + o2 * s2.size(), 1e-9);
    (void)metric;
  }
}

TEST(Measures, PermutationInvariant) {
  std::mt19937 rng(5);
  const auto metric = testing::shapes_table_metric();
  const std::vector<std::string> shapes{"triangle", "square", "circle"};
  for (int t = 0; t < 50; ++t) {
    std::vector<Concept> c;
    for (int i = 0; i < 1 + t % 7; ++i) c.push_back(Concept::symbol(shapes[rng() % 3]));
    std::vector<Concept> shuffled = c;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const Product a(c), b(shuffled);
    const std::vector<Product> sample{testing::house(), testing::stick_figure()};
    EXPECT_EQ(fluency(a, metric), fluency(b, metric));
    EXPECT_EQ(flexibility(a, metric), flexibility(b, metric));
    EXPECT_EQ(flexibility(a, metric, {.dedup = true}), flexibility(b, metric, {.dedup = true}));
    EXPECT_EQ(originality(a, sample, metric), originality(b, sample, metric));
  }
}

TEST(ProductDistance, MeanPairwise) {
  const auto metric = cosine_metric();
  const Product a({Concept::vector("x", {1, 0})});
  const Product b({Concept::vector("y", {0, 1})});
  MeasureConfig cfg = MeasureConfig::visual();
  EXPECT_DOUBLE_EQ(product_distance(a, b, metric, cfg), 1.0);
  EXPECT_EQ(product_distance(a, a, metric, cfg), 0.0);
  // empty side compares against the nullconcept
  EXPECT_EQ(product_distance(a, Product(), metric, cfg), 1.0);
  EXPECT_EQ(product_distance(Product(), Product(), metric, cfg), 0.0);
  cfg.product_distance = ProductDistance::tree_3step;
  EXPECT_THROW(product_distance(a, b, metric, cfg), InvalidArgument);
}

TEST(ProductDistance, SquaredAlignmentSquaresEachTerm) {
  const auto metric = testing::shapes_table_metric();
  // circle vs triangle: relabel 2^2 = 4 versus delete+insert 1 + 1
  const Product a({Concept::symbol("circle")}), b({Concept::symbol("triangle")});
  EXPECT_EQ(product_distance(a, b, metric, {.squared = true}), 2.0);
  EXPECT_EQ(product_distance(a, b, metric, {}), 2.0);
}

TEST(CreativityVector, Validity) {
  CreativityVector v;
  EXPECT_TRUE(v.valid());
  v.audio_originality = -1.0;
  EXPECT_FALSE(v.valid());
  EXPECT_EQ(CreativityVector::names.size(), 9u);
}

}  // namespace
}  // namespace crea
