#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "crea/distances.hpp"
#include "crea/metric.hpp"
#include "crea/semantic_network.hpp"
#include "support/shapes.hpp"

namespace crea {
namespace {

using testing::shapes_network;
using testing::shapes_table_metric;

SemanticNetwork parse_network(const std::string& text) {
  std::istringstream in(text);
  return SemanticNetwork::parse(in);
}

// Random connected network: a random spanning tree plus extra chords.
SemanticNetwork random_network(std::mt19937& rng, std::size_t n) {
  std::uniform_real_distribution<double> len(0.1, 5.0);
  std::vector<SemanticNetwork::Edge> edges;
  for (std::size_t i = 1; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> parent(0, i - 1);
    edges.push_back({"n" + std::to_string(parent(rng)), "n" + std::to_string(i), len(rng)});
  }
  std::uniform_int_distribution<std::size_t> any(0, n - 1);
  for (std::size_t k = 0; k < n; ++k) {
    const auto a = any(rng), b = any(rng);
    if (a != b) edges.push_back({"n" + std::to_string(a), "n" + std::to_string(b), len(rng)});
  }
  return SemanticNetwork(edges, "n0");
}

TEST(NetworkDistance, ShapeTable) {
  const auto net = shapes_network();
  EXPECT_EQ(net->distance("triangle", "square"), 1.0);
  EXPECT_EQ(net->distance("triangle", "circle"), 2.0);
  EXPECT_EQ(net->distance("square", "circle"), 2.0);
  EXPECT_EQ(net->distance("circle", "0"), 1.0);
  EXPECT_EQ(network_distance(*net, "circle", "circle"), 0.0);
}

TEST(NetworkDistance, UnknownIdIsNamed) {
  const auto net = shapes_network();
  try {
    net->distance("triangle", "hexagon");
    FAIL() << "expected UnknownId";
  } catch (const UnknownId& e) {
    EXPECT_EQ(e.id(), "hexagon");
  }
}

TEST(NetworkDistance, WeightedEdgesUseShortestPath) {
  const auto net = parse_network("a b 0.5\nb c 0.5\na c 3\nnull a\n");
  EXPECT_DOUBLE_EQ(net.distance("a", "c"), 1.0);
  EXPECT_DOUBLE_EQ(net.distance("c", "a"), 1.0);
}

TEST(NetworkDistance, TriangleInequalityExhaustive) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + trial * 48 / 19;
    const auto net = random_network(rng, n);
    ASSERT_LE(net.size(), 50u);
    for (std::size_t a = 0; a < net.size(); ++a)
      for (std::size_t b = 0; b < net.size(); ++b) {
        EXPECT_EQ(net.distance(a, b), net.distance(b, a));
        EXPECT_EQ(net.distance(a, b) == 0.0, a == b);
        for (std::size_t c = 0; c < net.size(); ++c)
          EXPECT_LE(net.distance(a, c), net.distance(a, b) + net.distance(b, c) + 1e-12);
      }
  }
}

TEST(NetworkParse, Errors) {
  EXPECT_THROW(parse_network("a b 1\n"), FormatError);                  // no null line
  EXPECT_THROW(parse_network("a b x\nnull a\n"), FormatError);          // bad length
  EXPECT_THROW(parse_network("a b 0\nnull a\n"), FormatError);          // non-positive
  EXPECT_THROW(parse_network("a b 1\nc d 1\nnull a\n"), FormatError);   // disconnected
  EXPECT_THROW(parse_network("a b 1\nnull a\nnull b\n"), FormatError); // two nulls
  EXPECT_THROW(parse_network("a b 1 2\nnull a\n"), FormatError);
  EXPECT_NO_THROW(parse_network("\na b 1\r\n\nnull a\n"));
}

TEST(Euclidean, Examples) {
  EXPECT_DOUBLE_EQ(euclidean_distance(std::vector<double>{0, 0}, std::vector<double>{3, 4}), 5.0);
  EXPECT_DOUBLE_EQ(euclidean_distance(std::vector<double>{1, 2, 2}, std::vector<double>{0, 0, 0}), 3.0);
  const std::vector<double> u{0.3, -1.7, 2.2};
  EXPECT_EQ(euclidean_distance(u, u), 0.0);
  EXPECT_THROW(euclidean_distance(std::vector<double>{1}, std::vector<double>{1, 2}), InvalidArgument);
}

TEST(Cosine, Examples) {
  EXPECT_DOUBLE_EQ(cosine_distance(std::vector<double>{1, 0}, std::vector<double>{0, 1}), 1.0);
  const std::vector<double> u{0.3, -1.7, 2.2};
  EXPECT_NEAR(cosine_distance(u, u), 0.0, 1e-15);
  EXPECT_EQ(cosine_distance(u, std::vector<double>{0, 0, 0}), 1.0);
  EXPECT_EQ(cosine_distance(std::vector<double>{0, 0, 0}, u), 1.0);
  EXPECT_EQ(cosine_distance(std::vector<double>{0, 0}, std::vector<double>{0, 0}), 0.0);
  EXPECT_DOUBLE_EQ(cosine_distance(std::vector<double>{1, 0}, std::vector<double>{-1, 0}), 2.0);
  EXPECT_THROW(cosine_distance(std::vector<double>{1}, std::vector<double>{1, 2}), InvalidArgument);
}

TEST(Cosine, PositiveScaleInvariance) {
  std::mt19937 rng(11);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> u(8), v(8);
    for (auto& x : u) x = g(rng);
    for (auto& x : v) x = g(rng);
    const double c = scale(rng);
    std::vector<double> cu = u;
    for (auto& x : cu) x *= c;
    EXPECT_NEAR(cosine_distance(cu, v), cosine_distance(u, v), 1e-12);
    EXPECT_NEAR(cosine_distance(u, cu), 0.0, 1e-12);
  }
}

TEST(MatrixDistance, Examples) {
  const Matrix a = Matrix::from_rows({{3, 4}});
  const Matrix b = Matrix::from_rows({{3, 4}, {0, 5}});
  // pad a -> [3,4,0,0]; flatten b -> [3,4,0,5]; difference [0,0,0,-5]
  EXPECT_DOUBLE_EQ(matrix_distance(a, b), 5.0);
  EXPECT_DOUBLE_EQ(matrix_distance(b, a), 5.0);
  EXPECT_EQ(matrix_distance(b, b), 0.0);
  EXPECT_DOUBLE_EQ(matrix_distance(b, Matrix(2, 2)), frobenius_norm(b));
  EXPECT_THROW(matrix_distance(a, Matrix(1, 3)), InvalidArgument);
}

TEST(MatrixDistance, EqualsFlattenedPaddedEuclidean) {
  std::mt19937 rng(3);
  std::uniform_int_distribution<std::size_t> dim(1, 6);
  std::normal_distribution<double> g;
  for (int t = 0; t < 300; ++t) {
    const std::size_t f = dim(rng), ta = dim(rng), tb = dim(rng);
    Matrix a(ta, f), b(tb, f);
    for (auto& x : a.data) x = g(rng);
    for (auto& x : b.data) x = g(rng);
    const std::size_t rows = std::max(ta, tb);
    const Matrix pa = pad_rows(a, rows), pb = pad_rows(b, rows);
    EXPECT_NEAR(matrix_distance(a, b), euclidean_distance(pa.data, pb.data), 1e-12);
    // zero rows appended to the longer operand never change the distance
    if (tb >= ta) {
      EXPECT_NEAR(matrix_distance(a, pad_rows(b, tb + 3)), matrix_distance(a, b), 1e-12);
    }
  }
}

TEST(MetricAxioms, ShapeTableAndNetworkAgree) {
  const std::vector<Concept> sample{Concept::symbol("triangle"), Concept::symbol("square"), Concept::symbol("circle"),
                                    Concept::null()};
  const auto table = shapes_table_metric();
  const auto net = network_metric(shapes_network());
  EXPECT_TRUE(check_metric_axioms(table, sample).ok());
  EXPECT_TRUE(check_metric_axioms(net, sample).ok());
  for (const auto& x : sample)
    for (const auto& y : sample) EXPECT_EQ(table(x, y), net(x, y));
}

TEST(MetricAxioms, NegativeValueReported) {
  const DistanceMetric broken(
      [](const Concept& x, const Concept& y) { return x == y ? 0.0 : -1.0; }, false, "broken");
  const auto report = check_metric_axioms(broken, {Concept::symbol("a"), Concept::symbol("b")});
  ASSERT_FALSE(report.ok());
  EXPECT_EQ(report.violations.front().kind, AxiomViolation::Kind::negative);
}

TEST(MetricAxioms, CosineIdentityOnlyFlaggedWhenNotPseudo) {
  const std::vector<Concept> sample{Concept::vector("u", {1, 2}), Concept::vector("2u", {2, 4}), Concept::null()};
  EXPECT_TRUE(check_metric_axioms(cosine_metric(), sample).ok());
  const DistanceMetric strict(
      [](const Concept& x, const Concept& y) { return cosine_metric()(x, y); }, false, "strict-cosine");
  const auto report = check_metric_axioms(strict, sample);
  ASSERT_EQ(report.violations.size(), 1u);
  EXPECT_EQ(report.violations[0].kind, AxiomViolation::Kind::indiscernible);
}

TEST(MetricAxioms, EmptySampleRejected) {
  EXPECT_THROW(check_metric_axioms(euclidean_metric(), {}), InvalidArgument);
}

TEST(Concept, NonFinitePayloadRejected) {
  EXPECT_THROW(Concept::vector("v", {1.0, NAN}), InvalidArgument);
  EXPECT_THROW(Concept::matrix("m", Matrix::from_rows({{INFINITY}})), InvalidArgument);
}

TEST(Product, EdgeInvariants) {
  EXPECT_THROW(Product({Concept::symbol("a")}, {{0, 1}}), InvalidArgument);
  EXPECT_THROW(Product({Concept::symbol("a"), Concept::null()}, {{0, 1}}), InvalidArgument);
}

TEST(NullConventions, VectorAndMatrixMetrics) {
  const auto v = Concept::vector("v", {3, 4});
  EXPECT_DOUBLE_EQ(euclidean_metric()(v, Concept::null()), 5.0);
  EXPECT_EQ(cosine_metric()(v, Concept::null()), 1.0);
  const auto m = Concept::matrix("m", Matrix::from_rows({{3, 4}, {0, 0}}));
  EXPECT_DOUBLE_EQ(matrix_metric()(Concept::null(), m), 5.0);
  EXPECT_EQ(matrix_metric()(Concept::null(), Concept::null()), 0.0);
}

}  // namespace
}  // namespace crea
