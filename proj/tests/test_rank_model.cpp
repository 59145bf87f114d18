#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "crea/experiment.hpp"
#include "crea/gbt.hpp"
#include "crea/kendall.hpp"
#include "crea/labels.hpp"
#include "support/oracles.hpp"

namespace crea {
namespace {

using V = std::vector<double>;

TEST(KendallTau, Examples) {
  EXPECT_DOUBLE_EQ(kendall_tau(V{1, 2, 3, 4}, V{1, 2, 3, 4}), 1.0);
  EXPECT_DOUBLE_EQ(kendall_tau(V{1, 2, 3, 4}, V{4, 3, 2, 1}), -1.0);
  EXPECT_NEAR(kendall_tau(V{1, 2, 3, 4}, V{1, 3, 2, 4}), 2.0 / 3.0, 1e-15);
}

TEST(KendallTau, Errors) {
  EXPECT_THROW(kendall_tau(V{1, 2}, V{1, 2, 3}), InvalidArgument);
  EXPECT_THROW(kendall_tau(V{1}, V{1}), InvalidArgument);
  EXPECT_THROW(kendall_tau(V{2, 2, 2}, V{1, 2, 3}), UndefinedTau);
  EXPECT_THROW(kendall_tau(V{1, 2, 3}, V{5, 5, 5}), UndefinedTau);
}

TEST(KendallTau, MatchesBruteForceWithTies) {
  std::mt19937 rng(101);
  std::uniform_int_distribution<int> len(2, 30), val(0, 6);
  for (int t = 0; t < 500; ++t) {
    const int n = len(rng);
    V a(n), b(n);
    for (auto& x : a) x = val(rng);
    for (auto& x : b) x = val(rng);
    if (std::all_of(a.begin(), a.end(), [&](double x) { return x == a[0]; }) ||
        std::all_of(b.begin(), b.end(), [&](double x) { return x == b[0]; }))
      continue;
    EXPECT_NEAR(kendall_tau(a, b), testing::brute_force_tau_b(a, b), 1e-12);
  }
}

TEST(KendallTau, SymmetricAndRankInvariant) {
  std::mt19937 rng(5);
  std::normal_distribution<double> g;
  for (int t = 0; t < 100; ++t) {
    V a(12), b(12);
    for (auto& x : a) x = std::round(g(rng) * 2);
    for (auto& x : b) x = std::round(g(rng) * 2);
    try {
      const double tau = kendall_tau(a, b);
      EXPECT_NEAR(kendall_tau(b, a), tau, 1e-15);
      V ea = a;
      for (auto& x : ea) x = std::exp(x) + 3.0;
      EXPECT_NEAR(kendall_tau(ea, b), tau, 1e-15);
    } catch (const UndefinedTau&) {
    }
  }
}

TEST(KendallTau, TauAVariant) {
  // 6 pairs: 3 concordant, 2 discordant, 1 tied in b
  EXPECT_NEAR(kendall_tau(V{1, 2, 3, 4}, V{1, 3, 2, 2}, TauVariant::a), 1.0 / 6.0, 1e-15);
}

TEST(RestrictedTau, Examples) {
  const std::map<std::string, double> truth{{"a", 1}, {"b", 2}, {"c", 3}, {"d", 4}};
  EXPECT_DOUBLE_EQ(restricted_tau(truth, {{"c", 3}, {"d", 4}}, {"a", "b"}, {"c", "d"}), 1.0);
  // test item placed at its true rank position
  EXPECT_DOUBLE_EQ(restricted_tau(truth, {{"c", 2.5}}, {"a", "b", "d"}, {"c"}), 1.0);
  // c, d predicted in swapped order: 5 qualifying pairs, 1 inverted
  EXPECT_NEAR(restricted_tau(truth, {{"c", 3.6}, {"d", 3.4}}, {"a", "b"}, {"c", "d"}), 3.0 / 5.0, 1e-15);
  EXPECT_THROW(restricted_tau(truth, {}, {"a", "b", "c", "d"}, {}), InvalidArgument);
  EXPECT_THROW(restricted_tau(truth, {{"e", 1}}, {"a"}, {"e"}), UnknownId);
}

TEST(RestrictedTau, AllTestEqualsFullTau) {
  std::mt19937 rng(77);
  std::uniform_int_distribution<int> val(0, 9);
  for (int t = 0; t < 100; ++t) {
    V truth(15), pred(15);
    for (auto& x : truth) x = val(rng);
    for (auto& x : pred) x = val(rng);
    const std::vector<char> all(15, 1);
    EXPECT_NEAR(restricted_tau(truth, pred, all), kendall_tau(truth, pred), 1e-12);
  }
}

TEST(Gbt, ConstantTarget) {
  Matrix x = Matrix::from_rows({{1}, {2}, {3}, {4}});
  const V y{7, 7, 7, 7};
  const auto m = fit_gbt(x, y, {5, 3, 0.3});
  for (double v : {0.0, 2.5, 10.0}) EXPECT_DOUBLE_EQ(m.predict(V{v}), 7.0);
}

TEST(Gbt, SingleStumpRecoversThreshold) {
  Matrix x = Matrix::from_rows({{1}, {2}, {3}, {10}, {11}, {12}});
  const V y{0, 0, 0, 5, 5, 5};
  const auto m = fit_gbt(x, y, {1, 1, 1.0});
  ASSERT_EQ(m.trees.size(), 1u);
  const auto& root = m.trees[0].nodes[0];
  EXPECT_EQ(root.feature, 0);
  EXPECT_DOUBLE_EQ(root.threshold, 6.5);
  for (std::size_t i = 0; i < y.size(); ++i) EXPECT_DOUBLE_EQ(m.predict(x.row(i)), y[i]);
}

TEST(Gbt, BestSplitMatchesEnumeration) {
  std::mt19937 rng(9);
  std::uniform_int_distribution<int> v(0, 8);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 8;
    Matrix x(n, 2);
    V y(n);
    for (auto& e : x.data) e = v(rng);
    for (auto& e : y) e = v(rng);
    const auto m = fit_gbt(x, y, {1, 1, 1.0});
    // oracle: try every threshold between distinct values, every feature
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double best = 0.0;
    for (int f = 0; f < 2; ++f)
      for (int th = 0; th <= 8; ++th) {
        double sl = 0, sr = 0;
        int nl = 0, nr = 0;
        for (std::size_t i = 0; i < n; ++i)
          if (x(i, f) <= th) {
            sl += y[i] - mean;
            ++nl;
          } else {
            sr += y[i] - mean;
            ++nr;
          }
        if (nl == 0 || nr == 0) continue;
        best = std::max(best, sl * sl / nl + sr * sr / nr);
      }
    double sse0 = 0, sse1 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      sse0 += (y[i] - mean) * (y[i] - mean);
      sse1 += (y[i] - m.predict(x.row(i))) * (y[i] - m.predict(x.row(i)));
    }
    EXPECT_NEAR(sse0 - sse1, best, 1e-9);
  }
}

TEST(Gbt, TrainingErrorNonIncreasing) {
  std::mt19937 rng(13);
  std::normal_distribution<double> g;
  for (int t = 0; t < 20; ++t) {
    Matrix x(30, 3);
    V y(30);
    for (auto& e : x.data) e = g(rng);
    for (std::size_t i = 0; i < 30; ++i) y[i] = x(i, 0) * 3 - x(i, 1) + 0.5 * g(rng);
    const auto m = fit_gbt(x, y, {15, 3, 0.3});
    ASSERT_EQ(m.train_mse.size(), 16u);
    for (std::size_t k = 1; k < m.train_mse.size(); ++k) EXPECT_LE(m.train_mse[k], m.train_mse[k - 1] + 1e-12);
    EXPECT_LE(m.train_mse.back(), m.train_mse[1]);
    for (const auto& tree : m.trees) EXPECT_LE(tree.depth(), 3);
  }
}

TEST(Gbt, PredictHandTraced) {
  GbtModel m;
  m.n_features = 2;
  m.base_score = 10.0;
  m.shrinkage = 0.5;
  RegressionTree t1;
  t1.nodes = {{0, 1.5, 1, 2, 0.0}, {-1, 0, -1, -1, -4.0}, {-1, 0, -1, -1, 6.0}};
  RegressionTree t2;
  t2.nodes = {{1, 0.0, 1, 2, 0.0}, {-1, 0, -1, -1, 2.0}, {-1, 0, -1, -1, -2.0}};
  m.trees = {t1, t2};
  // x = (2, -1): t1 -> right 6, t2 -> left 2; 10 + 0.5 * 8
  EXPECT_DOUBLE_EQ(m.predict(V{2, -1}), 14.0);
  // x = (1, 3): t1 -> left -4, t2 -> right -2; 10 + 0.5 * -6
  EXPECT_DOUBLE_EQ(m.predict(V{1, 3}), 7.0);
  GbtModel empty;
  empty.n_features = 1;
  empty.base_score = 3.5;
  EXPECT_EQ(empty.predict(V{0}), 3.5);
  EXPECT_THROW(m.predict(V{1}), InvalidArgument);
}

TEST(Gbt, Errors) {
  EXPECT_THROW(fit_gbt(Matrix::from_rows({{1}}), V{1}), InvalidArgument);
  EXPECT_THROW(fit_gbt(Matrix::from_rows({{1}, {NAN}}), V{1, 2}), InvalidArgument);
  EXPECT_THROW(fit_gbt(Matrix::from_rows({{1}, {2}}), V{1}), InvalidArgument);
}

TEST(GbtFormat, RoundTrip) {
  std::mt19937 rng(21);
  std::normal_distribution<double> g;
  Matrix x(25, 4);
  V y(25);
  for (auto& e : x.data) e = g(rng);
  for (auto& e : y) e = g(rng) * 10;
  const auto m = fit_gbt(x, y, {7, 4, 0.3});
  std::stringstream ss;
  write_models(ss, {{"m", {"a", "b", "c", "d"}, m}, {"n", {}, fit_gbt(x, y, {0, 1, 0.3})}});
  const auto back = read_models(ss);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].name, "m");
  EXPECT_EQ(back[0].features, (std::vector<std::string>{"a", "b", "c", "d"}));
  EXPECT_TRUE(back[0].model == m);
  for (std::size_t i = 0; i < 25; ++i) EXPECT_EQ(back[0].model.predict(x.row(i)), m.predict(x.row(i)));
  EXPECT_TRUE(back[1].model.trees.empty());
}

TEST(GbtFormat, Rejects) {
  auto bad = [](const std::string& s) {
    std::istringstream in(s);
    return read_models(in);
  };
  EXPECT_THROW(bad("CREAGBT 2\nmodels 0\n"), FormatError);
  EXPECT_THROW(bad("CREAGBT 1\nmodels 1\nmodel x\nfeatures 1\nbase 0\nshrinkage 0.3\nmax_trees 1\nmax_depth 1\n"
                   "trees 1\ntree 3\nsplit 2 0.5 1 2\nleaf 1\nleaf 2\nend\n"),
               FormatError);
  EXPECT_THROW(bad("CREAGBT 1\nmodels 1\nmodel x\nfeatures 1\nbase nan\n"), FormatError);
}

TEST(Labels, ParseAndCombine) {
  std::istringstream l("project_id,expert_id,code,visual,audio,idea,final\n"
                       "p1,1,70,70,0,,\n"
                       "p2,1,60,90,30,50,70\n");
  std::istringstream w("expert_id,w_code,w_visual,w_audio,w_idea,w_other\n"
                       "1,0.25,0.35,0.10,0.25,0.05\n"
                       "2,0.2,0.2,0.2,0.2,0.2\n");
  ExpertLabels labels{parse_labels(l), parse_weights(w)};
  ASSERT_EQ(labels.rows.size(), 2u);
  EXPECT_FALSE(labels.rows[0].idea.has_value());
  EXPECT_EQ(*labels.rows[1].final_score, 70.0);
  double sum = 0;
  const auto& e1 = labels.weights_of("1");
  sum = e1.code + e1.visual + e1.audio + e1.idea + e1.other;
  EXPECT_NEAR(sum, 1.0, 1e-9);
  // (5*70 + 7*70 + 2*0) / 14
  EXPECT_NEAR(weighted_combination(labels, "1", "p1"), 60.0, 1e-12);
  labels.rows.push_back({"p3", "2", 60, 90, 30, {}, {}});
  EXPECT_NEAR(weighted_combination(labels, "2", "p3"), 60.0, 1e-12);
  labels.rows.push_back({"p4", "2", 80, 80, 80, {}, {}});
  labels.weights["2"] = {0.3, 0.3, 0.15, 0.25, 0.0};
  EXPECT_NEAR(weighted_combination(labels, "2", "p4"), 80.0, 1e-12);
  EXPECT_THROW(weighted_combination(labels, "1", "p9"), UnknownId);
}

TEST(Labels, Rejects) {
  auto labels = [](const std::string& s) {
    std::istringstream in(s);
    return parse_labels(in);
  };
  EXPECT_THROW(labels("id,expert\n"), FormatError);
  EXPECT_THROW(labels("project_id,expert_id,code,visual,audio,idea,final\np,1,101,0,0,,\n"), FormatError);
  EXPECT_THROW(labels("project_id,expert_id,code,visual,audio,idea,final\np,1,1,0,0\n"), FormatError);
  EXPECT_THROW(labels("project_id,expert_id,code,visual,audio,idea,final\np,1,1,0,0,,\np,1,2,0,0,,\n"), FormatError);
}

TEST(Labels, ArgmaxInvariantUnderWeightScaling) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> s(0, 100), w(0.05, 0.3);
  for (int t = 0; t < 50; ++t) {
    ExpertLabels labels;
    for (int p = 0; p < 8; ++p) labels.rows.push_back({"p" + std::to_string(p), "e", s(rng), s(rng), s(rng), {}, {}});
    ExpertWeights ew{w(rng), w(rng), w(rng), 0.1, 0.1};
    auto argmax = [&] {
      int best = 0;
      for (int p = 1; p < 8; ++p)
        if (weighted_combination(labels, "e", "p" + std::to_string(p)) >
            weighted_combination(labels, "e", "p" + std::to_string(best)))
          best = p;
      return best;
    };
    labels.weights["e"] = ew;
    const int a = argmax();
    labels.weights["e"] = {ew.code * 2.5, ew.visual * 2.5, ew.audio * 2.5, 0.1, 0.1};
    EXPECT_EQ(argmax(), a);
  }
}

TEST(Folds, DisjointCoverAndDeterministic) {
  for (std::size_t n : {10u, 20u, 23u, 90u})
    for (std::size_t k : {5u, 10u}) {
      const auto f = make_folds(n, k, 42);
      EXPECT_EQ(f, make_folds(n, k, 42));
      std::set<std::size_t> seen;
      std::size_t total = 0;
      for (const auto& fold : f) {
        EXPECT_GE(fold.size(), n / k);
        EXPECT_LE(fold.size(), n / k + 1);
        total += fold.size();
        seen.insert(fold.begin(), fold.end());
      }
      EXPECT_EQ(total, n);
      EXPECT_EQ(seen.size(), n);
    }
  EXPECT_NE(make_folds(40, 5, 1), make_folds(40, 5, 2));
  EXPECT_THROW(make_folds(4, 5, 1), InvalidArgument);
}

// Synthetic labels: 5 experts over 45 projects, features known in closed form.
struct Synthetic {
  ExpertLabels labels;
  FeatureFn features;
};

Synthetic synthetic(bool constant_code = false) {
  Synthetic s;
  auto base = [](const std::string& p) {
    const int i = std::stoi(p.substr(1));
    CreativityVector v;
    v.code_fluency = 10 + 3 * i;
    v.code_flexibility = 5 + (i * 7) % 11;
    v.visual_fluency = 1 + i % 6;
    v.visual_flexibility = (i * 5) % 9;
    v.audio_fluency = (i % 3) * 4.0 + i * 0.1;
    v.audio_flexibility = (i * 3) % 7;
    return v;
  };
  s.features = [base](const std::string& p, const std::vector<std::string>& ref) {
    CreativityVector v = base(p);
    double c = 0, vi = 0, a = 0;
    for (const auto& q : ref) {
      const auto w = base(q);
      c += std::abs(v.code_fluency - w.code_fluency);
      vi += std::abs(v.visual_fluency - w.visual_fluency);
      a += std::abs(v.audio_fluency - w.audio_fluency);
    }
    v.code_originality = c / ref.size();
    v.visual_originality = vi / ref.size();
    v.audio_originality = a / ref.size();
    return v;
  };
  int project = 0;
  for (int e = 1; e <= 5; ++e) {
    const int count = e == 5 ? 10 : 20;
    s.labels.weights[std::to_string(e)] = {0.25, 0.35, 0.10, 0.25, 0.05};
    for (int k = 0; k < count; ++k) {
      const std::string p = "p" + std::to_string(project++ % 45);
      s.labels.rows.push_back({p, std::to_string(e), 0, 0, 0, {}, {}});
    }
  }
  // fill targets from the leave-one-out features
  for (auto& r : s.labels.rows) {
    std::vector<std::string> ref;
    for (const auto& q : s.labels.rows)
      if (q.expert_id == r.expert_id && q.project_id != r.project_id) ref.push_back(q.project_id);
    const auto v = s.features(r.project_id, ref);
    r.code = constant_code ? 50.0 : std::min(100.0, 0.5 * v.code_fluency + 0.5 * v.code_flexibility);
    r.visual = std::min(100.0, 8 * v.visual_fluency + 2 * v.visual_flexibility);
    r.audio = std::min(100.0, 4 * v.audio_fluency + v.audio_flexibility);
  }
  return s;
}

TEST(Experiment, CombinedRowCount) {
  const auto s = synthetic();
  EXPECT_EQ(s.labels.rows.size(), 90u);
  const auto r = run_experiment(s.labels, s.features, Mode::combined, Target::weighted);
  ASSERT_EQ(r.groups.size(), 1u);
  EXPECT_EQ(r.groups[0].rows, 90u);
  EXPECT_EQ(r.groups[0].folds.size(), 10u);
  EXPECT_EQ(r.groups[0].n_trees, 29);
  EXPECT_EQ(r.groups[0].max_depth, 4);
}

TEST(Experiment, PerExpertCapacity) {
  const auto s = synthetic();
  const auto r = run_experiment(s.labels, s.features, Mode::per_expert, Target::code);
  ASSERT_EQ(r.groups.size(), 5u);
  for (const auto& g : r.groups) {
    EXPECT_EQ(g.folds.size(), 5u);
    EXPECT_EQ(g.n_trees, g.rows <= 10 ? 10 : 15);
    EXPECT_EQ(g.max_depth, 3);
    for (const auto& f : g.folds) EXPECT_GE(f.test.size(), 2u);
    ASSERT_TRUE(g.mean_tau.has_value());
    EXPECT_GE(*g.mean_tau, -1.0);
    EXPECT_LE(*g.mean_tau, 1.0);
  }
}

TEST(Experiment, ConstantTargetGivesUndefinedTau) {
  const auto s = synthetic(true);
  const auto r = run_experiment(s.labels, s.features, Mode::combined, Target::code);
  EXPECT_FALSE(r.groups[0].mean_tau.has_value());
  for (const auto& f : r.groups[0].folds) {
    EXPECT_FALSE(f.tau.has_value());
    EXPECT_FALSE(f.note.empty());
  }
}

TEST(Experiment, TooFewProjectsIsAnError) {
  auto s = synthetic();
  ExpertLabels small;
  small.weights = s.labels.weights;
  for (int i = 0; i < 6; ++i) small.rows.push_back(s.labels.rows[static_cast<std::size_t>(i)]);
  EXPECT_THROW(run_experiment(small, s.features, Mode::per_expert, Target::code), InvalidArgument);
}

TEST(Experiment, ReportIsDeterministic) {
  const auto s = synthetic();
  EvalReport a{7, TauVariant::b, {run_experiment(s.labels, s.features, Mode::combined, Target::visual, {7})}};
  EvalReport b{7, TauVariant::b, {run_experiment(s.labels, s.features, Mode::combined, Target::visual, {7})}};
  EXPECT_EQ(to_json(a).dump(2), to_json(b).dump(2));
  EXPECT_EQ(to_table(a), to_table(b));
  EXPECT_NE(to_table(a).find("Combined"), std::string::npos);
}

TEST(Experiment, TrainModelsNamesGroups) {
  const auto s = synthetic();
  const auto models = train_models(s.labels, s.features, Mode::per_expert, Target::audio);
  ASSERT_EQ(models.size(), 5u);
  EXPECT_EQ(models[0].name, "per-expert/audio/1");
  EXPECT_EQ(models[0].features, (std::vector<std::string>{"audio_fluency", "audio_flexibility", "audio_originality"}));
  EXPECT_EQ(models[4].model.max_trees, 10);
}

}  // namespace
}  // namespace crea
