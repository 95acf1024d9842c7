#include "cohere/forest.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include "cohere/rng.hpp"

using namespace cohere;

namespace {

struct Toy {
  std::vector<std::vector<double>> X;
  std::vector<int> y;
};

Toy separable_by_sign(int n, std::uint64_t seed) {
  Toy t;
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    const double x = rng.next_range(-1, 1);
    t.X.push_back({x});
    t.y.push_back(x > 0 ? 1 : 0);
  }
  return t;
}

TEST(RandomForest, SeparableTrainAccuracy) {
  const auto toy = separable_by_sign(200, 3);
  RandomForest rf;
  rf.train(toy.X, toy.y, 2, 50, 42);
  int correct = 0;
  for (std::size_t i = 0; i < toy.X.size(); ++i)
    if (rf.predict(toy.X[i]) == toy.y[i]) ++correct;
  EXPECT_EQ(correct, 200);
}

TEST(RandomForest, DeterministicForSeed) {
  Toy toy;
  Rng rng(9);
  for (int i = 0; i < 120; ++i) {
    toy.X.push_back({rng.next_range(-1, 1), rng.next_range(-1, 1), rng.next_range(-1, 1)});
    toy.y.push_back(int(rng.next_below(3)));
  }
  RandomForest a, b;
  a.train(toy.X, toy.y, 3, 30, 42);
  b.train(toy.X, toy.y, 3, 30, 42);
  Rng probe(77);
  for (int i = 0; i < 50; ++i) {
    const std::vector<double> x = {probe.next_range(-1, 1), probe.next_range(-1, 1), probe.next_range(-1, 1)};
    EXPECT_EQ(a.predict_dist(x), b.predict_dist(x));
  }
}

TEST(RandomForest, SingleClassDegenerate) {
  RandomForest rf;
  rf.train({{0.0}, {1.0}, {2.0}}, {1, 1, 1}, 3, 10, 1);
  EXPECT_EQ(rf.predict({0.5}), 1);
  const auto dist = rf.predict_dist({0.5});
  EXPECT_DOUBLE_EQ(dist[1], 1.0);
}

TEST(RandomForest, DistributionSumsToOne) {
  Toy toy;
  Rng rng(21);
  for (int i = 0; i < 150; ++i) {
    toy.X.push_back({rng.next_range(-1, 1), rng.next_range(-1, 1)});
    toy.y.push_back(int(rng.next_below(3)));
  }
  RandomForest rf;
  rf.train(toy.X, toy.y, 3, 25, 5);
  for (int i = 0; i < 100; ++i) {
    const std::vector<double> x = {rng.next_range(-1.5, 1.5), rng.next_range(-1.5, 1.5)};
    const auto dist = rf.predict_dist(x);
    double sum = 0;
    for (double p : dist) {
      EXPECT_GE(p, 0.0);
      sum += p;
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
}

TEST(RandomForest, MonotoneCapacity) {
  Toy toy;
  Rng rng(100);
  for (int i = 0; i < 150; ++i) {
    const double x = rng.next_range(-1, 1), y = rng.next_range(-1, 1);
    toy.X.push_back({x, y});
    toy.y.push_back((x + 0.3 * y > 0 ? 1 : 0) ^ (rng.next_below(10) == 0 ? 1 : 0));
  }
  auto train_acc = [&](int n_trees) {
    RandomForest rf;
    rf.train(toy.X, toy.y, 2, n_trees, 7);
    int c = 0;
    for (std::size_t i = 0; i < toy.X.size(); ++i)
      if (rf.predict(toy.X[i]) == toy.y[i]) ++c;
    return double(c) / toy.X.size();
  };
  EXPECT_GE(train_acc(100), train_acc(1));
}

TEST(RandomForest, RandomLabelsNearChance) {
  // out-of-sample accuracy on random balanced labels within binomial bounds
  Toy toy;
  Rng rng(555);
  for (int i = 0; i < 200; ++i) {
    toy.X.push_back({rng.next_range(-1, 1), rng.next_range(-1, 1)});
    toy.y.push_back(i % 2);
  }
  RandomForest rf;
  rf.train(toy.X, toy.y, 2, 40, 11);
  int correct = 0;
  const int n_eval = 200;
  for (int i = 0; i < n_eval; ++i) {
    const std::vector<double> x = {rng.next_range(-1, 1), rng.next_range(-1, 1)};
    if (rf.predict(x) == int(rng.next_below(2))) ++correct;
  }
  const double acc = double(correct) / n_eval;
  EXPECT_GE(acc, 0.35);
  EXPECT_LE(acc, 0.65);
}

TEST(RandomForest, TieBreaksTowardSmallerClass) {
  // two stumps trained on opposite labels produce a 0.5/0.5 distribution
  RandomForest rf;
  rf.train({{0.0}, {1.0}}, {0, 1}, 2, 200, 13);
  const auto dist = rf.predict_dist({0.5});
  if (std::abs(dist[0] - dist[1]) < 1e-12) { EXPECT_EQ(rf.predict({0.5}), 0); }
}

TEST(RandomForest, DimensionMismatchThrows) {
  RandomForest rf;
  rf.train({{0.0, 1.0}}, {0}, 2, 5, 1);
  EXPECT_THROW(rf.predict_dist({1.0}), DomainError);
}

TEST(RandomForest, SaveLoadBitIdentical) {
  Toy toy;
  Rng rng(31);
  for (int i = 0; i < 80; ++i) {
    toy.X.push_back({rng.next_range(-1, 1), rng.next_range(-1, 1), rng.next_range(-1, 1)});
    toy.y.push_back(int(rng.next_below(3)));
  }
  RandomForest rf;
  rf.train(toy.X, toy.y, 3, 20, 77);
  std::stringstream buffer;
  rf.save(buffer);
  RandomForest reloaded;
  reloaded.load(buffer);
  for (int i = 0; i < 60; ++i) {
    const std::vector<double> x = {rng.next_range(-1, 1), rng.next_range(-1, 1), rng.next_range(-1, 1)};
    EXPECT_EQ(rf.predict_dist(x), reloaded.predict_dist(x));
  }
}

TEST(RandomForest, BadHeaderRejected) {
  std::stringstream buffer("not-a-model v9\n");
  RandomForest rf;
  EXPECT_THROW(rf.load(buffer), ParseError);
}

}  // namespace
