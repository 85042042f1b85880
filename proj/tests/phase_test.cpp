#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "dgame/dgame.hpp"

using namespace dgame;

TEST(Temperature, Examples) {
  EXPECT_DOUBLE_EQ(temperature(5, 101, 1).value, 33.0 / 101.0);
  EXPECT_NEAR(temperature(5, 101, 1).value, 0.3267, 1e-4);
  EXPECT_DOUBLE_EQ(temperature(3, 11, 2).value, 9.0 / 22.0);
  EXPECT_DOUBLE_EQ(temperature(1, 1, 1).value, 3.0);
  EXPECT_DOUBLE_EQ(temperature(3, 11, 2, TemperatureFormula::technical).value, 8.0 / 22.0);
  EXPECT_THROW(temperature(0, 11, 2), ParameterError);
  EXPECT_THROW(temperature(3, 0, 2), ParameterError);
}

TEST(Temperature, Monotone) {
  for (int m = 1; m < 12; ++m) {
    for (long n = 1; n < 200; n += 7) {
      for (long s = 1; s < 20; ++s) {
        const double t = temperature(m, n, s).value;
        EXPECT_GT(t, 0.0);
        EXPECT_LT(temperature(m, n + 1, s).value, t);
        EXPECT_LT(temperature(m, n, s + 1).value, t);
        EXPECT_GT(temperature(m + 1, n, s).value, t);
      }
    }
  }
}

TEST(Temperature, DependsOnProductNs) {
  EXPECT_DOUBLE_EQ(temperature(4, 101, 2).value, temperature(4, 202, 1).value);
  EXPECT_DOUBLE_EQ(temperature(6, 11, 18).value, temperature(6, 198, 1).value);
}

TEST(ClassifyStep, Examples) {
  const std::vector<double> up{100, 101, 102, 103};
  const std::vector<double> alt{100, 101, 100, 101};
  const std::vector<double> down{100, 99, 98, 97};
  EXPECT_TRUE(classify_step(up, 3));
  EXPECT_FALSE(classify_step(alt, 3));
  EXPECT_TRUE(classify_step(down, 3));
  const std::vector<double> flat{100, 101, 101, 102};
  EXPECT_FALSE(classify_step(flat, 2));
  EXPECT_THROW(classify_step(up, 4), ParameterError);
}

TEST(ClassifyRun, ConstantIsFundamental) {
  const std::vector<double> p(100, 100.0);
  EXPECT_EQ(classify_run(p, 3, 100.0, 8), PhaseLabel::fundamental);
}

TEST(ClassifyRun, IncreasingIsSpeculative) {
  std::vector<double> p;
  for (int k = 0; k < 10; ++k) p.push_back(100.0 + k);
  for (int m = 1; m <= 9; ++m) EXPECT_EQ(classify_run(p, m, 100.0, 8), PhaseLabel::speculative);
}

TEST(ClassifyRun, AlternatingOutsideBandIsUndetermined) {
  std::vector<double> p{100.0};
  for (int k = 1; k < 60; ++k) p.push_back(100.0 + (k % 2 ? 1.0 : -1.0) * 3.0 * k);
  // swings reach well beyond +-50 around 100, but never two moves the same way
  EXPECT_EQ(classify_run(p, 2, 100.0, 4), PhaseLabel::undetermined);
}

TEST(ClassifyRun, EdgeCases) {
  EXPECT_EQ(classify_run(std::vector<double>{}, 3, 100.0, 0), PhaseLabel::undetermined);
  EXPECT_EQ(classify_run(std::vector<double>{100.0}, 3, 100.0, 0), PhaseLabel::undetermined);
  // all points lie inside burn-in
  const std::vector<double> short_run{100, 101, 100};
  EXPECT_EQ(classify_run(short_run, 3, 100.0, 8), PhaseLabel::undetermined);
  // band edges are inclusive
  const std::vector<double> edge{100, 150, 50, 150, 50};
  EXPECT_EQ(classify_run(edge, 2, 100.0, 0), PhaseLabel::fundamental);
  // a zero change breaks the run
  const std::vector<double> paused{100, 101, 101, 102, 102, 103};
  EXPECT_EQ(classify_run(paused, 2, 100.0, 0), PhaseLabel::fundamental);
}

TEST(ClassifyRun, ScaleInvariant) {
  std::vector<double> p{100};
  double x = 100;
  for (int k = 1; k < 80; ++k) {
    x += (k % 3 == 0 ? -2.0 : 1.5) * std::sin(0.1 * k);
    p.push_back(x);
  }
  for (int m = 1; m <= 5; ++m) {
    const auto base = classify_run(p, m, 100.0, 4);
    for (double c : {0.01, 3.0, 1e4}) {
      std::vector<double> q;
      for (double v : p) q.push_back(v * c);
      EXPECT_EQ(classify_run(q, m, 100.0 * c, 4), base);
    }
  }
}

TEST(PhaseTracker, MatchesWindowClassifier) {
  std::vector<double> p{50};
  double x = 50;
  for (int k = 1; k < 200; ++k) {
    x += std::sin(1.7 * k) + 0.3 * std::cos(0.4 * k);
    p.push_back(x);
  }
  for (int m = 1; m <= 4; ++m) {
    PhaseTracker tracker(m, 50, 0, p[0]);
    for (std::size_t k = 1; k < p.size(); ++k) {
      const bool fired = tracker.observe(p[k]);
      if (k >= static_cast<std::size_t>(m)) {
        EXPECT_EQ(fired, classify_step(std::span<const double>(p.data(), k + 1), m)) << "m " << m << " k " << k;
      }
    }
  }
}

TEST(PhaseLabel, TextRoundTrip) {
  for (auto l : {PhaseLabel::speculative, PhaseLabel::fundamental, PhaseLabel::undetermined, PhaseLabel::aborted}) {
    EXPECT_EQ(parse_phase_label(to_string(l)), l);
  }
  EXPECT_THROW(parse_phase_label("bubble"), ParameterError);
}
