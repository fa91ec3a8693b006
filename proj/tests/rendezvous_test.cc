#include "consensus/rendezvous.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "consensus/error.h"
#include "test_util.h"

namespace consensus::rendezvous {
namespace {

constexpr double kPi = std::numbers::pi;

RendezvousState State(std::vector<Point> p, std::uint64_t seed = 0) { return RendezvousState(std::move(p), seed); }

std::vector<Point> RandomPlanar(SplitMix64& rng, std::size_t n) {
  std::vector<Point> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(Point{rng.uniform(0, 1), rng.uniform(0, 1)});
  return out;
}

// Largest empty sector by brute force: the best angular clearance over a
// fine grid of candidate centres.
double GridGamma(const std::vector<double>& dirs, int grid) {
  double best = 0.0;
  for (int k = 0; k < grid; ++k) {
    const double a = 2 * kPi * k / grid;
    double clear = kPi;
    for (double d : dirs) {
      double diff = std::fmod(std::abs(a - d), 2 * kPi);
      clear = std::min(clear, std::min(diff, 2 * kPi - diff));
    }
    best = std::max(best, clear);
  }
  return best;
}

std::vector<std::vector<double>> SortedPositions(const Profile& x) {
  std::vector<std::vector<double>> out;
  for (const Point& p : x) out.emplace_back(p.coords().begin(), p.coords().end());
  std::sort(out.begin(), out.end());
  return out;
}

TEST(ScanTest, SingleNeighbourEast) {
  const auto s = scan(State({Point{0, 0}, Point{3, 0}}), 0);
  ASSERT_EQ(s.directions.size(), 1u);
  EXPECT_NEAR(s.directions[0], 0.0, 1e-15);
  EXPECT_NEAR(s.gamma, kPi, 1e-12);
  EXPECT_NEAR(s.alpha, kPi, 1e-12);
  EXPECT_NEAR(move_direction(s), 0.0, 1e-12);
  EXPECT_TRUE(should_move(s, 2));
}

TEST(ScanTest, EquilateralVertexAttainsThreshold) {
  const double h = std::sqrt(3.0) / 2;
  const auto st = State({Point{0, 0}, Point{h, 0.5}, Point{h, -0.5}});
  const auto s = scan(st, 0);
  ASSERT_EQ(s.directions.size(), 2u);
  EXPECT_NEAR(s.gamma, 5 * kPi / 6, 1e-12);
  EXPECT_NEAR(s.alpha, kPi, 1e-12);
  EXPECT_TRUE(should_move(s, 3));  // equality case, inside the slack
  EXPECT_FALSE(should_move(s, 3, -1e-6));
}

TEST(ScanTest, SquareInteriorAndVertex) {
  const std::vector<Point> sq = {Point{0, 0}, Point{1, 0}, Point{1, 1}, Point{0, 1}, Point{0.5, 0.5}};
  const auto st = State(sq);
  const auto inner = scan(st, 4);
  EXPECT_NEAR(inner.gamma, kPi / 4, 1e-12);
  EXPECT_FALSE(should_move(inner, 5));
  const auto corner = scan(st, 0);
  EXPECT_EQ(corner.directions.size(), 3u);  // (1,1) and the centre share a ray
  EXPECT_NEAR(corner.gamma, 3 * kPi / 4, 1e-12);
  EXPECT_NEAR(corner.alpha, 5 * kPi / 4, 1e-12);
  EXPECT_TRUE(should_move(corner, 4));
  EXPECT_FALSE(should_move(corner, 3));
}

TEST(ScanTest, AllTiedThrows) {
  const auto st = State({Point{1, 1}, Point{1, 1}});
  EXPECT_TRUE(st.at_consensus());
  EXPECT_THROW(scan(st, 0), Error);
  ScanResult s;
  EXPECT_THROW(should_move(s, 1), Error);
}

TEST(ScanTest, MatchesGridOracle) {
  SplitMix64 rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.index(7);
    const auto st = State(RandomPlanar(rng, n));
    const std::size_t agent = rng.index(n);
    const auto s = scan(st, agent);
    ASSERT_TRUE(std::is_sorted(s.directions.begin(), s.directions.end()));
    const int grid = 20000;
    ASSERT_NEAR(s.gamma, GridGamma(s.directions, grid), 2 * kPi / grid);
    // The sector centre is clear of every direction by gamma.
    for (double d : s.directions) {
      double diff = std::fmod(std::abs(s.alpha - d), 2 * kPi);
      ASSERT_GE(std::min(diff, 2 * kPi - diff), s.gamma - 1e-9);
    }
  }
}

TEST(RuleStarTest, SnapsToCollinearAgent) {
  const auto st = State({Point{0, 0}, Point{4, 0}, Point{4, 1}, Point{4, -1}});
  const auto s = scan(st, 0);
  EXPECT_NEAR(move_direction(s), 0.0, 1e-12);
  const Point p = move_rule_star(st, 0, move_direction(s));
  EXPECT_NEAR(p[0], 4.0, 1e-12);
  EXPECT_NEAR(p[1], 0.0, 1e-12);
}

TEST(RuleStarTest, StopsAtPerpendicularFoot) {
  const auto st = State({Point{0, 0}, Point{4, 0}, Point{0, 4}});
  const Point p = move_rule_star(st, 0, kPi / 4);
  EXPECT_NEAR(p[0], 2.0, 1e-12);
  EXPECT_NEAR(p[1], 2.0, 1e-12);
  const auto snap = State({Point{0, 0}, Point{2, 2}, Point{5, 0}});
  const Point q = move_rule_star(snap, 0, kPi / 4);
  EXPECT_EQ(q[0], 2.0);
  EXPECT_EQ(q[1], 2.0);
}

TEST(RuleStarTest, RejectsBackwardTravel) {
  const auto st = State({Point{0, 0}, Point{4, 0}, Point{-1, 3}});
  EXPECT_THROW(move_rule_star(st, 0, 0.0), Error);
}

TEST(TieGroupTest, GroupsMoveTogether) {
  auto st = State({Point{0, 0}, Point{4, 0}, Point{0, 0}, Point{4, 1}});
  const auto groups = st.tie_groups();
  ASSERT_EQ(groups.size(), 3u);
  EXPECT_EQ(groups[0], (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(st.tie_group_of(2), (std::vector<std::size_t>{0, 2}));
  st.move_group(0, Point{4, 0});
  EXPECT_EQ(st.position(2)[0], 4.0);
  EXPECT_EQ(st.tie_group_of(1).size(), 3u);
  EXPECT_EQ(st.tie_groups().size(), 2u);
}

TEST(ProtocolStepTest, ConsensusEvent) {
  auto st = State({Point{1, 1}, Point{1, 1}, Point{1, 1}});
  const StepEvent e = protocol_step(st, 3);
  EXPECT_TRUE(e.consensus_found);
  EXPECT_FALSE(e.mover.has_value());
  const auto j = e.to_json();
  EXPECT_EQ(j.at("event"), "consensus found!");
  EXPECT_TRUE(j.at("mover").is_null());
  EXPECT_EQ(j.at("step"), 3);
}

TEST(ProtocolStepTest, SomeGroupAlwaysMoves) {
  SplitMix64 rng(12);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng.index(7);
    auto st = State(RandomPlanar(rng, n), trial);
    const auto before = st.positions();
    const StepEvent e = protocol_step(st);
    ASSERT_TRUE(e.mover.has_value());
    ASSERT_FALSE(e.activations.empty());
    EXPECT_EQ(e.activations.back(), *e.mover);
    EXPECT_GT(e.distance, 0.0);
    EXPECT_GE(e.gamma, kPi / 2 + kPi / n - kAngleTolerance);
    EXPECT_TRUE(e.mover_on_hull);
    std::size_t changed = 0;
    for (std::size_t i = 0; i < n; ++i) changed += geometry::sup_distance(before[i], st.position(i)) > 0;
    EXPECT_EQ(changed, 1u);  // no ties among random positions
  }
}

TEST(RunProtocolTest, TwoAgentsMeetInOneStep) {
  const ProtocolResult r = run_protocol({Point{0, 0}, Point{4, 0}}, {});
  EXPECT_TRUE(r.verdict.reached);
  EXPECT_EQ(r.trajectory.step_count(), 1);
  EXPECT_TRUE(r.diagnostics.empty());
  ASSERT_EQ(r.events.size(), 2u);
  EXPECT_TRUE(r.events.back().consensus_found);
  EXPECT_EQ(r.events.front().distance, 4.0);
}

TEST(RunProtocolTest, ReachesConsensusForSmallGroups) {
  SplitMix64 rng(2024);
  for (std::size_t n = 2; n <= 8; ++n) {
    for (int trial = 0; trial < 5; ++trial) {
      ProtocolOptions o;
      o.seed = rng();
      const ProtocolResult r = run_protocol(RandomPlanar(rng, n), o);
      ASSERT_TRUE(r.verdict.reached) << "n=" << n;
      ASSERT_TRUE(r.diagnostics.empty()) << r.diagnostics.front();
      const auto& d = r.trajectory.diameters;
      for (std::size_t k = 1; k < d.size(); ++k) ASSERT_LE(d[k], d[k - 1] + 1e-12);
      for (const auto& s : r.trajectory.steps) ASSERT_TRUE(s.included);
    }
  }
}

TEST(RunProtocolTest, TieGroupsOnlyMerge) {
  SplitMix64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    ProtocolOptions o;
    o.seed = static_cast<std::uint64_t>(trial);
    const ProtocolResult r = run_protocol(RandomPlanar(rng, 6), o);
    std::size_t prev = 7;
    for (const Profile& x : r.trajectory.profiles) {
      const std::size_t groups = RendezvousState(x.agents(), 0).tie_groups().size();
      ASSERT_LE(groups, prev);
      prev = groups;
    }
  }
}

TEST(RunProtocolTest, PermutationEquivariant) {
  SplitMix64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const std::vector<Point> x = RandomPlanar(rng, 5);
    std::vector<Point> y(x.rbegin(), x.rend());
    std::swap(y[0], y[2]);
    ProtocolOptions o;
    o.seed = 99 + trial;
    const ProtocolResult a = run_protocol(x, o);
    const ProtocolResult b = run_protocol(y, o);
    ASSERT_EQ(a.trajectory.profiles.size(), b.trajectory.profiles.size());
    for (std::size_t k = 0; k < a.trajectory.profiles.size(); ++k) {
      ASSERT_EQ(SortedPositions(a.trajectory.profiles[k]), SortedPositions(b.trajectory.profiles[k]));
    }
  }
}

TEST(RunProtocolTest, DeterministicEventLog) {
  SplitMix64 rng(77);
  const auto x = RandomPlanar(rng, 6);
  ProtocolOptions o;
  o.seed = 4;
  std::ostringstream a, b;
  write_event_log(a, run_protocol(x, o).events);
  write_event_log(b, run_protocol(x, o).events);
  EXPECT_EQ(a.str(), b.str());
}

TEST(RunProtocolTest, MaxStepsDiagnostic) {
  SplitMix64 rng(3);
  ProtocolOptions o;
  o.max_grouped_steps = 1;
  const ProtocolResult r = run_protocol(RandomPlanar(rng, 8), o);
  EXPECT_FALSE(r.verdict.reached);
  EXPECT_FALSE(r.diagnostics.empty());
}

TEST(RendezvousStateTest, RejectsBadInput) {
  EXPECT_THROW(State({Point{0, 0}}), Error);
  EXPECT_THROW(State({Point{0, 0, 0}, Point{1, 0, 0}}), Error);
}

}  // namespace
}  // namespace consensus::rendezvous
