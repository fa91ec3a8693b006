// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 when any
// criterion fails. Runtimes are wall clock on the current machine.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "consensus/certify.h"
#include "consensus/error.h"
#include "consensus/maps.h"
#include "consensus/rendezvous.h"
#include "consensus/scenario.h"
#include "consensus/simulate.h"

namespace {

using namespace consensus;
using geometry::CoordinateMapSpec;
using geometry::Point;
using geometry::Profile;
using maps::MapDescriptor;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

std::string Fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

const scenario::Scenario& Builtin(const std::string& name) { return scenario::builtin_scenarios().find(name); }

Profile RandomProfile(SplitMix64& rng, std::size_t n, std::size_t d, double lo, double hi) {
  std::vector<Point> agents;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> c(d);
    for (double& v : c) v = rng.uniform(lo, hi);
    agents.emplace_back(std::move(c));
  }
  return Profile(std::move(agents));
}

Eigen::MatrixXd RandomStochastic(SplitMix64& rng, std::size_t n, double density) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    a(i, rng.index(n)) = rng.uniform(0.05, 1.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (rng.uniform() < density) a(i, j) = rng.uniform(0.05, 1.0);
    }
    a.row(i) /= a.row(i).sum();
  }
  return a;
}

double Spread1d(const Profile& x) {
  double lo = x[0][0], hi = x[0][0];
  for (const Point& p : x) {
    lo = std::min(lo, p[0]);
    hi = std::max(hi, p[0]);
  }
  return hi - lo;
}

// 1. Quarter-power weights keep the pair apart.
Outcome QuarterPower() {
  const auto start = std::chrono::steady_clock::now();
  const auto out = scenario::simulate_scenario(Builtin("paper/quarter-power"));
  const double secs = Seconds(start);
  const auto& profiles = out.trajectory.profiles;
  double max1 = -1, min2 = 2;
  for (const Profile& x : profiles) {
    max1 = std::max(max1, x[0][0]);
    min2 = std::min(min2, x[1][0]);
  }
  const bool ok = profiles.size() == 200 && max1 < 1.0 / 3 && min2 > 2.0 / 3 && secs < 1.0;
  return {ok, Fmt("t=1..%zu max x1=%.6f min x2=%.6f, %.3fs", profiles.size(), max1, min2, secs)};
}

// 2. One-over-t weights: closed form and a 1/(t-1) rate.
Outcome OneOverT() {
  const auto start = std::chrono::steady_clock::now();
  const auto out = scenario::simulate_scenario(Builtin("paper/one-over-t"));
  const double secs = Seconds(start);
  const auto& profiles = out.trajectory.profiles;
  double worst_form = 0, worst_rate = 0;
  for (std::size_t k = 0; k < profiles.size(); ++k) {
    const double t = 2.0 + static_cast<double>(k);
    // x(t) = (x1(2)/(t-1) + (t-2)/(t-1) x2(2), x2(2)) with x(2) = (0, 1)
    const double x1 = (t - 2) / (t - 1);
    worst_form = std::max({worst_form, std::abs(profiles[k][0][0] - x1), std::abs(profiles[k][1][0] - 1.0)});
    worst_rate = std::max(worst_rate, std::abs(Spread1d(profiles[k]) * (t - 1) - 1.0));
  }
  const bool ok = profiles.size() == 10000 && worst_form <= 1e-12 && worst_rate <= 1e-12 && secs < 1.0;
  return {ok, Fmt("t=2..%zu closed-form err %.2e, |gap*(t-1)-1| %.2e, %.3fs", profiles.size() + 1, worst_form,
                  worst_rate, secs)};
}

// 3. Vanishing confidence.
Outcome VanishingConfidence() {
  const auto start = std::chrono::steady_clock::now();
  const auto out = scenario::simulate_scenario(Builtin("paper/vanishing-confidence"));
  const double secs = Seconds(start);
  double least = 1e300;
  for (const Profile& x : out.trajectory.profiles) least = std::min(least, Spread1d(x));
  const bool ok = out.trajectory.step_count() == 100 && least >= 4.0 && secs < 1.0;
  return {ok, Fmt("%d steps, min |x1-x2| = %.6f, %.3fs", out.trajectory.step_count(), least, secs)};
}

// 4. Every shipped averaging map keeps the image hull inside the input hull.
Outcome AveragingSuite() {
  struct Case {
    MapDescriptor map;
    std::size_t n, d;
  };
  Eigen::MatrixXd pull(3, 3);
  pull << 0, 1, 0, 0, 0, 1, 0.5, 0.5, 0;
  Eigen::MatrixXd lazy(3, 3);
  lazy << 0.5, 0.25, 0.25, 0.25, 0.5, 0.25, 0.25, 0.25, 0.5;
  std::vector<Case> cases = {
      {maps::midpoint_map(), 3, 2},
      {maps::stripe_map(), 3, 2},
      {maps::stripe_map(maps::cosine_stripe_weight, "cosine"), 3, 2},
      {maps::linear_map(pull), 3, 2},
      {maps::linear_map(lazy), 3, 2},
      {maps::uniform_averaging(5), 5, 2},
      {maps::decaying_pair_family(maps::DecayRate::kQuarterPower), 2, 1},
      {maps::decaying_pair_family(maps::DecayRate::kOneOverT), 2, 1},
      {maps::vanishing_confidence(1.0), 4, 1},
      {maps::deform(maps::uniform_averaging(3), maps::Deformation::log()), 3, 2},
      {maps::mean_selector({1, 2, 4}), 3, 1},
  };
  for (const auto& sigma : maps::valid_mean_selectors()) cases.push_back({maps::mean_selector(sigma), 3, 2});

  const auto start = std::chrono::steady_clock::now();
  std::size_t samples = 0, violations = 0;
  std::string first;
  for (std::size_t k = 0; k < cases.size(); ++k) {
    certify::SamplingConfig c;
    c.seed = 4000 + k;
    c.count = 500;
    c.agents = cases[k].n;
    c.dimension = cases[k].d;
    c.lo = -3;
    c.hi = 3;
    c.time_count = cases[k].map.time_dependent() ? 50 : 1;
    const auto r = certify::check_averaging(cases[k].map, *cases[k].map.averaging_spec(), c, 1e-9);
    samples += c.count;
    for (const auto& s : r.records) violations += !s.included;
    if (!r.ok()) {
      ++violations;
      if (first.empty()) first = " first: " + r.witness->map + " " + r.witness->message;
    }
  }
  const double secs = Seconds(start);
  return {violations == 0 && secs < 30.0,
          Fmt("%zu maps, %zu profiles, %zu violations, %.2fs%s", cases.size(), samples, violations, secs,
              first.c_str())};
}

// Largest distance from an outer vertex to the inner polygon, by checking
// every vertex against every edge.
double BruteForceGap(const std::vector<Point>& outer, const std::vector<Point>& inner) {
  double worst = 0;
  for (const Point& v : outer) {
    double best = 1e300;
    for (std::size_t k = 0; k < inner.size(); ++k) {
      const Point& a = inner[k];
      const Point& b = inner[(k + 1) % inner.size()];
      const double dx = b[0] - a[0], dy = b[1] - a[1];
      const double t = std::clamp(((v[0] - a[0]) * dx + (v[1] - a[1]) * dy) / (dx * dx + dy * dy), 0.0, 1.0);
      best = std::min(best, std::hypot(v[0] - a[0] - t * dx, v[1] - a[1] - t * dy));
    }
    worst = std::max(worst, best);
  }
  return worst;
}

// 5. Properness gap of the midpoint map on the unit right triangle.
Outcome ProperOracle() {
  const Profile tri{Point{0, 0}, Point{1, 0}, Point{0, 1}};
  const auto mid = maps::midpoint_map();
  const double gap = certify::properness_gap(mid, mid.start_index(), CoordinateMapSpec::identity(), tri);
  const double oracle = BruteForceGap(tri.agents(), mid.apply(mid.start_index(), tri).agents());
  const bool ok = std::abs(gap - 0.5) <= 1e-9 && std::abs(gap - oracle) <= 1e-9;
  return {ok, Fmt("gap %.12f, brute-force oracle %.12f", gap, oracle)};
}

// 6. Equiproper flagging of mean selectors and of the quarter-power family.
Outcome EquiproperFlagging() {
  std::vector<MapDescriptor> selectors;
  for (const auto& sigma : maps::valid_mean_selectors()) selectors.push_back(maps::mean_selector(sigma));
  certify::SamplingConfig c;
  c.seed = 6;
  c.count = 200;
  c.agents = 3;
  c.dimension = 1;
  const certify::EquiproperOptions floor{1e-6, 1e-9, 1e-9};
  const auto ms = certify::check_equiproper(certify::family_of(selectors, 1), CoordinateMapSpec::interval(), c, floor);

  const std::vector<MapDescriptor> qp = {maps::decaying_pair_family(maps::DecayRate::kQuarterPower)};
  certify::SamplingConfig cq = c;
  cq.agents = 2;
  const auto q = certify::check_equiproper(certify::family_of(qp, 30), CoordinateMapSpec::identity(), cq, floor);

  const bool ok = ms.ok() && ms.equiproper == true && ms.records.size() >= 200 && q.ok() && q.equiproper == false;
  return {ok, Fmt("mean selectors (%zu maps): min gap %.3e -> %s; quarter-power t<=30: min gap %.3e -> %s",
                  selectors.size(), ms.family_min_gap.value_or(-1), ms.equiproper.value_or(false) ? "equiproper" : "not",
                  q.family_min_gap.value_or(-1), q.equiproper.value_or(true) ? "equiproper" : "not")};
}

bool HasWalk(const Eigen::MatrixXd& a, Eigen::Index i, Eigen::Index j, int len) {
  if (len == 0) return i == j;
  for (Eigen::Index k = 0; k < a.cols(); ++k) {
    if (a(i, k) > 0 && HasWalk(a, k, j, len - 1)) return true;
  }
  return false;
}

// 7. Contraction by tau and the two indices against a walk oracle.
Outcome LinearTheory() {
  SplitMix64 rng(7);
  double worst = -1e300;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.index(7);
    const Eigen::MatrixXd a = RandomStochastic(rng, n, rng.uniform(0.2, 1.0));
    const Profile x = RandomProfile(rng, n, 1, -10, 10);
    const Profile y = maps::linear_map(a).apply(0, x);
    worst = std::max(worst, Spread1d(y) - certify::scrambling_coefficient(a) * Spread1d(x));
  }
  Eigen::MatrixXd pull(3, 3);
  pull << 0, 1, 0, 0, 0, 1, 0.5, 0.5, 0;
  const auto m = certify::analyze_matrix(pull);
  std::optional<int> scr, reg;
  for (int k = 1; k <= m.cap && !(scr && reg); ++k) {
    bool positive = true, scrambling = true;
    for (Eigen::Index i = 0; i < 3; ++i) {
      for (Eigen::Index j = 0; j < 3; ++j) {
        positive = positive && HasWalk(pull, i, j, k);
        if (j > i) {
          bool shared = false;
          for (Eigen::Index c = 0; c < 3; ++c) shared = shared || (HasWalk(pull, i, c, k) && HasWalk(pull, j, c, k));
          scrambling = scrambling && shared;
        }
      }
    }
    if (positive && !reg) reg = k;
    if (scrambling && !scr) scr = k;
  }
  const bool ok = worst <= 1e-9 && scr && reg && m.scrambling_index == scr && m.regularity_index == reg;
  return {ok, Fmt("max diam(Ax)-tau*diam(x) = %.2e over 1000 pairs; scrambling index %d (oracle %d), "
                  "regularity index %d (oracle %d)",
                  worst, m.scrambling_index.value_or(-1), scr.value_or(-1), m.regularity_index.value_or(-1),
                  reg.value_or(-1))};
}

// 8. Random switching over a finite equiproper family.
Outcome SwitchingConsensus() {
  const auto start = std::chrono::steady_clock::now();
  scenario::Scenario s = Builtin("paper/random-switching");
  int reached = 0, worst_steps = 0;
  double worst_rise = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    s.seed = seed;
    const auto out = scenario::simulate_scenario(s);
    if (out.verdict.reached && out.trajectory.stop == sim::StopReason::kConsensus) ++reached;
    worst_steps = std::max(worst_steps, out.trajectory.step_count());
    const auto& d = out.trajectory.diameters;
    for (std::size_t k = 1; k < d.size(); ++k) worst_rise = std::max(worst_rise, d[k] - d[k - 1]);
  }
  const double secs = Seconds(start);
  const bool ok = reached == 50 && worst_rise <= 0.0 && s.tol == 1e-7 && s.max_steps == 10000 && secs < 60.0;
  return {ok, Fmt("%d/50 reached tol %.0e, longest run %d steps, max diameter increase %.2e, %.2fs", reached,
                  s.tol, worst_steps, worst_rise, secs)};
}

// 9. Log-deformed uniform averaging: geometric mean and conjugacy.
Outcome DeformedAveraging() {
  const auto out = scenario::simulate_scenario(Builtin("paper/log-deformed"));
  const double gm = std::exp((std::log(1.0) + std::log(4.0) + std::log(16.0)) / 3);
  const double err = out.verdict.gamma ? std::abs((*out.verdict.gamma)[0] - gm) : 1e300;

  const auto inner = maps::uniform_averaging(3);
  const auto outer = maps::deform(inner, maps::Deformation::log());
  SplitMix64 rng(9);
  double worst = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Profile x = RandomProfile(rng, 3, 2, 0.01, 100);
    std::vector<Point> logs, expected;
    for (const Point& p : x) logs.push_back(Point{std::log(p[0]), std::log(p[1])});
    for (const Point& p : inner.apply(0, Profile(logs))) expected.push_back(Point{std::exp(p[0]), std::exp(p[1])});
    const Profile y = outer.apply(0, x);
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t c = 0; c < 2; ++c) worst = std::max(worst, std::abs(y[i][c] - expected[i][c]));
    }
  }
  const bool ok = out.verdict.reached && out.trajectory.step_count() == 1 && err <= 1e-9 && worst <= 1e-9;
  return {ok, Fmt("consensus after %d step at %.12f (geometric mean %.12f); conjugacy err %.2e over 200 profiles",
                  out.trajectory.step_count(), out.verdict.gamma ? (*out.verdict.gamma)[0] : NAN, gm, worst)};
}

// 10. Limits depend continuously on the start under scrambling linear maps.
Outcome Continuity() {
  SplitMix64 rng(10);
  std::vector<MapDescriptor> ms;
  bool all_scrambling = true;
  for (int k = 0; k < 3; ++k) {
    const Eigen::MatrixXd a = RandomStochastic(rng, 4, 0.6);
    all_scrambling = all_scrambling && certify::is_scrambling(a);
    ms.push_back(maps::linear_map(a));
  }
  sim::ContinuityOptions o;
  o.radii = {1e-3, 1e-2, 1e-1, 1.0, 2.0};
  o.probes = 10;
  o.seed = 10;
  o.run.tol = 1e-12;
  o.run.max_steps = 100000;
  const auto seq = sim::SwitchingSequence::random(ms, 1010);
  const auto rep = sim::continuity_experiment(seq, RandomProfile(rng, 4, 2, -1, 1), o);
  std::size_t probes = 0, failures = 0, breaches = 0;
  double worst = -1e300;
  for (const auto& r : rep.radii) {
    failures += r.failures;
    for (const auto& p : r.probes) {
      ++probes;
      worst = std::max(worst, p.limit_distance - p.initial_distance);
      breaches += p.limit_distance > p.initial_distance + 1e-9;
    }
  }
  const bool ok = all_scrambling && rep.reference_reached && probes == 50 && failures == 0 && breaches == 0;
  return {ok, Fmt("%zu probes, %zu unconverged, max (limit dist - start dist) = %.2e", probes, failures, worst)};
}

// 11. Watergun rendezvous for n = 2..8.
Outcome Rendezvous() {
  const auto start = std::chrono::steady_clock::now();
  SplitMix64 rng(11);
  int runs = 0, reached = 0, flagged = 0, threshold = 0, nesting = 0;
  bool two_in_one = true;
  for (std::size_t n = 2; n <= 8; ++n) {
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<Point> x;
      for (std::size_t i = 0; i < n; ++i) x.push_back(Point{rng.uniform(0, 1), rng.uniform(0, 1)});
      rendezvous::ProtocolOptions o;
      o.tol = 1e-6;
      o.seed = rng();
      const auto r = rendezvous::run_protocol(x, o);
      ++runs;
      reached += r.verdict.reached;
      flagged += !r.diagnostics.empty();
      for (const auto& e : r.events) {
        if (e.mover && e.gamma < std::numbers::pi / 2 + std::numbers::pi / n - rendezvous::kAngleTolerance) ++threshold;
      }
      for (const auto& s : r.trajectory.steps) nesting += !s.included;
      if (n == 2) two_in_one = two_in_one && r.trajectory.step_count() == 1;
    }
  }
  for (const char* name : {"paper/watergun-n2", "paper/watergun-square", "paper/watergun-n8"}) {
    const auto r = scenario::rendezvous_scenario(Builtin(name));
    ++runs;
    reached += r.verdict.reached;
    flagged += !r.diagnostics.empty();
  }
  const double secs = Seconds(start);
  const bool ok = reached == runs && flagged == 0 && threshold == 0 && nesting == 0 && two_in_one && secs < 10.0;
  return {ok, Fmt("%d/%d runs reached tol 1e-6; %d flagged, %d threshold and %d nesting failures; n=2 in one "
                  "grouped step: %s; %.2fs",
                  reached, runs, flagged, threshold, nesting, two_in_one ? "yes" : "no", secs)};
}

std::string Artifacts(const scenario::Scenario& s) {
  std::ostringstream out;
  if (s.rendezvous) {
    const auto r = scenario::rendezvous_scenario(s);
    rendezvous::write_event_log(out, r.events);
    sim::write_trajectory_csv(out, r.trajectory);
    out << scenario::rendezvous_summary(s, r).dump();
  } else {
    const auto o = scenario::simulate_scenario(s, &out);
    out << o.summary.dump();
  }
  if (s.certify) out << scenario::certify_scenario(s).to_json().dump();
  return out.str();
}

// 12. Same seed, same bytes, for every built-in.
Outcome Determinism() {
  const auto& all = scenario::builtin_scenarios().scenarios;
  std::size_t same = 0;
  std::string differ;
  for (const auto& s : all) {
    if (Artifacts(s) == Artifacts(s)) {
      ++same;
    } else {
      differ += " " + s.name;
    }
  }
  return {same == all.size(), Fmt("%zu/%zu scenarios bit-identical across two runs%s", same, all.size(),
                                  differ.c_str())};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"quarter-power pair stays apart", QuarterPower},
      {"one-over-t closed form and rate", OneOverT},
      {"vanishing confidence", VanishingConfidence},
      {"averaging invariant suite", AveragingSuite},
      {"properness oracle", ProperOracle},
      {"equiproper flagging", EquiproperFlagging},
      {"linear theory", LinearTheory},
      {"switching consensus", SwitchingConsensus},
      {"deformed averaging", DeformedAveraging},
      {"continuity of limits", Continuity},
      {"watergun rendezvous", Rendezvous},
      {"determinism", Determinism},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
