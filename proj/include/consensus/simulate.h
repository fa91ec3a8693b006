#ifndef CONSENSUS_SIMULATE_H_
#define CONSENSUS_SIMULATE_H_

// Dynamics engine for x(t+1) = f_t(x(t)) under a switching sequence, with a
// hull monitor that checks C(t+1) ⊂ C(t) for C(t) = conv y(x(t)).
//
// Two clocks: the engine step counts applications; each map also has an
// internal time, starting at its start_index and advancing once per use of
// that map. Scripted steps may pin the internal time explicitly.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "consensus/geometry.h"
#include "consensus/maps.h"
#include "consensus/random.h"

namespace consensus::sim {

using geometry::CoordinateMapSpec;
using geometry::Hull;
using geometry::Point;
using geometry::Profile;
using maps::MapDescriptor;

enum class SwitchingPolicy { kSingle, kCyclic, kRandom, kScripted };

std::string_view to_string(SwitchingPolicy policy);

struct ScriptedStep {
  std::size_t map = 0;
  std::optional<int> time;  // nullopt: the map's own clock
};

struct ResolvedStep {
  std::size_t map_index = 0;
  int internal_time = 0;
};

class SwitchingSequence {
 public:
  static SwitchingSequence single(MapDescriptor map);
  static SwitchingSequence cyclic(std::vector<MapDescriptor> maps);
  static SwitchingSequence random(std::vector<MapDescriptor> maps, std::uint64_t seed);
  // Replays `script` cyclically.
  static SwitchingSequence scripted(std::vector<MapDescriptor> maps,
                                    std::vector<ScriptedStep> script);

  SwitchingPolicy policy() const { return policy_; }
  const std::vector<MapDescriptor>& maps() const { return maps_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<ScriptedStep>& script() const { return script_; }

  // Stateful walk over the realization; every cursor from the same sequence
  // yields the same steps. A cursor refers to its sequence, which must
  // outlive it.
  class Cursor {
   public:
    ResolvedStep next();

   private:
    friend class SwitchingSequence;
    explicit Cursor(const SwitchingSequence& seq);

    const SwitchingSequence* seq_;
    SplitMix64 rng_;
    std::size_t step_ = 0;
    std::vector<int> uses_;
  };

  Cursor begin() const { return Cursor(*this); }

 private:
  SwitchingSequence(SwitchingPolicy policy, std::vector<MapDescriptor> maps, std::uint64_t seed,
                    std::vector<ScriptedStep> script);

  SwitchingPolicy policy_;
  std::vector<MapDescriptor> maps_;
  std::uint64_t seed_ = 0;
  std::vector<ScriptedStep> script_;
};

enum class StopReason { kConsensus, kMaxSteps, kViolation };

std::string_view to_string(StopReason reason);

// One engine step, relating profile `step` to profile `step + 1`.
struct StepRecord {
  int step = 0;
  std::size_t map_index = 0;
  int internal_time = 0;
  bool included = true;
  double gap = 0.0;       // hausdorff(C(step+1), C(step))
  double diameter = 0.0;  // diameter of C(step+1)
};

// Called with (step, profile, hull diameter, gap) for every profile,
// including the initial one (step 0, gap 0).
using StepObserver = std::function<void(int, const Profile&, double, double)>;

struct RunOptions {
  CoordinateMapSpec spec = CoordinateMapSpec::identity();
  double tol = geometry::kDefaultTolerance;
  int max_steps = 100000;
  double inclusion_tol = geometry::kDefaultTolerance;
  bool record_hulls = false;
  // Hulls are built in this space; defaults to the maps' common deformation
  // when every map in the sequence carries the same one.
  std::optional<maps::Deformation> monitor_space;
  StepObserver observer;
  // When set, only the last `retain_profiles` profiles stay in memory
  // (the observer still sees all of them).
  std::optional<std::size_t> retain_profiles;
};

struct Trajectory {
  CoordinateMapSpec spec = CoordinateMapSpec::identity();
  std::optional<maps::Deformation> monitor_space;
  // profiles[k] is x(first_profile + k).
  std::vector<Profile> profiles;
  std::size_t first_profile = 0;
  std::vector<Hull> hulls;        // parallel to profiles when recorded
  std::vector<double> diameters;  // one per engine step, including step 0
  std::vector<StepRecord> steps;
  StopReason stop = StopReason::kMaxSteps;
  std::string violation;  // set when stop == kViolation

  int step_count() const { return static_cast<int>(steps.size()); }
  const Profile& final_profile() const { return profiles.back(); }
  double final_diameter() const { return diameters.back(); }
};

// Hull of x in the trajectory's monitor space.
Hull monitored_hull(const Trajectory& traj, const Profile& x);

Trajectory run(const SwitchingSequence& seq, const Profile& x0, const RunOptions& options);

struct ConsensusVerdict {
  bool reached = false;
  std::optional<Point> gamma;  // centroid of the final profile when reached
  double final_diameter = 0.0;
  int steps = 0;
};

ConsensusVerdict consensus_verdict(const Trajectory& traj, double tol);

struct MonitorEntry {
  int t = 0;
  bool included = true;
  double gap = 0.0;
  double diameter = 0.0;  // of C(t+1)
};

// Per-step verdicts on the retained profiles; uses recorded hulls when
// present and rebuilds them otherwise.
std::vector<MonitorEntry> hull_monitor(const Trajectory& traj,
                                       double tol = geometry::kDefaultTolerance);

struct ProbeResult {
  double initial_distance = 0.0;  // sup norm between start profiles
  double limit_distance = 0.0;    // sup norm between consensus values
  bool reached = false;
};

struct RadiusResult {
  double radius = 0.0;
  double max_limit_distance = 0.0;
  double max_initial_distance = 0.0;
  std::vector<ProbeResult> probes;
  std::size_t failures = 0;  // probes that did not reach consensus
};

struct ContinuityOptions {
  std::vector<double> radii;
  std::size_t probes = 10;
  std::uint64_t seed = 0;
  RunOptions run;
};

struct ContinuityReport {
  Point reference_limit;
  bool reference_reached = false;
  std::vector<RadiusResult> radii;
};

// Perturbs x0 uniformly in the sup-norm ball of each radius and compares the
// consensus limits under the same realization of `seq`. Probes run
// concurrently.
ContinuityReport continuity_experiment(const SwitchingSequence& seq, const Profile& x0,
                                       const ContinuityOptions& options);

// Header "t,agent,c1..cd,diameter,gap", one row per agent and step.
void write_trajectory_csv_header(std::ostream& out, std::size_t dimension);
void write_trajectory_csv_rows(std::ostream& out, int t, const Profile& x, double diameter,
                               double gap);
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

// {stop_reason, steps, gamma, final_diameter, seed, reached}
nlohmann::json run_summary(const Trajectory& traj, const ConsensusVerdict& verdict,
                           std::uint64_t seed);

// Shortest round-trip decimal form, for bit-exact text output.
std::string format_double(double v);

}  // namespace consensus::sim

#endif  // CONSENSUS_SIMULATE_H_
