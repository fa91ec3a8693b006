#ifndef CONSENSUS_RENDEZVOUS_H_
#define CONSENSUS_RENDEZVOUS_H_

// Watergun rendezvous protocol at the geometric level.
//
// An activated agent scans the directions A toward every other distinct
// position, takes the largest empty circular sector (centre α, half-width γ)
// and, if γ >= π/2 + π/n, moves with its tie group in direction β = α + π
// (into the hull) under rule (*): until it reaches another agent's position
// or some agent lies perpendicular to the travel direction. One grouped
// update map collects activations up to and including the first move.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "consensus/geometry.h"
#include "consensus/random.h"
#include "consensus/simulate.h"

namespace consensus::rendezvous {

using geometry::Point;
using geometry::Profile;

// Positions closer than this are one tie group.
inline constexpr double kTieTolerance = 1e-12;
// Slack on the γ threshold; the regular polygon attains it with equality.
inline constexpr double kAngleTolerance = 1e-9;

class RendezvousState {
 public:
  RendezvousState(std::vector<Point> positions, std::uint64_t seed);

  std::size_t size() const { return positions_.size(); }
  const std::vector<Point>& positions() const { return positions_; }
  const Point& position(std::size_t agent) const { return positions_.at(agent); }
  Profile profile() const { return Profile(positions_); }

  // Agents grouped by position, groups ordered lexicographically by
  // position so that the order is label independent.
  std::vector<std::vector<std::size_t>> tie_groups() const;
  // Members of the tie group of `agent`, including itself.
  std::vector<std::size_t> tie_group_of(std::size_t agent) const;
  bool at_consensus() const;

  std::optional<std::size_t> active() const { return active_; }
  SplitMix64& rng() { return rng_; }

  // Moves `agent` and its tie group to `target`.
  void move_group(std::size_t agent, const Point& target);
  void set_active(std::optional<std::size_t> agent) { active_ = agent; }

 private:
  std::vector<Point> positions_;
  std::optional<std::size_t> active_;
  SplitMix64 rng_;
};

struct ScanResult {
  std::vector<double> directions;  // sorted, in [0, 2π), one per distinct direction
  double alpha = 0.0;              // centre of the largest empty sector
  double gamma = 0.0;              // half of its width, in [0, π]
};

// Throws Error when every agent shares the scanning agent's position.
ScanResult scan(const RendezvousState& state, std::size_t agent);

bool should_move(const ScanResult& scan, std::size_t n, double angle_tol = kAngleTolerance);

// Direction of travel for a scan: α + π mod 2π.
double move_direction(const ScanResult& scan);

// Destination of `agent` under rule (*) for travel direction `beta`. Every
// other position must have positive projection on the travel direction.
Point move_rule_star(const RendezvousState& state, std::size_t agent, double beta);

struct StepEvent {
  int step = 0;
  std::vector<std::size_t> activations;
  std::optional<std::size_t> mover;
  double alpha = 0.0;
  double gamma = 0.0;
  double beta = 0.0;
  double distance = 0.0;
  bool consensus_found = false;
  bool mover_on_hull = true;  // the mover was a vertex of the current convex hull

  nlohmann::json to_json() const;
};

// Activates tie groups in random order (without repetition inside one
// grouped step) until one moves. Throws Error if every group declines,
// which the existence argument rules out.
StepEvent protocol_step(RendezvousState& state, int step = 0);

struct ProtocolOptions {
  double tol = 1e-6;
  int max_grouped_steps = 100000;
  std::uint64_t seed = 0;
  double inclusion_tol = geometry::kDefaultTolerance;
};

struct ProtocolResult {
  sim::Trajectory trajectory;
  sim::ConsensusVerdict verdict;
  std::vector<StepEvent> events;
  // Empty when every grouped step passed the hull-nesting, threshold and
  // movement assertions.
  std::vector<std::string> diagnostics;
};

ProtocolResult run_protocol(std::vector<Point> initial, const ProtocolOptions& options);

// One JSON object per line.
void write_event_log(std::ostream& out, const std::vector<StepEvent>& events);

}  // namespace consensus::rendezvous

#endif  // CONSENSUS_RENDEZVOUS_H_
