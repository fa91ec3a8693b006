#include "consensus/rendezvous.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "consensus/error.h"

namespace consensus::rendezvous {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kSameDirection = 1e-12;

double NormalizeAngle(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0) a += kTwoPi;
  // fmod can return exactly 2π after the shift for tiny negative inputs.
  return a >= kTwoPi ? 0.0 : a;
}

bool SamePosition(const Point& a, const Point& b) {
  return geometry::distance(a, b) <= kTieTolerance;
}

bool LexLess(const Point& a, const Point& b) {
  return a[0] < b[0] || (a[0] == b[0] && a[1] < b[1]);
}

// Extreme point test: p lies outside the hull of the other positions.
bool IsHullVertex(const RendezvousState& state, std::size_t agent) {
  const Point& p = state.position(agent);
  std::vector<Point> others;
  for (const Point& q : state.positions()) {
    if (!SamePosition(p, q)) others.push_back(q);
  }
  if (others.empty()) return true;
  const geometry::Hull hull =
      geometry::build_hull(Profile(std::move(others)), geometry::CoordinateMapSpec::identity());
  return geometry::point_to_hull_distance(p, hull) > 0.0;
}

}  // namespace

RendezvousState::RendezvousState(std::vector<Point> positions, std::uint64_t seed)
    : positions_(std::move(positions)), rng_(seed) {
  if (positions_.size() < 2) throw InvalidArgument("rendezvous needs at least 2 agents");
  for (const Point& p : positions_) {
    if (p.dimension() != 2) throw DimensionError("rendezvous agents live in the plane (d=2)");
  }
}

std::vector<std::vector<std::size_t>> RendezvousState::tie_groups() const {
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < positions_.size(); ++i) {
    auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) {
      return SamePosition(positions_[g.front()], positions_[i]);
    });
    if (it == groups.end()) {
      groups.push_back({i});
    } else {
      it->push_back(i);
    }
  }
  std::sort(groups.begin(), groups.end(), [&](const auto& a, const auto& b) {
    return LexLess(positions_[a.front()], positions_[b.front()]);
  });
  return groups;
}

std::vector<std::size_t> RendezvousState::tie_group_of(std::size_t agent) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < positions_.size(); ++i) {
    if (SamePosition(positions_[i], positions_.at(agent))) out.push_back(i);
  }
  return out;
}

bool RendezvousState::at_consensus() const {
  return std::all_of(positions_.begin(), positions_.end(),
                     [&](const Point& p) { return SamePosition(p, positions_.front()); });
}

void RendezvousState::move_group(std::size_t agent, const Point& target) {
  for (std::size_t i : tie_group_of(agent)) positions_[i] = target;
}

ScanResult scan(const RendezvousState& state, std::size_t agent) {
  const Point& p = state.position(agent);
  ScanResult out;
  for (const Point& q : state.positions()) {
    if (SamePosition(p, q)) continue;
    out.directions.push_back(NormalizeAngle(std::atan2(q[1] - p[1], q[0] - p[0])));
  }
  if (out.directions.empty()) {
    throw Error("scan: all agents share one position (consensus already reached)");
  }
  std::sort(out.directions.begin(), out.directions.end());
  out.directions.erase(std::unique(out.directions.begin(), out.directions.end(),
                                   [](double a, double b) { return b - a <= kSameDirection; }),
                       out.directions.end());
  if (out.directions.size() > 1 &&
      out.directions.front() + kTwoPi - out.directions.back() <= kSameDirection) {
    out.directions.pop_back();
  }

  const auto& a = out.directions;
  double widest = -1.0;
  double start = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double next = k + 1 < a.size() ? a[k + 1] : a[0] + kTwoPi;
    if (next - a[k] > widest) {
      widest = next - a[k];
      start = a[k];
    }
  }
  out.gamma = widest / 2.0;
  out.alpha = NormalizeAngle(start + out.gamma);
  return out;
}

bool should_move(const ScanResult& scan, std::size_t n, double angle_tol) {
  if (n < 2) throw InvalidArgument("should_move: n must be >= 2");
  return scan.gamma >= kPi / 2.0 + kPi / static_cast<double>(n) - angle_tol;
}

double move_direction(const ScanResult& scan) { return NormalizeAngle(scan.alpha + kPi); }

Point move_rule_star(const RendezvousState& state, std::size_t agent, double beta) {
  const Point& p = state.position(agent);
  const Point u{std::cos(beta), std::sin(beta)};

  double s = std::numeric_limits<double>::infinity();
  bool any = false;
  for (const Point& q : state.positions()) {
    if (SamePosition(p, q)) continue;
    any = true;
    const double proj = geometry::dot(q - p, u);
    if (!(proj > 0.0)) {
      throw Error("rule (*): an agent is not ahead of the travel direction");
    }
    s = std::min(s, proj);
  }
  if (!any) throw Error("rule (*): no other agent to move toward");

  // Position reached: an agent on the ray at the stopping distance.
  for (const Point& q : state.positions()) {
    if (SamePosition(p, q)) continue;
    const Point r = q - p;
    const double perp = std::abs(r[0] * u[1] - r[1] * u[0]);
    if (perp <= kTieTolerance && geometry::dot(r, u) <= s + kTieTolerance) return q;
  }
  return p + s * u;
}

nlohmann::json StepEvent::to_json() const {
  nlohmann::json j = {{"step", step},
                      {"activations", activations},
                      {"mover", nullptr},
                      {"alpha", alpha},
                      {"gamma", gamma},
                      {"beta", beta},
                      {"distance", distance}};
  if (mover) j["mover"] = *mover;
  if (consensus_found) j["event"] = "consensus found!";
  return j;
}

StepEvent protocol_step(RendezvousState& state, int step) {
  StepEvent ev;
  ev.step = step;
  if (state.at_consensus()) {
    ev.consensus_found = true;
    state.set_active(std::nullopt);
    return ev;
  }
  const std::size_t n = state.size();
  const auto groups = state.tie_groups();
  std::vector<std::size_t> pending(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) pending[g] = g;

  while (!pending.empty()) {
    const std::size_t pick = static_cast<std::size_t>(state.rng().index(pending.size()));
    const std::size_t agent = groups[pending[pick]].front();
    pending.erase(pending.begin() + static_cast<long>(pick));
    ev.activations.push_back(agent);
    state.set_active(agent);

    const ScanResult sc = scan(state, agent);
    if (!should_move(sc, n)) continue;

    ev.mover = agent;
    ev.alpha = sc.alpha;
    ev.gamma = sc.gamma;
    ev.beta = move_direction(sc);
    ev.mover_on_hull = IsHullVertex(state, agent);
    const Point target = move_rule_star(state, agent, ev.beta);
    ev.distance = geometry::distance(target, state.position(agent));
    state.move_group(agent, target);
    return ev;
  }
  throw Error("protocol_step: no tie group met the movement threshold after " +
              std::to_string(ev.activations.size()) + " activations");
}

ProtocolResult run_protocol(std::vector<Point> initial, const ProtocolOptions& options) {
  RendezvousState state(std::move(initial), options.seed);
  const std::size_t n = state.size();
  const double threshold = kPi / 2.0 + kPi / static_cast<double>(n) - kAngleTolerance;

  ProtocolResult out;
  sim::Trajectory& traj = out.trajectory;
  traj.spec = geometry::CoordinateMapSpec::identity();
  traj.profiles.push_back(state.profile());
  geometry::Hull hull = geometry::build_hull(traj.profiles.back(), traj.spec);
  traj.diameters.push_back(geometry::hull_diameter(hull));

  traj.stop = sim::StopReason::kMaxSteps;
  for (int step = 0;; ++step) {
    if (state.at_consensus() || traj.diameters.back() <= options.tol) {
      traj.stop = sim::StopReason::kConsensus;
      if (state.at_consensus()) out.events.push_back(protocol_step(state, step));
      break;
    }
    if (step == options.max_grouped_steps) {
      out.diagnostics.push_back("no consensus within " + std::to_string(options.max_grouped_steps) +
                                " grouped steps");
      break;
    }

    const auto groups_before = state.tie_groups();
    StepEvent ev;
    try {
      ev = protocol_step(state, step);
    } catch (const Error& e) {
      traj.stop = sim::StopReason::kViolation;
      traj.violation = e.what();
      out.diagnostics.push_back(e.what());
      break;
    }

    const Profile next = state.profile();
    geometry::Hull next_hull = geometry::build_hull(next, traj.spec);
    sim::StepRecord rec{step,
                        0,
                        step + 1,
                        geometry::hull_included(next_hull, hull, options.inclusion_tol),
                        geometry::hausdorff(next_hull, hull),
                        geometry::hull_diameter(next_hull)};
    traj.steps.push_back(rec);
    traj.diameters.push_back(rec.diameter);
    traj.profiles.push_back(next);

    const std::string where = "grouped step " + std::to_string(step) + ": ";
    if (!rec.included) out.diagnostics.push_back(where + "hull nesting violated");
    if (ev.gamma < threshold) out.diagnostics.push_back(where + "mover below the gamma threshold");
    if (!(ev.distance > 0.0)) out.diagnostics.push_back(where + "no movement");
    if (!ev.mover_on_hull) out.diagnostics.push_back(where + "mover is not a hull vertex");
    const auto groups_after = state.tie_groups();
    for (const auto& g : groups_before) {
      const bool kept = std::any_of(groups_after.begin(), groups_after.end(), [&](const auto& h) {
        return std::all_of(g.begin(), g.end(), [&](std::size_t i) {
          return std::find(h.begin(), h.end(), i) != h.end();
        });
      });
      if (!kept) out.diagnostics.push_back(where + "a tie group split");
    }
    out.events.push_back(std::move(ev));

    if (!rec.included) {
      traj.stop = sim::StopReason::kViolation;
      traj.violation = where + "hull nesting violated";
      break;
    }
    hull = std::move(next_hull);
  }
  out.verdict = sim::consensus_verdict(traj, options.tol);
  return out;
}

void write_event_log(std::ostream& out, const std::vector<StepEvent>& events) {
  for (const StepEvent& ev : events) out << ev.to_json().dump() << '\n';
}

}  // namespace consensus::rendezvous
