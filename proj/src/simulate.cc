#include "consensus/simulate.h"

#include <algorithm>
#include <charconv>
#include <future>
#include <string>
#include <tuple>

#include "consensus/error.h"

namespace consensus::sim {
namespace {

std::optional<maps::Deformation> CommonDeformation(const std::vector<MapDescriptor>& maps) {
  if (maps.empty() || maps.front().deformation() == nullptr) return std::nullopt;
  const std::string& name = maps.front().deformation()->name();
  for (const MapDescriptor& m : maps) {
    if (m.deformation() == nullptr || m.deformation()->name() != name) return std::nullopt;
  }
  return *maps.front().deformation();
}

// Drops old profiles in batches while running; `exact` trims to the limit.
void Trim(Trajectory& traj, std::optional<std::size_t> retain, bool exact = false) {
  if (!retain) return;
  const std::size_t keep = std::max<std::size_t>(*retain, 1);
  if (traj.profiles.size() <= (exact ? keep : 2 * keep)) return;
  const std::size_t drop = traj.profiles.size() - keep;
  traj.profiles.erase(traj.profiles.begin(), traj.profiles.begin() + static_cast<long>(drop));
  if (!traj.hulls.empty()) {
    traj.hulls.erase(traj.hulls.begin(), traj.hulls.begin() + static_cast<long>(drop));
  }
  traj.first_profile += drop;
}

}  // namespace

std::string_view to_string(SwitchingPolicy policy) {
  switch (policy) {
    case SwitchingPolicy::kSingle: return "single";
    case SwitchingPolicy::kCyclic: return "cyclic";
    case SwitchingPolicy::kRandom: return "random";
    case SwitchingPolicy::kScripted: return "scripted";
  }
  return "unknown";
}

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::kConsensus: return "consensus";
    case StopReason::kMaxSteps: return "max_steps";
    case StopReason::kViolation: return "violation";
  }
  return "unknown";
}

SwitchingSequence::SwitchingSequence(SwitchingPolicy policy, std::vector<MapDescriptor> maps,
                                     std::uint64_t seed, std::vector<ScriptedStep> script)
    : policy_(policy), maps_(std::move(maps)), seed_(seed), script_(std::move(script)) {
  if (maps_.empty()) throw InvalidArgument("switching sequence needs at least one map");
  for (const ScriptedStep& s : script_) {
    if (s.map >= maps_.size()) {
      throw InvalidArgument("scripted step refers to map " + std::to_string(s.map) + " of " +
                            std::to_string(maps_.size()));
    }
    if (s.time && *s.time < maps_[s.map].start_index()) {
      throw InvalidArgument("scripted time precedes the map's start index");
    }
  }
  if (policy_ == SwitchingPolicy::kScripted && script_.empty()) {
    throw InvalidArgument("scripted policy needs a non-empty script");
  }
}

SwitchingSequence SwitchingSequence::single(MapDescriptor map) {
  return SwitchingSequence(SwitchingPolicy::kSingle, {std::move(map)}, 0, {});
}

SwitchingSequence SwitchingSequence::cyclic(std::vector<MapDescriptor> maps) {
  return SwitchingSequence(SwitchingPolicy::kCyclic, std::move(maps), 0, {});
}

SwitchingSequence SwitchingSequence::random(std::vector<MapDescriptor> maps, std::uint64_t seed) {
  return SwitchingSequence(SwitchingPolicy::kRandom, std::move(maps), seed, {});
}

SwitchingSequence SwitchingSequence::scripted(std::vector<MapDescriptor> maps,
                                              std::vector<ScriptedStep> script) {
  return SwitchingSequence(SwitchingPolicy::kScripted, std::move(maps), 0, std::move(script));
}

SwitchingSequence::Cursor::Cursor(const SwitchingSequence& seq)
    : seq_(&seq), rng_(seq.seed_), uses_(seq.maps_.size(), 0) {}

ResolvedStep SwitchingSequence::Cursor::next() {
  const auto& maps = seq_->maps_;
  std::size_t index = 0;
  std::optional<int> pinned;
  switch (seq_->policy_) {
    case SwitchingPolicy::kSingle: index = 0; break;
    case SwitchingPolicy::kCyclic: index = step_ % maps.size(); break;
    case SwitchingPolicy::kRandom: index = static_cast<std::size_t>(rng_.index(maps.size())); break;
    case SwitchingPolicy::kScripted: {
      const ScriptedStep& s = seq_->script_[step_ % seq_->script_.size()];
      index = s.map;
      pinned = s.time;
      break;
    }
  }
  ++step_;
  const int t = pinned.value_or(maps[index].start_index() + uses_[index]);
  ++uses_[index];
  return {index, t};
}

Hull monitored_hull(const Trajectory& traj, const Profile& x) {
  return traj.monitor_space ? geometry::build_hull(traj.monitor_space->forward(x), traj.spec)
                            : geometry::build_hull(x, traj.spec);
}

Trajectory run(const SwitchingSequence& seq, const Profile& x0, const RunOptions& options) {
  if (!(options.tol > 0)) throw InvalidArgument("run: tol must be positive");
  if (options.max_steps < 1) throw InvalidArgument("run: max_steps must be >= 1");

  Trajectory traj;
  traj.spec = options.spec;
  traj.monitor_space = options.monitor_space ? options.monitor_space : CommonDeformation(seq.maps());

  Profile x = x0;
  Hull hull = monitored_hull(traj, x);
  traj.profiles.push_back(x);
  traj.diameters.push_back(geometry::hull_diameter(hull));
  if (options.record_hulls) traj.hulls.push_back(hull);
  if (options.observer) options.observer(0, x, traj.diameters.back(), 0.0);
  if (traj.diameters.back() <= options.tol) {
    traj.stop = StopReason::kConsensus;
    return traj;
  }

  auto cursor = seq.begin();
  traj.stop = StopReason::kMaxSteps;
  for (int step = 0; step < options.max_steps; ++step) {
    const ResolvedStep r = cursor.next();
    const MapDescriptor& map = seq.maps()[r.map_index];
    Profile next;
    Hull next_hull = hull;
    try {
      next = map.apply(r.internal_time, x);
      next_hull = monitored_hull(traj, next);
    } catch (const Error& e) {
      traj.stop = StopReason::kViolation;
      traj.violation = "step " + std::to_string(step) + " (map '" + map.kind() + "', t=" +
                       std::to_string(r.internal_time) + "): " + e.what();
      break;
    }
    StepRecord rec{step,
                   r.map_index,
                   r.internal_time,
                   geometry::hull_included(next_hull, hull, options.inclusion_tol),
                   geometry::hausdorff(next_hull, hull),
                   geometry::hull_diameter(next_hull)};
    traj.steps.push_back(rec);
    traj.diameters.push_back(rec.diameter);
    traj.profiles.push_back(next);
    if (options.record_hulls) traj.hulls.push_back(next_hull);
    Trim(traj, options.retain_profiles);
    if (options.observer) options.observer(step + 1, next, rec.diameter, rec.gap);

    if (!rec.included) {
      traj.stop = StopReason::kViolation;
      traj.violation = "step " + std::to_string(step) + " (map '" + map.kind() + "', t=" +
                       std::to_string(r.internal_time) + "): hull inclusion violated by " +
                       format_double(geometry::directed_hausdorff(next_hull, hull));
      break;
    }
    x = std::move(next);
    hull = std::move(next_hull);
    if (rec.diameter <= options.tol) {
      traj.stop = StopReason::kConsensus;
      break;
    }
  }
  Trim(traj, options.retain_profiles, true);
  return traj;
}

ConsensusVerdict consensus_verdict(const Trajectory& traj, double tol) {
  if (traj.profiles.empty()) throw InvalidArgument("consensus_verdict: empty trajectory");
  ConsensusVerdict v;
  v.final_diameter = traj.final_diameter();
  v.steps = traj.step_count();
  v.reached = v.final_diameter <= tol;
  if (v.reached) v.gamma = geometry::centroid(traj.final_profile());
  return v;
}

std::vector<MonitorEntry> hull_monitor(const Trajectory& traj, double tol) {
  std::vector<MonitorEntry> out;
  if (traj.profiles.size() < 2) return out;
  const bool recorded = traj.hulls.size() == traj.profiles.size();
  Hull prev = recorded ? traj.hulls[0] : monitored_hull(traj, traj.profiles[0]);
  for (std::size_t k = 1; k < traj.profiles.size(); ++k) {
    Hull cur = recorded ? traj.hulls[k] : monitored_hull(traj, traj.profiles[k]);
    out.push_back({static_cast<int>(traj.first_profile + k - 1), geometry::hull_included(cur, prev, tol),
                   geometry::hausdorff(cur, prev), geometry::hull_diameter(cur)});
    prev = std::move(cur);
  }
  return out;
}

ContinuityReport continuity_experiment(const SwitchingSequence& seq, const Profile& x0,
                                       const ContinuityOptions& options) {
  auto limit_of = [&](const Profile& start) {
    const Trajectory traj = run(seq, start, options.run);
    const ConsensusVerdict v = consensus_verdict(traj, options.run.tol);
    return std::pair{geometry::centroid(traj.final_profile()), v.reached};
  };

  ContinuityReport report;
  std::tie(report.reference_limit, report.reference_reached) = limit_of(x0);

  const SplitMix64 root(options.seed);
  for (std::size_t r = 0; r < options.radii.size(); ++r) {
    const double radius = options.radii[r];
    if (radius < 0) throw InvalidArgument("continuity_experiment: negative radius");
    std::vector<Profile> starts;
    for (std::size_t p = 0; p < options.probes; ++p) {
      SplitMix64 rng = root.split(r).split(p);
      std::vector<Point> agents;
      for (const Point& a : x0) {
        std::vector<double> c(a.coords().begin(), a.coords().end());
        for (double& v : c) v += rng.uniform(-radius, radius);
        agents.emplace_back(std::move(c));
      }
      starts.emplace_back(std::move(agents));
    }
    std::vector<std::future<std::pair<Point, bool>>> runs;
    for (const Profile& s : starts) {
      runs.push_back(std::async(std::launch::async, [&, s] { return limit_of(s); }));
    }

    RadiusResult res;
    res.radius = radius;
    for (std::size_t p = 0; p < runs.size(); ++p) {
      auto [limit, reached] = runs[p].get();
      ProbeResult probe{geometry::sup_distance(starts[p], x0),
                        geometry::sup_distance(limit, report.reference_limit), reached};
      if (!reached) ++res.failures;
      res.max_limit_distance = std::max(res.max_limit_distance, probe.limit_distance);
      res.max_initial_distance = std::max(res.max_initial_distance, probe.initial_distance);
      res.probes.push_back(probe);
    }
    report.radii.push_back(std::move(res));
  }
  return report;
}

std::string format_double(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, end) : std::string("nan");
}

void write_trajectory_csv_header(std::ostream& out, std::size_t dimension) {
  out << "t,agent";
  for (std::size_t k = 1; k <= dimension; ++k) out << ",c" << k;
  out << ",diameter,gap\n";
}

void write_trajectory_csv_rows(std::ostream& out, int t, const Profile& x, double diameter,
                               double gap) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    out << t << ',' << i;
    for (double c : x[i].coords()) out << ',' << format_double(c);
    out << ',' << format_double(diameter) << ',' << format_double(gap) << '\n';
  }
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  write_trajectory_csv_header(out, traj.profiles.front().dimension());
  for (std::size_t k = 0; k < traj.profiles.size(); ++k) {
    const std::size_t t = traj.first_profile + k;
    const double gap = t == 0 ? 0.0 : traj.steps[t - 1].gap;
    write_trajectory_csv_rows(out, static_cast<int>(t), traj.profiles[k], traj.diameters[t], gap);
  }
}

nlohmann::json run_summary(const Trajectory& traj, const ConsensusVerdict& verdict,
                           std::uint64_t seed) {
  nlohmann::json j = {{"stop_reason", to_string(traj.stop)},
                      {"steps", traj.step_count()},
                      {"gamma", nullptr},
                      {"final_diameter", verdict.final_diameter},
                      {"seed", seed},
                      {"reached", verdict.reached}};
  if (verdict.gamma) j["gamma"] = *verdict.gamma;
  if (traj.stop == StopReason::kViolation) j["violation"] = traj.violation;
  return j;
}

}  // namespace consensus::sim
