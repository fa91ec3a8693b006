#include "consensus/certify.h"

#include <algorithm>
#include <future>
#include <limits>
#include <string>
#include <thread>

#include "consensus/error.h"
#include "consensus/random.h"

namespace consensus::certify {
namespace {

using geometry::Hull;
using maps::DomainConstraint;
using nlohmann::json;

constexpr int kMaxResampleAttempts = 10000;

std::size_t ResolveCount(std::optional<std::size_t> fixed, std::optional<std::size_t> requested,
                         const char* what) {
  if (fixed && requested && *fixed != *requested) {
    throw InvalidArgument(std::string("sampler/domain mismatch: map fixes ") + what + "=" +
                          std::to_string(*fixed) + ", sampler requests " +
                          std::to_string(*requested));
  }
  if (fixed) return *fixed;
  if (requested) return *requested;
  throw InvalidArgument(std::string("sampler needs an explicit ") + what +
                        " for a map that does not fix it");
}

Profile Draw(const MapDescriptor& map, const SamplingConfig& config, SplitMix64& rng) {
  const std::size_t n = ResolveCount(map.domain().agents, config.agents, "agents");
  const std::size_t d = ResolveCount(map.domain().dimension, config.dimension, "dimension");

  const maps::Deformation* phi = config.transformed ? map.deformation() : nullptr;
  const DomainConstraint space = phi ? phi->image() : map.domain().constraint;
  double lo = config.lo;
  double hi = config.hi;
  if (space == DomainConstraint::kPositiveOrthant) {
    lo = config.positive_lo;
    hi = config.positive_hi;
    if (!(lo > maps::kPositiveFloor)) {
      throw InvalidArgument("sampler/domain mismatch: positive-orthant map needs positive_lo > 0");
    }
  }
  if (!(hi >= lo)) throw InvalidArgument("sampler box is empty");

  std::vector<Point> agents;
  agents.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> c(d);
    for (double& v : c) v = rng.uniform(lo, hi);
    agents.emplace_back(std::move(c));
  }
  Profile x(std::move(agents));
  return phi ? phi->inverse(x) : x;
}

std::vector<int> TimesFor(const MapDescriptor& map, int time_count) {
  std::vector<int> ts = {map.start_index()};
  if (map.time_dependent()) {
    for (int k = 1; k < time_count; ++k) ts.push_back(map.start_index() + k);
  }
  return ts;
}

ViolationWitness MakeWitness(const MapDescriptor& map, std::size_t map_index, int t,
                             const Profile& x, const Hull& image, const Hull& outer) {
  ViolationWitness w{x, map.kind(), map_index, t, std::nullopt, 0.0, ""};
  for (const Point& v : image.vertices()) {
    const double dist = geometry::point_to_hull_distance(v, outer);
    if (dist > w.distance) {
      w.distance = dist;
      w.vertex = v;
    }
  }
  w.message = "image hull leaves the input hull by " + std::to_string(w.distance);
  return w;
}

// Runs body(id, report) for ids in [0, count) across worker threads with one
// report per contiguous chunk; chunks merge in id order, so the result does
// not depend on the thread count.
template <typename Body>
CertReport ParallelOverSamples(const SamplingConfig& config, Body body) {
  const std::size_t count = config.count;
  const std::size_t workers =
      std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, std::max<std::size_t>(count, 1));
  const std::size_t chunk = (count + workers - 1) / std::max<std::size_t>(workers, 1);

  std::vector<std::future<CertReport>> parts;
  for (std::size_t begin = 0; begin < count; begin += chunk) {
    const std::size_t end = std::min(count, begin + chunk);
    parts.push_back(std::async(std::launch::async, [&, begin, end] {
      CertReport part;
      for (std::size_t id = begin; id < end; ++id) {
        if (!body(id, part)) break;
      }
      return part;
    }));
  }
  CertReport report;
  report.config = config;
  for (auto& f : parts) report.merge(f.get());
  return report;
}

json ConfigToJson(const SamplingConfig& c) {
  json j = {{"seed", c.seed},
            {"count", c.count},
            {"agents", nullptr},
            {"dimension", nullptr},
            {"box", {c.lo, c.hi}},
            {"positive_box", {c.positive_lo, c.positive_hi}},
            {"time_count", c.time_count},
            {"transformed", c.transformed}};
  if (c.agents) j["agents"] = *c.agents;
  if (c.dimension) j["dimension"] = *c.dimension;
  return j;
}

}  // namespace

void CertReport::merge(const CertReport& other) {
  records.insert(records.end(), other.records.begin(), other.records.end());
  if (other.family_min_gap) {
    family_min_gap = family_min_gap ? std::min(*family_min_gap, *other.family_min_gap)
                                    : *other.family_min_gap;
  }
  // Parts are merged in id order, so the first witness seen has the smallest id.
  if (other.witness && !witness) witness = other.witness;
}

json CertReport::to_json() const {
  json recs = json::array();
  for (const SampleRecord& r : records) {
    recs.push_back({{"profile_id", r.profile_id},
                    {"map_index", r.map_index},
                    {"t", r.t},
                    {"included", r.included},
                    {"gap", r.gap}});
  }
  json j = {{"config", ConfigToJson(config)},
            {"samples", config.count},
            {"records", std::move(recs)},
            {"family_min_gap", nullptr},
            {"witness", nullptr},
            {"equiproper", nullptr},
            {"gap_floor", gap_floor},
            {"ok", ok()}};
  if (family_min_gap) j["family_min_gap"] = *family_min_gap;
  if (equiproper) j["equiproper"] = *equiproper;
  if (witness) {
    j["witness"] = {{"profile", witness->profile},
                    {"map", witness->map},
                    {"map_index", witness->map_index},
                    {"t", witness->t},
                    {"vertex", nullptr},
                    {"distance", witness->distance},
                    {"message", witness->message}};
    if (witness->vertex) j["witness"]["vertex"] = *witness->vertex;
  }
  return j;
}

Hull step_hull(const MapDescriptor& map, const CoordinateMapSpec& spec, const Profile& x) {
  if (const maps::Deformation* phi = map.deformation()) {
    return geometry::build_hull(phi->forward(x), spec);
  }
  return geometry::build_hull(x, spec);
}

Profile sample_profile(const MapDescriptor& map, const SamplingConfig& config, std::size_t id) {
  SplitMix64 rng = SplitMix64(config.seed).split(id);
  return Draw(map, config, rng);
}

CertReport check_averaging(const MapDescriptor& map, const CoordinateMapSpec& spec,
                           const SamplingConfig& samples, double tol) {
  if (tol < 0) throw InvalidArgument("check_averaging: tol must be >= 0");
  // Surface sampler/domain mismatches before spawning workers.
  (void)sample_profile(map, samples, 0);
  const std::vector<int> times = TimesFor(map, samples.time_count);

  CertReport report = ParallelOverSamples(samples, [&](std::size_t id, CertReport& part) {
    const Profile x = sample_profile(map, samples, id);
    const Hull outer = step_hull(map, spec, x);
    for (int t : times) {
      Profile image;
      try {
        image = map.apply(t, x);
      } catch (const DomainError& e) {
        part.witness = ViolationWitness{x, map.kind(), 0, t, std::nullopt, 0.0, e.what()};
        part.records.push_back({id, 0, t, false, 0.0});
        return false;
      }
      const Hull inner = step_hull(map, spec, image);
      const bool included = geometry::hull_included(inner, outer, tol);
      const double gap = geometry::hausdorff(inner, outer);
      part.records.push_back({id, 0, t, included, gap});
      part.family_min_gap = part.family_min_gap ? std::min(*part.family_min_gap, gap) : gap;
      if (!included) {
        part.witness = MakeWitness(map, 0, t, x, inner, outer);
        return false;
      }
    }
    return true;
  });
  return report;
}

double properness_gap(const MapDescriptor& map, int t, const CoordinateMapSpec& spec,
                      const Profile& x, double tol) {
  const Hull outer = step_hull(map, spec, x);
  const Hull inner = step_hull(map, spec, map.apply(t, x));
  if (!geometry::hull_included(inner, outer, tol)) {
    throw InclusionViolation("properness_gap: map '" + map.kind() + "' at t=" +
                             std::to_string(t) + " is not averaging at this profile");
  }
  return geometry::hausdorff(inner, outer);
}

std::vector<FamilyMember> family_of(std::span<const MapDescriptor> maps, int time_count) {
  std::vector<FamilyMember> out;
  for (const MapDescriptor& m : maps) {
    const int last = m.time_dependent() ? m.start_index() + std::max(time_count, 1) - 1
                                        : m.start_index();
    out.push_back({m, m.start_index(), last});
  }
  return out;
}

CertReport check_equiproper(std::span<const FamilyMember> family, const CoordinateMapSpec& spec,
                            const SamplingConfig& samples, const EquiproperOptions& options) {
  if (family.empty()) throw InvalidArgument("check_equiproper: empty family");
  for (const FamilyMember& m : family) {
    if (m.t_last < m.t_first) throw InvalidArgument("check_equiproper: empty time range");
  }
  // Samples must lie in every member's domain; a positive-orthant member
  // decides the sampling box for the whole family.
  const auto positive = std::find_if(family.begin(), family.end(), [](const FamilyMember& m) {
    return m.map.domain().constraint == maps::DomainConstraint::kPositiveOrthant;
  });
  const MapDescriptor& probe = (positive != family.end() ? *positive : family.front()).map;
  (void)sample_profile(probe, samples, 0);

  CertReport report = ParallelOverSamples(samples, [&](std::size_t id, CertReport& part) {
    SplitMix64 rng = SplitMix64(samples.seed).split(id);
    Profile x = Draw(probe, samples, rng);
    for (int attempt = 0;
         geometry::hull_diameter(step_hull(probe, spec, x)) <= options.consensus_tol; ++attempt) {
      if (attempt == kMaxResampleAttempts) {
        throw InvalidArgument("check_equiproper: sampler produced only consensus profiles");
      }
      x = Draw(probe, samples, rng);
    }

    SampleRecord best{id, 0, family.front().t_first, true, std::numeric_limits<double>::infinity()};
    for (std::size_t k = 0; k < family.size(); ++k) {
      const FamilyMember& m = family[k];
      const Hull outer = step_hull(m.map, spec, x);
      for (int t = m.t_first; t <= m.t_last; ++t) {
        const Hull inner = step_hull(m.map, spec, m.map.apply(t, x));
        if (!geometry::hull_included(inner, outer, options.inclusion_tol)) {
          part.records.push_back({id, k, t, false, geometry::hausdorff(inner, outer)});
          part.witness = MakeWitness(m.map, k, t, x, inner, outer);
          return false;
        }
        const double gap = geometry::hausdorff(inner, outer);
        if (gap < best.gap) best = {id, k, t, true, gap};
      }
    }
    part.records.push_back(best);
    part.family_min_gap = part.family_min_gap ? std::min(*part.family_min_gap, best.gap) : best.gap;
    return true;
  });
  report.gap_floor = options.gap_floor;
  if (report.ok()) {
    report.equiproper = report.family_min_gap && *report.family_min_gap >= options.gap_floor;
  }
  return report;
}

}  // namespace consensus::certify
