#ifndef CONSENSUS_CERTIFY_H_
#define CONSENSUS_CERTIFY_H_

// Sampling-based certification of the averaging, proper and equiproper
// properties, plus support analysis of row-stochastic matrices.
//
// Certification is numeric evidence, never proof: a passing report means no
// violation was found over `count` seeded samples. Reports record the seed.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "consensus/geometry.h"
#include "consensus/maps.h"

namespace consensus::certify {

using geometry::CoordinateMapSpec;
using geometry::Point;
using geometry::Profile;
using maps::MapDescriptor;

struct SamplingConfig {
  std::uint64_t seed = 0;
  std::size_t count = 100;
  // Required when the map does not fix n or d.
  std::optional<std::size_t> agents;
  std::optional<std::size_t> dimension;
  // Uniform box for all-reals maps.
  double lo = -1.0;
  double hi = 1.0;
  // Uniform box for positive-orthant maps.
  double positive_lo = 0.1;
  double positive_hi = 2.0;
  // Internal times tested per profile: start_index .. start_index+time_count-1
  // (time-independent maps are tested at start_index only).
  int time_count = 1;
  // Deformed maps: draw samples in the deformation's image and map them back,
  // so the samples cover the hull space uniformly.
  bool transformed = true;
};

struct SampleRecord {
  std::size_t profile_id = 0;
  std::size_t map_index = 0;
  int t = 0;
  bool included = true;
  double gap = 0.0;
};

struct ViolationWitness {
  Profile profile;
  std::string map;
  std::size_t map_index = 0;
  int t = 0;
  std::optional<Point> vertex;  // vertex of the image hull outside the input hull
  double distance = 0.0;
  std::string message;
};

struct CertReport {
  SamplingConfig config;
  std::vector<SampleRecord> records;
  // Minimum over profiles of the per-profile family gap (equiproper runs) or
  // of the recorded gaps (averaging runs).
  std::optional<double> family_min_gap;
  std::optional<ViolationWitness> witness;
  // Set by check_equiproper.
  std::optional<bool> equiproper;
  double gap_floor = 0.0;

  bool ok() const { return !witness.has_value(); }
  // Concatenates records; keeps the witness with the smallest profile id.
  void merge(const CertReport& other);
  nlohmann::json to_json() const;
};

// Hulls for a map step: forward-transformed for deformed maps.
geometry::Hull step_hull(const MapDescriptor& map, const CoordinateMapSpec& spec, const Profile& x);

// Profile `id` of the sampler described by `config` for `map`; deterministic
// in (seed, id). Throws InvalidArgument on a sampler/domain mismatch.
Profile sample_profile(const MapDescriptor& map, const SamplingConfig& config, std::size_t id);

CertReport check_averaging(const MapDescriptor& map, const CoordinateMapSpec& spec,
                           const SamplingConfig& samples,
                           double tol = geometry::kDefaultTolerance);

// hausdorff(conv y(f_t(x)), conv y(x)); throws InclusionViolation when the
// step is not averaging at `tol`.
double properness_gap(const MapDescriptor& map, int t, const CoordinateMapSpec& spec,
                      const Profile& x, double tol = geometry::kDefaultTolerance);

struct FamilyMember {
  MapDescriptor map;
  int t_first = 0;
  int t_last = 0;
};

// Members covering each map's start index (time_count internal times for
// time-dependent maps).
std::vector<FamilyMember> family_of(std::span<const MapDescriptor> maps, int time_count);

struct EquiproperOptions {
  double consensus_tol = 1e-6;
  double gap_floor = 1e-9;
  double inclusion_tol = geometry::kDefaultTolerance;
};

// Per non-consensus sample x: inf over the family of properness_gap. The
// family is flagged equiproper when the minimum over samples is >= gap_floor.
// An inclusion violation stops the run and is returned as the witness.
CertReport check_equiproper(std::span<const FamilyMember> family, const CoordinateMapSpec& spec,
                            const SamplingConfig& samples, const EquiproperOptions& options = {});

struct MatrixAnalysis {
  std::size_t size = 0;
  bool scrambling = false;
  double tau = 0.0;
  std::optional<int> regularity_index;
  std::optional<int> scrambling_index;
  int cap = 0;

  nlohmann::json to_json() const;
};

// Entries above this count as positive in support tests.
inline constexpr double kSupportThreshold = 1e-12;

// τ(A) = ½ max_{i,j} Σ_k |a_ik − a_jk|.
double scrambling_coefficient(const Eigen::MatrixXd& a);
// Every pair of rows shares a column with positive entries.
bool is_scrambling(const Eigen::MatrixXd& a);
// Least k <= cap with A^k scrambling.
std::optional<int> scrambling_index(const Eigen::MatrixXd& a, int cap);
// Least k <= cap with A^k entrywise positive.
std::optional<int> regularity_index(const Eigen::MatrixXd& a, int cap);
// Default cap is the Wielandt bound (n-1)^2 + 1.
MatrixAnalysis analyze_matrix(const Eigen::MatrixXd& a, std::optional<int> cap = std::nullopt);

}  // namespace consensus::certify

#endif  // CONSENSUS_CERTIFY_H_
