#ifndef CONSENSUS_SCENARIO_H_
#define CONSENSUS_SCENARIO_H_

// Scenario files and the runners behind the command-line tool.
//
// A scenario file is JSON: {"scenarios": [ {...}, ... ]}. Each scenario names
// a map family, a switching policy, an initial profile and tolerances; the
// optional "certify" and "rendezvous" blocks configure those commands.
//
// All randomness derives from the scenario seed through SplitMix64::split:
// stream 1 draws the initial profile, 2 the switching choices, 3 the
// certification samples and 4 the rendezvous activation order.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "consensus/certify.h"
#include "consensus/geometry.h"
#include "consensus/maps.h"
#include "consensus/rendezvous.h"
#include "consensus/simulate.h"

namespace consensus::scenario {

using geometry::CoordinateMapSpec;
using geometry::Profile;
using maps::MapDescriptor;

enum class SeedStream : std::uint64_t { kInitial = 1, kSwitching = 2, kSampling = 3, kRendezvous = 4 };

std::uint64_t derive_seed(std::uint64_t seed, SeedStream stream);

struct RandomBox {
  std::size_t agents = 0;
  std::size_t dimension = 0;
  double lo = 0.0;
  double hi = 1.0;
  friend bool operator==(const RandomBox&, const RandomBox&) = default;
};

// Exactly one of the two is set.
struct InitialSpec {
  std::optional<Profile> profile;
  std::optional<RandomBox> random;
};

enum class CertifyMode { kAveraging, kEquiproper };

struct CertifySettings {
  CertifyMode mode = CertifyMode::kAveraging;
  std::size_t count = 100;
  double lo = -1.0;
  double hi = 1.0;
  double positive_lo = 0.1;
  double positive_hi = 2.0;
  int time_count = 1;
  double gap_floor = 1e-9;
  double consensus_tol = 1e-6;
};

struct RendezvousSettings {
  int max_grouped_steps = 100000;
};

struct Scenario {
  std::string name;
  std::string description;
  std::vector<MapDescriptor> maps;
  sim::SwitchingPolicy policy = sim::SwitchingPolicy::kSingle;
  std::vector<sim::ScriptedStep> script;
  CoordinateMapSpec coordinate_map = CoordinateMapSpec::identity();
  InitialSpec initial;
  double tol = geometry::kDefaultTolerance;
  double inclusion_tol = geometry::kDefaultTolerance;
  int max_steps = 100000;
  std::uint64_t seed = 0;
  std::optional<CertifySettings> certify;
  std::optional<RendezvousSettings> rendezvous;
};

// Validates the invariants of a scenario; throws InvalidArgument.
void validate(const Scenario& s);

nlohmann::json to_json(const Scenario& s);
// Errors name the JSON path of the offending field.
Scenario scenario_from_json(const nlohmann::json& j);

struct ScenarioFile {
  std::vector<Scenario> scenarios;
  const Scenario& find(const std::string& name) const;
};

nlohmann::json to_json(const ScenarioFile& file);
ScenarioFile scenario_file_from_json(const nlohmann::json& j);
// Syntax errors carry the line number; scenario names must be unique.
ScenarioFile load_scenario_file(const std::filesystem::path& path);
ScenarioFile parse_scenario_text(const std::string& text, const std::string& where);

// Every paper example plus fixtures, in a stable order.
const ScenarioFile& builtin_scenarios();

Profile initial_profile(const Scenario& s);
sim::SwitchingSequence switching_of(const Scenario& s);
// File-name stem: the scenario name with '/' replaced by '_'.
std::string slug(const std::string& name);

struct SimulationOutcome {
  sim::Trajectory trajectory;
  sim::ConsensusVerdict verdict;
  nlohmann::json summary;
};

// When `csv` is given, rows stream there and only the last profile stays
// in memory.
SimulationOutcome simulate_scenario(const Scenario& s, std::ostream* csv = nullptr);
certify::CertReport certify_scenario(const Scenario& s);
rendezvous::ProtocolResult rendezvous_scenario(const Scenario& s);
nlohmann::json rendezvous_summary(const Scenario& s, const rendezvous::ProtocolResult& r);

// Command-level entry points. Exit codes: 0 clean, 1 usage or parse error,
// 2 invariant or monitor violation.
struct CommandOptions {
  std::optional<std::filesystem::path> file;  // built-ins when unset
  std::string name;
  std::filesystem::path out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> max_steps;
  std::optional<double> tol;
};

int cmd_simulate(const CommandOptions& options, std::ostream& out, std::ostream& err);
int cmd_certify(const CommandOptions& options, std::ostream& out, std::ostream& err);
int cmd_rendezvous(const CommandOptions& options, std::ostream& out, std::ostream& err);
// `options.file` is a CSV or JSON matrix; `max_steps`, when set, caps the
// index search. Writes <out>/<file stem>.matrix.json.
int cmd_matrix(const CommandOptions& options, std::ostream& out, std::ostream& err);

// Rows of numbers; JSON as a nested array, otherwise comma or whitespace
// separated text.
Eigen::MatrixXd parse_matrix_text(const std::string& text);

}  // namespace consensus::scenario

#endif  // CONSENSUS_SCENARIO_H_
