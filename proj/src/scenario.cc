#include "consensus/scenario.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "consensus/error.h"
#include "consensus/random.h"

namespace consensus::scenario {
namespace {

using nlohmann::json;

// JSON object view that reports the path of whatever goes wrong.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ParseError(path_, "expected an object");
  }

  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  const json& at(const char* key) const {
    if (!has(key)) throw ParseError(path(key), "missing field");
    return j_.at(key);
  }

  std::string path(const char* key) const { return path_ + "." + key; }

  template <typename T>
  T get(const char* key) const {
    try {
      return at(key).get<T>();
    } catch (const json::exception& e) {
      throw ParseError(path(key), e.what());
    }
  }

  template <typename T>
  T get(const char* key, T fallback) const {
    return has(key) ? get<T>(key) : fallback;
  }

  void reject_unknown(std::initializer_list<const char*> known) const {
    for (const auto& [key, value] : j_.items()) {
      if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
        throw ParseError(path_ + "." + key, "unknown field");
      }
    }
  }

 private:
  const json& j_;
  std::string path_;
};

// Runs `fn`, rewrapping library errors so they name `where`.
template <typename Fn>
auto AtPath(const std::string& where, Fn fn) {
  try {
    return fn();
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(where, e.what());
  } catch (const json::exception& e) {
    throw ParseError(where, e.what());
  }
}

sim::SwitchingPolicy PolicyFromString(const std::string& s, const std::string& where) {
  for (auto p : {sim::SwitchingPolicy::kSingle, sim::SwitchingPolicy::kCyclic,
                 sim::SwitchingPolicy::kRandom, sim::SwitchingPolicy::kScripted}) {
    if (sim::to_string(p) == s) return p;
  }
  throw ParseError(where, "unknown switching policy '" + s + "'");
}

std::string_view ModeName(CertifyMode m) {
  return m == CertifyMode::kAveraging ? "averaging" : "equiproper";
}

json CertifyToJson(const CertifySettings& c) {
  return {{"mode", ModeName(c.mode)},       {"count", c.count},
          {"lo", c.lo},                     {"hi", c.hi},
          {"positive_lo", c.positive_lo},   {"positive_hi", c.positive_hi},
          {"time_count", c.time_count},     {"gap_floor", c.gap_floor},
          {"consensus_tol", c.consensus_tol}};
}

CertifySettings CertifyFromJson(const Reader& r) {
  r.reject_unknown({"mode", "count", "lo", "hi", "positive_lo", "positive_hi", "time_count",
                    "gap_floor", "consensus_tol"});
  CertifySettings c;
  const std::string mode = r.get<std::string>("mode", "averaging");
  if (mode == "averaging") {
    c.mode = CertifyMode::kAveraging;
  } else if (mode == "equiproper") {
    c.mode = CertifyMode::kEquiproper;
  } else {
    throw ParseError(r.path("mode"), "expected 'averaging' or 'equiproper'");
  }
  c.count = r.get<std::size_t>("count", c.count);
  c.lo = r.get<double>("lo", c.lo);
  c.hi = r.get<double>("hi", c.hi);
  c.positive_lo = r.get<double>("positive_lo", c.positive_lo);
  c.positive_hi = r.get<double>("positive_hi", c.positive_hi);
  c.time_count = r.get<int>("time_count", c.time_count);
  c.gap_floor = r.get<double>("gap_floor", c.gap_floor);
  c.consensus_tol = r.get<double>("consensus_tol", c.consensus_tol);
  return c;
}

std::size_t LineOf(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, SeedStream stream) {
  return SplitMix64(seed).split(static_cast<std::uint64_t>(stream)).state();
}

void validate(const Scenario& s) {
  if (s.name.empty()) throw InvalidArgument("scenario name is empty");
  const std::string who = "scenario '" + s.name + "': ";
  if (s.initial.profile.has_value() == s.initial.random.has_value()) {
    throw InvalidArgument(who + "initial needs exactly one of profile or random");
  }
  if (const auto& box = s.initial.random) {
    if (box->agents == 0 || box->dimension == 0) throw InvalidArgument(who + "empty random box");
    if (!(box->lo < box->hi)) throw InvalidArgument(who + "random box needs lo < hi");
  }
  if (!(s.tol > 0)) throw InvalidArgument(who + "tol must be positive");
  if (s.inclusion_tol < 0) throw InvalidArgument(who + "inclusion_tol must be >= 0");
  if (s.max_steps < 1) throw InvalidArgument(who + "max_steps must be >= 1");
  if (s.maps.empty() && !s.rendezvous) {
    throw InvalidArgument(who + "needs maps or a rendezvous block");
  }
  if (s.policy == sim::SwitchingPolicy::kSingle && s.maps.size() > 1) {
    throw InvalidArgument(who + "single policy takes exactly one map");
  }
  if (!s.maps.empty()) (void)switching_of(s);
  if (const auto& c = s.certify) {
    if (c->count == 0) throw InvalidArgument(who + "certify.count must be positive");
    if (c->time_count < 1) throw InvalidArgument(who + "certify.time_count must be >= 1");
    if (!(c->lo < c->hi) || !(c->positive_lo < c->positive_hi) || !(c->positive_lo > 0)) {
      throw InvalidArgument(who + "certify sampling box is empty");
    }
  }
  if (s.rendezvous && s.rendezvous->max_grouped_steps < 1) {
    throw InvalidArgument(who + "rendezvous.max_grouped_steps must be >= 1");
  }
}

json to_json(const Scenario& s) {
  json maps = json::array();
  for (const MapDescriptor& m : s.maps) maps.push_back(m.to_json());
  json switching = {{"policy", sim::to_string(s.policy)}};
  if (s.policy == sim::SwitchingPolicy::kScripted) {
    json script = json::array();
    for (const sim::ScriptedStep& step : s.script) {
      json e = {{"map", step.map}};
      if (step.time) e["time"] = *step.time;
      script.push_back(e);
    }
    switching["script"] = script;
  }
  json initial;
  if (s.initial.profile) {
    initial["profile"] = *s.initial.profile;
  } else if (s.initial.random) {
    const RandomBox& b = *s.initial.random;
    initial["random"] = {{"agents", b.agents}, {"dimension", b.dimension}, {"lo", b.lo}, {"hi", b.hi}};
  }
  json j = {{"name", s.name},
            {"maps", maps},
            {"switching", switching},
            {"coordinate_map", s.coordinate_map},
            {"initial", initial},
            {"tol", s.tol},
            {"inclusion_tol", s.inclusion_tol},
            {"max_steps", s.max_steps},
            {"seed", s.seed}};
  if (!s.description.empty()) j["description"] = s.description;
  if (s.certify) j["certify"] = CertifyToJson(*s.certify);
  if (s.rendezvous) j["rendezvous"] = {{"max_grouped_steps", s.rendezvous->max_grouped_steps}};
  return j;
}

Scenario scenario_from_json(const json& j) {
  std::string base = "scenario";
  if (j.is_object() && j.contains("name") && j["name"].is_string()) {
    base = "scenario '" + j["name"].get<std::string>() + "'";
  }
  const Reader r(j, base);
  r.reject_unknown({"name", "description", "maps", "switching", "coordinate_map", "initial", "tol",
                    "inclusion_tol", "max_steps", "seed", "certify", "rendezvous"});
  Scenario s;
  s.name = r.get<std::string>("name");
  s.description = r.get<std::string>("description", "");

  if (r.has("maps")) {
    const json& maps = r.at("maps");
    if (!maps.is_array()) throw ParseError(r.path("maps"), "expected an array");
    for (std::size_t i = 0; i < maps.size(); ++i) {
      const std::string where = r.path("maps") + "[" + std::to_string(i) + "]";
      s.maps.push_back(AtPath(where, [&] { return maps::map_from_json(maps[i]); }));
    }
  }

  if (r.has("switching")) {
    const Reader sw(r.at("switching"), r.path("switching"));
    sw.reject_unknown({"policy", "script"});
    s.policy = PolicyFromString(sw.get<std::string>("policy"), sw.path("policy"));
    if (sw.has("script")) {
      const json& script = sw.at("script");
      if (!script.is_array()) throw ParseError(sw.path("script"), "expected an array");
      for (std::size_t i = 0; i < script.size(); ++i) {
        const std::string where = sw.path("script") + "[" + std::to_string(i) + "]";
        if (script[i].is_number_unsigned()) {
          s.script.push_back({script[i].get<std::size_t>(), std::nullopt});
          continue;
        }
        const Reader e(script[i], where);
        e.reject_unknown({"map", "time"});
        sim::ScriptedStep step{e.get<std::size_t>("map"), std::nullopt};
        if (e.has("time")) step.time = e.get<int>("time");
        s.script.push_back(step);
      }
    }
  }

  if (r.has("coordinate_map")) {
    s.coordinate_map =
        AtPath(r.path("coordinate_map"), [&] { return geometry::spec_from_json(r.at("coordinate_map")); });
  }

  const Reader init(r.at("initial"), r.path("initial"));
  init.reject_unknown({"profile", "random"});
  if (init.has("profile")) {
    s.initial.profile =
        AtPath(init.path("profile"), [&] { return geometry::profile_from_json(init.at("profile")); });
  }
  if (init.has("random")) {
    const Reader box(init.at("random"), init.path("random"));
    box.reject_unknown({"agents", "dimension", "lo", "hi"});
    s.initial.random = RandomBox{box.get<std::size_t>("agents"), box.get<std::size_t>("dimension"),
                                 box.get<double>("lo", 0.0), box.get<double>("hi", 1.0)};
  }

  s.tol = r.get<double>("tol", s.tol);
  s.inclusion_tol = r.get<double>("inclusion_tol", s.inclusion_tol);
  s.max_steps = r.get<int>("max_steps", s.max_steps);
  s.seed = r.get<std::uint64_t>("seed", s.seed);
  if (r.has("certify")) s.certify = CertifyFromJson(Reader(r.at("certify"), r.path("certify")));
  if (r.has("rendezvous")) {
    const Reader rv(r.at("rendezvous"), r.path("rendezvous"));
    rv.reject_unknown({"max_grouped_steps"});
    s.rendezvous = RendezvousSettings{rv.get<int>("max_grouped_steps", 100000)};
  }
  AtPath(base, [&] {
    validate(s);
    return 0;
  });
  return s;
}

const Scenario& ScenarioFile::find(const std::string& name) const {
  for (const Scenario& s : scenarios) {
    if (s.name == name) return s;
  }
  throw InvalidArgument("no scenario named '" + name + "'");
}

json to_json(const ScenarioFile& file) {
  json list = json::array();
  for (const Scenario& s : file.scenarios) list.push_back(to_json(s));
  return {{"scenarios", list}};
}

ScenarioFile scenario_file_from_json(const json& j) {
  const Reader r(j, "$");
  r.reject_unknown({"scenarios"});
  const json& list = r.at("scenarios");
  if (!list.is_array()) throw ParseError(r.path("scenarios"), "expected an array");
  ScenarioFile file;
  std::set<std::string> names;
  for (const json& entry : list) {
    file.scenarios.push_back(scenario_from_json(entry));
    if (!names.insert(file.scenarios.back().name).second) {
      throw ParseError(r.path("scenarios"), "duplicate scenario name '" + file.scenarios.back().name + "'");
    }
  }
  return file;
}

ScenarioFile parse_scenario_text(const std::string& text, const std::string& where) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(where + ":" + std::to_string(LineOf(text, e.byte == 0 ? 0 : e.byte - 1)),
                     e.what());
  }
  try {
    return scenario_file_from_json(j);
  } catch (const ParseError& e) {
    throw ParseError(where + ": " + e.where(), std::string(e.what()).substr(e.where().size() + 2));
  }
}

ScenarioFile load_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str(), path.string());
}

Profile initial_profile(const Scenario& s) {
  if (s.initial.profile) return *s.initial.profile;
  if (!s.initial.random) throw InvalidArgument("scenario '" + s.name + "' has no initial profile");
  const RandomBox& b = *s.initial.random;
  SplitMix64 rng(derive_seed(s.seed, SeedStream::kInitial));
  std::vector<geometry::Point> agents;
  for (std::size_t i = 0; i < b.agents; ++i) {
    std::vector<double> c(b.dimension);
    for (double& v : c) v = rng.uniform(b.lo, b.hi);
    agents.emplace_back(std::move(c));
  }
  return Profile(std::move(agents));
}

sim::SwitchingSequence switching_of(const Scenario& s) {
  switch (s.policy) {
    case sim::SwitchingPolicy::kSingle:
      if (s.maps.size() != 1) throw InvalidArgument("single policy takes exactly one map");
      return sim::SwitchingSequence::single(s.maps.front());
    case sim::SwitchingPolicy::kCyclic: return sim::SwitchingSequence::cyclic(s.maps);
    case sim::SwitchingPolicy::kRandom:
      return sim::SwitchingSequence::random(s.maps, derive_seed(s.seed, SeedStream::kSwitching));
    case sim::SwitchingPolicy::kScripted: return sim::SwitchingSequence::scripted(s.maps, s.script);
  }
  throw InvalidArgument("unknown switching policy");
}

std::string slug(const std::string& name) {
  std::string out = name;
  std::replace(out.begin(), out.end(), '/', '_');
  return out;
}

SimulationOutcome simulate_scenario(const Scenario& s, std::ostream* csv) {
  if (s.maps.empty()) throw InvalidArgument("scenario '" + s.name + "' has no maps to simulate");
  const Profile x0 = initial_profile(s);
  sim::RunOptions opt;
  opt.spec = s.coordinate_map;
  opt.tol = s.tol;
  opt.max_steps = s.max_steps;
  opt.inclusion_tol = s.inclusion_tol;
  if (csv) {
    sim::write_trajectory_csv_header(*csv, x0.dimension());
    opt.retain_profiles = 1;
    opt.observer = [csv](int t, const Profile& x, double diameter, double gap) {
      sim::write_trajectory_csv_rows(*csv, t, x, diameter, gap);
    };
  }
  SimulationOutcome out;
  out.trajectory = sim::run(switching_of(s), x0, opt);
  out.verdict = sim::consensus_verdict(out.trajectory, s.tol);
  out.summary = sim::run_summary(out.trajectory, out.verdict, s.seed);
  out.summary["scenario"] = s.name;
  if (s.policy == sim::SwitchingPolicy::kSingle) {
    const auto& steps = out.trajectory.steps;
    out.summary["final_time"] =
        steps.empty() ? s.maps.front().start_index() : steps.back().internal_time + 1;
  }
  return out;
}

certify::CertReport certify_scenario(const Scenario& s) {
  if (s.maps.empty()) throw InvalidArgument("scenario '" + s.name + "' has no maps to certify");
  const CertifySettings c = s.certify.value_or(CertifySettings{});
  const Profile x0 = initial_profile(s);
  certify::SamplingConfig cfg;
  cfg.seed = derive_seed(s.seed, SeedStream::kSampling);
  cfg.count = c.count;
  cfg.agents = x0.size();
  cfg.dimension = x0.dimension();
  cfg.lo = c.lo;
  cfg.hi = c.hi;
  cfg.positive_lo = c.positive_lo;
  cfg.positive_hi = c.positive_hi;
  cfg.time_count = c.time_count;

  if (c.mode == CertifyMode::kEquiproper) {
    const auto family = certify::family_of(s.maps, c.time_count);
    return certify::check_equiproper(family, s.coordinate_map, cfg,
                                     {c.consensus_tol, c.gap_floor, s.inclusion_tol});
  }
  certify::CertReport report;
  report.config = cfg;
  for (std::size_t i = 0; i < s.maps.size(); ++i) {
    certify::CertReport part = certify::check_averaging(s.maps[i], s.coordinate_map, cfg, s.inclusion_tol);
    for (auto& rec : part.records) rec.map_index = i;
    if (part.witness) part.witness->map_index = i;
    report.merge(part);
    if (!report.ok()) break;
  }
  return report;
}

rendezvous::ProtocolResult rendezvous_scenario(const Scenario& s) {
  const Profile x0 = initial_profile(s);
  rendezvous::ProtocolOptions opt;
  opt.tol = s.tol;
  opt.max_grouped_steps = s.rendezvous ? s.rendezvous->max_grouped_steps : s.max_steps;
  opt.seed = derive_seed(s.seed, SeedStream::kRendezvous);
  opt.inclusion_tol = s.inclusion_tol;
  return rendezvous::run_protocol(x0.agents(), opt);
}

json rendezvous_summary(const Scenario& s, const rendezvous::ProtocolResult& r) {
  json j = sim::run_summary(r.trajectory, r.verdict, s.seed);
  j["scenario"] = s.name;
  j["diagnostics"] = r.diagnostics;
  j["consensus_found"] = !r.events.empty() && r.events.back().consensus_found;
  return j;
}

}  // namespace consensus::scenario
