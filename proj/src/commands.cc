#include <fstream>
#include <iomanip>
#include <sstream>

#include "consensus/error.h"
#include "consensus/scenario.h"

namespace consensus::scenario {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitViolation = 2;

Scenario Resolve(const CommandOptions& options) {
  if (options.name.empty()) throw InvalidArgument("--name is required");
  Scenario s = options.file ? load_scenario_file(*options.file).find(options.name)
                            : builtin_scenarios().find(options.name);
  if (options.seed) s.seed = *options.seed;
  if (options.max_steps) {
    s.max_steps = *options.max_steps;
    if (s.rendezvous) s.rendezvous->max_grouped_steps = *options.max_steps;
  }
  if (options.tol) s.tol = *options.tol;
  validate(s);
  return s;
}

std::ofstream OpenOutput(const fs::path& dir, const std::string& file) {
  fs::create_directories(dir);
  std::ofstream out(dir / file);
  if (!out) throw InvalidArgument("cannot write " + (dir / file).string());
  return out;
}

void WriteJson(const fs::path& dir, const std::string& file, const json& j) {
  std::ofstream out = OpenOutput(dir, file);
  out << j.dump(2) << '\n';
}

// Shared error handling: usage and parse problems exit 1.
template <typename Body>
int Guarded(std::ostream& err, Body body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
  }
  return kExitUsage;
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string Index(const std::optional<int>& k) { return k ? std::to_string(*k) : "none"; }

}  // namespace

int cmd_simulate(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return Guarded(err, [&] {
    const Scenario s = Resolve(options);
    const std::string stem = slug(s.name);
    SimulationOutcome result;
    {
      std::ofstream csv = OpenOutput(options.out, stem + ".trajectory.csv");
      result = simulate_scenario(s, &csv);
    }
    WriteJson(options.out, stem + ".summary.json", result.summary);
    out << s.name << ": " << sim::to_string(result.trajectory.stop) << " after "
        << result.trajectory.step_count() << " steps, final diameter "
        << sim::format_double(result.verdict.final_diameter) << '\n';
    if (result.trajectory.stop == sim::StopReason::kViolation) {
      err << "violation: " << result.trajectory.violation << '\n';
      return kExitViolation;
    }
    return kExitOk;
  });
}

int cmd_certify(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return Guarded(err, [&] {
    const Scenario s = Resolve(options);
    const certify::CertReport report = certify_scenario(s);
    WriteJson(options.out, slug(s.name) + ".report.json", report.to_json());

    out << std::left << std::setw(10) << "profile" << std::setw(6) << "map" << std::setw(8) << "t"
        << std::setw(26) << "gap" << "verdict\n";
    for (const certify::SampleRecord& r : report.records) {
      out << std::setw(10) << r.profile_id << std::setw(6) << r.map_index << std::setw(8) << r.t
          << std::setw(26) << sim::format_double(r.gap) << (r.included ? "ok" : "VIOLATION") << '\n';
    }
    if (report.family_min_gap) {
      out << "minimum gap: " << sim::format_double(*report.family_min_gap) << '\n';
    }
    if (report.equiproper) {
      out << (*report.equiproper ? "equiproper" : "not equiproper") << " at floor "
          << sim::format_double(report.gap_floor) << '\n';
    }
    if (report.witness) {
      err << "violation: map " << report.witness->map_index << " ('" << report.witness->map
          << "') at t=" << report.witness->t << ": " << report.witness->message << '\n';
      return kExitViolation;
    }
    out << "averaging: no violations in " << report.records.size() << " records\n";
    return kExitOk;
  });
}

int cmd_rendezvous(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return Guarded(err, [&] {
    const Scenario s = Resolve(options);
    const rendezvous::ProtocolResult r = rendezvous_scenario(s);
    const std::string stem = slug(s.name);
    {
      std::ofstream events = OpenOutput(options.out, stem + ".events.jsonl");
      rendezvous::write_event_log(events, r.events);
    }
    {
      std::ofstream csv = OpenOutput(options.out, stem + ".trajectory.csv");
      sim::write_trajectory_csv(csv, r.trajectory);
    }
    WriteJson(options.out, stem + ".summary.json", rendezvous_summary(s, r));

    if (!r.events.empty() && r.events.back().consensus_found) out << "consensus found!\n";
    out << s.name << ": " << sim::to_string(r.trajectory.stop) << " after "
        << r.trajectory.step_count() << " grouped steps, final diameter "
        << sim::format_double(r.verdict.final_diameter) << '\n';
    for (const std::string& d : r.diagnostics) err << "diagnostic: " << d << '\n';
    const bool clean = r.diagnostics.empty() && r.verdict.reached;
    return clean ? kExitOk : kExitViolation;
  });
}

int cmd_matrix(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return Guarded(err, [&] {
    if (!options.file) throw InvalidArgument("--file is required for matrix");
    const Eigen::MatrixXd a = parse_matrix_text(ReadFile(*options.file));
    try {
      const certify::MatrixAnalysis m = certify::analyze_matrix(a, options.max_steps);
      WriteJson(options.out, options.file->stem().string() + ".matrix.json", m.to_json());
      out << "size:             " << m.size << '\n'
          << "tau:              " << sim::format_double(m.tau) << '\n'
          << "scrambling:       " << (m.scrambling ? "yes" : "no") << '\n'
          << "regularity index: " << Index(m.regularity_index) << '\n'
          << "scrambling index: " << Index(m.scrambling_index) << '\n'
          << "cap:              " << m.cap << '\n';
    } catch (const NotStochasticError& e) {
      err << "error: row " << e.row() << ": " << e.what() << '\n';
      return kExitUsage;
    }
    return kExitOk;
  });
}

Eigen::MatrixXd parse_matrix_text(const std::string& text) {
  std::vector<std::vector<double>> rows;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) throw ParseError("matrix", "empty input");
  if (text[first] == '[' || text[first] == '{') {
    json j;
    try {
      j = json::parse(text);
      if (j.is_object()) j = j.at("matrix");
      rows = j.get<std::vector<std::vector<double>>>();
    } catch (const json::exception& e) {
      throw ParseError("matrix", e.what());
    }
  } else {
    std::istringstream in(text);
    std::string line;
    for (int number = 1; std::getline(in, line); ++number) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      for (char& c : line) {
        if (c == ',' || c == ';') c = ' ';
      }
      std::istringstream fields(line);
      std::vector<double> row;
      std::string token;
      while (fields >> token) {
        std::size_t used = 0;
        double v = 0.0;
        try {
          v = std::stod(token, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used != token.size()) {
          throw ParseError("line " + std::to_string(number), "not a number: '" + token + "'");
        }
        row.push_back(v);
      }
      if (!row.empty()) rows.push_back(std::move(row));
    }
  }
  if (rows.empty()) throw ParseError("matrix", "no rows");
  const std::size_t n = rows.size();
  Eigen::MatrixXd a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) {
      throw ParseError("row " + std::to_string(i), "expected " + std::to_string(n) + " entries");
    }
    for (std::size_t j = 0; j < n; ++j) {
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return a;
}

}  // namespace consensus::scenario
