#include "consensus/scenario.h"

namespace consensus::scenario {
namespace {

using geometry::Point;
using sim::SwitchingPolicy;

Profile Line(std::initializer_list<double> values) {
  std::vector<Point> agents;
  for (double v : values) agents.push_back(Point{v});
  return Profile(std::move(agents));
}

Profile Plane(std::initializer_list<std::pair<double, double>> values) {
  std::vector<Point> agents;
  for (const auto& [a, b] : values) agents.push_back(Point{a, b});
  return Profile(std::move(agents));
}

Scenario Make(std::string name, std::string description, std::vector<MapDescriptor> maps,
              InitialSpec initial) {
  Scenario s;
  s.name = std::move(name);
  s.description = std::move(description);
  s.maps = std::move(maps);
  s.initial = std::move(initial);
  return s;
}

InitialSpec Explicit(Profile x) { return {std::move(x), std::nullopt}; }
InitialSpec Box(std::size_t n, std::size_t d, double lo, double hi) {
  return {std::nullopt, RandomBox{n, d, lo, hi}};
}

Eigen::MatrixXd CyclicPull() {
  Eigen::MatrixXd a(3, 3);
  a << 0, 1, 0, 0, 0, 1, 0.5, 0.5, 0;
  return a;
}

Eigen::MatrixXd Lazy() {
  Eigen::MatrixXd a(3, 3);
  a << 0.5, 0.25, 0.25, 0.25, 0.5, 0.25, 0.25, 0.25, 0.5;
  return a;
}

std::vector<Scenario> Build() {
  std::vector<Scenario> out;

  {
    Scenario s = Make("paper/quarter-power",
                      "x1 <- (1-4^-t)x1 + 4^-t x2 and symmetrically; never reaches consensus",
                      {maps::decaying_pair_family(maps::DecayRate::kQuarterPower)},
                      Explicit(Line({0.0, 1.0})));
    s.max_steps = 199;  // profiles x(1) .. x(200)
    CertifySettings c;
    c.mode = CertifyMode::kEquiproper;
    c.count = 200;
    c.time_count = 30;
    s.certify = c;
    out.push_back(s);
  }
  {
    Scenario s = Make("paper/one-over-t", "x1 <- (1-1/t)x1 + x2/t from x(2); gap 1/(t-1)",
                      {maps::decaying_pair_family(maps::DecayRate::kOneOverT)},
                      Explicit(Line({0.0, 1.0})));
    s.max_steps = 9999;  // profiles x(2) .. x(10001)
    CertifySettings c;
    c.mode = CertifyMode::kEquiproper;
    c.count = 200;
    c.time_count = 30;
    s.certify = c;
    out.push_back(s);
  }
  {
    Scenario s = Make("paper/vanishing-confidence",
                      "weights exp(-(|dx|/eps)^t) with eps = 1; the pair stays apart",
                      {maps::vanishing_confidence(1.0)}, Explicit(Line({0.0, 8.0})));
    s.max_steps = 100;
    s.certify = CertifySettings{};
    s.certify->time_count = 10;
    out.push_back(s);
  }
  {
    Scenario s = Make("paper/krause-midpoint", "each agent moves to the midpoint of the other two",
                      {maps::midpoint_map()}, Explicit(Plane({{0, 0}, {1, 0}, {0, 1}})));
    s.certify = CertifySettings{};
    s.certify->count = 500;
    out.push_back(s);
  }
  {
    Scenario s = Make("paper/stripe", "agent 2 follows agent 1 only near their line; agent 3 follows 2",
                      {maps::stripe_map()}, Explicit(Plane({{0, 0}, {1, 0}, {0.5, 2}})));
    s.certify = CertifySettings{};
    s.certify->count = 500;
    out.push_back(s);
  }
  {
    std::vector<MapDescriptor> family;
    for (const auto& sigma : maps::valid_mean_selectors()) family.push_back(maps::mean_selector(sigma));
    Scenario s = Make("paper/mean-selectors-valid",
                      "random switching over the 46 mean selectors without both max and min",
                      std::move(family), Explicit(Line({1.0, 4.0, 16.0})));
    s.policy = SwitchingPolicy::kRandom;
    s.coordinate_map = CoordinateMapSpec::interval();
    s.tol = 1e-8;
    s.seed = 46;
    CertifySettings c;
    c.mode = CertifyMode::kEquiproper;
    c.count = 200;
    s.certify = c;
    out.push_back(s);
  }
  {
    Scenario s = Make("paper/mean-selectors-cyclic", "alternate (mean, geo, mean) and (geo, mean, geo)",
                      {maps::mean_selector({2, 3, 2}), maps::mean_selector({3, 2, 3})},
                      Explicit(Line({1.0, 4.0, 16.0})));
    s.policy = SwitchingPolicy::kCyclic;
    s.coordinate_map = CoordinateMapSpec::interval();
    s.tol = 1e-8;
    s.certify = CertifySettings{};
    out.push_back(s);
  }
  {
    Scenario s = Make("paper/mean-selector-max-min",
                      "(max, mean, min) keeps the extreme agents apart forever",
                      {maps::mean_selector({1, 2, 4})}, Explicit(Line({1.0, 4.0, 16.0})));
    s.coordinate_map = CoordinateMapSpec::interval();
    s.max_steps = 1000;
    s.certify = CertifySettings{};
    out.push_back(s);
  }
  {
    Scenario s = Make("paper/linear-regular", "x <- Ax for a regular, non-scrambling A",
                      {maps::linear_map(CyclicPull())}, Box(3, 2, -1.0, 1.0));
    s.seed = 7;
    s.certify = CertifySettings{};
    out.push_back(s);
  }
  {
    Scenario s = Make("paper/log-deformed", "uniform averaging conjugated by log: geometric mean",
                      {maps::deform(maps::uniform_averaging(3), maps::Deformation::log())},
                      Explicit(Line({1.0, 4.0, 16.0})));
    s.certify = CertifySettings{};
    s.certify->count = 200;
    out.push_back(s);
  }
  {
    Scenario s = Make("paper/random-switching",
                      "random switching over midpoint, stripe, two mean selectors and a linear map",
                      {maps::midpoint_map(), maps::stripe_map(), maps::mean_selector({2, 3, 2}),
                       maps::mean_selector({3, 2, 3}), maps::linear_map(Lazy())},
                      Box(3, 2, 0.1, 2.0));
    s.policy = SwitchingPolicy::kRandom;
    s.coordinate_map = CoordinateMapSpec::interval();
    s.tol = 1e-7;
    s.max_steps = 10000;
    s.seed = 1;
    s.certify = CertifySettings{};
    out.push_back(s);
  }
  {
    Scenario s = Make("paper/watergun-n2", "two agents; the mover walks to the other", {},
                      Explicit(Plane({{0, 0}, {4, 0}})));
    s.tol = 1e-6;
    s.seed = 2;
    s.rendezvous = RendezvousSettings{};
    out.push_back(s);
  }
  {
    Scenario s = Make("paper/watergun-square", "four agents on the corners of the unit square", {},
                      Explicit(Plane({{0, 0}, {1, 0}, {1, 1}, {0, 1}})));
    s.tol = 1e-6;
    s.seed = 4;
    s.rendezvous = RendezvousSettings{};
    out.push_back(s);
  }
  {
    Scenario s = Make("paper/watergun-n8", "eight agents drawn uniformly in the unit square", {},
                      Box(8, 2, 0.0, 1.0));
    s.tol = 1e-6;
    s.seed = 8;
    s.rendezvous = RendezvousSettings{};
    out.push_back(s);
  }
  {
    Scenario s = Make("paper/watergun-consensus", "all agents already share a position", {},
                      Explicit(Plane({{1, 1}, {1, 1}, {1, 1}})));
    s.tol = 1e-6;
    s.rendezvous = RendezvousSettings{};
    out.push_back(s);
  }
  {
    Scenario s = Make("fixture/scale-by-2", "x <- 2x; not averaging", {maps::scale_map(2.0)},
                      Explicit(Line({1.0, 2.0})));
    s.max_steps = 10;
    s.certify = CertifySettings{};
    out.push_back(s);
  }

  for (const Scenario& s : out) validate(s);
  return out;
}

}  // namespace

const ScenarioFile& builtin_scenarios() {
  static const ScenarioFile file{Build()};
  return file;
}

}  // namespace consensus::scenario
