#include "consensus/maps.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

#include "consensus/error.h"

namespace consensus::maps {
namespace {

using nlohmann::json;
using State = MapDescriptor::State;

constexpr double kStochasticTolerance = 1e-12;
constexpr double kCoincidentTolerance = 1e-12;

Profile FromCoords(std::vector<std::vector<double>> coords) {
  std::vector<Point> agents;
  agents.reserve(coords.size());
  for (auto& c : coords) agents.emplace_back(std::move(c));
  return Profile(std::move(agents));
}

std::vector<std::vector<double>> ToCoords(const Profile& x) {
  std::vector<std::vector<double>> out;
  out.reserve(x.size());
  for (const Point& p : x) out.emplace_back(p.coords().begin(), p.coords().end());
  return out;
}

json MatrixToJson(const Eigen::MatrixXd& a) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd MatrixFromJson(const json& j) {
  if (!j.is_array() || j.empty()) throw InvalidArgument("matrix must be a non-empty array of rows");
  const std::size_t n = j.size();
  Eigen::MatrixXd a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!j[i].is_array() || j[i].size() != n) {
      throw InvalidArgument("matrix row " + std::to_string(i) + " must have " +
                            std::to_string(n) + " entries");
    }
    for (std::size_t k = 0; k < n; ++k) a(i, k) = j[i][k].get<double>();
  }
  return a;
}

double GeometricMean(double a, double b, double c) {
  return std::exp((std::log(a) + std::log(b) + std::log(c)) / 3.0);
}

const char* RateName(DecayRate rate) {
  return rate == DecayRate::kQuarterPower ? "quarter_power" : "one_over_t";
}

}  // namespace

std::string_view to_string(DomainConstraint c) {
  return c == DomainConstraint::kAllReals ? "all-reals" : "positive-orthant";
}

void MapDomain::check(const Profile& x) const {
  if (agents && x.size() != *agents) {
    throw DimensionError("map expects n=" + std::to_string(*agents) + " agents, got " +
                         std::to_string(x.size()));
  }
  if (dimension && x.dimension() != *dimension) {
    throw DimensionError("map expects d=" + std::to_string(*dimension) + ", got " +
                         std::to_string(x.dimension()));
  }
  if (constraint == DomainConstraint::kPositiveOrthant) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (double c : x[i].coords()) {
        if (!(c > kPositiveFloor)) {
          throw DomainError("positive-orthant map: agent " + std::to_string(i) +
                            " has non-positive coordinate " + std::to_string(c));
        }
      }
    }
  }
}

bool MapDomain::contains(const Profile& x) const {
  try {
    check(x);
    return true;
  } catch (const Error&) {
    return false;
  }
}

Deformation::Deformation(std::string name, std::function<double(double)> forward,
                         std::function<double(double)> inverse, DomainConstraint domain,
                         DomainConstraint image, double inverse_lipschitz)
    : name_(std::move(name)),
      forward_(std::move(forward)),
      inverse_(std::move(inverse)),
      domain_(domain),
      image_(image),
      inverse_lipschitz_(inverse_lipschitz) {}

Deformation Deformation::identity() {
  return Deformation(
      "identity", [](double v) { return v; }, [](double v) { return v; },
      DomainConstraint::kAllReals, DomainConstraint::kAllReals, 1.0);
}

Deformation Deformation::log() {
  // exp is Lipschitz only on bounded sets; the bound is reported as +inf.
  return Deformation(
      "log", [](double v) { return std::log(v); }, [](double v) { return std::exp(v); },
      DomainConstraint::kPositiveOrthant, DomainConstraint::kAllReals,
      std::numeric_limits<double>::infinity());
}

Point Deformation::forward(const Point& p) const {
  std::vector<double> c(p.coords().begin(), p.coords().end());
  for (double& v : c) {
    if (domain_ == DomainConstraint::kPositiveOrthant && !(v > kPositiveFloor)) {
      throw DomainError("deformation '" + name_ + "': coordinate outside the positive orthant");
    }
    v = forward_(v);
  }
  return Point(std::move(c));
}

Point Deformation::inverse(const Point& p) const {
  std::vector<double> c(p.coords().begin(), p.coords().end());
  for (double& v : c) v = inverse_(v);
  return Point(std::move(c));
}

Profile Deformation::forward(const Profile& x) const {
  std::vector<Point> out;
  out.reserve(x.size());
  for (const Point& p : x) out.push_back(forward(p));
  return Profile(std::move(out));
}

Profile Deformation::inverse(const Profile& x) const {
  std::vector<Point> out;
  out.reserve(x.size());
  for (const Point& p : x) out.push_back(inverse(p));
  return Profile(std::move(out));
}

MapDescriptor::MapDescriptor(State state)
    : state_(std::make_shared<const State>(std::move(state))) {}

Profile MapDescriptor::apply(int t, const Profile& x) const {
  if (t < state_->start_index) {
    throw InvalidArgument("map '" + state_->kind + "' starts at t=" +
                          std::to_string(state_->start_index) + ", got t=" + std::to_string(t));
  }
  state_->domain.check(x);
  return state_->fn(t, x);
}

MapDescriptor MapDescriptor::with_start_index(int start) const {
  State s = *state_;
  s.start_index = start;
  return MapDescriptor(std::move(s));
}

json MapDescriptor::to_json() const {
  json domain = {{"dimension", nullptr}, {"agents", nullptr},
                 {"constraint", maps::to_string(state_->domain.constraint)}};
  if (state_->domain.dimension) domain["dimension"] = *state_->domain.dimension;
  if (state_->domain.agents) domain["agents"] = *state_->domain.agents;
  json j = {{"kind", state_->kind},
            {"params", state_->params},
            {"domain", std::move(domain)},
            {"start_index", state_->start_index},
            {"coordinate_map", nullptr}};
  if (state_->spec) j["coordinate_map"] = *state_->spec;
  return j;
}

void require_row_stochastic(const Eigen::MatrixXd& a) {
  if (a.rows() == 0 || a.rows() != a.cols()) {
    throw NotStochasticError(0, "matrix must be square and non-empty");
  }
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (!std::isfinite(a(i, j)) || a(i, j) < 0.0) {
        throw NotStochasticError(static_cast<std::size_t>(i),
                                 "row " + std::to_string(i) + " has a negative entry");
      }
      sum += a(i, j);
    }
    if (std::abs(sum - 1.0) > kStochasticTolerance) {
      throw NotStochasticError(static_cast<std::size_t>(i),
                               "row " + std::to_string(i) + " sums to " + std::to_string(sum));
    }
  }
}

MapDescriptor linear_map(const Eigen::MatrixXd& matrix) {
  require_row_stochastic(matrix);
  const auto n = static_cast<std::size_t>(matrix.rows());
  State s;
  s.kind = "linear";
  s.params = {{"matrix", MatrixToJson(matrix)}};
  s.domain = {std::nullopt, n, DomainConstraint::kAllReals};
  s.spec = CoordinateMapSpec::identity();
  s.fn = [matrix](int, const Profile& x) {
    const std::size_t d = x.dimension();
    Eigen::MatrixXd coords(x.size(), d);
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (std::size_t k = 0; k < d; ++k) coords(i, k) = x[i][k];
    }
    const Eigen::MatrixXd out = matrix * coords;
    std::vector<std::vector<double>> rows(x.size(), std::vector<double>(d));
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (std::size_t k = 0; k < d; ++k) rows[i][k] = out(i, k);
    }
    return FromCoords(std::move(rows));
  };
  // Scrambling is the linear notion of proper.
  {
    bool scrambling = true;
    for (Eigen::Index i = 0; i < matrix.rows() && scrambling; ++i) {
      for (Eigen::Index j = i + 1; j < matrix.rows() && scrambling; ++j) {
        bool shared = false;
        for (Eigen::Index k = 0; k < matrix.cols(); ++k) {
          if (matrix(i, k) > kStochasticTolerance && matrix(j, k) > kStochasticTolerance) {
            shared = true;
            break;
          }
        }
        scrambling = shared;
      }
    }
    s.claims_proper = scrambling;
  }
  return MapDescriptor(std::move(s));
}

MapDescriptor uniform_averaging(std::size_t n) {
  if (n == 0) throw InvalidArgument("uniform_averaging: n must be positive");
  return linear_map(Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n)));
}

MapDescriptor decaying_pair_family(DecayRate rate) {
  State s;
  s.kind = "decaying_pair";
  s.params = {{"rate", RateName(rate)}};
  s.domain = {1, 2, DomainConstraint::kAllReals};
  s.time_dependent = true;
  s.spec = CoordinateMapSpec::identity();
  s.claims_proper = true;
  if (rate == DecayRate::kQuarterPower) {
    s.start_index = 1;
    s.fn = [](int t, const Profile& x) {
      const double w = std::ldexp(1.0, -2 * t);
      const double a = x[0][0];
      const double b = x[1][0];
      return Profile{Point{(1.0 - w) * a + w * b}, Point{w * a + (1.0 - w) * b}};
    };
  } else {
    s.start_index = 2;
    s.fn = [](int t, const Profile& x) {
      // ((t-1) x^1 + x^2) / t equals (1 - 1/t) x^1 + (1/t) x^2; this form
      // keeps the iterates at the correctly rounded closed form.
      const double td = static_cast<double>(t);
      const double a = x[0][0];
      const double b = x[1][0];
      return Profile{Point{((td - 1.0) * a + b) / td}, Point{b}};
    };
  }
  return MapDescriptor(std::move(s));
}

MapDescriptor vanishing_confidence(double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw InvalidArgument("vanishing_confidence: epsilon must be positive");
  }
  State s;
  s.kind = "vanishing_confidence";
  s.params = {{"epsilon", epsilon}};
  s.domain = {1, std::nullopt, DomainConstraint::kAllReals};
  s.start_index = 1;
  s.time_dependent = true;
  s.spec = CoordinateMapSpec::identity();
  s.claims_proper = true;
  s.fn = [epsilon](int t, const Profile& x) {
    const std::size_t n = x.size();
    std::vector<std::vector<double>> out(n, std::vector<double>(1));
    for (std::size_t i = 0; i < n; ++i) {
      double num = 0.0;
      double den = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double w = std::exp(-std::pow(std::abs(x[i][0] - x[j][0]) / epsilon, t));
        num += w * x[j][0];
        den += w;
      }
      out[i][0] = num / den;  // den >= 1 from the self weight
    }
    return FromCoords(std::move(out));
  };
  return MapDescriptor(std::move(s));
}

bool mean_selector_is_valid(const std::array<int, 3>& sigma) {
  const bool has_max = std::find(sigma.begin(), sigma.end(), 1) != sigma.end();
  const bool has_min = std::find(sigma.begin(), sigma.end(), 4) != sigma.end();
  return !(has_max && has_min);
}

std::vector<std::array<int, 3>> valid_mean_selectors() {
  std::vector<std::array<int, 3>> out;
  for (int a = 1; a <= 4; ++a) {
    for (int b = 1; b <= 4; ++b) {
      for (int c = 1; c <= 4; ++c) {
        if (mean_selector_is_valid({a, b, c})) out.push_back({a, b, c});
      }
    }
  }
  return out;
}

MapDescriptor mean_selector(std::array<int, 3> sigma) {
  for (int v : sigma) {
    if (v < 1 || v > 4) throw InvalidArgument("mean_selector: sigma entries must be in {1,2,3,4}");
  }
  const bool geometric = std::find(sigma.begin(), sigma.end(), 3) != sigma.end();
  State s;
  s.kind = "mean_selector";
  s.params = {{"sigma", sigma}};
  s.domain = {std::nullopt, 3,
              geometric ? DomainConstraint::kPositiveOrthant : DomainConstraint::kAllReals};
  // Every selector is averaging for the interval hull; max and min together
  // keep the extremes fixed, so only the other selectors are proper.
  s.spec = CoordinateMapSpec::interval();
  s.claims_proper = mean_selector_is_valid(sigma);
  s.fn = [sigma](int, const Profile& x) {
    const std::size_t d = x.dimension();
    std::vector<std::vector<double>> out(3, std::vector<double>(d));
    for (std::size_t k = 0; k < d; ++k) {
      const double a = x[0][k], b = x[1][k], c = x[2][k];
      for (std::size_t i = 0; i < 3; ++i) {
        switch (sigma[i]) {
          case 1: out[i][k] = std::max({a, b, c}); break;
          case 2: out[i][k] = (a + b + c) / 3.0; break;
          case 3: out[i][k] = GeometricMean(a, b, c); break;
          default: out[i][k] = std::min({a, b, c}); break;
        }
      }
    }
    return FromCoords(std::move(out));
  };
  return MapDescriptor(std::move(s));
}

double linear_stripe_weight(double l) { return (1.0 - std::min(std::max(l, 0.0), 1.0)) / 2.0; }

double cosine_stripe_weight(double l) {
  return (1.0 + std::cos(std::numbers::pi * std::min(std::max(l, 0.0), 1.0))) / 4.0;
}

StripeWeight stripe_weight(std::string_view shape) {
  if (shape == "linear") return linear_stripe_weight;
  if (shape == "cosine") return cosine_stripe_weight;
  throw InvalidArgument("unknown stripe weight shape '" + std::string(shape) + "'");
}

MapDescriptor stripe_map(StripeWeight a, std::string shape) {
  if (!a) throw InvalidArgument("stripe_map: weight function required");
  State s;
  s.kind = "stripe";
  s.params = {{"shape", std::move(shape)}};
  s.domain = {2, 3, DomainConstraint::kAllReals};
  s.spec = CoordinateMapSpec::identity();
  s.claims_proper = true;
  s.fn = [a = std::move(a)](int, const Profile& x) {
    const Point& x1 = x[0];
    const Point& x2 = x[1];
    const Point& x3 = x[2];
    const double ex = x2[0] - x1[0];
    const double ey = x2[1] - x1[1];
    const double len = std::hypot(ex, ey);
    double l;
    if (len <= kCoincidentTolerance) {
      l = geometry::distance(x3, x1);
    } else {
      l = std::abs(ex * (x3[1] - x1[1]) - ey * (x3[0] - x1[0])) / len;
    }
    const double w = a(l);
    return Profile{x1, w * x1 + (1.0 - w) * x2, 0.2 * x2 + 0.8 * x3};
  };
  return MapDescriptor(std::move(s));
}

MapDescriptor midpoint_map() {
  State s;
  s.kind = "midpoint";
  s.params = json::object();
  s.domain = {std::nullopt, 3, DomainConstraint::kAllReals};
  s.spec = CoordinateMapSpec::identity();
  s.claims_proper = true;
  s.fn = [](int, const Profile& x) {
    return Profile{0.5 * (x[1] + x[2]), 0.5 * (x[0] + x[2]), 0.5 * (x[0] + x[1])};
  };
  return MapDescriptor(std::move(s));
}

MapDescriptor scale_map(double factor) {
  if (!std::isfinite(factor)) throw InvalidArgument("scale_map: factor must be finite");
  State s;
  s.kind = "scale";
  s.params = {{"factor", factor}};
  s.fn = [factor](int, const Profile& x) {
    auto c = ToCoords(x);
    for (auto& row : c) {
      for (double& v : row) v *= factor;
    }
    return FromCoords(std::move(c));
  };
  return MapDescriptor(std::move(s));
}

MapDescriptor deform(const MapDescriptor& inner, const Deformation& phi) {
  const DomainConstraint needed = inner.domain().constraint;
  if (needed != DomainConstraint::kAllReals && needed != phi.image()) {
    throw InvalidArgument("deform: inner map domain '" + std::string(to_string(needed)) +
                          "' is not the image of deformation '" + phi.name() + "'");
  }
  State s;
  s.kind = "deformed";
  s.params = {{"phi", phi.name()}, {"inner", inner.to_json()}};
  s.domain = {inner.domain().dimension, inner.domain().agents, phi.domain()};
  s.start_index = inner.start_index();
  s.time_dependent = inner.time_dependent();
  s.spec = inner.averaging_spec();
  s.claims_proper = inner.claims_proper();
  s.deformation = phi;
  s.fn = [inner, phi](int t, const Profile& x) {
    return phi.inverse(inner.apply(t, phi.forward(x)));
  };
  return MapDescriptor(std::move(s));
}

namespace {

Deformation DeformationByName(const std::string& name) {
  if (name == "identity") return Deformation::identity();
  if (name == "log") return Deformation::log();
  throw InvalidArgument("unknown deformation '" + name + "'");
}

MapDescriptor MapFromKind(const std::string& kind, const json& p) {
  if (kind == "linear") return linear_map(MatrixFromJson(p.at("matrix")));
  if (kind == "decaying_pair") {
    const std::string rate = p.at("rate").get<std::string>();
    if (rate == "quarter_power") return decaying_pair_family(DecayRate::kQuarterPower);
    if (rate == "one_over_t") return decaying_pair_family(DecayRate::kOneOverT);
    throw InvalidArgument("unknown decaying_pair rate '" + rate + "'");
  }
  if (kind == "vanishing_confidence") return vanishing_confidence(p.at("epsilon").get<double>());
  if (kind == "mean_selector") {
    const auto sigma = p.at("sigma").get<std::vector<int>>();
    if (sigma.size() != 3) throw InvalidArgument("mean_selector sigma must have 3 entries");
    return mean_selector({sigma[0], sigma[1], sigma[2]});
  }
  if (kind == "stripe") {
    const std::string shape = p.contains("shape") ? p.at("shape").get<std::string>() : "linear";
    return stripe_map(stripe_weight(shape), shape);
  }
  if (kind == "midpoint") return midpoint_map();
  if (kind == "scale") return scale_map(p.at("factor").get<double>());
  if (kind == "deformed") {
    return deform(map_from_json(p.at("inner")), DeformationByName(p.at("phi").get<std::string>()));
  }
  throw InvalidArgument("unknown map kind '" + kind + "'");
}

}  // namespace

MapDescriptor map_from_json(const json& j) {
  if (!j.is_object()) throw InvalidArgument("map descriptor must be an object");
  const std::string kind = j.at("kind").get<std::string>();
  const json params = j.contains("params") ? j.at("params") : json::object();
  MapDescriptor map = MapFromKind(kind, params);

  if (j.contains("start_index") && !j.at("start_index").is_null()) {
    map = map.with_start_index(j.at("start_index").get<int>());
  }
  // domain and coordinate_map are derived from kind+params; when given they
  // must agree.
  const json canonical = map.to_json();
  for (const char* key : {"domain", "coordinate_map"}) {
    if (j.contains(key) && j.at(key) != canonical.at(key)) {
      throw InvalidArgument(std::string("map '") + kind + "': field '" + key +
                            "' does not match the map's declared " + key + " " +
                            canonical.at(key).dump());
    }
  }
  return map;
}

}  // namespace consensus::maps
