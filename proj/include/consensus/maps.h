#ifndef CONSENSUS_MAPS_H_
#define CONSENSUS_MAPS_H_

// Library of update maps f_t : S^n -> S^n driving x(t+1) = f_t(x(t)).
//
// A MapDescriptor is an immutable value: kind, parameters, declared domain,
// start index of its internal clock, and (optionally) the coordinate map
// under which it claims to be averaging. apply() is a pure function of
// (descriptor, t, x).

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "consensus/geometry.h"

namespace consensus::maps {

using geometry::CoordinateMapSpec;
using geometry::Point;
using geometry::Profile;

enum class DomainConstraint { kAllReals, kPositiveOrthant };

std::string_view to_string(DomainConstraint c);

// Strictly positive lower bound enforced on positive-orthant domains.
inline constexpr double kPositiveFloor = 1e-300;

struct MapDomain {
  std::optional<std::size_t> dimension;  // nullopt: any d
  std::optional<std::size_t> agents;     // nullopt: any n
  DomainConstraint constraint = DomainConstraint::kAllReals;

  // Throws DimensionError / DomainError.
  void check(const Profile& x) const;
  bool contains(const Profile& x) const;

  friend bool operator==(const MapDomain&, const MapDomain&) = default;
};

// Componentwise homeomorphism used to deform hulls. forward plays the role
// of φ (outer domain T -> hull space S), inverse maps back.
class Deformation {
 public:
  static Deformation identity();
  // forward = log on the positive orthant, inverse = exp.
  static Deformation log();

  Deformation(std::string name, std::function<double(double)> forward,
              std::function<double(double)> inverse, DomainConstraint domain,
              DomainConstraint image, double inverse_lipschitz);

  const std::string& name() const { return name_; }
  DomainConstraint domain() const { return domain_; }
  DomainConstraint image() const { return image_; }
  // Documentation only: a Lipschitz bound of the inverse on bounded sets.
  double inverse_lipschitz() const { return inverse_lipschitz_; }

  Point forward(const Point& p) const;
  Point inverse(const Point& p) const;
  Profile forward(const Profile& x) const;
  Profile inverse(const Profile& x) const;

 private:
  std::string name_;
  std::function<double(double)> forward_;
  std::function<double(double)> inverse_;
  DomainConstraint domain_;
  DomainConstraint image_;
  double inverse_lipschitz_;
};

class MapDescriptor {
 public:
  using ApplyFn = std::function<Profile(int t, const Profile& x)>;

  const std::string& kind() const { return state_->kind; }
  const nlohmann::json& params() const { return state_->params; }
  const MapDomain& domain() const { return state_->domain; }
  int start_index() const { return state_->start_index; }
  bool time_dependent() const { return state_->time_dependent; }
  // The coordinate map under which the map is registered as averaging.
  const std::optional<CoordinateMapSpec>& averaging_spec() const { return state_->spec; }
  bool claims_proper() const { return state_->claims_proper; }
  // Non-null for deform() results; hulls are then compared in forward space.
  const Deformation* deformation() const {
    return state_->deformation ? &*state_->deformation : nullptr;
  }

  // f_t(x). Throws DomainError on domain violations, DimensionError on
  // agent-count / dimension mismatch, InvalidArgument for t < start_index().
  Profile apply(int t, const Profile& x) const;

  // Same map with its internal clock starting elsewhere.
  MapDescriptor with_start_index(int start) const;

  // {kind, params, domain, start_index, coordinate_map}
  nlohmann::json to_json() const;

  struct State {
    std::string kind;
    nlohmann::json params;
    MapDomain domain;
    int start_index = 0;
    bool time_dependent = false;
    std::optional<CoordinateMapSpec> spec;
    bool claims_proper = false;
    std::optional<Deformation> deformation;
    ApplyFn fn;
  };

  explicit MapDescriptor(State state);

 private:
  std::shared_ptr<const State> state_;
};

// x ↦ A·x for a row-stochastic n×n matrix, applied per coordinate axis.
MapDescriptor linear_map(const Eigen::MatrixXd& matrix);
// Every row equal to (1/n, …, 1/n).
MapDescriptor uniform_averaging(std::size_t n);

// Throws NotStochasticError naming the first bad row (entries must be >= 0,
// rows must sum to 1 within 1e-12).
void require_row_stochastic(const Eigen::MatrixXd& matrix);

enum class DecayRate {
  kQuarterPower,  // weight 4^-t on both agents, from t = 1
  kOneOverT,      // weight 1/t on agent 1 only, from t = 2
};

MapDescriptor decaying_pair_family(DecayRate rate);

// Weighted average with weights D_t(|x^i - x^j|) = exp(-(|x^i - x^j|/ε)^t),
// d = 1, from t = 1.
MapDescriptor vanishing_confidence(double epsilon);

// σ_i selects g_1 = max, g_2 = arithmetic mean, g_3 = geometric mean,
// g_4 = min (componentwise) for agent i. n = 3, any d.
MapDescriptor mean_selector(std::array<int, 3> sigma);
// True when 1 and 4 are not both in σ (registered as proper for the
// interval hull).
bool mean_selector_is_valid(const std::array<int, 3>& sigma);
// Every σ ∈ {1,2,3,4}^3 that passes mean_selector_is_valid, lexicographic.
std::vector<std::array<int, 3>> valid_mean_selectors();

// Continuous weight a(l): decreasing from a(0) = 1/2 to a(1) = 0, zero beyond.
using StripeWeight = std::function<double(double)>;
// a(l) = (1 - min(l, 1)) / 2
double linear_stripe_weight(double l);
// a(l) = (1 + cos(π min(l, 1))) / 4
double cosine_stripe_weight(double l);
// "linear" or "cosine"
StripeWeight stripe_weight(std::string_view shape);

// f_1 = x_1, f_2 = a(l) x_1 + (1 - a(l)) x_2, f_3 = x_2/5 + 4 x_3/5 where
// l is the distance of x_3 to the line through x_1 and x_2 (to x_1 when the
// two coincide). n = 3, d = 2.
MapDescriptor stripe_map(StripeWeight a = linear_stripe_weight, std::string shape = "linear");

// Every agent moves to the mean of the other two. n = 3, any d.
MapDescriptor midpoint_map();

// x ↦ factor·x. Not averaging; exists to exercise violation paths.
MapDescriptor scale_map(double factor);

// inverse ∘ inner ∘ forward, componentwise in every agent.
MapDescriptor deform(const MapDescriptor& inner, const Deformation& phi);

MapDescriptor map_from_json(const nlohmann::json& j);

}  // namespace consensus::maps

#endif  // CONSENSUS_MAPS_H_
