#ifndef CONSENSUS_GEOMETRY_H_
#define CONSENSUS_GEOMETRY_H_

// Points, profiles and y-convex hulls.
//
// A hull is the convex hull of the generalized barycentric coordinates y(x)
// of a profile x. Three coordinate maps are supported:
//   identity   y(x) = x, the ordinary convex hull (d = 1 or 2),
//   interval   the componentwise box [min_i x^i, max_i x^i] (any d),
//   direction  the smallest polygon whose edges are normal to a fixed set of
//              unit directions that positively span the plane (d = 2; for
//              d = 1 it reduces to the interval).
// Hulls store their extreme points only. Distances and inclusion tests are
// exact up to floating point; nothing is approximated on a grid.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace consensus::geometry {

inline constexpr double kDefaultTolerance = 1e-9;
// Relative tolerance of the orientation predicate used by the hull chains.
inline constexpr double kCollinearityTolerance = 1e-12;
// Interval hulls enumerate 2^d corners.
inline constexpr std::size_t kMaxIntervalDimension = 20;

class Point {
 public:
  Point() = default;
  explicit Point(std::vector<double> coords);
  Point(std::initializer_list<double> coords);

  std::size_t dimension() const { return coords_.size(); }
  double operator[](std::size_t k) const { return coords_[k]; }
  std::span<const double> coords() const { return coords_; }

  Point& operator+=(const Point& other);
  Point& operator-=(const Point& other);
  Point& operator*=(double s);

  friend Point operator+(Point a, const Point& b) { return a += b; }
  friend Point operator-(Point a, const Point& b) { return a -= b; }
  friend Point operator*(Point a, double s) { return a *= s; }
  friend Point operator*(double s, Point a) { return a *= s; }
  friend bool operator==(const Point&, const Point&) = default;

 private:
  std::vector<double> coords_;
};

double dot(const Point& a, const Point& b);
double norm(const Point& p);
double distance(const Point& a, const Point& b);
// max_k |a_k - b_k|
double sup_distance(const Point& a, const Point& b);

// The state x ∈ S^n: n agents, each a point of the same dimension d.
class Profile {
 public:
  Profile() = default;
  explicit Profile(std::vector<Point> agents);
  Profile(std::initializer_list<Point> agents);

  std::size_t size() const { return agents_.size(); }
  std::size_t dimension() const { return agents_.empty() ? 0 : agents_[0].dimension(); }
  const Point& operator[](std::size_t i) const { return agents_[i]; }
  const std::vector<Point>& agents() const { return agents_; }
  auto begin() const { return agents_.begin(); }
  auto end() const { return agents_.end(); }

  friend bool operator==(const Profile&, const Profile&) = default;

 private:
  std::vector<Point> agents_;
};

Point centroid(const Profile& x);
// max over agents and coordinates of |x^i_k - z^i_k|.
double sup_distance(const Profile& x, const Profile& z);

enum class HullKind { kConvex, kInterval, kDirection };

std::string_view to_string(HullKind kind);

// Which generalized barycentric coordinate map y generates the hull.
class CoordinateMapSpec {
 public:
  static CoordinateMapSpec identity() { return CoordinateMapSpec(HullKind::kConvex, {}); }
  static CoordinateMapSpec interval() { return CoordinateMapSpec(HullKind::kInterval, {}); }
  // Edge-normal angles in radians; must positively span the plane.
  static CoordinateMapSpec direction(std::vector<double> angles);

  HullKind kind() const { return kind_; }
  // Sorted into [0, 2π); empty unless kind() == kDirection.
  const std::vector<double>& directions() const { return angles_; }
  // Number m of coordinate vectors y^1..y^m for n agents in dimension d.
  std::size_t output_count(std::size_t n, std::size_t d) const;

  friend bool operator==(const CoordinateMapSpec&, const CoordinateMapSpec&) = default;

 private:
  CoordinateMapSpec(HullKind kind, std::vector<double> angles)
      : kind_(kind), angles_(std::move(angles)) {}

  HullKind kind_;
  std::vector<double> angles_;
};

// Compact convex set in vertex representation. For d = 2 the vertices are
// in convex position and counterclockwise; degenerate hulls keep 1 or 2
// vertices. Interval hulls list the distinct corners of their box.
class Hull {
 public:
  HullKind kind() const { return kind_; }
  std::size_t dimension() const { return dimension_; }
  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<double>& directions() const { return directions_; }

  // Bounding box; equal to the hull itself for interval hulls and for d = 1.
  const Point& lower() const { return lower_; }
  const Point& upper() const { return upper_; }

 private:
  friend Hull build_hull(const Profile& profile, const CoordinateMapSpec& spec);

  Hull(HullKind kind, std::vector<Point> vertices, std::vector<double> directions);

  // True when lower()/upper() describe the set exactly.
  bool is_box() const { return kind_ == HullKind::kInterval || dimension_ == 1; }

  friend double point_to_hull_distance(const Point& p, const Hull& hull);
  friend double hull_diameter(const Hull& hull);

  HullKind kind_ = HullKind::kConvex;
  std::size_t dimension_ = 0;
  std::vector<Point> vertices_;
  std::vector<double> directions_;
  Point lower_;
  Point upper_;
};

// Throws DimensionError for convex/direction specs with d > 2, for interval
// specs with d > kMaxIntervalDimension, and for an empty profile.
Hull build_hull(const Profile& profile, const CoordinateMapSpec& spec);

double point_to_hull_distance(const Point& p, const Hull& hull);

bool hull_contains(const Hull& hull, const Point& p, double tol = kDefaultTolerance);

// inner ⊂ outer up to tol; checking the vertices of inner is enough because
// both sets are convex.
bool hull_included(const Hull& inner, const Hull& outer, double tol = kDefaultTolerance);

// max{ max_{a∈A} d(a,B), max_{b∈B} d(b,A) }. The distance to a convex set is
// a convex function, so both inner maxima are attained at vertices.
double hausdorff(const Hull& a, const Hull& b);

// max_{v vertex of from} d(v, to)
double directed_hausdorff(const Hull& from, const Hull& to);

double hull_diameter(const Hull& hull);

void to_json(nlohmann::json& j, const Point& p);
void to_json(nlohmann::json& j, const Profile& x);
void to_json(nlohmann::json& j, const Hull& hull);
void to_json(nlohmann::json& j, const CoordinateMapSpec& spec);

Point point_from_json(const nlohmann::json& j);
Profile profile_from_json(const nlohmann::json& j);
CoordinateMapSpec spec_from_json(const nlohmann::json& j);

}  // namespace consensus::geometry

#endif  // CONSENSUS_GEOMETRY_H_
