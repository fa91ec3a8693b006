#include "consensus/geometry.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "consensus/error.h"

namespace consensus::geometry {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void RequireSameDimension(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                         " vs " + std::to_string(b) + ")");
  }
}

struct P2 {
  double x;
  double y;
};

bool LexLess(const P2& a, const P2& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); }

double Cross(const P2& o, const P2& a, const P2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Andrew's monotone chain. Points within `eps` of collinear are dropped, so
// the result holds extreme points only, counterclockwise from the
// lexicographically smallest one.
std::vector<P2> MonotoneChain(std::vector<P2> pts) {
  std::sort(pts.begin(), pts.end(), LexLess);
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const P2& a, const P2& b) { return a.x == b.x && a.y == b.y; }),
            pts.end());
  if (pts.size() <= 1) return pts;

  double min_y = pts[0].y;
  double max_y = pts[0].y;
  for (const P2& p : pts) {
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  const double extent = std::max(pts.back().x - pts.front().x, max_y - min_y);
  const double eps = kCollinearityTolerance * extent * extent;

  std::vector<P2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const P2& p : pts) {
    while (k >= 2 && Cross(hull[k - 2], hull[k - 1], p) <= eps) --k;
    hull[k++] = p;
  }
  const std::size_t lower_size = k + 1;
  for (std::size_t i = pts.size() - 1; i-- > 0;) {
    while (k >= lower_size && Cross(hull[k - 2], hull[k - 1], pts[i]) <= eps) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

// Drop consecutive near-duplicate points (relative 1e-12) of a cyclic ring.
std::vector<P2> MergeNearDuplicates(std::vector<P2> ring) {
  if (ring.size() < 2) return ring;
  double scale = 0.0;
  for (const P2& p : ring) scale = std::max({scale, std::abs(p.x), std::abs(p.y)});
  const double eps = kCollinearityTolerance * std::max(scale, 1e-300);
  std::vector<P2> out;
  for (const P2& p : ring) {
    if (!out.empty() && std::hypot(p.x - out.back().x, p.y - out.back().y) <= eps) continue;
    out.push_back(p);
  }
  while (out.size() > 1 &&
         std::hypot(out.front().x - out.back().x, out.front().y - out.back().y) <= eps) {
    out.pop_back();
  }
  return out;
}

std::vector<Point> ToPoints(const std::vector<P2>& ring) {
  std::vector<Point> out;
  out.reserve(ring.size());
  for (const P2& p : ring) out.push_back(Point{p.x, p.y});
  return out;
}

std::vector<P2> ToP2(const Profile& profile) {
  std::vector<P2> pts;
  pts.reserve(profile.size());
  for (const Point& p : profile) pts.push_back({p[0], p[1]});
  return pts;
}

double PointToSegment(const P2& p, const P2& a, const P2& b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(((p.x - a.x) * dx + (p.y - a.y) * dy) / len2, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

std::vector<Point> BoxCorners(const Point& lo, const Point& hi) {
  const std::size_t d = lo.dimension();
  if (d == 2) {
    // Counterclockwise, then collapse degenerate corners.
    std::vector<P2> ring = {{lo[0], lo[1]}, {hi[0], lo[1]}, {hi[0], hi[1]}, {lo[0], hi[1]}};
    std::vector<P2> out;
    for (const P2& p : ring) {
      if (std::none_of(out.begin(), out.end(),
                       [&](const P2& q) { return q.x == p.x && q.y == p.y; })) {
        out.push_back(p);
      }
    }
    return ToPoints(out);
  }
  // Only axes with lo < hi double the corner count.
  std::vector<std::size_t> free_axes;
  for (std::size_t k = 0; k < d; ++k) {
    if (lo[k] < hi[k]) free_axes.push_back(k);
  }
  std::vector<Point> corners;
  corners.reserve(std::size_t{1} << free_axes.size());
  for (std::size_t mask = 0; mask < (std::size_t{1} << free_axes.size()); ++mask) {
    std::vector<double> c(lo.coords().begin(), lo.coords().end());
    for (std::size_t b = 0; b < free_axes.size(); ++b) {
      if (mask & (std::size_t{1} << b)) c[free_axes[b]] = hi[free_axes[b]];
    }
    corners.emplace_back(std::move(c));
  }
  return corners;
}

void BoundingBox(const std::vector<Point>& pts, Point& lo, Point& hi) {
  std::vector<double> l(pts[0].coords().begin(), pts[0].coords().end());
  std::vector<double> h = l;
  for (const Point& p : pts) {
    for (std::size_t k = 0; k < l.size(); ++k) {
      l[k] = std::min(l[k], p[k]);
      h[k] = std::max(h[k], p[k]);
    }
  }
  lo = Point(std::move(l));
  hi = Point(std::move(h));
}

std::vector<Point> DirectionPolygon(const Profile& profile, const std::vector<double>& angles) {
  const std::size_t k = angles.size();
  std::vector<double> support(k, -std::numeric_limits<double>::infinity());
  for (std::size_t j = 0; j < k; ++j) {
    const double c = std::cos(angles[j]);
    const double s = std::sin(angles[j]);
    for (const Point& p : profile) support[j] = std::max(support[j], c * p[0] + s * p[1]);
  }
  // Consecutive supporting lines meet at the polygon's vertices (a line that
  // only touches at a vertex yields that vertex twice; the chain dedupes).
  std::vector<P2> candidates;
  candidates.reserve(k);
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t l = (j + 1) % k;
    const double a1 = std::cos(angles[j]), b1 = std::sin(angles[j]);
    const double a2 = std::cos(angles[l]), b2 = std::sin(angles[l]);
    const double det = a1 * b2 - a2 * b1;
    candidates.push_back({(support[j] * b2 - support[l] * b1) / det,
                          (a1 * support[l] - a2 * support[j]) / det});
  }
  // Candidates are in angular order, so rounding twins are neighbours; merge
  // them first or they can reorder the chain's sort and hide a true vertex.
  return ToPoints(MergeNearDuplicates(MonotoneChain(MergeNearDuplicates(std::move(candidates)))));
}

}  // namespace

Point::Point(std::vector<double> coords) : coords_(std::move(coords)) {
  if (coords_.empty()) throw DimensionError("Point: dimension must be at least 1");
  for (double c : coords_) {
    if (!std::isfinite(c)) throw DomainError("Point: non-finite coordinate");
  }
}

Point::Point(std::initializer_list<double> coords) : Point(std::vector<double>(coords)) {}

Point& Point::operator+=(const Point& other) {
  RequireSameDimension(dimension(), other.dimension(), "Point::operator+=");
  for (std::size_t k = 0; k < coords_.size(); ++k) coords_[k] += other.coords_[k];
  return *this;
}

Point& Point::operator-=(const Point& other) {
  RequireSameDimension(dimension(), other.dimension(), "Point::operator-=");
  for (std::size_t k = 0; k < coords_.size(); ++k) coords_[k] -= other.coords_[k];
  return *this;
}

Point& Point::operator*=(double s) {
  for (double& c : coords_) c *= s;
  return *this;
}

double dot(const Point& a, const Point& b) {
  RequireSameDimension(a.dimension(), b.dimension(), "dot");
  double s = 0.0;
  for (std::size_t k = 0; k < a.dimension(); ++k) s += a[k] * b[k];
  return s;
}

double norm(const Point& p) {
  double s = 0.0;
  for (double c : p.coords()) s += c * c;
  return std::sqrt(s);
}

double distance(const Point& a, const Point& b) {
  RequireSameDimension(a.dimension(), b.dimension(), "distance");
  if (a.dimension() == 2) return std::hypot(a[0] - b[0], a[1] - b[1]);
  double s = 0.0;
  for (std::size_t k = 0; k < a.dimension(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

double sup_distance(const Point& a, const Point& b) {
  RequireSameDimension(a.dimension(), b.dimension(), "sup_distance");
  double m = 0.0;
  for (std::size_t k = 0; k < a.dimension(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

Profile::Profile(std::vector<Point> agents) : agents_(std::move(agents)) {
  if (agents_.empty()) throw DimensionError("Profile: at least one agent required");
  const std::size_t d = agents_[0].dimension();
  if (d == 0) throw DimensionError("Profile: dimension must be at least 1");
  for (const Point& p : agents_) RequireSameDimension(p.dimension(), d, "Profile");
}

Profile::Profile(std::initializer_list<Point> agents) : Profile(std::vector<Point>(agents)) {}

Point centroid(const Profile& x) {
  std::vector<double> c(x.dimension(), 0.0);
  for (const Point& p : x) {
    for (std::size_t k = 0; k < c.size(); ++k) c[k] += p[k];
  }
  for (double& v : c) v /= static_cast<double>(x.size());
  return Point(std::move(c));
}

double sup_distance(const Profile& x, const Profile& z) {
  if (x.size() != z.size()) throw DimensionError("sup_distance: agent count mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, sup_distance(x[i], z[i]));
  return m;
}

std::string_view to_string(HullKind kind) {
  switch (kind) {
    case HullKind::kConvex: return "convex";
    case HullKind::kInterval: return "interval";
    case HullKind::kDirection: return "direction";
  }
  return "unknown";
}

CoordinateMapSpec CoordinateMapSpec::direction(std::vector<double> angles) {
  if (angles.size() < 3) {
    throw InvalidArgument("direction spec: at least 3 directions are needed to span the plane");
  }
  for (double& a : angles) {
    if (!std::isfinite(a)) throw InvalidArgument("direction spec: non-finite angle");
    a = std::fmod(a, kTwoPi);
    if (a < 0) a += kTwoPi;
  }
  std::sort(angles.begin(), angles.end());
  for (std::size_t j = 0; j + 1 < angles.size(); ++j) {
    if (angles[j + 1] - angles[j] <= 1e-12) {
      throw InvalidArgument("direction spec: repeated direction");
    }
  }
  // Positive spanning <=> every circular gap is below π.
  for (std::size_t j = 0; j < angles.size(); ++j) {
    const double next = j + 1 < angles.size() ? angles[j + 1] : angles[0] + kTwoPi;
    if (next - angles[j] >= std::numbers::pi - 1e-12) {
      throw InvalidArgument("direction spec: directions do not positively span the plane");
    }
  }
  return CoordinateMapSpec(HullKind::kDirection, std::move(angles));
}

std::size_t CoordinateMapSpec::output_count(std::size_t n, std::size_t d) const {
  switch (kind_) {
    case HullKind::kConvex: return n;
    case HullKind::kInterval: return std::size_t{1} << d;
    case HullKind::kDirection: return d == 1 ? 2 : angles_.size();
  }
  return 0;
}

Hull::Hull(HullKind kind, std::vector<Point> vertices, std::vector<double> directions)
    : kind_(kind),
      dimension_(vertices.front().dimension()),
      vertices_(std::move(vertices)),
      directions_(std::move(directions)) {
  BoundingBox(vertices_, lower_, upper_);
}

Hull build_hull(const Profile& profile, const CoordinateMapSpec& spec) {
  if (profile.size() == 0) throw DimensionError("build_hull: empty profile");
  const std::size_t d = profile.dimension();

  if (spec.kind() == HullKind::kInterval) {
    if (d > kMaxIntervalDimension) {
      throw DimensionError("build_hull: interval hull supports d <= " +
                           std::to_string(kMaxIntervalDimension));
    }
    Point lo, hi;
    BoundingBox(profile.agents(), lo, hi);
    return Hull(HullKind::kInterval, BoxCorners(lo, hi), {});
  }

  if (d > 2) {
    throw DimensionError("build_hull: " + std::string(to_string(spec.kind())) +
                         " hull supports d in {1,2}, got d=" + std::to_string(d));
  }
  if (d == 1) {
    Point lo, hi;
    BoundingBox(profile.agents(), lo, hi);
    std::vector<Point> v = {lo};
    if (hi[0] > lo[0]) v.push_back(hi);
    return Hull(spec.kind(), std::move(v), spec.directions());
  }
  if (spec.kind() == HullKind::kConvex) {
    return Hull(HullKind::kConvex, ToPoints(MonotoneChain(ToP2(profile))), {});
  }
  return Hull(HullKind::kDirection, DirectionPolygon(profile, spec.directions()),
              spec.directions());
}

double point_to_hull_distance(const Point& p, const Hull& hull) {
  RequireSameDimension(p.dimension(), hull.dimension(), "point_to_hull_distance");
  if (hull.is_box()) {
    double s = 0.0;
    for (std::size_t k = 0; k < p.dimension(); ++k) {
      const double c = std::clamp(p[k], hull.lower()[k], hull.upper()[k]);
      s += (p[k] - c) * (p[k] - c);
    }
    return std::sqrt(s);
  }
  const auto& v = hull.vertices();
  const P2 q{p[0], p[1]};
  if (v.size() == 1) return std::hypot(q.x - v[0][0], q.y - v[0][1]);
  if (v.size() == 2) return PointToSegment(q, {v[0][0], v[0][1]}, {v[1][0], v[1][1]});

  bool inside = true;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const P2 a{v[i][0], v[i][1]};
    const P2 b{v[(i + 1) % v.size()][0], v[(i + 1) % v.size()][1]};
    if (Cross(a, b, q) < 0.0) inside = false;
    best = std::min(best, PointToSegment(q, a, b));
  }
  return inside ? 0.0 : best;
}

bool hull_contains(const Hull& hull, const Point& p, double tol) {
  if (tol < 0) throw InvalidArgument("hull_contains: tol must be >= 0");
  return point_to_hull_distance(p, hull) <= tol;
}

bool hull_included(const Hull& inner, const Hull& outer, double tol) {
  RequireSameDimension(inner.dimension(), outer.dimension(), "hull_included");
  return std::all_of(inner.vertices().begin(), inner.vertices().end(),
                     [&](const Point& v) { return hull_contains(outer, v, tol); });
}

double directed_hausdorff(const Hull& from, const Hull& to) {
  RequireSameDimension(from.dimension(), to.dimension(), "directed_hausdorff");
  double m = 0.0;
  for (const Point& v : from.vertices()) m = std::max(m, point_to_hull_distance(v, to));
  return m;
}

double hausdorff(const Hull& a, const Hull& b) {
  return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

double hull_diameter(const Hull& hull) {
  if (hull.kind() == HullKind::kInterval || hull.dimension() == 1) {
    return distance(hull.lower(), hull.upper());
  }
  double m = 0.0;
  const auto& v = hull.vertices();
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t j = i + 1; j < v.size(); ++j) m = std::max(m, distance(v[i], v[j]));
  }
  return m;
}

void to_json(nlohmann::json& j, const Point& p) {
  j = nlohmann::json(std::vector<double>(p.coords().begin(), p.coords().end()));
}

void to_json(nlohmann::json& j, const Profile& x) {
  j = nlohmann::json::array();
  for (const Point& p : x) j.push_back(p);
}

void to_json(nlohmann::json& j, const Hull& hull) {
  j = {{"kind", to_string(hull.kind())},
       {"dimension", hull.dimension()},
       {"vertices", hull.vertices()}};
  if (hull.kind() == HullKind::kDirection) j["directions"] = hull.directions();
}

void to_json(nlohmann::json& j, const CoordinateMapSpec& spec) {
  switch (spec.kind()) {
    case HullKind::kConvex: j = {{"kind", "identity"}}; break;
    case HullKind::kInterval: j = {{"kind", "interval"}}; break;
    case HullKind::kDirection: j = {{"kind", "direction"}, {"directions", spec.directions()}}; break;
  }
}

Point point_from_json(const nlohmann::json& j) {
  if (j.is_number()) return Point{j.get<double>()};
  if (!j.is_array()) throw InvalidArgument("point must be a number or an array of numbers");
  std::vector<double> c;
  for (const auto& v : j) {
    if (!v.is_number()) throw InvalidArgument("point coordinates must be numbers");
    c.push_back(v.get<double>());
  }
  return Point(std::move(c));
}

Profile profile_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw InvalidArgument("profile must be an array of points");
  std::vector<Point> agents;
  for (const auto& p : j) agents.push_back(point_from_json(p));
  return Profile(std::move(agents));
}

CoordinateMapSpec spec_from_json(const nlohmann::json& j) {
  const std::string kind = j.is_string() ? j.get<std::string>() : j.at("kind").get<std::string>();
  if (kind == "identity" || kind == "convex") return CoordinateMapSpec::identity();
  if (kind == "interval") return CoordinateMapSpec::interval();
  if (kind == "direction") {
    return CoordinateMapSpec::direction(j.at("directions").get<std::vector<double>>());
  }
  throw InvalidArgument("unknown coordinate map kind '" + kind + "'");
}

}  // namespace consensus::geometry
