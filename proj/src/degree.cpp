#include "hlab/degree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace hlab {

double Vec2::norm() const { return std::sqrt(x * x + y * y); }

BoundaryDomain BoundaryDomain::disk(Vec2 centre, double radius) {
  if (!(radius > 0.0)) throw InvalidArgument("disk radius must be > 0");
  BoundaryDomain d;
  d.kind_ = Kind::disk;
  d.centre_ = centre;
  d.radius_ = radius;
  return d;
}

BoundaryDomain BoundaryDomain::box(Vec2 lower, Vec2 upper) {
  if (!(lower.x < upper.x) || !(lower.y < upper.y)) throw InvalidArgument("box needs lower < upper on both axes");
  BoundaryDomain d;
  d.kind_ = Kind::box;
  d.lower_ = lower;
  d.upper_ = upper;
  d.centre_ = 0.5 * (lower + upper);
  return d;
}

Vec2 BoundaryDomain::point_at(double t) const {
  t -= std::floor(t);
  if (kind_ == Kind::disk) {
    const double a = 2.0 * std::numbers::pi * t;
    return {centre_.x + radius_ * std::cos(a), centre_.y + radius_ * std::sin(a)};
  }
  const double w = upper_.x - lower_.x;
  const double h = upper_.y - lower_.y;
  double s = t * 2.0 * (w + h);
  if (s < w) return {lower_.x + s, lower_.y};
  s -= w;
  if (s < h) return {upper_.x, lower_.y + s};
  s -= h;
  if (s < w) return {upper_.x - s, upper_.y};
  s -= w;
  return {lower_.x, upper_.y - s};
}

std::string BoundaryDomain::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (kind_ == Kind::disk) {
    os << "disk(" << centre_.x << "," << centre_.y << ";" << radius_ << ")";
  } else {
    os << "box(" << lower_.x << "," << lower_.y << ";" << upper_.x << "," << upper_.y << ")";
  }
  return os.str();
}

BoundaryLoop sample_boundary(const PlanarMap& map, const BoundaryDomain& domain, std::size_t count) {
  if (count == 0) throw InvalidArgument("boundary needs at least one sample");
  BoundaryLoop loop;
  loop.domain = domain;
  loop.samples.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(count);
    const Vec2 x = domain.point_at(t);
    loop.samples.push_back({t, x, map(x)});
  }
  return loop;
}

BoundaryLoop shifted(const BoundaryLoop& loop, Vec2 offset) {
  BoundaryLoop out = loop;
  for (auto& s : out.samples) s.image = s.image - offset;
  return out;
}

int degree_1d(double f_a, double f_b, double z, double proximity_tol) {
  if (std::abs(f_a - z) <= proximity_tol || std::abs(f_b - z) <= proximity_tol) {
    throw DegreeError(DegreeError::Kind::target_on_boundary,
                      "target lies on the image of the boundary; degree undefined");
  }
  auto sign = [](double v) { return v > 0.0 ? 1 : -1; };
  return (sign(f_b - z) - sign(f_a - z)) / 2;
}

namespace {

class WindingAccumulator {
 public:
  WindingAccumulator(const BoundaryDomain& domain, Vec2 z, const PlanarMap* refine, const DegreeOptions& options,
                     DegreeResult& result)
      : domain_(domain), z_(z), refine_(refine), options_(options), result_(result) {}

  void observe(Vec2 image) {
    const double gap = (image - z_).norm();
    result_.min_boundary_gap = std::min(result_.min_boundary_gap, gap);
    if (gap <= options_.proximity_tol) {
      throw DegreeError(DegreeError::Kind::target_on_boundary,
                        "target lies within tolerance of a sampled boundary image");
    }
  }

  double arc(double ta, Vec2 fa, double tb, Vec2 fb, int depth) {
    const Vec2 u = fa - z_;
    const Vec2 v = fb - z_;
    const double increment = std::atan2(u.x * v.y - u.y * v.x, u.x * v.x + u.y * v.y);
    if (std::abs(increment) < std::numbers::pi / 2.0) {
      result_.max_increment = std::max(result_.max_increment, std::abs(increment));
      ++result_.arcs;
      return increment;
    }
    if (refine_ == nullptr || depth >= options_.max_depth) {
      throw DegreeError(DegreeError::Kind::refinement_exhausted,
                        "refinement depth exhausted with an uncertified boundary arc");
    }
    const double tm = 0.5 * (ta + tb);
    const Vec2 fm = (*refine_)(domain_.point_at(tm));
    ++result_.refinements;
    observe(fm);
    return arc(ta, fa, tm, fm, depth + 1) + arc(tm, fm, tb, fb, depth + 1);
  }

 private:
  const BoundaryDomain& domain_;
  Vec2 z_;
  const PlanarMap* refine_;
  const DegreeOptions& options_;
  DegreeResult& result_;
};

}  // namespace

DegreeResult winding_degree_2d(const BoundaryLoop& loop, Vec2 z, const PlanarMap* refine,
                               const DegreeOptions& options) {
  if (!loop.closed) throw DegreeError(DegreeError::Kind::open_loop, "winding degree needs a closed loop");
  if (loop.samples.empty()) throw InvalidArgument("boundary loop has no samples");
  for (std::size_t i = 1; i < loop.samples.size(); ++i) {
    if (!(loop.samples[i].t > loop.samples[i - 1].t)) throw InvalidArgument("loop parameters must strictly increase");
  }

  DegreeResult result;
  result.target = z;
  result.min_boundary_gap = std::numeric_limits<double>::infinity();
  WindingAccumulator acc(loop.domain, z, refine, options, result);
  for (const auto& s : loop.samples) acc.observe(s.image);

  double total = 0.0;
  const std::size_t n = loop.samples.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = loop.samples[i];
    const auto& b = loop.samples[(i + 1) % n];
    const double tb = (i + 1 == n) ? b.t + 1.0 : b.t;
    total += acc.arc(a.t, a.image, tb, b.image, 0);
  }

  result.winding_sum = total / (2.0 * std::numbers::pi);
  const double rounded = std::round(result.winding_sum);
  if (std::abs(result.winding_sum - rounded) > options.integer_tol) {
    throw DegreeError(DegreeError::Kind::not_integer, "winding sum is not within tolerance of an integer");
  }
  result.degree = static_cast<int>(rounded);
  result.certified = result.min_boundary_gap > 0.0;
  return result;
}

DegreeResult map_degree_2d(const PlanarMap& map, const BoundaryDomain& domain, Vec2 z, std::size_t initial_samples,
                           const DegreeOptions& options) {
  const BoundaryLoop loop = sample_boundary(map, domain, initial_samples);
  return winding_degree_2d(loop, z, &map, options);
}

std::string HomotopyScan::verdict_text() const {
  switch (verdict) {
    case HomotopyVerdict::invariant:
      return "invariant";
    case HomotopyVerdict::varies:
      return "degree varies along the homotopy";
    case HomotopyVerdict::left_admissible_class: {
      std::ostringstream os;
      os.precision(17);
      os << "homotopy leaves admissible class at t = " << first_failure_t.value_or(0.0);
      return os.str();
    }
  }
  return "?";
}

HomotopyScan homotopy_scan(const MapFamily& family, const BoundaryDomain& domain, Vec2 z,
                           std::span<const double> t_grid, std::size_t initial_samples,
                           const DegreeOptions& options) {
  if (t_grid.empty()) throw InvalidArgument("homotopy scan needs at least one t value");
  HomotopyScan scan;
  for (double t : t_grid) {
    HomotopyStep step;
    step.t = t;
    try {
      step.result = map_degree_2d(family(t), domain, z, initial_samples, options);
    } catch (const DegreeError& e) {
      step.failure = e.what();
      if (!scan.first_failure_t) scan.first_failure_t = t;
    }
    scan.steps.push_back(std::move(step));
  }
  if (scan.first_failure_t) {
    scan.verdict = HomotopyVerdict::left_admissible_class;
  } else {
    const int first = scan.steps.front().result->degree;
    const bool same = std::all_of(scan.steps.begin(), scan.steps.end(),
                                  [&](const HomotopyStep& s) { return s.result->degree == first; });
    scan.verdict = same ? HomotopyVerdict::invariant : HomotopyVerdict::varies;
  }
  return scan;
}

Preimage find_preimage(const VectorMap& map, const PointCloud& domain, std::span<const double> z, double tol) {
  if (domain.empty()) throw InvalidArgument("preimage search needs a nonempty domain");
  Preimage best;
  best.residual = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < domain.size(); ++i) {
    const Point image = map(domain[i]);
    if (image.size() != z.size()) throw InvalidArgument("map image dimension does not match the target");
    const double r = euclidean_distance(image, z);
    if (r < best.residual) {
      best.residual = r;
      best.index = i;
    }
  }
  best.witness = domain.point(best.index);
  best.found = best.residual <= tol;
  return best;
}

}  // namespace hlab
