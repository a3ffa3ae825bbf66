#include "hlab/metric.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace hlab {

namespace {

std::string fmt_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// Lattice coordinate i of ppa points spanning [lo, hi]; endpoints are exact and
// a symmetric interval yields exactly symmetric coordinates.
double lattice_coordinate(double lo, double hi, std::size_t i, std::size_t ppa) {
  const double steps = static_cast<double>(ppa - 1);
  const double k = static_cast<double>(i);
  return (lo * (steps - k) + hi * k) / steps;
}

void enumerate_lattice(const std::vector<double>& lower, const std::vector<double>& upper,
                       std::size_t ppa, const std::function<void(const Point&)>& visit) {
  const std::size_t dim = lower.size();
  std::vector<std::size_t> idx(dim, 0);
  Point p(dim);
  while (true) {
    for (std::size_t a = 0; a < dim; ++a) p[a] = lattice_coordinate(lower[a], upper[a], idx[a], ppa);
    visit(p);
    // first axis varies slowest
    std::size_t a = dim;
    while (a > 0) {
      --a;
      if (++idx[a] < ppa) break;
      idx[a] = 0;
      if (a == 0) return;
    }
    if (dim == 0) return;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// PointCloud

PointCloud::PointCloud(std::size_t dim, const std::vector<Point>& points, std::string label)
    : dim_(dim), label_(std::move(label)) {
  if (dim == 0) throw InvalidArgument("point cloud dimension must be >= 1");
  coords_.reserve(points.size() * dim);
  for (const auto& p : points) {
    if (p.size() != dim) throw InvalidArgument("point has wrong dimension");
    for (double c : p) {
      if (!std::isfinite(c)) throw InvalidArgument("point coordinates must be finite");
      coords_.push_back(c);
    }
  }
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (points[order[i]] == points[order[i - 1]]) {
      throw InvalidArgument("point cloud contains duplicate points");
    }
  }
}

Point PointCloud::point(std::size_t i) const {
  auto s = (*this)[i];
  return {s.begin(), s.end()};
}

// ---------------------------------------------------------------------------
// Shape

Shape Shape::grid(std::vector<double> lower, std::vector<double> upper, std::size_t points_per_axis) {
  if (lower.empty() || lower.size() != upper.size()) throw InvalidArgument("grid box bounds must share a dimension >= 1");
  for (std::size_t a = 0; a < lower.size(); ++a) {
    if (!(lower[a] < upper[a])) throw InvalidArgument("grid box must have lower < upper on every axis");
  }
  if (points_per_axis < 2) throw InvalidArgument("points-per-axis must be ≥ 2");
  Shape s;
  s.kind = ShapeKind::grid;
  s.dim = lower.size();
  s.lower = std::move(lower);
  s.upper = std::move(upper);
  s.points_per_axis = points_per_axis;
  return s;
}

Shape Shape::cube_grid(double lo, double hi, std::size_t points_per_axis, std::size_t dim) {
  if (dim == 0) throw InvalidArgument("dimension must be >= 1");
  return grid(std::vector<double>(dim, lo), std::vector<double>(dim, hi), points_per_axis);
}

Shape Shape::ball_grid(double radius, std::size_t points_per_axis, std::size_t dim) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidArgument("ball radius must be > 0");
  if (points_per_axis < 2) throw InvalidArgument("points-per-axis must be ≥ 2");
  if (dim == 0) throw InvalidArgument("dimension must be >= 1");
  Shape s;
  s.kind = ShapeKind::ball_grid;
  s.dim = dim;
  s.radius = radius;
  s.points_per_axis = points_per_axis;
  s.lower.assign(dim, -radius);
  s.upper.assign(dim, radius);
  return s;
}

Shape Shape::cantor(int level) {
  if (level < 0) throw InvalidArgument("level must be ≥ 0");
  if (level > kMaxCantorShapeLevel) {
    throw InvalidArgument("cantor level must be <= " + std::to_string(kMaxCantorShapeLevel));
  }
  Shape s;
  s.kind = ShapeKind::cantor;
  s.dim = 1;
  s.level = level;
  s.lower = {0.0};
  s.upper = {1.0};
  return s;
}

Shape Shape::explicit_points(std::size_t dim, std::vector<Point> points) {
  if (dim == 0) throw InvalidArgument("dimension must be >= 1");
  Shape s;
  s.kind = ShapeKind::explicit_list;
  s.dim = dim;
  s.points = std::move(points);
  return s;
}

std::string Shape::describe() const {
  switch (kind) {
    case ShapeKind::cantor:
      return "cantor:" + std::to_string(level);
    case ShapeKind::ball_grid:
      return "ball:" + fmt_number(radius) + ":" + std::to_string(points_per_axis) + ":" + std::to_string(dim);
    case ShapeKind::explicit_list:
      return "explicit:" + std::to_string(points.size()) + "x" + std::to_string(dim);
    case ShapeKind::grid: {
      bool cube = std::all_of(lower.begin(), lower.end(), [&](double v) { return v == lower[0]; }) &&
                  std::all_of(upper.begin(), upper.end(), [&](double v) { return v == upper[0]; });
      if (cube) {
        return "grid:" + fmt_number(lower[0]) + ":" + fmt_number(upper[0]) + ":" +
               std::to_string(points_per_axis) + ":" + std::to_string(dim);
      }
      std::string out = "grid[";
      for (std::size_t a = 0; a < dim; ++a) {
        if (a) out += "x";
        out += fmt_number(lower[a]) + ".." + fmt_number(upper[a]);
      }
      return out + "]:" + std::to_string(points_per_axis);
    }
  }
  return "?";
}

double cantor_left_endpoint(int level, std::uint64_t rank) {
  if (level < 0 || level > 33) throw InvalidArgument("cantor level must lie in [0, 33]");
  // numerator sum 2*b_j*3^(L-j) and denominator 3^L are exact integers below 2^53
  std::uint64_t numerator = 0;
  std::uint64_t power = 1;
  for (int j = 0; j < level; ++j) {
    if ((rank >> j) & 1u) numerator += 2 * power;
    power *= 3;
  }
  return static_cast<double>(numerator) / static_cast<double>(power);
}

std::vector<double> cantor_left_endpoints(int level) {
  if (level < 0) throw InvalidArgument("level must be ≥ 0");
  if (level > kMaxCantorShapeLevel) throw InvalidArgument("cantor level too large");
  const std::uint64_t count = std::uint64_t{1} << level;
  std::vector<double> out(count);
  for (std::uint64_t r = 0; r < count; ++r) out[r] = cantor_left_endpoint(level, r);
  return out;
}

PointCloud build_point_set(const Shape& shape) {
  switch (shape.kind) {
    case ShapeKind::cantor: {
      if (shape.level < 0) throw InvalidArgument("level must be ≥ 0");
      auto values = cantor_left_endpoints(shape.level);
      std::vector<Point> pts;
      pts.reserve(values.size());
      for (double v : values) pts.push_back({v});
      return PointCloud(1, pts, "cantor");
    }
    case ShapeKind::grid: {
      if (shape.points_per_axis < 2) throw InvalidArgument("points-per-axis must be ≥ 2");
      std::vector<Point> pts;
      enumerate_lattice(shape.lower, shape.upper, shape.points_per_axis, [&](const Point& p) { pts.push_back(p); });
      return PointCloud(shape.dim, pts, "grid");
    }
    case ShapeKind::ball_grid: {
      if (shape.points_per_axis < 2) throw InvalidArgument("points-per-axis must be ≥ 2");
      const double r2 = shape.radius * shape.radius;
      std::vector<Point> pts;
      enumerate_lattice(shape.lower, shape.upper, shape.points_per_axis, [&](const Point& p) {
        double n2 = 0.0;
        for (double c : p) n2 += c * c;
        if (n2 <= r2) pts.push_back(p);
      });
      return PointCloud(shape.dim, pts, "grid");
    }
    case ShapeKind::explicit_list:
      return PointCloud(shape.dim, shape.points, "custom");
  }
  throw InvalidArgument("unknown shape kind");
}

CloudPtr make_cloud(const Shape& shape) { return std::make_shared<const PointCloud>(build_point_set(shape)); }

// ---------------------------------------------------------------------------
// MetricSpec

MetricSpec MetricSpec::euclidean() { return MetricSpec{}; }

MetricSpec MetricSpec::scaled(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument("scaled metric requires c > 0");
  MetricSpec s;
  s.kind = MetricKind::scaled;
  s.scale = c;
  return s;
}

MetricSpec MetricSpec::snowflake(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidArgument("snowflake metric requires alpha > 0");
  MetricSpec s;
  s.kind = MetricKind::snowflake;
  s.alpha = alpha;
  return s;
}

MetricSpec MetricSpec::cantor_pullback(int level, RankOrder order) {
  if (level < 0) throw InvalidArgument("level must be ≥ 0");
  if (level > 33) throw InvalidArgument("cantor pullback level must be <= 33");
  MetricSpec s;
  s.kind = MetricKind::cantor_pullback;
  s.level = level;
  s.order = order;
  return s;
}

MetricSpec MetricSpec::from_table(std::vector<std::vector<double>> matrix) {
  for (const auto& row : matrix) {
    if (row.size() != matrix.size()) throw InvalidArgument("distance table must be square");
    for (double v : row) {
      if (!std::isfinite(v)) throw InvalidArgument("distance table entries must be finite");
    }
  }
  MetricSpec s;
  s.kind = MetricKind::table;
  s.table = std::move(matrix);
  return s;
}

bool MetricSpec::is_radial() const noexcept {
  return kind == MetricKind::euclidean || kind == MetricKind::scaled || kind == MetricKind::snowflake;
}

double MetricSpec::profile(double d) const {
  switch (kind) {
    case MetricKind::euclidean:
      return d;
    case MetricKind::scaled:
      return scale * d;
    case MetricKind::snowflake:
      return std::pow(d, alpha);
    default:
      throw InvalidArgument("metric " + describe() + " has no radial profile");
  }
}

std::string MetricSpec::describe() const {
  switch (kind) {
    case MetricKind::euclidean:
      return "euclidean";
    case MetricKind::scaled:
      return "scaled:" + fmt_number(scale);
    case MetricKind::snowflake:
      return "snowflake:" + fmt_number(alpha);
    case MetricKind::cantor_pullback:
      return "cantor_pullback:" + std::to_string(level) + (order == RankOrder::lexicographic ? ":lex" : ":index");
    case MetricKind::table:
      return "table:" + std::to_string(table.size());
  }
  return "?";
}

double euclidean_distance(std::span<const double> x, std::span<const double> y) {
  double acc = 0.0;
  for (std::size_t a = 0; a < x.size(); ++a) {
    const double d = x[a] - y[a];
    acc += d * d;
  }
  return std::sqrt(acc);
}

// ---------------------------------------------------------------------------
// Metric

Metric::Metric(MetricSpec spec) : spec_(std::move(spec)) {
  if (!spec_.is_radial()) {
    throw InvalidArgument("metric " + spec_.describe() + " must be bound to a point cloud");
  }
}

Metric::Metric(MetricSpec spec, CloudPtr cloud) : spec_(std::move(spec)), cloud_(std::move(cloud)) {
  if (!cloud_) {
    if (!spec_.is_radial()) throw InvalidArgument("metric " + spec_.describe() + " must be bound to a point cloud");
    return;
  }
  if (spec_.is_radial()) return;

  const std::size_t m = cloud_->size();
  for (std::size_t i = 0; i < m; ++i) index_of_.emplace(cloud_->point(i), i);

  if (spec_.kind == MetricKind::table) {
    if (spec_.table.size() != m) throw InvalidArgument("distance table size does not match the bound cloud");
    return;
  }

  // cantor_pullback: rank-order injection cloud -> level-L Cantor left endpoints
  if (spec_.level < 64 && m > (std::uint64_t{1} << spec_.level)) {
    throw InvalidArgument("cloud has more points than level-" + std::to_string(spec_.level) +
                          " Cantor endpoints");
  }
  std::vector<std::size_t> ranked(m);
  std::iota(ranked.begin(), ranked.end(), std::size_t{0});
  if (spec_.order == RankOrder::lexicographic) {
    std::stable_sort(ranked.begin(), ranked.end(), [&](std::size_t a, std::size_t b) {
      auto pa = (*cloud_)[a];
      auto pb = (*cloud_)[b];
      return std::lexicographical_compare(pa.begin(), pa.end(), pb.begin(), pb.end());
    });
  }
  cantor_position_.assign(m, 0.0);
  for (std::size_t r = 0; r < m; ++r) cantor_position_[ranked[r]] = cantor_left_endpoint(spec_.level, r);
}

void Metric::check_dim(std::span<const double> x) const {
  if (cloud_ && x.size() != cloud_->dim()) throw InvalidArgument("point dimension does not match the metric's cloud");
}

std::size_t Metric::find(std::span<const double> x) const {
  if (!cloud_) return 0;
  if (index_of_.empty()) {
    for (std::size_t i = 0; i < cloud_->size(); ++i) {
      auto p = (*cloud_)[i];
      if (std::equal(p.begin(), p.end(), x.begin(), x.end())) return i;
    }
    return cloud_->size();
  }
  auto it = index_of_.find(Point(x.begin(), x.end()));
  return it == index_of_.end() ? cloud_->size() : it->second;
}

double Metric::operator()(std::span<const double> x, std::span<const double> y) const {
  if (x.size() != y.size()) throw InvalidArgument("dimension mismatch between points");
  check_dim(x);
  if (spec_.is_radial()) return spec_.profile(euclidean_distance(x, y));
  const std::size_t i = find(x);
  const std::size_t j = find(y);
  if (i == cloud_->size() || j == cloud_->size()) throw InvalidArgument("point not in bound cloud");
  return between(i, j);
}

double Metric::between(std::size_t i, std::size_t j) const {
  if (!cloud_) throw InvalidArgument("metric is not bound to a point cloud");
  switch (spec_.kind) {
    case MetricKind::table:
      return spec_.table[i][j];
    case MetricKind::cantor_pullback:
      return std::abs(cantor_position_[i] - cantor_position_[j]);
    default:
      return spec_.profile(euclidean_distance((*cloud_)[i], (*cloud_)[j]));
  }
}

double eval_metric(const Metric& metric, std::span<const double> x, std::span<const double> y) {
  return metric(x, y);
}

DistanceMatrix::DistanceMatrix(const Metric& metric) : metric_(metric), m_(metric.cloud() ? metric.cloud()->size() : 0) {
  if (!metric.cloud()) throw InvalidArgument("distance matrix needs a bound cloud");
  d_.resize(m_ * m_);
  for (std::size_t i = 0; i < m_; ++i) {
    for (std::size_t j = 0; j < m_; ++j) d_[i * m_ + j] = metric.between(i, j);
  }
}

// ---------------------------------------------------------------------------
// Validation

MetricReport validate_metric(const MetricSpec& spec, const CloudPtr& cloud, double tol,
                             const ValidationOptions& options) {
  if (!cloud || cloud->empty()) throw InvalidArgument("validate_metric needs a nonempty cloud");
  if (!(tol >= 0.0)) throw InvalidArgument("tolerance must be >= 0");
  const Metric metric(spec, cloud);
  const std::size_t m = cloud->size();

  std::unique_ptr<DistanceMatrix> matrix;
  if (m <= options.pair_cap) matrix = std::make_unique<DistanceMatrix>(metric);
  auto dist = [&](std::size_t i, std::size_t j) { return matrix ? (*matrix)(i, j) : metric.between(i, j); };

  MetricReport report;
  report.tolerance = tol;
  report.min_off_diagonal = std::numeric_limits<double>::infinity();
  report.triangle_violation = -std::numeric_limits<double>::infinity();

  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<std::size_t> pick(0, m - 1);

  auto visit_pair = [&](std::size_t i, std::size_t j) {
    const double dij = dist(i, j);
    if (i == j) {
      report.self_distance_max = std::max(report.self_distance_max, dij);
    } else {
      report.min_off_diagonal = std::min(report.min_off_diagonal, dij);
      report.symmetry_violation = std::max(report.symmetry_violation, std::abs(dij - dist(j, i)));
    }
    ++report.pairs_checked;
  };
  if (m <= options.pair_cap) {
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) visit_pair(i, j);
  } else {
    report.exhaustive_pairs = false;
    for (std::size_t i = 0; i < m; ++i) visit_pair(i, i);
    for (std::size_t s = 0; s < options.sampled_pairs; ++s) visit_pair(pick(rng), pick(rng));
  }

  auto visit_triple = [&](std::size_t i, std::size_t j, std::size_t k) {
    const double v = dist(i, k) - dist(i, j) - dist(j, k);
    if (v > report.triangle_violation) {
      report.triangle_violation = v;
      report.worst_triple = {i, j, k};
    }
    ++report.triples_checked;
  };
  if (m <= options.triple_cap) {
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j)
        for (std::size_t k = 0; k < m; ++k) visit_triple(i, j, k);
  } else {
    report.exhaustive_triples = false;
    for (std::size_t s = 0; s < options.sampled_triples; ++s) {
      const std::size_t i = pick(rng);
      const std::size_t j = pick(rng);
      const std::size_t k = pick(rng);
      visit_triple(i, j, k);
    }
  }

  if (m == 1) report.min_off_diagonal = 0.0;
  const bool separated = m == 1 || report.min_off_diagonal > 0.0;
  report.passed = report.symmetry_violation <= tol && report.triangle_violation <= tol &&
                  report.self_distance_max <= tol && separated;
  return report;
}

}  // namespace hlab
