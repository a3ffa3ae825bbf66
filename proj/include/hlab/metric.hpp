#pragma once

// Point sets, metric specifications and metric-axiom validation.
// Every other module reaches distances only through Metric.

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hlab {

using Point = std::vector<double>;

/// Raised when an operation's inputs are malformed or violate a precondition.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a well-formed computation cannot produce its result.
class ComputationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// PointCloud
// ---------------------------------------------------------------------------

/// Finite, duplicate-free sample of R^n stored as a flat coordinate array.
class PointCloud {
 public:
  PointCloud(std::size_t dim, const std::vector<Point>& points, std::string label = "custom");

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return dim_ == 0 ? 0 : coords_.size() / dim_; }
  bool empty() const noexcept { return coords_.empty(); }
  const std::string& label() const noexcept { return label_; }

  std::span<const double> operator[](std::size_t i) const {
    return {coords_.data() + i * dim_, dim_};
  }
  Point point(std::size_t i) const;
  const std::vector<double>& coordinates() const noexcept { return coords_; }

 private:
  std::size_t dim_;
  std::vector<double> coords_;
  std::string label_;
};

using CloudPtr = std::shared_ptr<const PointCloud>;

// ---------------------------------------------------------------------------
// Shapes
// ---------------------------------------------------------------------------

enum class ShapeKind { grid, ball_grid, cantor, explicit_list };

/// Declarative description of a point set (and, for covers, of the region it samples).
struct Shape {
  ShapeKind kind = ShapeKind::grid;
  std::size_t dim = 1;
  std::vector<double> lower;  // grid box
  std::vector<double> upper;
  double radius = 1.0;  // ball_grid, centred at the origin
  std::size_t points_per_axis = 2;
  int level = 0;  // cantor
  std::vector<Point> points;  // explicit_list

  static Shape grid(std::vector<double> lower, std::vector<double> upper, std::size_t points_per_axis);
  static Shape cube_grid(double lo, double hi, std::size_t points_per_axis, std::size_t dim);
  static Shape ball_grid(double radius, std::size_t points_per_axis, std::size_t dim);
  static Shape cantor(int level);
  static Shape explicit_points(std::size_t dim, std::vector<Point> points);

  /// Mini-grammar form, e.g. "cantor:8" or "ball:1:33:2".
  std::string describe() const;
};

inline constexpr int kMaxCantorShapeLevel = 24;

PointCloud build_point_set(const Shape& shape);
CloudPtr make_cloud(const Shape& shape);

/// Left endpoint of the rank-th level-L Cantor interval (ranks in lexicographic digit order).
double cantor_left_endpoint(int level, std::uint64_t rank);
std::vector<double> cantor_left_endpoints(int level);

// ---------------------------------------------------------------------------
// Metric specifications
// ---------------------------------------------------------------------------

enum class MetricKind { euclidean, scaled, snowflake, cantor_pullback, table };
enum class RankOrder { index, lexicographic };

struct MetricSpec {
  MetricKind kind = MetricKind::euclidean;
  double scale = 1.0;  // scaled
  double alpha = 1.0;  // snowflake exponent
  int level = 0;       // cantor_pullback
  RankOrder order = RankOrder::index;
  std::vector<std::vector<double>> table;

  static MetricSpec euclidean();
  static MetricSpec scaled(double c);
  /// alpha > 1 is accepted; validate_metric flags it as non-metric.
  static MetricSpec snowflake(double alpha);
  static MetricSpec cantor_pullback(int level, RankOrder order = RankOrder::index);
  static MetricSpec from_table(std::vector<std::vector<double>> matrix);

  /// True when the distance is a monotone function of the Euclidean distance
  /// and can therefore be evaluated between arbitrary points.
  bool is_radial() const noexcept;
  /// Radial profile phi with rho(x, y) = phi(|x - y|). Only meaningful when is_radial().
  double profile(double euclidean_distance) const;
  std::string describe() const;
};

double euclidean_distance(std::span<const double> x, std::span<const double> y);

/// A MetricSpec bound to an optional point cloud. Pullback and table metrics
/// are only defined between members of the bound cloud.
class Metric {
 public:
  explicit Metric(MetricSpec spec);
  Metric(MetricSpec spec, CloudPtr cloud);

  const MetricSpec& spec() const noexcept { return spec_; }
  const CloudPtr& cloud() const noexcept { return cloud_; }
  bool evaluates_off_sample() const noexcept { return spec_.is_radial(); }

  double operator()(std::span<const double> x, std::span<const double> y) const;
  /// Distance between two members of the bound cloud.
  double between(std::size_t i, std::size_t j) const;
  /// Index of a bound-cloud member with exactly these coordinates, or size() if absent.
  std::size_t find(std::span<const double> x) const;

 private:
  void check_dim(std::span<const double> x) const;

  MetricSpec spec_;
  CloudPtr cloud_;
  std::vector<double> cantor_position_;
  std::map<Point, std::size_t> index_of_;
};

double eval_metric(const Metric& metric, std::span<const double> x, std::span<const double> y);

/// Dense matrix of pairwise distances over the bound cloud.
class DistanceMatrix {
 public:
  explicit DistanceMatrix(const Metric& metric);
  double operator()(std::size_t i, std::size_t j) const noexcept { return d_[i * m_ + j]; }
  std::size_t size() const noexcept { return m_; }
  const Metric& metric() const noexcept { return metric_; }

 private:
  Metric metric_;
  std::size_t m_;
  std::vector<double> d_;
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct MetricReport {
  double symmetry_violation = 0.0;  // max |rho(x,y) - rho(y,x)|
  double triangle_violation = 0.0;  // max rho(x,z) - rho(x,y) - rho(y,z)
  double self_distance_max = 0.0;   // max rho(x,x)
  double min_off_diagonal = 0.0;    // min rho(x,y), x != y
  double tolerance = 0.0;
  bool passed = false;
  std::size_t pairs_checked = 0;
  std::size_t triples_checked = 0;
  bool exhaustive_pairs = true;
  bool exhaustive_triples = true;
  std::array<std::size_t, 3> worst_triple{0, 0, 0};
};

/// Triples are checked exhaustively up to triple_cap points; above it a
/// fixed-seed uniform sample of sampled_triples ordered triples is drawn.
/// Pairs are exhaustive up to pair_cap points, sampled above.
struct ValidationOptions {
  std::size_t triple_cap = 200;
  std::size_t sampled_triples = 1'000'000;
  std::size_t pair_cap = 4096;
  std::size_t sampled_pairs = 1'000'000;
  std::uint64_t seed = 0x5eed'1234'abcd'0001ULL;
};

MetricReport validate_metric(const MetricSpec& spec, const CloudPtr& cloud, double tol,
                             const ValidationOptions& options = {});

}  // namespace hlab
