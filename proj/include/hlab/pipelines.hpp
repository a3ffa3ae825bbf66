#pragma once

// End-to-end replays on finite discretizations:
//  - verify_main_theorem: regularize the coordinate projections under rho,
//    certify eps_hat, show deg(F^eps_hat) = 1 on targets near the centre,
//    corroborate with preimages and estimate H^n_rho of the window;
//  - cantor_counterexample: H^n of R^n under a Cantor pullback metric
//    is bounded by 2^k 3^(-kn) -> 0;
//  - snowflake_dimension_report: snowflake(alpha) divides diameters'
//    exponent, multiplying box dimension by 1/alpha.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hlab/covers.hpp"
#include "hlab/degree.hpp"
#include "hlab/envelope.hpp"
#include "hlab/metric.hpp"

namespace hlab {

/// Piecewise-(bi)linear extension of lattice samples of a vector field.
/// The lattice is the one enumerated by a grid or ball_grid shape; a query
/// needs every lattice corner of its cell that carries nonzero weight.
class LatticeInterpolant {
 public:
  LatticeInterpolant(const Shape& window, CloudPtr cloud, std::vector<Point> values);

  Point operator()(std::span<const double> x) const;
  double spacing() const noexcept { return spacing_; }  // max lattice step over axes

 private:
  Shape window_;
  CloudPtr cloud_;
  std::vector<Point> values_;
  std::vector<double> step_;
  double spacing_ = 0.0;
  std::vector<std::int64_t> lattice_to_cloud_;
};

Point window_centre(const Shape& window);
double window_inradius(const Shape& window);
/// Centre plus the 2n points at 0.3 * inradius along the axes.
std::vector<Point> default_targets(const Shape& window);

struct TheoremOptions {
  std::vector<double> t_grid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::size_t boundary_samples = 64;
  int ladder_first = 2;  // delta ladder 2^-first .. 2^-last times the window's rho-diameter
  int ladder_last = 8;
  double metric_tolerance = 1e-12;
  CoverOptions cover;
};

struct TargetDegree {
  Point target;
  int degree = 0;  // at t = 1, i.e. deg(F^eps_hat)
  bool certified = false;
  std::vector<int> degrees_along;  // one per t with a defined degree
  std::string homotopy_verdict;
  double min_boundary_gap = 0.0;
  double max_integer_error = 0.0;  // worst |winding sum - degree| along the scan
};

struct TargetPreimage {
  Point target;
  Preimage preimage;
};

struct TheoremReport {
  MetricSpec metric;
  std::size_t n = 0;
  Shape window;
  std::size_t cloud_size = 0;
  double mesh = 0.0;
  MetricReport metric_report;
  double deviation_target = 0.0;
  EpsHat eps;
  double lipschitz_constant = 0.0;  // sqrt(n) / eps_hat
  std::string degree_boundary;
  std::vector<TargetDegree> degrees;
  std::vector<TargetPreimage> preimages;
  double preimage_tolerance = 0.0;  // 2 * mesh
  std::vector<MeasureEstimate> measure_rho;  // s = n, delta decreasing
  bool ladder_nondecreasing = false;
  double lipschitz_image_bound = 0.0;  // lipschitz_constant^n * last measure_rho value
  bool consistent = false;
  std::string verdict;
};

/// `window` must be a grid or ball_grid shape of dimension 1 or 2.
TheoremReport verify_main_theorem(const MetricSpec& metric, const Shape& window, std::vector<Point> targets,
                                  const TheoremOptions& options = {});
/// Unit-ball window with grid_res points per axis and the default targets.
TheoremReport verify_main_theorem(const MetricSpec& metric, std::size_t n, std::size_t grid_res,
                                  const TheoremOptions& options = {});

struct CounterexampleLevel {
  int level = 0;
  double blocks = 0.0;           // 2^k
  double block_diameter = 0.0;   // 3^-k
  double upper_bound = 0.0;      // blocks * block_diameter^n
  std::size_t occupied_blocks = 0;  // blocks holding at least one window point
  double transport_error = 0.0;  // max |rho-diam(window block) - diam(paired Cantor points)|
};

struct CounterexampleReport {
  std::size_t n = 0;
  int sample_level = 0;
  std::size_t window_points = 0;
  std::string pairing;
  std::vector<CounterexampleLevel> levels;
  double max_transport_error = 0.0;
  bool strictly_decreasing = false;
};

CounterexampleReport cantor_counterexample(std::size_t n, int max_level);

struct TransportCheck {
  int level = 0;
  double s = 0.0;
  double delta = 0.0;
  double euclidean_value = 0.0;
  double snowflake_value = 0.0;
  double relative_error = 0.0;
};

struct SnowflakeReport {
  double alpha = 1.0;
  Shape shape;
  DimensionEstimate euclidean;
  DimensionEstimate snowflake;
  double ratio = 0.0;           // snowflake dim / euclidean dim
  double expected_ratio = 0.0;  // 1 / alpha
  double ratio_relative_error = 0.0;
  std::vector<TransportCheck> transport;
  double max_transport_error = 0.0;
  bool consistent = false;
};

SnowflakeReport snowflake_dimension_report(double alpha, const Shape& shape, LevelRange levels,
                                           const CoverOptions& options = {});

}  // namespace hlab
