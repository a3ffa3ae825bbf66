#pragma once

// Finite covers and upper bounds for the Hausdorff premeasure
//   H^s_delta(A) = inf { sum_i diam(A_i)^s : A subset of union A_i, diam(A_i) <= delta }
// (unnormalized: no 2^-s * omega_s factor), plus box-counting dimension.
//
// Canonical families:
//   cantor(L)  level-k covers by the 2^k middle-thirds intervals, k <= L
//   grid       dyadic partition of the box at level k
//   ball_grid  dyadic cells of the bounding cube that meet the closed ball
//              (n <= 2 only)
//   explicit   greedy metric-ball cover of the sampled points
//
// For radial metrics (euclidean, scaled, snowflake) a canonical block's
// diameter is the diameter of the region it covers, phi(euclidean cell
// diameter). For pullback and table metrics, which only exist on the sample,
// it is the max pairwise distance between the block's sample points.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "hlab/metric.hpp"

namespace hlab {

struct Cover {
  std::vector<std::vector<std::size_t>> blocks;  // index sets into the shape's cloud
  std::vector<double> diameters;
  double delta = 0.0;  // mesh bound; canonical covers use their max diameter
  MetricSpec metric;
  std::string id;
  std::size_t cloud_size = 0;
};

struct CoverCheck {
  bool covering = true;
  bool within_delta = true;
  std::size_t uncovered = 0;  // count of cloud indices in no block
  double worst_excess = 0.0;  // max(diam - delta, 0)
  bool ok() const noexcept { return covering && within_delta; }
};

CoverCheck check_cover(const Cover& cover);

struct CoverOptions {
  int max_level = 20;                       // box-like shapes; cantor uses its own level
  std::size_t max_blocks = std::size_t{1} << 22;  // materialization budget
};

class NoCoverError : public ComputationError {
 public:
  using ComputationError::ComputationError;
};

/// Materialized level-k canonical cover of the shape's cloud.
Cover canonical_cover(const Shape& shape, int level, const MetricSpec& metric, const CoverOptions& options = {});

/// Greedy metric-ball cover at mesh delta: uncovered points, in index order,
/// become centres claiming every uncovered point within delta / 2.
Cover greedy_ball_cover(const CloudPtr& cloud, const MetricSpec& metric, double delta);

/// Sum of diam^s over the blocks (0^0 counts as 1).
double diameter_power_sum(const Cover& cover, double s);

/// Block count and mesh of a canonical level without materializing it.
struct LevelSummary {
  int level = 0;
  double count = 0.0;   // number of blocks
  double mesh = 0.0;    // max block diameter
  double uniform_diameter = 0.0;  // valid when uniform
  bool uniform = false;  // all blocks share one diameter
  std::vector<double> diameters;  // per-block, when not uniform
  double power_sum(double s) const;
};

LevelSummary summarize_level(const Shape& shape, int level, const MetricSpec& metric,
                             const CoverOptions& options = {});

/// Deepest canonical level available for this shape and metric.
int max_canonical_level(const Shape& shape, const MetricSpec& metric, const CoverOptions& options = {});

struct MeasureEstimate {
  double s = 0.0;
  double delta = 0.0;
  double value = 0.0;
  std::string cover_id;
  int level = -1;  // -1 for the greedy family
  double blocks = 0.0;
  double mesh = 0.0;
  bool is_upper_bound = true;
  std::string family;  // "canonical levels a..b" or "greedy ball cover"
};

/// Smallest diameter-power sum over the shape's cover family members with
/// mesh <= delta. Always an upper bound for H^s_delta of the sampled set.
MeasureEstimate premeasure_upper(const Shape& shape, const MetricSpec& metric, double s, double delta,
                                 const CoverOptions& options = {});

struct ScaleSample {
  int level = 0;
  double delta = 0.0;
  double count = 0.0;
};

struct DimensionEstimate {
  double dim = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  bool reliable = false;  // r_squared >= 0.99
  std::vector<ScaleSample> scales;
};

struct LevelRange {
  int first = 0;
  int last = 0;
};

/// Least-squares slope of log N(delta) against log(1/delta) over canonical levels.
DimensionEstimate box_counting_dimension(const Shape& shape, const MetricSpec& metric, LevelRange levels,
                                         const CoverOptions& options = {});

}  // namespace hlab
