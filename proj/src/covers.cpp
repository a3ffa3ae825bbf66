#include "hlab/covers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <unordered_map>

namespace hlab {

namespace {

double power_of(double d, double s) { return s == 0.0 ? 1.0 : std::pow(d, s); }

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double inverse_power_of_three(int k) {
  double p = 1.0;
  for (int i = 0; i < k; ++i) p *= 3.0;  // exact for k <= 33
  return 1.0 / p;
}

double cell_lower(const Shape& shape, std::size_t axis, std::uint64_t i, int k) {
  const double width = shape.upper[axis] - shape.lower[axis];
  return shape.lower[axis] + width * std::ldexp(static_cast<double>(i), -k);
}

double cell_diagonal(const Shape& shape, int k) {
  double acc = 0.0;
  for (std::size_t a = 0; a < shape.dim; ++a) {
    const double h = std::ldexp(shape.upper[a] - shape.lower[a], -k);
    acc += h * h;
  }
  return std::sqrt(acc);
}

// Distance from the origin to the 1D cell [x0, x1] along one axis.
double axis_gap(double x0, double x1) { return std::max({x0, -x1, 0.0}); }

// Closed-ball membership of a 2D dyadic cell (i, j): the cell meets the ball
// iff its nearest point to the centre lies within the radius.
bool ball_cell_meets(const Shape& shape, std::uint64_t i, std::uint64_t j, int k) {
  const double dx = axis_gap(cell_lower(shape, 0, i, k), cell_lower(shape, 0, i + 1, k));
  const double dy = axis_gap(cell_lower(shape, 1, j, k), cell_lower(shape, 1, j + 1, k));
  return dx * dx + dy * dy <= shape.radius * shape.radius;
}

// Number of level-k cells meeting a 2D ball. Along each row the predicate
// holds on one run of columns containing the centre column; the run ends are
// seeded from the chord half-width and then corrected with the predicate.
double count_ball_cells_2d_uncached(const Shape& shape, int k) {
  const std::uint64_t n = std::uint64_t{1} << k;
  if (k == 0) return ball_cell_meets(shape, 0, 0, 0) ? 1.0 : 0.0;
  const std::uint64_t centre = n / 2;
  const double r = shape.radius;
  const double width = (shape.upper[0] - shape.lower[0]) / static_cast<double>(n);
  auto column_of = [&](double x, std::uint64_t lo, std::uint64_t hi) {
    const double c = std::floor((x - shape.lower[0]) / width);
    return static_cast<std::uint64_t>(std::clamp(c, static_cast<double>(lo), static_cast<double>(hi)));
  };
  double total = 0.0;
  for (std::uint64_t j = 0; j < n; ++j) {
    if (!ball_cell_meets(shape, centre, j, k)) continue;
    const double dy = axis_gap(cell_lower(shape, 1, j, k), cell_lower(shape, 1, j + 1, k));
    const double half = std::sqrt(std::max(0.0, r * r - dy * dy));

    std::uint64_t right = column_of(half, centre, n - 1);
    if (ball_cell_meets(shape, right, j, k)) {
      while (right + 1 < n && ball_cell_meets(shape, right + 1, j, k)) ++right;
    } else {
      while (!ball_cell_meets(shape, right, j, k)) --right;
    }
    std::uint64_t left = column_of(-half, 0, centre);
    if (ball_cell_meets(shape, left, j, k)) {
      while (left > 0 && ball_cell_meets(shape, left - 1, j, k)) --left;
    } else {
      while (!ball_cell_meets(shape, left, j, k)) ++left;
    }
    total += static_cast<double>(right - left + 1);
  }
  return total;
}

double count_ball_cells_2d(const Shape& shape, int k) {
  thread_local std::map<std::pair<double, int>, double> cache;
  const auto key = std::make_pair(shape.radius, k);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  const double count = count_ball_cells_2d_uncached(shape, k);
  if (cache.size() > 4096) cache.clear();
  cache.emplace(key, count);
  return count;
}

void require_supported(const Shape& shape) {
  if (shape.kind == ShapeKind::explicit_list) {
    throw InvalidArgument("unsupported shape for canonical covers: explicit point lists use the greedy cover");
  }
  if (shape.kind == ShapeKind::ball_grid && shape.dim > 2) {
    throw InvalidArgument("unsupported shape for canonical covers: ball windows need dimension 1 or 2");
  }
}

std::string canonical_id(const Shape& shape, int level) { return shape.describe() + "/level=" + std::to_string(level); }

double sample_diameter(const Metric& metric, const std::vector<std::size_t>& block) {
  double d = 0.0;
  for (std::size_t a = 0; a < block.size(); ++a) {
    for (std::size_t b = a + 1; b < block.size(); ++b) {
      d = std::max({d, metric.between(block[a], block[b]), metric.between(block[b], block[a])});
    }
  }
  return d;
}

}  // namespace

CoverCheck check_cover(const Cover& cover) {
  CoverCheck check;
  std::vector<char> seen(cover.cloud_size, 0);
  for (const auto& block : cover.blocks) {
    for (std::size_t i : block) {
      if (i < seen.size()) seen[i] = 1;
    }
  }
  check.uncovered = static_cast<std::size_t>(std::count(seen.begin(), seen.end(), 0));
  check.covering = check.uncovered == 0;
  for (double d : cover.diameters) {
    check.worst_excess = std::max(check.worst_excess, d - cover.delta);
  }
  check.within_delta = check.worst_excess <= 0.0;
  return check;
}

double diameter_power_sum(const Cover& cover, double s) {
  if (!(s >= 0.0)) throw InvalidArgument("exponent s must be ≥ 0");
  CompensatedSum sum;
  for (double d : cover.diameters) sum.add(power_of(d, s));
  return sum.value();
}

double LevelSummary::power_sum(double s) const {
  if (uniform) return count * power_of(uniform_diameter, s);
  CompensatedSum sum;
  for (double d : diameters) sum.add(power_of(d, s));
  return sum.value();
}

int max_canonical_level(const Shape& shape, const MetricSpec& metric, const CoverOptions& options) {
  require_supported(shape);
  if (shape.kind == ShapeKind::cantor) return shape.level;
  int cap = options.max_level;
  if (shape.kind == ShapeKind::ball_grid && shape.dim == 2) cap = std::min(cap, 24);
  cap = std::min(cap, static_cast<int>(60 / shape.dim));
  if (!metric.is_radial()) {
    // sample diameters need the materialized cover
    int k = 0;
    while (k < cap && std::ldexp(1.0, static_cast<int>((k + 1) * shape.dim)) <= static_cast<double>(options.max_blocks)) ++k;
    cap = k;
  }
  return cap;
}

Cover canonical_cover(const Shape& shape, int level, const MetricSpec& metric, const CoverOptions& options) {
  require_supported(shape);
  if (level < 0) throw InvalidArgument("level must be ≥ 0");
  if (shape.kind == ShapeKind::cantor && level > shape.level) {
    throw InvalidArgument("cover level exceeds the cantor shape level " + std::to_string(shape.level));
  }
  auto cloud = make_cloud(shape);
  const Metric bound(metric, cloud);

  Cover cover;
  cover.metric = metric;
  cover.id = canonical_id(shape, level);
  cover.cloud_size = cloud->size();

  if (shape.kind == ShapeKind::cantor) {
    const std::size_t blocks = std::size_t{1} << level;
    const std::size_t per_block = std::size_t{1} << (shape.level - level);
    cover.blocks.resize(blocks);
    for (std::size_t b = 0; b < blocks; ++b) {
      cover.blocks[b].resize(per_block);
      std::iota(cover.blocks[b].begin(), cover.blocks[b].end(), b * per_block);
    }
  } else {
    const double total_cells = std::ldexp(1.0, static_cast<int>(level * shape.dim));
    if (total_cells > static_cast<double>(options.max_blocks)) {
      throw InvalidArgument("level " + std::to_string(level) + " exceeds the cover block budget");
    }
    const std::uint64_t per_axis = std::uint64_t{1} << level;
    const std::size_t cells = static_cast<std::size_t>(total_cells);
    auto unflatten = [&](std::size_t linear, std::size_t axis) {
      return (linear >> (level * (shape.dim - 1 - axis))) & (per_axis - 1);
    };
    std::vector<std::int64_t> block_of(cells, -1);
    for (std::size_t c = 0; c < cells; ++c) {
      bool keep = true;
      if (shape.kind == ShapeKind::ball_grid && shape.dim == 2) {
        keep = ball_cell_meets(shape, unflatten(c, 0), unflatten(c, 1), level);
      }
      if (keep) {
        block_of[c] = static_cast<std::int64_t>(cover.blocks.size());
        cover.blocks.emplace_back();
      }
    }
    std::vector<std::size_t> cell_members;
    for (std::size_t p = 0; p < cloud->size(); ++p) {
      auto x = (*cloud)[p];
      std::size_t linear = 0;
      for (std::size_t a = 0; a < shape.dim; ++a) {
        const double h = std::ldexp(shape.upper[a] - shape.lower[a], -level);
        double idx = std::floor((x[a] - shape.lower[a]) / h);
        idx = std::clamp(idx, 0.0, static_cast<double>(per_axis - 1));
        linear = (linear << level) | static_cast<std::size_t>(idx);
      }
      if (block_of[linear] < 0) {
        // rounding put a sample into a cell the predicate rejected; keep it covered
        block_of[linear] = static_cast<std::int64_t>(cover.blocks.size());
        cover.blocks.emplace_back();
      }
      cover.blocks[static_cast<std::size_t>(block_of[linear])].push_back(p);
    }
  }

  if (metric.is_radial()) {
    const double euclid = shape.kind == ShapeKind::cantor ? inverse_power_of_three(level) : cell_diagonal(shape, level);
    cover.diameters.assign(cover.blocks.size(), metric.profile(euclid));
  } else {
    cover.diameters.reserve(cover.blocks.size());
    for (const auto& block : cover.blocks) cover.diameters.push_back(sample_diameter(bound, block));
  }
  cover.delta = cover.diameters.empty() ? 0.0 : *std::max_element(cover.diameters.begin(), cover.diameters.end());
  return cover;
}

LevelSummary summarize_level(const Shape& shape, int level, const MetricSpec& metric, const CoverOptions& options) {
  require_supported(shape);
  if (level < 0) throw InvalidArgument("level must be ≥ 0");
  LevelSummary summary;
  summary.level = level;
  if (!metric.is_radial()) {
    Cover cover = canonical_cover(shape, level, metric, options);
    summary.count = static_cast<double>(cover.blocks.size());
    summary.diameters = std::move(cover.diameters);
    summary.mesh = cover.delta;
    return summary;
  }
  summary.uniform = true;
  if (shape.kind == ShapeKind::cantor) {
    if (level > shape.level) throw InvalidArgument("cover level exceeds the cantor shape level");
    summary.count = std::ldexp(1.0, level);
    summary.uniform_diameter = metric.profile(inverse_power_of_three(level));
  } else {
    if (shape.kind == ShapeKind::ball_grid && shape.dim == 2) {
      summary.count = count_ball_cells_2d(shape, level);
    } else {
      summary.count = std::ldexp(1.0, static_cast<int>(level * shape.dim));
    }
    summary.uniform_diameter = metric.profile(cell_diagonal(shape, level));
  }
  summary.mesh = summary.uniform_diameter;
  return summary;
}

Cover greedy_ball_cover(const CloudPtr& cloud, const MetricSpec& metric, double delta) {
  if (!(delta > 0.0)) throw InvalidArgument("delta must be > 0");
  const Metric bound(metric, cloud);
  Cover cover;
  cover.metric = metric;
  cover.delta = delta;
  cover.cloud_size = cloud->size();
  cover.id = "greedy:" + cloud->label();
  std::vector<char> covered(cloud->size(), 0);
  const double radius = delta / 2.0;
  for (std::size_t c = 0; c < cloud->size(); ++c) {
    if (covered[c]) continue;
    std::vector<std::size_t> block;
    for (std::size_t p = c; p < cloud->size(); ++p) {
      if (!covered[p] && bound.between(c, p) <= radius) {
        covered[p] = 1;
        block.push_back(p);
      }
    }
    const double diam = sample_diameter(bound, block);
    if (diam > delta) {
      throw ComputationError("greedy ball block exceeds delta: the metric violates the triangle inequality");
    }
    cover.blocks.push_back(std::move(block));
    cover.diameters.push_back(diam);
  }
  return cover;
}

MeasureEstimate premeasure_upper(const Shape& shape, const MetricSpec& metric, double s, double delta,
                                 const CoverOptions& options) {
  if (!(s >= 0.0) || !std::isfinite(s)) throw InvalidArgument("exponent s must be ≥ 0");
  if (!(delta > 0.0)) throw InvalidArgument("delta must be > 0");

  MeasureEstimate est;
  est.s = s;
  est.delta = delta;

  if (shape.kind == ShapeKind::explicit_list) {
    auto cloud = make_cloud(shape);
    Cover cover = greedy_ball_cover(cloud, metric, delta);
    est.value = diameter_power_sum(cover, s);
    est.cover_id = shape.describe() + "/greedy";
    est.blocks = static_cast<double>(cover.blocks.size());
    est.mesh = cover.diameters.empty() ? 0.0 : *std::max_element(cover.diameters.begin(), cover.diameters.end());
    est.family = "greedy ball cover";
    return est;
  }

  const int top = max_canonical_level(shape, metric, options);
  bool found = false;
  int first_admissible = -1;
  for (int k = 0; k <= top; ++k) {
    const LevelSummary summary = summarize_level(shape, k, metric, options);
    if (summary.mesh > delta) continue;
    if (first_admissible < 0) first_admissible = k;
    const double value = summary.power_sum(s);
    if (!found || value < est.value) {
      found = true;
      est.value = value;
      est.level = k;
      est.blocks = summary.count;
      est.mesh = summary.mesh;
    }
  }
  if (!found) {
    throw NoCoverError("no canonical cover of " + shape.describe() + " reaches mesh ≤ " + std::to_string(delta) +
                       " up to level " + std::to_string(top));
  }
  est.cover_id = canonical_id(shape, est.level);
  est.family = "canonical levels " + std::to_string(first_admissible) + ".." + std::to_string(top);
  return est;
}

DimensionEstimate box_counting_dimension(const Shape& shape, const MetricSpec& metric, LevelRange levels,
                                         const CoverOptions& options) {
  if (levels.first < 0) throw InvalidArgument("level must be ≥ 0");
  if (levels.last - levels.first + 1 < 3) throw InvalidArgument("level range must span at least 3 levels");
  const int top = max_canonical_level(shape, metric, options);
  if (levels.last > top) {
    throw InvalidArgument("level " + std::to_string(levels.last) + " exceeds the deepest canonical level " +
                          std::to_string(top) + " of " + shape.describe());
  }

  DimensionEstimate est;
  for (int k = levels.first; k <= levels.last; ++k) {
    const LevelSummary summary = summarize_level(shape, k, metric, options);
    est.scales.push_back({k, summary.mesh, summary.count});
  }
  for (std::size_t i = 1; i < est.scales.size(); ++i) {
    if (!(est.scales[i].delta < est.scales[i - 1].delta)) {
      throw ComputationError("degenerate fit: block diameters are not strictly decreasing across levels");
    }
  }
  for (const auto& sc : est.scales) {
    if (!(sc.delta > 0.0) || !(sc.count > 0.0)) throw ComputationError("degenerate fit: empty level or zero mesh");
  }

  const double m = static_cast<double>(est.scales.size());
  double sx = 0.0, sy = 0.0;
  for (const auto& sc : est.scales) {
    sx += -std::log(sc.delta);
    sy += std::log(sc.count);
  }
  const double mx = sx / m;
  const double my = sy / m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& sc : est.scales) {
    const double dx = -std::log(sc.delta) - mx;
    const double dy = std::log(sc.count) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw ComputationError("degenerate fit: all deltas equal");
  est.dim = sxy / sxx;
  est.intercept = my - est.dim * mx;
  est.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  est.reliable = est.r_squared >= 0.99;
  return est;
}

}  // namespace hlab
