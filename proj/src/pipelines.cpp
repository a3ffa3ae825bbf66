#include "hlab/pipelines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace hlab {

namespace {

bool is_window(const Shape& s) { return s.kind == ShapeKind::grid || s.kind == ShapeKind::ball_grid; }

std::string format_point(std::span<const double> p) {
  std::ostringstream os;
  os.precision(6);
  os << "(";
  for (std::size_t a = 0; a < p.size(); ++a) os << (a ? ", " : "") << p[a];
  os << ")";
  return os.str();
}

double window_euclidean_diameter(const Shape& window) {
  if (window.kind == ShapeKind::ball_grid) return 2.0 * window.radius;
  double acc = 0.0;
  for (std::size_t a = 0; a < window.dim; ++a) {
    const double w = window.upper[a] - window.lower[a];
    acc += w * w;
  }
  return std::sqrt(acc);
}

double window_rho_diameter(const Shape& window, const MetricSpec& metric, const CloudPtr& cloud) {
  if (metric.is_radial()) return metric.profile(window_euclidean_diameter(window));
  const Metric bound(metric, cloud);
  double d = 0.0;
  for (std::size_t i = 0; i < cloud->size(); ++i)
    for (std::size_t j = 0; j < cloud->size(); ++j) d = std::max(d, bound.between(i, j));
  return d;
}

double power_of_three(int e) {
  double p = 1.0;
  for (int i = 0; i < e; ++i) p *= 3.0;
  return p;
}

}  // namespace

// ---------------------------------------------------------------------------
// LatticeInterpolant

LatticeInterpolant::LatticeInterpolant(const Shape& window, CloudPtr cloud, std::vector<Point> values)
    : window_(window), cloud_(std::move(cloud)), values_(std::move(values)) {
  if (!is_window(window_)) throw InvalidArgument("lattice interpolation needs a grid or ball window");
  if (!cloud_ || values_.size() != cloud_->size()) throw InvalidArgument("one value per lattice sample is required");
  const std::size_t n = window_.dim;
  const std::size_t ppa = window_.points_per_axis;
  double cells = 1.0;
  for (std::size_t a = 0; a < n; ++a) cells *= static_cast<double>(ppa);
  if (cells > 1e8) throw InvalidArgument("lattice too large to index");
  for (std::size_t a = 0; a < n; ++a) {
    step_.push_back((window_.upper[a] - window_.lower[a]) / static_cast<double>(ppa - 1));
    spacing_ = std::max(spacing_, step_.back());
  }
  lattice_to_cloud_.assign(static_cast<std::size_t>(cells), -1);
  for (std::size_t p = 0; p < cloud_->size(); ++p) {
    auto x = (*cloud_)[p];
    std::size_t linear = 0;
    for (std::size_t a = 0; a < n; ++a) {
      const long long idx = std::llround((x[a] - window_.lower[a]) / step_[a]);
      if (idx < 0 || idx >= static_cast<long long>(ppa)) throw InvalidArgument("sample lies off the window lattice");
      linear = linear * ppa + static_cast<std::size_t>(idx);
    }
    lattice_to_cloud_[linear] = static_cast<std::int64_t>(p);
  }
}

Point LatticeInterpolant::operator()(std::span<const double> x) const {
  const std::size_t n = window_.dim;
  const std::size_t ppa = window_.points_per_axis;
  if (x.size() != n) throw InvalidArgument("query dimension does not match the lattice");
  std::vector<std::size_t> base(n);
  std::vector<double> frac(n);
  for (std::size_t a = 0; a < n; ++a) {
    double u = (x[a] - window_.lower[a]) / step_[a];
    const double nearest = std::round(u);
    if (std::abs(u - nearest) < 1e-9) u = nearest;  // lattice coordinates snap exactly
    double cell = std::clamp(std::floor(u), 0.0, static_cast<double>(ppa - 2));
    base[a] = static_cast<std::size_t>(cell);
    frac[a] = std::clamp(u - cell, 0.0, 1.0);
  }
  Point out(values_.front().size(), 0.0);
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    double weight = 1.0;
    std::size_t linear = 0;
    for (std::size_t a = 0; a < n; ++a) {
      const bool upper = (mask >> (n - 1 - a)) & 1u;
      weight *= upper ? frac[a] : 1.0 - frac[a];
      linear = linear * ppa + base[a] + (upper ? 1 : 0);
    }
    if (weight == 0.0) continue;
    const std::int64_t idx = lattice_to_cloud_[linear];
    if (idx < 0) throw ComputationError("interpolation cell " + format_point(x) + " has a corner outside the sample");
    const Point& v = values_[static_cast<std::size_t>(idx)];
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += weight * v[c];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Windows and targets

Point window_centre(const Shape& window) {
  if (window.kind == ShapeKind::ball_grid) return Point(window.dim, 0.0);
  Point c(window.dim);
  for (std::size_t a = 0; a < window.dim; ++a) c[a] = 0.5 * (window.lower[a] + window.upper[a]);
  return c;
}

double window_inradius(const Shape& window) {
  if (window.kind == ShapeKind::ball_grid) return window.radius;
  double r = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < window.dim; ++a) r = std::min(r, 0.5 * (window.upper[a] - window.lower[a]));
  return r;
}

std::vector<Point> default_targets(const Shape& window) {
  const Point c = window_centre(window);
  const double r = 0.3 * window_inradius(window);
  std::vector<Point> out{c};
  for (std::size_t a = 0; a < window.dim; ++a) {
    for (double sign : {1.0, -1.0}) {
      Point p = c;
      p[a] += sign * r;
      out.push_back(p);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Main theorem replay

TheoremReport verify_main_theorem(const MetricSpec& metric, std::size_t n, std::size_t grid_res,
                                  const TheoremOptions& options) {
  const Shape window = Shape::ball_grid(1.0, grid_res, n);
  return verify_main_theorem(metric, window, default_targets(window), options);
}

TheoremReport verify_main_theorem(const MetricSpec& metric, const Shape& window, std::vector<Point> targets,
                                  const TheoremOptions& options) {
  if (!is_window(window)) throw InvalidArgument("theorem window must be a grid or ball shape");
  if (window.dim < 1 || window.dim > 2) throw InvalidArgument("theorem replay supports n ∈ {1, 2}");
  const std::size_t n = window.dim;
  const Point centre = window_centre(window);
  const double inradius = window_inradius(window);
  if (targets.empty()) throw InvalidArgument("theorem replay needs at least one target");
  for (const auto& y : targets) {
    if (y.size() != n) throw InvalidArgument("target dimension does not match n");
    if (!(euclidean_distance(y, centre) < 0.5 * inradius)) {
      throw InvalidArgument("target " + format_point(y) + " is not inside the half-radius ball");
    }
  }

  TheoremReport report;
  report.metric = metric;
  report.n = n;
  report.window = window;

  const CloudPtr cloud = make_cloud(window);
  report.cloud_size = cloud->size();
  report.metric_report = validate_metric(metric, cloud, options.metric_tolerance);
  if (!report.metric_report.passed) {
    std::ostringstream os;
    os << "metric " << metric.describe() << " fails validation on the window (symmetry "
       << report.metric_report.symmetry_violation << ", triangle " << report.metric_report.triangle_violation
       << ", self " << report.metric_report.self_distance_max << ", min off-diagonal "
       << report.metric_report.min_off_diagonal << ")";
    throw ComputationError(os.str());
  }

  // eps_hat: uniform deviation of F^eps from id at most half the inradius
  const auto fields = coordinate_fields(cloud);
  report.deviation_target = 0.5 * inradius;
  report.eps = find_eps_hat(fields, metric, report.deviation_target);
  const double eps_hat = report.eps.eps_hat;
  report.lipschitz_constant = std::sqrt(static_cast<double>(n)) / eps_hat;

  const VectorEnvelope regularized = vector_envelope(fields, metric, eps_hat);
  std::vector<Point> values(cloud->size());
  for (std::size_t p = 0; p < cloud->size(); ++p) values[p] = regularized.value_at(p);
  const LatticeInterpolant map(window, cloud, std::move(values));
  report.mesh = map.spacing();
  report.preimage_tolerance = 2.0 * report.mesh;

  std::vector<std::string> problems;

  // degree of the linear homotopy (1 - t) id + t F^eps_hat at each target
  if (n == 2) {
    BoundaryDomain domain = BoundaryDomain::disk({0.0, 0.0}, 1.0);
    if (window.kind == ShapeKind::ball_grid) {
      // largest circle whose lattice cells are fully sampled
      const double r = window.radius - std::sqrt(2.0) * report.mesh * (1.0 + 1e-9);
      if (!(r > 0.5 * inradius)) throw InvalidArgument("window lattice too coarse for a degree boundary");
      domain = BoundaryDomain::disk({0.0, 0.0}, r);
    } else {
      domain = BoundaryDomain::box({window.lower[0], window.lower[1]}, {window.upper[0], window.upper[1]});
    }
    report.degree_boundary = domain.describe();
    const MapFamily family = [&map](double t) -> PlanarMap {
      return [&map, t](Vec2 x) {
        const double pt[2] = {x.x, x.y};
        const Point f = map(pt);
        return Vec2{(1.0 - t) * x.x + t * f[0], (1.0 - t) * x.y + t * f[1]};
      };
    };
    for (const auto& y : targets) {
      const HomotopyScan scan =
          homotopy_scan(family, domain, Vec2{y[0], y[1]}, options.t_grid, options.boundary_samples);
      TargetDegree td;
      td.target = y;
      td.homotopy_verdict = scan.verdict_text();
      td.min_boundary_gap = std::numeric_limits<double>::infinity();
      td.certified = true;
      for (const auto& step : scan.steps) {
        if (!step.result) {
          td.certified = false;
          continue;
        }
        td.degrees_along.push_back(step.result->degree);
        td.min_boundary_gap = std::min(td.min_boundary_gap, step.result->min_boundary_gap);
        td.max_integer_error =
            std::max(td.max_integer_error, std::abs(step.result->winding_sum - step.result->degree));
        td.certified = td.certified && step.result->certified;
      }
      const auto& last = scan.steps.back();
      td.degree = last.result ? last.result->degree : 0;
      if (scan.verdict != HomotopyVerdict::invariant) {
        problems.push_back("homotopy at target " + format_point(y) + ": " + td.homotopy_verdict);
      }
      if (!last.result) {
        problems.push_back("degree at target " + format_point(y) + " undefined: " + last.failure);
      } else if (td.degree != 1) {
        problems.push_back("degree at target " + format_point(y) + " is " + std::to_string(td.degree));
      }
      report.degrees.push_back(std::move(td));
    }
  } else {
    const double a = window.lower[0];
    const double b = window.upper[0];
    const double fa = map(std::span<const double>(&a, 1))[0];
    const double fb = map(std::span<const double>(&b, 1))[0];
    std::ostringstream os;
    os.precision(17);
    os << "interval(" << a << "," << b << ")";
    report.degree_boundary = os.str();
    for (const auto& y : targets) {
      TargetDegree td;
      td.target = y;
      td.certified = true;
      td.min_boundary_gap = std::numeric_limits<double>::infinity();
      std::optional<double> failure_t;
      for (double t : options.t_grid) {
        const double ha = (1.0 - t) * a + t * fa;
        const double hb = (1.0 - t) * b + t * fb;
        try {
          td.degrees_along.push_back(degree_1d(ha, hb, y[0]));
          td.min_boundary_gap = std::min({td.min_boundary_gap, std::abs(ha - y[0]), std::abs(hb - y[0])});
        } catch (const DegreeError&) {
          td.certified = false;
          if (!failure_t) failure_t = t;
        }
      }
      const bool same = std::all_of(td.degrees_along.begin(), td.degrees_along.end(),
                                    [&](int d) { return d == td.degrees_along.front(); });
      if (failure_t) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "homotopy leaves admissible class at t = " << *failure_t;
        td.homotopy_verdict = msg.str();
      } else {
        td.homotopy_verdict = same ? "invariant" : "degree varies along the homotopy";
      }
      td.degree = (!failure_t || options.t_grid.back() != *failure_t) && !td.degrees_along.empty()
                      ? td.degrees_along.back()
                      : 0;
      if (td.homotopy_verdict != "invariant") {
        problems.push_back("homotopy at target " + format_point(y) + ": " + td.homotopy_verdict);
      }
      if (td.degree != 1) problems.push_back("degree at target " + format_point(y) + " is " + std::to_string(td.degree));
      report.degrees.push_back(std::move(td));
    }
  }

  // preimages on the sampled domain
  const VectorMap sampled = [&map](std::span<const double> x) { return map(x); };
  for (const auto& y : targets) {
    TargetPreimage tp{y, find_preimage(sampled, *cloud, y, report.preimage_tolerance)};
    if (!tp.preimage.found) {
      problems.push_back("no preimage of " + format_point(y) + " within tolerance");
    }
    report.preimages.push_back(std::move(tp));
  }

  // H^n_rho of the window over the delta ladder
  const double size = window_rho_diameter(window, metric, cloud);
  for (int j = options.ladder_first; j <= options.ladder_last; ++j) {
    const double delta = std::ldexp(size, -j);
    report.measure_rho.push_back(premeasure_upper(window, metric, static_cast<double>(n), delta, options.cover));
  }
  report.ladder_nondecreasing = true;
  for (std::size_t i = 1; i < report.measure_rho.size(); ++i) {
    if (report.measure_rho[i].value < report.measure_rho[i - 1].value) report.ladder_nondecreasing = false;
  }
  if (!report.ladder_nondecreasing) problems.push_back("measure estimates decrease along the delta ladder");
  const double final_measure = report.measure_rho.empty() ? 0.0 : report.measure_rho.back().value;
  if (!(final_measure > 0.0)) problems.push_back("measure estimate collapses to 0");
  report.lipschitz_image_bound = std::pow(report.lipschitz_constant, static_cast<double>(n)) * final_measure;

  report.consistent = problems.empty();
  if (report.consistent) {
    report.verdict = "consistent: every target has degree 1 and a preimage; measure estimates stay positive";
  } else {
    report.verdict = "inconsistent: " + problems.front();
    for (std::size_t i = 1; i < problems.size(); ++i) report.verdict += "; " + problems[i];
  }
  return report;
}

// ---------------------------------------------------------------------------
// Cantor pullback counterexample

CounterexampleReport cantor_counterexample(std::size_t n, int max_level) {
  if (n < 1 || n > 20) throw InvalidArgument("counterexample dimension must lie in [1, 20]");
  if (max_level < 0) throw InvalidArgument("level must be ≥ 0");
  if (max_level > 33) throw InvalidArgument("counterexample level must be <= 33");

  // window of at most 2^10 lattice points in [0, 1]^n
  std::size_t ppa = 2;
  auto fits = [&](std::size_t p) {
    double c = 1.0;
    for (std::size_t a = 0; a < n; ++a) c *= static_cast<double>(p);
    return c <= 1024.0;
  };
  while (fits(ppa + 1)) ++ppa;
  const Shape window = Shape::cube_grid(0.0, 1.0, ppa, n);
  const CloudPtr cloud = make_cloud(window);
  int sample_level = 0;
  while ((std::size_t{1} << sample_level) < cloud->size()) ++sample_level;

  const Metric rho(MetricSpec::cantor_pullback(sample_level, RankOrder::index), cloud);

  CounterexampleReport report;
  report.n = n;
  report.sample_level = sample_level;
  report.window_points = cloud->size();
  report.pairing = "rank-order injection: i-th point of " + window.describe() + " (lexicographic lattice order) -> " +
                   "i-th level-" + std::to_string(sample_level) + " Cantor left endpoint";

  for (int k = 0; k <= max_level; ++k) {
    CounterexampleLevel lvl;
    lvl.level = k;
    lvl.blocks = std::ldexp(1.0, k);
    lvl.block_diameter = 1.0 / power_of_three(k);
    lvl.upper_bound = lvl.blocks / power_of_three(k * static_cast<int>(n));

    if (k <= sample_level) {
      // window blocks: points whose Cantor partner lies in the same level-k interval
      const int shift = sample_level - k;
      std::size_t start = 0;
      while (start < cloud->size()) {
        const std::size_t block = start >> shift;
        std::size_t stop = start;
        while (stop < cloud->size() && (stop >> shift) == block) ++stop;
        double rho_diam = 0.0;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t i = start; i < stop; ++i) {
          const double c = cantor_left_endpoint(sample_level, i);
          lo = std::min(lo, c);
          hi = std::max(hi, c);
          for (std::size_t j = i + 1; j < stop; ++j) rho_diam = std::max(rho_diam, rho.between(i, j));
        }
        lvl.transport_error = std::max(lvl.transport_error, std::abs(rho_diam - (hi - lo)));
        ++lvl.occupied_blocks;
        start = stop;
      }
    } else {
      lvl.occupied_blocks = cloud->size();
    }
    report.max_transport_error = std::max(report.max_transport_error, lvl.transport_error);
    report.levels.push_back(lvl);
  }
  report.strictly_decreasing = true;
  for (std::size_t i = 1; i < report.levels.size(); ++i) {
    if (!(report.levels[i].upper_bound < report.levels[i - 1].upper_bound)) report.strictly_decreasing = false;
  }
  return report;
}

// ---------------------------------------------------------------------------
// Snowflake dimension report

SnowflakeReport snowflake_dimension_report(double alpha, const Shape& shape, LevelRange levels,
                                           const CoverOptions& options) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in (0, 1]");
  const MetricSpec euclid = MetricSpec::euclidean();
  const MetricSpec snow = MetricSpec::snowflake(alpha);

  SnowflakeReport report;
  report.alpha = alpha;
  report.shape = shape;
  report.euclidean = box_counting_dimension(shape, euclid, levels, options);
  report.snowflake = box_counting_dimension(shape, snow, levels, options);
  report.ratio = report.snowflake.dim / report.euclidean.dim;
  report.expected_ratio = 1.0 / alpha;
  report.ratio_relative_error = std::abs(report.ratio - report.expected_ratio) / report.expected_ratio;

  const double exponents[] = {0.5, std::numbers::ln2 / std::log(3.0), 1.0};
  for (int k = levels.first; k <= levels.last; ++k) {
    const double delta = summarize_level(shape, k, euclid, options).mesh;
    for (double s : exponents) {
      TransportCheck check;
      check.level = k;
      check.s = s;
      check.delta = delta;
      check.euclidean_value = premeasure_upper(shape, euclid, s, delta, options).value;
      check.snowflake_value = premeasure_upper(shape, snow, s / alpha, std::pow(delta, alpha), options).value;
      check.relative_error = std::abs(check.snowflake_value - check.euclidean_value) / check.euclidean_value;
      report.max_transport_error = std::max(report.max_transport_error, check.relative_error);
      report.transport.push_back(check);
    }
  }
  report.consistent = report.ratio_relative_error <= 1e-2 && report.max_transport_error <= 1e-12;
  return report;
}

}  // namespace hlab
