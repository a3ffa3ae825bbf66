#pragma once

// Numerical Brouwer degree in dimensions 1 and 2.
//
// 1D: deg[f, (a, b), z] = (sign(f(b) - z) - sign(f(a) - z)) / 2.
// 2D: winding number of f - z along the boundary loop, summed from signed
// angle increments. An arc is certified once its increment is below pi/2;
// longer arcs are bisected through the map callback up to a depth cap.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hlab/metric.hpp"

namespace hlab {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2 a, Vec2 b) = default;
  double norm() const;
};

using PlanarMap = std::function<Vec2(Vec2)>;

/// Boundary of a planar domain, parameterized counterclockwise by t in [0, 1).
class BoundaryDomain {
 public:
  enum class Kind { disk, box };

  static BoundaryDomain disk(Vec2 centre, double radius);
  static BoundaryDomain box(Vec2 lower, Vec2 upper);

  Kind kind() const noexcept { return kind_; }
  Vec2 point_at(double t) const;
  std::string describe() const;

  Vec2 centre() const noexcept { return centre_; }
  double radius() const noexcept { return radius_; }
  Vec2 lower() const noexcept { return lower_; }
  Vec2 upper() const noexcept { return upper_; }

 private:
  Kind kind_ = Kind::disk;
  Vec2 centre_{};
  double radius_ = 1.0;
  Vec2 lower_{};
  Vec2 upper_{};
};

struct BoundarySample {
  double t = 0.0;
  Vec2 domain;
  Vec2 image;
};

struct BoundaryLoop {
  std::vector<BoundarySample> samples;  // strictly increasing t
  bool closed = true;
  BoundaryDomain domain = BoundaryDomain::disk({0.0, 0.0}, 1.0);
};

BoundaryLoop sample_boundary(const PlanarMap& map, const BoundaryDomain& domain, std::size_t count = 64);

/// The same loop with every image translated by -offset.
BoundaryLoop shifted(const BoundaryLoop& loop, Vec2 offset);

struct DegreeOptions {
  int max_depth = 24;
  double proximity_tol = 1e-9;  // |image - z| at or below this violates z not in f(boundary)
  double integer_tol = 1e-6;
};

struct DegreeResult {
  int degree = 0;
  Vec2 target;
  double winding_sum = 0.0;  // pre-rounding turns
  double min_boundary_gap = 0.0;
  std::size_t refinements = 0;
  bool certified = false;
  double max_increment = 0.0;  // largest accepted |angle increment|
  std::size_t arcs = 0;
};

class DegreeError : public ComputationError {
 public:
  enum class Kind { target_on_boundary, refinement_exhausted, not_integer, open_loop };
  DegreeError(Kind kind, const std::string& what) : ComputationError(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

int degree_1d(double f_a, double f_b, double z, double proximity_tol = 1e-9);

/// `refine` supplies new boundary images; without it an arc of increment
/// >= pi/2 cannot be certified.
DegreeResult winding_degree_2d(const BoundaryLoop& loop, Vec2 z, const PlanarMap* refine = nullptr,
                               const DegreeOptions& options = {});

/// Samples the boundary of `domain` under `map` and computes its degree at z.
DegreeResult map_degree_2d(const PlanarMap& map, const BoundaryDomain& domain, Vec2 z,
                           std::size_t initial_samples = 64, const DegreeOptions& options = {});

using MapFamily = std::function<PlanarMap(double t)>;

struct HomotopyStep {
  double t = 0.0;
  std::optional<DegreeResult> result;
  std::string failure;  // set when the degree at t is undefined
};

enum class HomotopyVerdict { invariant, varies, left_admissible_class };

struct HomotopyScan {
  std::vector<HomotopyStep> steps;
  HomotopyVerdict verdict = HomotopyVerdict::invariant;
  std::optional<double> first_failure_t;
  std::string verdict_text() const;
};

HomotopyScan homotopy_scan(const MapFamily& family, const BoundaryDomain& domain, Vec2 z,
                           std::span<const double> t_grid, std::size_t initial_samples = 64,
                           const DegreeOptions& options = {});

using VectorMap = std::function<Point(std::span<const double>)>;

struct Preimage {
  bool found = false;
  std::size_t index = 0;
  Point witness;
  double residual = 0.0;  // min |f(x) - z| over the domain samples
};

/// Domain sample minimizing |f(x) - z|; found iff that minimum is <= tol.
Preimage find_preimage(const VectorMap& map, const PointCloud& domain, std::span<const double> z, double tol);

}  // namespace hlab
