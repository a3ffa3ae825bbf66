#pragma once

// Inf-convolution Lipschitz regularization on finite clouds:
//
//   f^eps(x) = min_z [ f(z) + rho(x, z) / eps ]
//
// the largest (1/eps)-Lipschitz function below f on the sample. Minima run
// over every cloud point (brute force, O(m^2)); ties go to the lowest index.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hlab/metric.hpp"

namespace hlab {

struct ScalarField {
  std::vector<double> values;  // one per cloud point
  CloudPtr cloud;
  std::string name;
};

/// pi_{axis+1}(x) = x[axis].
ScalarField coordinate_field(const CloudPtr& cloud, std::size_t axis);
std::vector<ScalarField> coordinate_fields(const CloudPtr& cloud);

struct EnvelopeResult {
  double eps = 0.0;
  std::vector<double> values;
  std::vector<std::size_t> witnesses;  // argmin z per point
  double lipschitz_bound = 0.0;        // 1 / eps
  Metric metric{MetricSpec::euclidean()};  // bound to the field's cloud
  ScalarField field;                   // the regularized input
};

enum class EnvelopePath {
  brute_force,
  pruned,  // visits z by increasing f(z), stops once f(z) exceeds the best value; bitwise equal to brute_force
};

EnvelopeResult inf_convolution(const ScalarField& field, const MetricSpec& metric, double eps,
                               EnvelopePath path = EnvelopePath::brute_force);
/// Same, reusing precomputed distances over the field's cloud.
EnvelopeResult inf_convolution(const ScalarField& field, const DistanceMatrix& distances, double eps,
                               EnvelopePath path = EnvelopePath::brute_force);

/// f^eps at an arbitrary point (min over the sample). Needs a radial metric.
double envelope_at(const EnvelopeResult& env, std::span<const double> x);

/// max over pairs of |f^eps(x) - f^eps(y)| - rho(x, y) / eps. Nonpositive means pass.
double lipschitz_check(const EnvelopeResult& env);

/// max over x of env_b(x) - env_a(x) for env_a.eps < env_b.eps. Nonpositive means pass.
double monotonicity_check(const EnvelopeResult& env_a, const EnvelopeResult& env_b);

/// F^eps = (pi_1^eps, ..., pi_n^eps) with a shared eps and metric.
struct VectorEnvelope {
  std::vector<EnvelopeResult> components;
  double eps = 0.0;
  double lipschitz_constant = 0.0;  // sqrt(n) / eps

  std::vector<double> value_at(std::size_t point) const;
};

VectorEnvelope vector_envelope(const std::vector<ScalarField>& fields, const MetricSpec& metric, double eps);
VectorEnvelope vector_envelope(const std::vector<ScalarField>& fields, const DistanceMatrix& distances, double eps);

/// max over cloud points of |F^eps(x) - (f_1(x), ..., f_n(x))|.
double uniform_deviation(const VectorEnvelope& env, const std::vector<ScalarField>& id_fields);

struct DeviationPoint {
  double eps = 0.0;
  double deviation = 0.0;
};

/// eps = 2, 1, 1/2, ..., 2^-20.
std::vector<double> eps_probe_grid();

std::vector<DeviationPoint> deviation_curve(const std::vector<ScalarField>& fields, const MetricSpec& metric,
                                            const std::vector<double>& eps_values);

struct EpsHat {
  double eps_hat = 0.0;
  double deviation = 0.0;  // at eps_hat
  std::vector<DeviationPoint> curve;  // every probe, largest eps first
};

class EpsHatNotFound : public ComputationError {
 public:
  EpsHatNotFound(const std::string& what, std::vector<DeviationPoint> curve)
      : ComputationError(what), curve_(std::move(curve)) {}
  const std::vector<DeviationPoint>& curve() const noexcept { return curve_; }

 private:
  std::vector<DeviationPoint> curve_;
};

/// Largest probe eps such that it and every smaller probe keep the uniform
/// deviation within target.
EpsHat find_eps_hat(const std::vector<ScalarField>& fields, const MetricSpec& metric, double target = 0.5);

}  // namespace hlab
