#include "hlab/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace hlab {

namespace {

void check_field(const ScalarField& field) {
  if (!field.cloud) throw InvalidArgument("scalar field has no cloud");
  if (field.values.size() != field.cloud->size()) throw InvalidArgument("scalar field size does not match its cloud");
  for (double v : field.values) {
    if (!std::isfinite(v)) throw InvalidArgument("scalar field values must be finite");
  }
}

void check_eps(double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw InvalidArgument("eps must be > 0");
}

// Candidate value f(z) + rho(x, z) / eps. Every path evaluates this exact
// expression so that results agree bitwise.
inline double candidate(double fz, double rho, double eps) { return fz + rho / eps; }

template <class Distance>
void minimize(const ScalarField& field, double eps, EnvelopePath path, Distance&& dist, EnvelopeResult& out) {
  const std::size_t m = field.values.size();
  const auto& f = field.values;
  out.values.assign(m, 0.0);
  out.witnesses.assign(m, 0);

  if (path == EnvelopePath::brute_force) {
    for (std::size_t x = 0; x < m; ++x) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t arg = 0;
      for (std::size_t z = 0; z < m; ++z) {
        const double c = candidate(f[z], dist(x, z), eps);
        if (c < best) {
          best = c;
          arg = z;
        }
      }
      out.values[x] = best;
      out.witnesses[x] = arg;
    }
    return;
  }

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
  for (std::size_t x = 0; x < m; ++x) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = m;
    for (std::size_t z : order) {
      // rho >= 0, so no later z can beat best
      if (f[z] > best) break;
      const double c = candidate(f[z], dist(x, z), eps);
      if (c < best || (c == best && z < arg)) {
        best = c;
        arg = z;
      }
    }
    out.values[x] = best;
    out.witnesses[x] = arg;
  }
}

}  // namespace

ScalarField coordinate_field(const CloudPtr& cloud, std::size_t axis) {
  if (!cloud) throw InvalidArgument("coordinate field needs a cloud");
  if (axis >= cloud->dim()) throw InvalidArgument("coordinate axis out of range");
  ScalarField field;
  field.cloud = cloud;
  field.name = "pi_" + std::to_string(axis + 1);
  field.values.reserve(cloud->size());
  for (std::size_t i = 0; i < cloud->size(); ++i) field.values.push_back((*cloud)[i][axis]);
  return field;
}

std::vector<ScalarField> coordinate_fields(const CloudPtr& cloud) {
  std::vector<ScalarField> out;
  for (std::size_t a = 0; a < cloud->dim(); ++a) out.push_back(coordinate_field(cloud, a));
  return out;
}

EnvelopeResult inf_convolution(const ScalarField& field, const MetricSpec& metric, double eps, EnvelopePath path) {
  check_field(field);
  check_eps(eps);
  EnvelopeResult out{eps, {}, {}, 1.0 / eps, Metric(metric, field.cloud), field};
  const Metric& bound = out.metric;
  minimize(field, eps, path, [&](std::size_t x, std::size_t z) { return bound.between(x, z); }, out);
  return out;
}

EnvelopeResult inf_convolution(const ScalarField& field, const DistanceMatrix& distances, double eps,
                               EnvelopePath path) {
  check_field(field);
  check_eps(eps);
  if (distances.metric().cloud() != field.cloud) {
    throw InvalidArgument("distance matrix and field live on different clouds");
  }
  EnvelopeResult out{eps, {}, {}, 1.0 / eps, distances.metric(), field};
  minimize(field, eps, path, [&](std::size_t x, std::size_t z) { return distances(x, z); }, out);
  return out;
}

double envelope_at(const EnvelopeResult& env, std::span<const double> x) {
  if (!env.metric.evaluates_off_sample()) {
    throw InvalidArgument("metric " + env.metric.spec().describe() + " cannot be evaluated off the sample");
  }
  const auto& cloud = *env.field.cloud;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t z = 0; z < cloud.size(); ++z) {
    best = std::min(best, candidate(env.field.values[z], env.metric(x, cloud[z]), env.eps));
  }
  return best;
}

double lipschitz_check(const EnvelopeResult& env) {
  const std::size_t m = env.values.size();
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t x = 0; x < m; ++x) {
    for (std::size_t y = 0; y < m; ++y) {
      if (x == y) continue;
      const double v = std::abs(env.values[x] - env.values[y]) - env.metric.between(x, y) / env.eps;
      worst = std::max(worst, v);
    }
  }
  return m < 2 ? 0.0 : worst;
}

double monotonicity_check(const EnvelopeResult& env_a, const EnvelopeResult& env_b) {
  if (!(env_a.eps < env_b.eps)) throw InvalidArgument("monotonicity_check needs env_a.eps < env_b.eps");
  if (env_a.field.cloud != env_b.field.cloud || env_a.values.size() != env_b.values.size()) {
    throw InvalidArgument("envelopes live on different clouds");
  }
  if (env_a.field.values != env_b.field.values) throw InvalidArgument("envelopes regularize different fields");
  if (env_a.metric.spec().describe() != env_b.metric.spec().describe()) {
    throw InvalidArgument("envelopes use different metrics");
  }
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t x = 0; x < env_a.values.size(); ++x) worst = std::max(worst, env_b.values[x] - env_a.values[x]);
  return env_a.values.empty() ? 0.0 : worst;
}

std::vector<double> VectorEnvelope::value_at(std::size_t point) const {
  std::vector<double> out;
  out.reserve(components.size());
  for (const auto& c : components) out.push_back(c.values[point]);
  return out;
}

namespace {

VectorEnvelope assemble(std::vector<EnvelopeResult> components, double eps) {
  VectorEnvelope env;
  env.eps = eps;
  env.lipschitz_constant = std::sqrt(static_cast<double>(components.size())) / eps;
  env.components = std::move(components);
  return env;
}

}  // namespace

VectorEnvelope vector_envelope(const std::vector<ScalarField>& fields, const MetricSpec& metric, double eps) {
  if (fields.empty()) throw InvalidArgument("vector envelope needs at least one field");
  std::vector<EnvelopeResult> parts;
  for (const auto& f : fields) {
    if (f.cloud != fields.front().cloud) throw InvalidArgument("vector envelope fields must share a cloud");
    parts.push_back(inf_convolution(f, metric, eps));
  }
  return assemble(std::move(parts), eps);
}

VectorEnvelope vector_envelope(const std::vector<ScalarField>& fields, const DistanceMatrix& distances, double eps) {
  if (fields.empty()) throw InvalidArgument("vector envelope needs at least one field");
  std::vector<EnvelopeResult> parts;
  for (const auto& f : fields) parts.push_back(inf_convolution(f, distances, eps));
  return assemble(std::move(parts), eps);
}

double uniform_deviation(const VectorEnvelope& env, const std::vector<ScalarField>& id_fields) {
  if (env.components.size() != id_fields.size()) throw InvalidArgument("dimension mismatch between envelope and fields");
  if (env.components.empty()) return 0.0;
  const std::size_t m = env.components.front().values.size();
  for (std::size_t c = 0; c < id_fields.size(); ++c) {
    if (id_fields[c].values.size() != m || env.components[c].values.size() != m) {
      throw InvalidArgument("envelope and fields live on different clouds");
    }
  }
  double worst = 0.0;
  for (std::size_t x = 0; x < m; ++x) {
    double acc = 0.0;
    for (std::size_t c = 0; c < id_fields.size(); ++c) {
      const double d = env.components[c].values[x] - id_fields[c].values[x];
      acc += d * d;
    }
    worst = std::max(worst, std::sqrt(acc));
  }
  return worst;
}

std::vector<double> eps_probe_grid() {
  std::vector<double> grid;
  for (int e = 1; e >= -20; --e) grid.push_back(std::ldexp(1.0, e));
  return grid;
}

std::vector<DeviationPoint> deviation_curve(const std::vector<ScalarField>& fields, const MetricSpec& metric,
                                            const std::vector<double>& eps_values) {
  if (fields.empty()) throw InvalidArgument("deviation curve needs at least one field");
  const DistanceMatrix distances(Metric(metric, fields.front().cloud));
  std::vector<DeviationPoint> curve;
  curve.reserve(eps_values.size());
  for (double eps : eps_values) {
    curve.push_back({eps, uniform_deviation(vector_envelope(fields, distances, eps), fields)});
  }
  return curve;
}

EpsHat find_eps_hat(const std::vector<ScalarField>& fields, const MetricSpec& metric, double target) {
  if (!(target >= 0.0) || !std::isfinite(target)) throw InvalidArgument("deviation target must be ≥ 0");
  EpsHat result;
  result.curve = deviation_curve(fields, metric, eps_probe_grid());
  // scan from the smallest probe upwards; eps_hat is the top of the run of passing probes
  const auto& curve = result.curve;
  std::size_t passing = curve.size();
  for (std::size_t i = curve.size(); i-- > 0;) {
    if (curve[i].deviation <= target) passing = i; else break;
  }
  if (passing == curve.size()) {
    throw EpsHatNotFound("no probed ε meets the target deviation " + std::to_string(target), result.curve);
  }
  result.eps_hat = curve[passing].eps;
  result.deviation = curve[passing].deviation;
  return result;
}

}  // namespace hlab
