#include <doctest.h>

#include <cmath>

#include "gen.hpp"
#include "hlab/envelope.hpp"
#include "oracles.hpp"

using namespace hlab;

namespace {

ScalarField field_of(const CloudPtr& cloud, std::vector<double> values, std::string name = "f") {
  return ScalarField{std::move(values), cloud, std::move(name)};
}

CloudPtr line_grid(std::size_t m = 101) { return make_cloud(Shape::cube_grid(-1, 1, m, 1)); }

oracle::Env brute(const ScalarField& f, const MetricSpec& spec, double eps) {
  const Metric m(spec, f.cloud);
  return oracle::envelope(f.values, [&](std::size_t i, std::size_t j) { return m.between(i, j); }, eps);
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

TEST_CASE("inf_convolution examples") {
  SUBCASE("constants are invariant") {
    gen::Gen g(31);
    for (int trial = 0; trial < 10; ++trial) {
      auto cloud = g.cloud(2, 25);
      const auto f = field_of(cloud, std::vector<double>(25, 0.3));
      const auto env = inf_convolution(f, g.metric(), g.uniform(0.01, 10));
      for (std::size_t i = 0; i < 25; ++i) {
        CHECK(env.values[i] == 0.3);
        CHECK(env.witnesses[i] == i);
      }
    }
  }
  SUBCASE("identity at eps 0.5 is a fixed point") {
    auto cloud = line_grid();
    const auto f = coordinate_field(cloud, 0);
    const auto env = inf_convolution(f, MetricSpec::euclidean(), 0.5);
    CHECK(env.values == f.values);
    CHECK(env.lipschitz_bound == 2.0);
    const auto o = brute(f, MetricSpec::euclidean(), 0.5);
    CHECK(o.values == env.values);
    CHECK(o.witnesses == env.witnesses);
  }
  SUBCASE("identity at eps 10 collapses onto the leftmost point") {
    auto cloud = line_grid();
    const auto f = coordinate_field(cloud, 0);
    const auto env = inf_convolution(f, MetricSpec::euclidean(), 10.0);
    const auto o = brute(f, MetricSpec::euclidean(), 10.0);
    for (std::size_t i = 0; i < cloud->size(); ++i) {
      const double x = (*cloud)[i][0];
      CHECK(env.values[i] == doctest::Approx(-1.0 + (x + 1.0) / 10.0).epsilon(1e-14));
      CHECK(env.witnesses[i] == 0);
      CHECK(env.values[i] == o.values[i]);
    }
  }
}

TEST_CASE("inf_convolution errors") {
  auto cloud = line_grid(5);
  const auto f = coordinate_field(cloud, 0);
  CHECK_THROWS_AS(inf_convolution(f, MetricSpec::euclidean(), 0.0), InvalidArgument);
  CHECK_THROWS_AS(inf_convolution(f, MetricSpec::euclidean(), -1.0), InvalidArgument);
  CHECK_THROWS_AS(inf_convolution(field_of(cloud, {0, 1, NAN, 0, 0}), MetricSpec::euclidean(), 1.0), InvalidArgument);
  CHECK_THROWS_AS(inf_convolution(field_of(cloud, {0, 1}), MetricSpec::euclidean(), 1.0), InvalidArgument);
  CHECK_THROWS_AS(coordinate_field(cloud, 1), InvalidArgument);
}

TEST_CASE("lipschitz_check examples") {
  auto cloud = line_grid();
  const auto id = coordinate_field(cloud, 0);
  SUBCASE("identity at eps 1") { CHECK(lipschitz_check(inf_convolution(id, MetricSpec::euclidean(), 1.0)) <= 1e-12); }
  SUBCASE("slope 3 against bound 1") {
    // hand-built envelope carrying f(x) = 3x with eps = 1
    EnvelopeResult env = inf_convolution(id, MetricSpec::euclidean(), 1.0);
    for (auto& v : env.values) v *= 3.0;
    CHECK(lipschitz_check(env) == doctest::Approx(2.0 * 2.0).epsilon(1e-14));  // 2 * max pair distance
  }
}

TEST_CASE("monotonicity_check examples") {
  auto cloud = line_grid();
  SUBCASE("constant field") {
    const auto f = field_of(cloud, std::vector<double>(cloud->size(), -0.7));
    CHECK(monotonicity_check(inf_convolution(f, MetricSpec::euclidean(), 1.0),
                             inf_convolution(f, MetricSpec::euclidean(), 2.0)) == 0.0);
  }
  SUBCASE("identity, eps 1 vs 2, strict at x = 1") {
    const auto f = coordinate_field(cloud, 0);
    const auto a = inf_convolution(f, MetricSpec::euclidean(), 1.0);
    const auto b = inf_convolution(f, MetricSpec::euclidean(), 2.0);
    CHECK(monotonicity_check(a, b) <= 0.0);
    CHECK(b.values.back() < a.values.back());
    CHECK(b.values.back() == doctest::Approx(0.0));  // -1 + 2/2
  }
  SUBCASE("injected defect is caught") {
    const auto f = coordinate_field(cloud, 0);
    const auto a = inf_convolution(f, MetricSpec::euclidean(), 1.0);
    auto b = inf_convolution(f, MetricSpec::euclidean(), 2.0);
    b.values[50] = a.values[50] + 1e-3;
    CHECK(monotonicity_check(a, b) == doctest::Approx(1e-3).epsilon(1e-9));
  }
  SUBCASE("mismatched inputs") {
    const auto f = coordinate_field(cloud, 0);
    const auto a = inf_convolution(f, MetricSpec::euclidean(), 1.0);
    CHECK_THROWS_AS(monotonicity_check(a, inf_convolution(f, MetricSpec::euclidean(), 0.5)), InvalidArgument);
    CHECK_THROWS_AS(monotonicity_check(a, inf_convolution(f, MetricSpec::scaled(2.0), 2.0)), InvalidArgument);
    auto g = f;
    g.values[3] += 0.1;
    CHECK_THROWS_AS(monotonicity_check(a, inf_convolution(g, MetricSpec::euclidean(), 2.0)), InvalidArgument);
    const auto other = coordinate_field(line_grid(11), 0);
    CHECK_THROWS_AS(monotonicity_check(a, inf_convolution(other, MetricSpec::euclidean(), 2.0)), InvalidArgument);
  }
}

TEST_CASE("uniform_deviation examples") {
  SUBCASE("euclidean fixes 1-Lipschitz projections for eps <= 1") {
    auto cloud = make_cloud(Shape::ball_grid(1.0, 17, 2));
    const auto fields = coordinate_fields(cloud);
    for (double eps : {1.0, 0.5, 0.125}) CHECK(uniform_deviation(vector_envelope(fields, MetricSpec::euclidean(), eps), fields) == 0.0);
  }
  SUBCASE("shifted field deviates by the shift") {
    auto cloud = line_grid();
    const auto id = coordinate_fields(cloud);
    auto shifted = id;
    for (auto& v : shifted[0].values) v += 0.25;
    CHECK(uniform_deviation(vector_envelope(shifted, MetricSpec::euclidean(), 1.0), id) == doctest::Approx(0.25));
  }
  SUBCASE("snowflake on a 101-point line matches brute force and decreases") {
    auto cloud = line_grid();
    const auto fields = coordinate_fields(cloud);
    const double at = uniform_deviation(vector_envelope(fields, MetricSpec::snowflake(0.5), 0.05), fields);
    const auto o = brute(fields[0], MetricSpec::snowflake(0.5), 0.05);
    CHECK(at == max_abs_diff(o.values, fields[0].values));

    double prev = std::numeric_limits<double>::infinity();
    bool strict_somewhere = false;
    for (int j = 0; j <= 10; ++j) {
      const double eps = std::ldexp(1.0, -j);
      const double d = uniform_deviation(vector_envelope(fields, MetricSpec::snowflake(0.5), eps), fields);
      const auto ob = brute(fields[0], MetricSpec::snowflake(0.5), eps);
      CHECK(d == max_abs_diff(ob.values, fields[0].values));
      CHECK(d <= prev);
      if (d < prev && std::isfinite(prev)) strict_somewhere = true;
      prev = d;
    }
    CHECK(strict_somewhere);
    CHECK(prev == 0.0);  // eventually exact on a finite cloud
  }
  SUBCASE("dimension mismatch") {
    auto cloud = make_cloud(Shape::cube_grid(0, 1, 4, 2));
    const auto fields = coordinate_fields(cloud);
    const auto env = vector_envelope(fields, MetricSpec::euclidean(), 1.0);
    CHECK_THROWS_AS(uniform_deviation(env, {fields[0]}), InvalidArgument);
  }
}

TEST_CASE("find_eps_hat examples") {
  SUBCASE("euclidean gives 1") {
    auto cloud = make_cloud(Shape::ball_grid(1.0, 17, 2));
    const auto hat = find_eps_hat(coordinate_fields(cloud), MetricSpec::euclidean(), 0.5);
    CHECK(hat.eps_hat == 1.0);
    CHECK(hat.deviation == 0.0);
    for (const auto& p : hat.curve)
      if (p.eps <= 1.0) CHECK(p.deviation == 0.0);
  }
  SUBCASE("snowflake on the 2D ball grid") {
    auto cloud = make_cloud(Shape::ball_grid(1.0, 17, 2));
    const auto hat = find_eps_hat(coordinate_fields(cloud), MetricSpec::snowflake(0.5), 0.5);
    CHECK(hat.eps_hat > 0.0);
    CHECK(hat.deviation <= 0.5);
    for (const auto& p : hat.curve)
      if (p.eps <= hat.eps_hat) CHECK(p.deviation <= 0.5);
  }
  SUBCASE("target 0 with a non-exact metric") {
    // the pullback metric makes close samples far apart only at fine levels;
    // deviation stays positive on every probe
    auto cloud = make_cloud(Shape::cube_grid(0, 1, 64, 1));
    try {
      find_eps_hat(coordinate_fields(cloud), MetricSpec::cantor_pullback(24), 0.0);
      FAIL("expected EpsHatNotFound");
    } catch (const EpsHatNotFound& e) {
      CHECK(std::string(e.what()).find("no probed ε meets the target") != std::string::npos);
      CHECK(e.curve().size() == eps_probe_grid().size());
    }
  }
  SUBCASE("negative target") {
    auto cloud = line_grid(5);
    CHECK_THROWS_AS(find_eps_hat(coordinate_fields(cloud), MetricSpec::euclidean(), -0.1), InvalidArgument);
  }
}

TEST_CASE("probe grid") {
  const auto grid = eps_probe_grid();
  REQUIRE(grid.size() == 22);
  CHECK(grid.front() == 2.0);
  CHECK(grid.back() == std::ldexp(1.0, -20));
}

TEST_CASE("property: envelope matches the brute-force oracle and the pruned path bitwise") {
  gen::Gen g(32);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t dim = static_cast<std::size_t>(g.integer(1, 3));
    auto cloud = g.cloud(dim, static_cast<std::size_t>(g.integer(1, 80)));
    std::vector<double> vals(cloud->size());
    for (auto& v : vals) v = g.uniform(-3, 3);
    const auto f = field_of(cloud, vals);
    const MetricSpec spec = g.metric();
    const double eps = std::exp(g.uniform(-6, 3));
    const auto a = inf_convolution(f, spec, eps, EnvelopePath::brute_force);
    const auto b = inf_convolution(f, spec, eps, EnvelopePath::pruned);
    const auto o = brute(f, spec, eps);
    const DistanceMatrix dm(Metric(spec, cloud));
    const auto c = inf_convolution(f, dm, eps, EnvelopePath::pruned);
    INFO(spec.describe(), " eps=", eps);
    CHECK(a.values == o.values);
    CHECK(a.witnesses == o.witnesses);
    CHECK(b.values == a.values);
    CHECK(b.witnesses == a.witnesses);
    CHECK(c.values == a.values);
  }
}

TEST_CASE("property: envelope laws") {
  gen::Gen g(33);
  for (int trial = 0; trial < 30; ++trial) {
    auto cloud = make_cloud(Shape::ball_grid(1.0, static_cast<std::size_t>(g.integer(3, 15)), 2));
    const auto fields = coordinate_fields(cloud);
    const auto& f = fields[static_cast<std::size_t>(g.integer(0, 1))];
    const MetricSpec spec = g.metric(12);
    const Metric m(spec, cloud);
    const double eps_a = std::exp(g.uniform(-5, 1));
    const double eps_b = eps_a * g.uniform(1.01, 8.0);
    const auto a = inf_convolution(f, spec, eps_a);
    const auto b = inf_convolution(f, spec, eps_b);
    INFO(spec.describe(), " eps=", eps_a, ",", eps_b);
    CHECK(lipschitz_check(a) <= 1e-12);
    CHECK(lipschitz_check(b) <= 1e-12);
    CHECK(monotonicity_check(a, b) <= 0.0);
    for (std::size_t i = 0; i < cloud->size(); ++i) {
      CHECK(a.values[i] <= f.values[i]);
      // sandwich 1 >= pi >= pi^eps >= -1
      CHECK(1.0 >= f.values[i]);
      CHECK(a.values[i] >= -1.0);
      // witness equation holds exactly
      CHECK(a.values[i] == f.values[a.witnesses[i]] + m.between(i, a.witnesses[i]) / eps_a);
    }
  }
}

TEST_CASE("property: McShane fixed point") {
  gen::Gen g(34);
  for (int trial = 0; trial < 30; ++trial) {
    auto cloud = g.cloud(2, 40);
    const MetricSpec spec = g.metric();
    const Metric m(spec, cloud);
    // a field that is L-Lipschitz by construction: distance to a sample point, scaled
    const double L = g.uniform(0.1, 4.0);
    const std::size_t anchor = static_cast<std::size_t>(g.integer(0, 39));
    std::vector<double> vals(40);
    for (std::size_t i = 0; i < 40; ++i) vals[i] = L * m.between(i, anchor);
    const auto f = field_of(cloud, vals);
    const auto env = inf_convolution(f, spec, 1.0 / (L * g.uniform(1.0, 3.0)));
    CHECK(max_abs_diff(env.values, vals) == 0.0);
  }
}

TEST_CASE("property: deviation curve is nonincreasing and eventually exact") {
  gen::Gen g(35);
  for (int trial = 0; trial < 10; ++trial) {
    auto cloud = make_cloud(Shape::ball_grid(1.0, static_cast<std::size_t>(g.integer(5, 13)), 2));
    const auto fields = coordinate_fields(cloud);
    const MetricSpec spec = g.metric(12);
    const auto curve = deviation_curve(fields, spec, eps_probe_grid());
    for (std::size_t i = 1; i < curve.size(); ++i) CHECK(curve[i].deviation <= curve[i - 1].deviation);
    if (spec.kind != MetricKind::cantor_pullback) CHECK(curve.back().deviation == 0.0);
  }
}

TEST_CASE("envelope_at agrees on samples and needs a radial metric") {
  auto cloud = make_cloud(Shape::cube_grid(-1, 1, 9, 2));
  const auto f = coordinate_field(cloud, 1);
  const auto env = inf_convolution(f, MetricSpec::snowflake(0.5), 0.3);
  for (std::size_t i = 0; i < cloud->size(); ++i) CHECK(envelope_at(env, (*cloud)[i]) == env.values[i]);
  const Point off{0.1, 0.05};
  double want = std::numeric_limits<double>::infinity();
  for (std::size_t z = 0; z < cloud->size(); ++z) want = std::min(want, f.values[z] + std::sqrt(oracle::eucl(off, cloud->point(z))) / 0.3);
  CHECK(envelope_at(env, off) == want);

  const auto pull = inf_convolution(f, MetricSpec::cantor_pullback(8), 0.3);
  CHECK_THROWS_AS(envelope_at(pull, off), InvalidArgument);
}

TEST_CASE("vector envelope bookkeeping") {
  auto cloud = make_cloud(Shape::cube_grid(0, 1, 5, 3));
  const auto env = vector_envelope(coordinate_fields(cloud), MetricSpec::euclidean(), 0.25);
  CHECK(env.components.size() == 3);
  CHECK(env.lipschitz_constant == doctest::Approx(std::sqrt(3.0) / 0.25));
  const auto v = env.value_at(7);
  CHECK(v == cloud->point(7));
}
