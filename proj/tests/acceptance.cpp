// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "hlab/covers.hpp"
#include "hlab/degree.hpp"
#include "hlab/envelope.hpp"
#include "hlab/pipelines.hpp"

#ifndef HLAB_BINARY
#error "HLAB_BINARY must name the hlab executable"
#endif

using namespace hlab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

void criterion(const std::string& name, double time_limit_s, const std::function<void(Outcome&)>& body) {
  Outcome o;
  o.detail.precision(6);
  const auto start = std::chrono::steady_clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail << " [exception: " << e.what() << "]";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (time_limit_s > 0 && secs >= time_limit_s) {
    o.pass = false;
    o.detail << " [over time limit " << time_limit_s << " s]";
  }
  if (!o.pass) ++failures;
  std::printf("%s  %-22s %.3fs %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), secs, o.detail.str().c_str());
  std::fflush(stdout);
}

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

double max_lipschitz_ratio(const ScalarField& f, const MetricSpec& spec) {
  const Metric m(spec, f.cloud);
  double best = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i)
    for (std::size_t j = i + 1; j < f.values.size(); ++j)
      best = std::max(best, std::abs(f.values[i] - f.values[j]) / m.between(i, j));
  return best;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) out += (c == '\'') ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

// Runs the binary, capturing stdout and stderr into files under dir.
int run_binary(const std::vector<std::string>& args, const fs::path& out, const fs::path& err) {
  std::string cmd = shell_quote(HLAB_BINARY);
  for (const auto& a : args) cmd += " " + shell_quote(a);
  cmd += " >" + shell_quote(out.string()) + " 2>" + shell_quote(err.string());
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

PlanarMap from_complex(std::function<std::complex<double>(std::complex<double>)> f) {
  return [f](Vec2 p) {
    const auto w = f({p.x, p.y});
    return Vec2{w.real(), w.imag()};
  };
}

}  // namespace

int main() {
  const double cantor_dim = std::numbers::ln2 / std::log(3.0);

  criterion("cantor_dimension", 10.0, [&](Outcome& o) {
    const auto est = box_counting_dimension(Shape::cantor(12), MetricSpec::euclidean(), {4, 12});
    o.detail << "dim=" << est.dim << " r2=" << est.r_squared;
    o.require(est.dim >= 0.62 && est.dim <= 0.642, "dim in [0.62, 0.642]");
  });

  criterion("snowflake_doubling", 10.0, [&](Outcome& o) {
    const auto line = box_counting_dimension(Shape::cube_grid(0, 1, 2, 1), MetricSpec::snowflake(0.5), {4, 12});
    const auto cantor = box_counting_dimension(Shape::cantor(12), MetricSpec::snowflake(0.5), {4, 12});
    o.detail << "interval=" << line.dim << " cantor=" << cantor.dim;
    o.require(line.dim >= 1.95 && line.dim <= 2.05, "interval dim in [1.95, 2.05]");
    o.require(cantor.dim >= 1.24 && cantor.dim <= 1.285, "cantor dim in [1.24, 1.285]");
  });

  criterion("transport_identity", 0.0, [&](Outcome& o) {
    double worst = 0.0;
    int checks = 0;
    for (const Shape& shape : {Shape::cube_grid(0, 1, 2, 1), Shape::cantor(12)}) {
      for (int k = 0; k <= 12; ++k) {
        const double delta = summarize_level(shape, k, MetricSpec::euclidean()).mesh;
        for (double s : {0.5, 0.63093, 1.0}) {
          const double e = premeasure_upper(shape, MetricSpec::euclidean(), s, delta).value;
          const double r = premeasure_upper(shape, MetricSpec::snowflake(0.5), 2 * s, std::sqrt(delta)).value;
          worst = std::max(worst, rel(r, e));
          ++checks;
        }
      }
    }
    o.detail << "checks=" << checks << " max_rel_err=" << worst;
    o.require(worst <= 1e-12, "relative error <= 1e-12");
  });

  criterion("counterexample_decay", 0.0, [&](Outcome& o) {
    double worst = 0.0;
    bool decreasing = true;
    for (std::size_t n : {1u, 2u}) {
      const auto r = cantor_counterexample(n, 12);
      const double base = n == 1 ? 2.0 / 3.0 : 2.0 / 9.0;
      for (const auto& l : r.levels) worst = std::max(worst, rel(l.upper_bound, std::pow(base, l.level)));
      decreasing = decreasing && r.strictly_decreasing;
      for (std::size_t k = 1; k < r.levels.size(); ++k)
        decreasing = decreasing && r.levels[k].upper_bound < r.levels[k - 1].upper_bound;
    }
    o.detail << "max_rel_err=" << worst << " strictly_decreasing=" << decreasing;
    o.require(worst <= 1e-12, "relative error <= 1e-12");
    o.require(decreasing, "strictly decreasing");
  });

  criterion("envelope_laws", 0.0, [&](Outcome& o) {
    auto cloud = make_cloud(Shape::ball_grid(1.0, 17, 2));
    std::vector<ScalarField> fields = coordinate_fields(cloud);
    ScalarField bump{std::vector<double>(cloud->size()), cloud, "x1*x2"};
    for (std::size_t i = 0; i < cloud->size(); ++i) bump.values[i] = (*cloud)[i][0] * (*cloud)[i][1];
    fields.push_back(bump);

    std::vector<double> grid;
    for (int j = 0; j <= 10; ++j) grid.push_back(std::ldexp(1.0, -j));
    const std::vector<std::pair<double, double>> nested = {
        {std::ldexp(1.0, -10), std::ldexp(1.0, -8)}, {std::ldexp(1.0, -8), std::ldexp(1.0, -6)},
        {std::ldexp(1.0, -6), std::ldexp(1.0, -4)},  {std::ldexp(1.0, -4), std::ldexp(1.0, -2)},
        {std::ldexp(1.0, -2), 1.0}};

    double worst_lip = 0.0, worst_mono = -1.0, worst_fixed = 0.0;
    int fixed_checks = 0;
    bool curve_ok = true;
    for (const MetricSpec& m : {MetricSpec::euclidean(), MetricSpec::scaled(2.0), MetricSpec::snowflake(0.5)}) {
      for (const auto& f : fields) {
        for (double eps : grid) worst_lip = std::max(worst_lip, lipschitz_check(inf_convolution(f, m, eps)));
        for (const auto& [a, b] : nested)
          worst_mono = std::max(worst_mono, monotonicity_check(inf_convolution(f, m, a), inf_convolution(f, m, b)));
        const double lip = max_lipschitz_ratio(f, m);
        for (double eps : grid) {
          if (1.0 / eps < lip) continue;
          const auto env = inf_convolution(f, m, eps);
          for (std::size_t i = 0; i < env.values.size(); ++i)
            worst_fixed = std::max(worst_fixed, std::abs(env.values[i] - f.values[i]));
          ++fixed_checks;
        }
        const auto curve = deviation_curve({f}, m, grid);
        for (std::size_t i = 1; i < curve.size(); ++i) curve_ok = curve_ok && curve[i].deviation <= curve[i - 1].deviation;
      }
    }
    o.detail << "metrics=3 fields=" << fields.size() << " lipschitz=" << worst_lip << " monotonicity=" << worst_mono
             << " fixed_point=" << worst_fixed << " (" << fixed_checks << " cases) curve_nonincreasing=" << curve_ok;
    o.require(worst_lip <= 1e-12, "lipschitz_check <= 1e-12");
    o.require(worst_mono <= 0.0, "monotonicity_check <= 0");
    o.require(fixed_checks > 0 && worst_fixed == 0.0, "fixed point exact");
    o.require(curve_ok, "deviation curve nonincreasing");
  });

  criterion("degree_axioms", 5.0, [&](Outcome& o) {
    using cd = std::complex<double>;
    const BoundaryDomain disk = BoundaryDomain::disk({0, 0}, 1.0);
    double worst_int = 0.0;
    auto deg = [&](const PlanarMap& f, const BoundaryDomain& d, Vec2 z) {
      const auto r = map_degree_2d(f, d, z);
      worst_int = std::max(worst_int, std::abs(r.winding_sum - r.degree));
      return r.degree;
    };
    const int d_id = deg([](Vec2 p) { return p; }, disk, {0, 0});
    const int d_sq = deg(from_complex([](cd w) { return w * w; }), disk, {0.1, 0});
    const int d_tr = deg([](Vec2 p) { return p + Vec2{3, 0}; }, disk, {0, 0});
    const int d_anti = deg([](Vec2 p) { return Vec2{-p.x, -p.y}; }, disk, {0, 0});
    const PlanarMap split = from_complex([](cd w) { return w * w - 0.25; });
    const int whole = deg(split, BoundaryDomain::box({-1, -1}, {1, 1}), {0, 0});
    const int left = deg(split, BoundaryDomain::box({-1, -1}, {0, 1}), {0, 0});
    const int right = deg(split, BoundaryDomain::box({0, -1}, {1, 1}), {0, 0});
    o.require(d_id == 1, "identity -> 1");
    o.require(d_sq == 2, "complex square -> 2");
    o.require(d_tr == 0, "translation outside -> 0");
    o.require(d_anti == 1, "antipodal -> 1");
    o.require(whole == 2 && left + right == whole, "additivity 2 = 1 + 1");

    std::vector<double> t_grid;
    for (int i = 0; i <= 10; ++i) t_grid.push_back(i / 10.0);
    auto scan_ok = [&](const HomotopyScan& scan) {
      bool ok = scan.verdict == HomotopyVerdict::invariant && scan.steps.size() == 11;
      for (const auto& s : scan.steps) {
        ok = ok && s.result && s.result->degree == 1;
        if (s.result) worst_int = std::max(worst_int, std::abs(s.result->winding_sum - s.result->degree));
      }
      return ok;
    };
    const MapFamily translation = [](double t) { return PlanarMap([t](Vec2 p) { return p + Vec2{0.1 * t, 0}; }); };
    o.require(scan_ok(homotopy_scan(translation, disk, {0, 0}, t_grid)), "translation family invariant");

    // id -> F^eps_hat under snowflake(0.5)
    const Shape window = Shape::ball_grid(1.0, 33, 2);
    auto cloud = make_cloud(window);
    const auto fields = coordinate_fields(cloud);
    const auto hat = find_eps_hat(fields, MetricSpec::snowflake(0.5), 0.5);
    const auto env = vector_envelope(fields, MetricSpec::snowflake(0.5), hat.eps_hat);
    std::vector<Point> values(cloud->size());
    for (std::size_t p = 0; p < cloud->size(); ++p) values[p] = env.value_at(p);
    const LatticeInterpolant F(window, cloud, std::move(values));
    const BoundaryDomain inner = BoundaryDomain::disk({0, 0}, 1.0 - std::sqrt(2.0) * F.spacing() * (1 + 1e-9));
    const MapFamily interp = [&F](double t) -> PlanarMap {
      return [&F, t](Vec2 x) {
        const double pt[2] = {x.x, x.y};
        const Point f = F(pt);
        return Vec2{(1 - t) * x.x + t * f[0], (1 - t) * x.y + t * f[1]};
      };
    };
    bool all = true;
    for (Vec2 z : {Vec2{0, 0}, Vec2{0.3, 0}, Vec2{-0.3, 0}, Vec2{0, 0.3}, Vec2{0, -0.3}})
      all = scan_ok(homotopy_scan(interp, inner, z, t_grid)) && all;
    o.require(all, "id -> F^eps_hat invariant with degree 1");
    o.require(worst_int <= 1e-6, "winding sums within 1e-6 of integers");
    o.detail << "id=" << d_id << " square=" << d_sq << " outside=" << d_tr << " antipodal=" << d_anti << " split="
             << whole << "=" << left << "+" << right << " eps_hat=" << hat.eps_hat << " max_integer_err=" << worst_int;
  });

  criterion("theorem_replay", 60.0, [&](Outcome& o) {
    const auto r = verify_main_theorem(MetricSpec::snowflake(0.5), 2, 33);
    bool degrees = r.degrees.size() == 5;
    for (const auto& d : r.degrees) degrees = degrees && d.degree == 1;
    bool preimages = r.preimages.size() == 5;
    double worst_res = 0.0;
    for (const auto& p : r.preimages) {
      preimages = preimages && p.preimage.found && p.preimage.residual <= 2 * r.mesh;
      worst_res = std::max(worst_res, p.preimage.residual);
    }
    o.detail << "eps_hat=" << r.eps.eps_hat << " deviation=" << r.eps.deviation << " max_residual=" << worst_res
             << " (2*mesh=" << 2 * r.mesh << ") ladder=" << r.measure_rho.front().value << ".."
             << r.measure_rho.back().value;
    o.require(r.consistent, "verdict consistent");
    o.require(r.eps.deviation <= 0.5, "deviation <= 1/2");
    o.require(degrees, "five degrees equal 1");
    o.require(preimages, "preimage residuals <= 2 mesh");
    o.require(r.ladder_nondecreasing, "ladder nondecreasing");
  });

  criterion("cli_determinism", 0.0, [&](Outcome& o) {
    const fs::path dir = fs::temp_directory_path() / ("hlab_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    struct Example {
      std::vector<std::string> args;
      int code;
      bool writes_out;
    };
    const std::vector<Example> examples = {
        {{"verify-theorem", "--metric", "snowflake:0.5", "--n", "2", "--grid", "33", "--out", "REPORT"}, 0, true},
        {{"measure", "--shape", "cantor:10", "--metric", "euclidean", "--s", "0.63093", "--delta", "1.7e-5"}, 0, false},
        {{"degree", "--map", "square", "--domain", "disk", "--target", "0.1,0"}, 0, false},
        {{"measure", "--shape", "cantor:-1", "--metric", "euclidean", "--s", "1", "--delta", "0.1"}, 2, false},
    };
    int identical = 0;
    for (std::size_t e = 0; e < examples.size(); ++e) {
      std::string captured[2];
      for (int run = 0; run < 2; ++run) {
        const std::string tag = std::to_string(e) + "_" + std::to_string(run);
        std::vector<std::string> args;
        for (const auto& a : examples[e].args) args.push_back(a == "REPORT" ? (dir / (tag + ".json")).string() : a);
        args.push_back("--no-meta");
        const int code = run_binary(args, dir / (tag + ".out"), dir / (tag + ".err"));
        o.require(code == examples[e].code, "example " + std::to_string(e) + " exit " + std::to_string(code));
        captured[run] = examples[e].writes_out ? slurp(dir / (tag + ".json")) : slurp(dir / (tag + ".out"));
        captured[run] += slurp(dir / (tag + ".err"));
      }
      o.require(!captured[0].empty(), "example " + std::to_string(e) + " produced output");
      if (captured[0] == captured[1]) ++identical;
    }
    fs::remove_all(dir);
    o.detail << identical << "/" << examples.size() << " examples byte-identical";
    o.require(identical == static_cast<int>(examples.size()), "byte-identical reruns");
  });

  std::printf("%s: %d failing criteria\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
