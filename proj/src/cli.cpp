#include "hlab/cli.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "hlab/envelope.hpp"
#include "hlab/pipelines.hpp"

namespace hlab::cli {

using io::Json;

namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::string in_quotes(std::string_view s) { return "'" + std::string(s) + "'"; }

void expect_arity(const std::vector<std::string_view>& parts, std::size_t lo, std::size_t hi, std::string_view text,
                  std::string_view what) {
  if (parts.size() < lo || parts.size() > hi) {
    throw UsageError("malformed " + std::string(what) + " " + in_quotes(text));
  }
}

}  // namespace

double parse_number(std::string_view text, std::string_view what) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (text.empty() || ec != std::errc{} || ptr != last || !std::isfinite(v)) {
    throw UsageError("malformed number " + in_quotes(text) + " in " + std::string(what));
  }
  return v;
}

long long parse_integer(std::string_view text, std::string_view what) {
  long long v = 0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (text.empty() || ec != std::errc{} || ptr != last) {
    throw UsageError("malformed integer " + in_quotes(text) + " in " + std::string(what));
  }
  return v;
}

Point parse_point(std::string_view text) {
  Point p;
  for (auto part : split(text, ',')) p.push_back(parse_number(part, "point"));
  return p;
}

LevelRange parse_levels(std::string_view text) {
  const auto pos = text.find("..");
  if (pos == std::string_view::npos) throw UsageError("malformed level range " + in_quotes(text) + " (expected a..b)");
  LevelRange r;
  r.first = static_cast<int>(parse_integer(text.substr(0, pos), "levels"));
  r.last = static_cast<int>(parse_integer(text.substr(pos + 2), "levels"));
  if (r.first < 0) throw UsageError("level must be ≥ 0");
  if (r.last < r.first) throw UsageError("level range " + in_quotes(text) + " is empty");
  return r;
}

MetricSpec parse_metric(std::string_view text) {
  const auto parts = split(text, ':');
  const auto kind = parts[0];
  if (kind == "euclidean") {
    expect_arity(parts, 1, 1, text, "metric");
    return MetricSpec::euclidean();
  }
  if (kind == "scaled") {
    expect_arity(parts, 2, 2, text, "metric");
    return MetricSpec::scaled(parse_number(parts[1], "metric"));
  }
  if (kind == "snowflake") {
    expect_arity(parts, 2, 2, text, "metric");
    return MetricSpec::snowflake(parse_number(parts[1], "metric"));
  }
  if (kind == "cantor_pullback") {
    expect_arity(parts, 2, 3, text, "metric");
    RankOrder order = RankOrder::index;
    if (parts.size() == 3) {
      if (parts[2] == "lex" || parts[2] == "lexicographic") order = RankOrder::lexicographic;
      else if (parts[2] != "index") throw UsageError("unknown rank order " + in_quotes(parts[2]));
    }
    return MetricSpec::cantor_pullback(static_cast<int>(parse_integer(parts[1], "metric")), order);
  }
  if (kind == "table") {
    const auto body = text.substr(std::min(text.size(), std::size_t{6}));
    Json j;
    try {
      j = Json::parse(body);
    } catch (const std::exception&) {
      throw UsageError("malformed table metric: expected table:<json matrix>");
    }
    return metric_from_json(Json{{"kind", "table"}, {"matrix", j}});
  }
  throw UsageError("unknown metric kind " + in_quotes(kind));
}

Shape parse_shape(std::string_view text) {
  const auto parts = split(text, ':');
  const auto kind = parts[0];
  auto dim_at = [&](std::size_t i) -> std::size_t {
    if (parts.size() <= i) return 1;
    const long long d = parse_integer(parts[i], "shape");
    if (d < 1) throw UsageError("shape dimension must be ≥ 1");
    return static_cast<std::size_t>(d);
  };
  auto ppa_at = [&](std::size_t i) -> std::size_t {
    const long long p = parse_integer(parts[i], "shape");
    if (p < 2) throw UsageError("points-per-axis must be ≥ 2");
    return static_cast<std::size_t>(p);
  };
  if (kind == "cantor") {
    expect_arity(parts, 2, 2, text, "shape");
    return Shape::cantor(static_cast<int>(parse_integer(parts[1], "shape")));
  }
  if (kind == "grid") {
    expect_arity(parts, 4, 5, text, "shape");
    return Shape::cube_grid(parse_number(parts[1], "shape"), parse_number(parts[2], "shape"), ppa_at(3), dim_at(4));
  }
  if (kind == "box") {
    expect_arity(parts, 3, 4, text, "shape");
    return Shape::cube_grid(parse_number(parts[1], "shape"), parse_number(parts[2], "shape"), 2, dim_at(3));
  }
  if (kind == "ball") {
    expect_arity(parts, 3, 4, text, "shape");
    return Shape::ball_grid(parse_number(parts[1], "shape"), ppa_at(2), dim_at(3));
  }
  if (kind == "points") {
    const auto body = text.substr(std::min(text.size(), std::size_t{7}));
    std::vector<Point> pts;
    for (auto p : split(body, ';')) pts.push_back(parse_point(p));
    if (pts.empty() || pts.front().empty()) throw UsageError("malformed shape " + in_quotes(text));
    const std::size_t dim = pts.front().size();
    return Shape::explicit_points(dim, std::move(pts));
  }
  throw UsageError("unknown shape kind " + in_quotes(kind));
}

namespace {

double json_number(const Json& j, const char* key, std::string_view what) {
  if (!j.contains(key)) throw UsageError(std::string(what) + " needs \"" + key + "\"");
  const Json& v = j.at(key);
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return parse_number(v.get<std::string>(), what);
  throw UsageError(std::string(what) + " field \"" + key + "\" must be a number");
}

Point json_point(const Json& j) {
  if (j.is_string()) return parse_point(j.get<std::string>());
  if (j.is_number()) return {j.get<double>()};
  if (!j.is_array()) throw UsageError("point must be an array or \"x,y\" string");
  Point p;
  for (const auto& v : j) {
    if (!v.is_number()) throw UsageError("point coordinates must be numbers");
    p.push_back(v.get<double>());
  }
  return p;
}

}  // namespace

MetricSpec metric_from_json(const Json& j) {
  if (j.is_string()) return parse_metric(j.get<std::string>());
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw UsageError("metric config must be a string or an object with \"kind\"");
  }
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "euclidean") return MetricSpec::euclidean();
  if (kind == "scaled") return MetricSpec::scaled(json_number(j, "scale", "metric"));
  if (kind == "snowflake") return MetricSpec::snowflake(json_number(j, "alpha", "metric"));
  if (kind == "cantor_pullback") {
    RankOrder order = RankOrder::index;
    if (j.contains("order")) {
      const std::string o = j["order"].get<std::string>();
      if (o == "lex" || o == "lexicographic") order = RankOrder::lexicographic;
      else if (o != "index") throw UsageError("unknown rank order " + in_quotes(o));
    }
    return MetricSpec::cantor_pullback(static_cast<int>(json_number(j, "level", "metric")), order);
  }
  if (kind == "table") {
    if (!j.contains("matrix") || !j["matrix"].is_array()) throw UsageError("table metric needs \"matrix\"");
    std::vector<std::vector<double>> m;
    for (const auto& row : j["matrix"]) m.push_back(json_point(row));
    return MetricSpec::from_table(std::move(m));
  }
  throw UsageError("unknown metric kind " + in_quotes(kind));
}

Shape shape_from_json(const Json& j) {
  if (j.is_string()) return parse_shape(j.get<std::string>());
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw UsageError("shape config must be a string or an object with \"kind\"");
  }
  const std::string kind = j["kind"].get<std::string>();
  auto count = [&](const char* key, double fallback) { return j.contains(key) ? json_number(j, key, "shape") : fallback; };
  auto as_size = [](double v, const char* what) {
    if (v < 0 || v != std::floor(v)) throw UsageError(std::string(what) + " must be a nonnegative integer");
    return static_cast<std::size_t>(v);
  };
  if (kind == "cantor") {
    const double level = json_number(j, "level", "shape");
    if (level != std::floor(level)) throw UsageError("cantor level must be an integer");
    return Shape::cantor(static_cast<int>(level));
  }
  if (kind == "grid" || kind == "box") {
    const std::size_t ppa = as_size(count("points_per_axis", 2), "points_per_axis");
    if (j.contains("lower") && j["lower"].is_array()) {
      return Shape::grid(json_point(j["lower"]), json_point(j["upper"]), ppa);
    }
    return Shape::cube_grid(json_number(j, "lower", "shape"), json_number(j, "upper", "shape"), ppa,
                            as_size(count("dim", 1), "dim"));
  }
  if (kind == "ball") {
    return Shape::ball_grid(count("radius", 1.0), as_size(json_number(j, "points_per_axis", "shape"), "points_per_axis"),
                            as_size(count("dim", 2), "dim"));
  }
  if (kind == "points") {
    if (!j.contains("points") || !j["points"].is_array() || j["points"].empty()) {
      throw UsageError("points shape needs a nonempty \"points\" array");
    }
    std::vector<Point> pts;
    for (const auto& p : j["points"]) pts.push_back(json_point(p));
    const std::size_t dim = pts.front().size();
    return Shape::explicit_points(dim, std::move(pts));
  }
  throw UsageError("unknown shape kind " + in_quotes(kind));
}

PlanarDomain parse_domain(std::string_view text) {
  const auto parts = split(text, ':');
  PlanarDomain d;
  if (parts[0] == "disk") {
    expect_arity(parts, 1, 4, text, "domain");
    if (parts.size() == 3) throw UsageError("malformed domain " + in_quotes(text) + " (disk:r:cx:cy)");
    const double r = parts.size() > 1 ? parse_number(parts[1], "domain") : 1.0;
    Vec2 c{};
    if (parts.size() == 4) c = {parse_number(parts[2], "domain"), parse_number(parts[3], "domain")};
    d.boundary = BoundaryDomain::disk(c, r);
    return d;
  }
  if (parts[0] == "box") {
    if (parts.size() == 3) {
      const double lo = parse_number(parts[1], "domain");
      const double hi = parse_number(parts[2], "domain");
      d.boundary = BoundaryDomain::box({lo, lo}, {hi, hi});
      return d;
    }
    expect_arity(parts, 5, 5, text, "domain");
    d.boundary = BoundaryDomain::box({parse_number(parts[1], "domain"), parse_number(parts[2], "domain")},
                                     {parse_number(parts[3], "domain"), parse_number(parts[4], "domain")});
    return d;
  }
  if (parts[0] == "interval") {
    expect_arity(parts, 3, 3, text, "domain");
    d.one_dimensional = true;
    d.a = parse_number(parts[1], "domain");
    d.b = parse_number(parts[2], "domain");
    if (!(d.a < d.b)) throw UsageError("interval needs a < b");
    return d;
  }
  throw UsageError("unknown domain kind " + in_quotes(parts[0]));
}

PlanarMap parse_planar_map(std::string_view text) {
  const auto parts = split(text, ':');
  const auto name = parts[0];
  auto bare = [&] { expect_arity(parts, 1, 1, text, "map"); };
  if (name == "id") {
    bare();
    return [](Vec2 z) { return z; };
  }
  if (name == "square") {
    bare();
    return [](Vec2 z) { return Vec2{z.x * z.x - z.y * z.y, 2.0 * z.x * z.y}; };
  }
  if (name == "cube") {
    bare();
    return [](Vec2 z) {
      const Vec2 sq{z.x * z.x - z.y * z.y, 2.0 * z.x * z.y};
      return Vec2{sq.x * z.x - sq.y * z.y, sq.x * z.y + sq.y * z.x};
    };
  }
  if (name == "conj") {
    bare();
    return [](Vec2 z) { return Vec2{z.x, -z.y}; };
  }
  if (name == "antipodal") {
    bare();
    return [](Vec2 z) { return Vec2{-z.x, -z.y}; };
  }
  if (name == "translate") {
    expect_arity(parts, 3, 3, text, "map");
    const Vec2 shift{parse_number(parts[1], "map"), parse_number(parts[2], "map")};
    return [shift](Vec2 z) { return z + shift; };
  }
  if (name == "scale") {
    expect_arity(parts, 2, 2, text, "map");
    const double c = parse_number(parts[1], "map");
    return [c](Vec2 z) { return c * z; };
  }
  throw UsageError("unknown planar map " + in_quotes(name));
}

std::function<double(double)> parse_line_map(std::string_view text) {
  const auto parts = split(text, ':');
  const auto name = parts[0];
  if (parts.size() == 1) {
    if (name == "id") return [](double x) { return x; };
    if (name == "neg") return [](double x) { return -x; };
    if (name == "square") return [](double x) { return x * x; };
    if (name == "cubic") return [](double x) { return x * x * x - x; };
  }
  if (name == "shift" && parts.size() == 2) {
    const double c = parse_number(parts[1], "map");
    return [c](double x) { return x + c; };
  }
  throw UsageError("unknown interval map " + in_quotes(text));
}

// ---------------------------------------------------------------------------
// Dispatch

namespace {

struct Flag {
  const char* name;
  const char* help;
};

struct CommandSpec {
  const char* name;
  const char* help;
  std::vector<Flag> flags;
};

const std::vector<CommandSpec>& commands() {
  static const std::vector<CommandSpec> table = {
      {"validate", "check the metric axioms on a sampled shape",
       {{"metric", "metric (mini-grammar)"}, {"shape", "point set"}, {"tol", "violation tolerance (1e-12)"}}},
      {"measure", "upper bound for the Hausdorff premeasure",
       {{"metric", "metric (euclidean)"},
        {"shape", "point set"},
        {"s", "exponent"},
        {"delta", "mesh bound"},
        {"level", "use one canonical level instead of delta"}}},
      {"dimension", "box-counting dimension over canonical levels",
       {{"metric", "metric (euclidean)"}, {"shape", "point set"}, {"levels", "level range a..b"}}},
      {"envelope", "inf-convolution of a coordinate field",
       {{"metric", "metric (euclidean)"},
        {"shape", "point set"},
        {"eps", "regularization parameter; searched when absent"},
        {"axis", "coordinate field index, 1-based (1)"},
        {"deviation", "deviation target for the eps search (0.5)"}}},
      {"degree", "Brouwer degree of a built-in map",
       {{"map", "id|square|cube|conj|antipodal|translate:dx:dy|scale:c (interval: id|neg|square|cubic|shift:c)"},
        {"domain", "disk[:r[:cx:cy]] | box:lo:hi | box:x0:y0:x1:y1 | interval:a:b (disk)"},
        {"samples", "initial boundary samples (64)"}}},
      {"verify-theorem", "replay the positivity argument on a ball window",
       {{"metric", "metric"},
        {"n", "dimension, 1 or 2 (2)"},
        {"grid", "points per axis (33)"},
        {"shape", "window override: ball or grid shape"}}},
      {"counterexample", "Cantor pullback measure bounds",
       {{"n", "dimension (1)"}, {"level", "largest level (12)"}, {"max-level", "alias of --level"}}},
      {"snowflake", "dimension scaling under a snowflake metric",
       {{"alpha", "exponent in (0, 1]"}, {"shape", "point set (grid:0:1:2:1)"}, {"levels", "level range (4..12)"}}},
  };
  return table;
}

bool uses_targets(std::string_view command) { return command == "degree" || command == "verify-theorem"; }

class Params {
 public:
  explicit Params(Json merged) : j_(std::move(merged)) {}

  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }
  const Json& raw() const { return j_; }

  const Json& at(const char* key) const {
    if (!has(key)) throw UsageError(std::string("missing required flag --") + key);
    return j_.at(key);
  }

  double number(const char* key) const {
    const Json& v = at(key);
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) return parse_number(v.get<std::string>(), std::string("--") + key);
    throw UsageError(std::string("--") + key + " must be a number");
  }
  double number(const char* key, double fallback) const { return has(key) ? number(key) : fallback; }

  long long integer(const char* key) const {
    const Json& v = at(key);
    if (v.is_number_integer()) return v.get<long long>();
    if (v.is_string()) return parse_integer(v.get<std::string>(), std::string("--") + key);
    throw UsageError(std::string("--") + key + " must be an integer");
  }
  long long integer(const char* key, long long fallback) const { return has(key) ? integer(key) : fallback; }

  std::string text(const char* key) const {
    const Json& v = at(key);
    if (!v.is_string()) throw UsageError(std::string("--") + key + " must be a string");
    return v.get<std::string>();
  }
  std::string text(const char* key, const std::string& fallback) const { return has(key) ? text(key) : fallback; }

  MetricSpec metric() const { return metric_from_json(at("metric")); }
  MetricSpec metric_or_euclidean() const { return has("metric") ? metric() : MetricSpec::euclidean(); }
  Shape shape() const { return shape_from_json(at("shape")); }

  LevelRange levels() const {
    const Json& v = at("levels");
    if (v.is_string()) return parse_levels(v.get<std::string>());
    if (v.is_array() && v.size() == 2 && v[0].is_number_integer() && v[1].is_number_integer()) {
      return parse_levels(std::to_string(v[0].get<int>()) + ".." + std::to_string(v[1].get<int>()));
    }
    throw UsageError("--levels must look like a..b");
  }

  std::vector<Point> targets() const {
    std::vector<Point> out;
    if (!has("target")) return out;
    const Json& v = j_.at("target");
    if (v.is_array() && !v.empty() && v[0].is_number()) {
      out.push_back(json_point(v));
    } else if (v.is_array()) {
      for (const auto& t : v) out.push_back(json_point(t));
    } else {
      out.push_back(json_point(v));
    }
    return out;
  }

 private:
  Json j_;
};

std::size_t positive_size(long long v, const char* what) {
  if (v < 1) throw UsageError(std::string(what) + " must be ≥ 1");
  return static_cast<std::size_t>(v);
}

struct Outcome {
  Json result;
  int status = 0;
  std::vector<std::pair<std::string, std::string>> csv;  // suffix, content
};

template <typename Fn>
std::string csv_text(Fn&& write) {
  std::ostringstream os;
  write(os);
  return os.str();
}

Outcome run_validate(const Params& p) {
  const MetricSpec metric = p.metric();
  const Shape shape = p.shape();
  const double tol = p.number("tol", 1e-12);
  if (!(tol >= 0.0)) throw UsageError("--tol must be ≥ 0");
  const MetricReport report = validate_metric(metric, make_cloud(shape), tol);
  Outcome o;
  o.result = Json{{"metric", io::to_json(metric)}, {"shape", io::to_json(shape)}, {"report", io::to_json(report)}};
  o.status = report.passed ? 0 : 1;
  return o;
}

Outcome run_measure(const Params& p) {
  const Shape shape = p.shape();
  const MetricSpec metric = p.metric_or_euclidean();
  const double s = p.number("s");
  Outcome o;
  if (p.has("level")) {
    if (shape.kind == ShapeKind::explicit_list) throw UsageError("--level needs a canonical shape");
    const long long level = p.integer("level");
    if (level < 0) throw UsageError("level must be ≥ 0");
    if (!(s >= 0.0)) throw UsageError("exponent s must be ≥ 0");
    const LevelSummary summary = summarize_level(shape, static_cast<int>(level), metric);
    MeasureEstimate est;
    est.s = s;
    est.delta = summary.mesh;
    est.value = summary.power_sum(s);
    est.level = summary.level;
    est.blocks = summary.count;
    est.mesh = summary.mesh;
    est.cover_id = shape.describe() + "/level=" + std::to_string(level);
    est.family = "canonical level " + std::to_string(level);
    o.result = io::to_json(est);
  } else {
    o.result = io::to_json(premeasure_upper(shape, metric, s, p.number("delta")));
  }
  return o;
}

Outcome run_dimension(const Params& p) {
  const Shape shape = p.shape();
  const MetricSpec metric = p.metric_or_euclidean();
  const DimensionEstimate est = box_counting_dimension(shape, metric, p.levels());
  Outcome o;
  o.result = io::to_json(est);
  o.csv.emplace_back("scales", csv_text([&](std::ostream& os) { io::write_scales_csv(os, est.scales); }));
  return o;
}

Outcome run_envelope(const Params& p) {
  const Shape shape = p.shape();
  const MetricSpec metric = p.metric_or_euclidean();
  const CloudPtr cloud = make_cloud(shape);
  const long long axis = p.integer("axis", 1);
  if (axis < 1 || axis > static_cast<long long>(cloud->dim())) {
    throw UsageError("--axis must lie in 1.." + std::to_string(cloud->dim()));
  }
  const auto fields = coordinate_fields(cloud);
  Outcome o;
  double eps = 0.0;
  std::vector<DeviationPoint> curve;
  if (p.has("eps")) {
    eps = p.number("eps");
    if (!(eps > 0.0)) throw UsageError("--eps must be > 0");
    curve = deviation_curve(fields, metric, eps_probe_grid());
  } else {
    const double target = p.number("deviation", 0.5);
    if (!(target >= 0.0)) throw UsageError("--deviation must be ≥ 0");
    const EpsHat hat = find_eps_hat(fields, metric, target);
    eps = hat.eps_hat;
    curve = hat.curve;
    o.result["eps_hat"] = io::to_json(hat);
  }
  const Metric bound(metric, cloud);
  const DistanceMatrix distances(bound);
  const EnvelopeResult env = inf_convolution(fields[static_cast<std::size_t>(axis - 1)], distances, eps);
  o.result["lipschitz_violation"] = lipschitz_check(env);
  o.result["envelope"] = io::to_json(env);
  o.result["deviation_curve"] = io::to_json(curve);
  o.csv.emplace_back("deviation", csv_text([&](std::ostream& os) { io::write_deviation_csv(os, curve); }));
  return o;
}

Outcome run_degree(const Params& p) {
  const PlanarDomain domain = parse_domain(p.text("domain", "disk"));
  const std::string map_name = p.text("map");
  std::vector<Point> targets = p.targets();
  Outcome o;
  o.result["map"] = map_name;
  Json results = Json::array();
  if (domain.one_dimensional) {
    if (targets.empty()) targets.push_back({0.0});
    const auto f = parse_line_map(map_name);
    const double fa = f(domain.a);
    const double fb = f(domain.b);
    o.result["domain"] = "interval(" + io::format_double(domain.a) + "," + io::format_double(domain.b) + ")";
    for (const auto& y : targets) {
      if (y.size() != 1) throw UsageError("interval targets take one coordinate");
      results.push_back(Json{{"target", Json::array({y[0]})},
                             {"degree", degree_1d(fa, fb, y[0])},
                             {"f_a", fa},
                             {"f_b", fb}});
    }
  } else {
    if (targets.empty()) targets.push_back({0.0, 0.0});
    const PlanarMap f = parse_planar_map(map_name);
    const std::size_t samples = positive_size(p.integer("samples", 64), "--samples");
    o.result["domain"] = domain.boundary.describe();
    for (const auto& y : targets) {
      if (y.size() != 2) throw UsageError("planar targets take two coordinates");
      results.push_back(io::to_json(map_degree_2d(f, domain.boundary, {y[0], y[1]}, samples)));
    }
    const BoundaryLoop loop = sample_boundary(f, domain.boundary, samples);
    o.csv.emplace_back("boundary", csv_text([&](std::ostream& os) { io::write_loop_csv(os, loop); }));
  }
  o.result["results"] = results;
  return o;
}

Outcome run_verify(const Params& p) {
  const MetricSpec metric = p.metric();
  TheoremReport report;
  if (p.has("shape")) {
    const Shape window = p.shape();
    std::vector<Point> targets = p.targets();
    if (targets.empty()) targets = default_targets(window);
    report = verify_main_theorem(metric, window, targets);
  } else {
    const long long n = p.integer("n", 2);
    if (n < 1 || n > 2) throw UsageError("--n must be 1 or 2");
    const long long grid = p.integer("grid", 33);
    if (grid < 2) throw UsageError("points-per-axis must be ≥ 2");
    const Shape window = Shape::ball_grid(1.0, static_cast<std::size_t>(grid), static_cast<std::size_t>(n));
    std::vector<Point> targets = p.targets();
    if (targets.empty()) targets = default_targets(window);
    report = verify_main_theorem(metric, window, targets);
  }
  Outcome o;
  o.result = io::to_json(report);
  o.status = report.consistent ? 0 : 1;
  o.csv.emplace_back("deviation", csv_text([&](std::ostream& os) { io::write_deviation_csv(os, report.eps.curve); }));
  o.csv.emplace_back("ladder", csv_text([&](std::ostream& os) { io::write_ladder_csv(os, report.measure_rho); }));
  return o;
}

Outcome run_counterexample(const Params& p) {
  const std::size_t n = positive_size(p.integer("n", 1), "--n");
  long long level = 12;
  if (p.has("level")) level = p.integer("level");
  else if (p.has("max-level")) level = p.integer("max-level");
  if (level < 0) throw UsageError("level must be ≥ 0");
  const CounterexampleReport report = cantor_counterexample(n, static_cast<int>(level));
  Outcome o;
  o.result = io::to_json(report);
  o.status = report.strictly_decreasing && report.max_transport_error <= 1e-12 ? 0 : 1;
  return o;
}

Outcome run_snowflake(const Params& p) {
  const double alpha = p.number("alpha");
  const Shape shape = p.has("shape") ? p.shape() : Shape::cube_grid(0.0, 1.0, 2, 1);
  const LevelRange levels = p.has("levels") ? p.levels() : LevelRange{4, 12};
  const SnowflakeReport report = snowflake_dimension_report(alpha, shape, levels);
  Outcome o;
  o.result = io::to_json(report);
  o.status = report.consistent ? 0 : 1;
  o.csv.emplace_back("scales", csv_text([&](std::ostream& os) {
                       os << "level,delta,count\n";
                       for (const auto& s : report.snowflake.scales) {
                         os << s.level << ',' << io::format_double(s.delta) << ',' << io::format_double(s.count)
                            << '\n';
                       }
                     }));
  return o;
}

Outcome dispatch(const std::string& command, const Params& p) {
  if (command == "validate") return run_validate(p);
  if (command == "measure") return run_measure(p);
  if (command == "dimension") return run_dimension(p);
  if (command == "envelope") return run_envelope(p);
  if (command == "degree") return run_degree(p);
  if (command == "verify-theorem") return run_verify(p);
  if (command == "counterexample") return run_counterexample(p);
  if (command == "snowflake") return run_snowflake(p);
  throw UsageError("unknown command " + in_quotes(command));
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

Json read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config " + in_quotes(path));
  Json j;
  try {
    j = Json::parse(in);
  } catch (const std::exception& e) {
    throw UsageError("config " + in_quotes(path) + " is not valid JSON");
  }
  if (!j.is_object()) throw UsageError("config " + in_quotes(path) + " must hold a JSON object");
  return j;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hausdorff measure, envelope and degree numerics", kToolName};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  struct Bound {
    CLI::App* sub;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;
    std::vector<std::string> targets;
    CLI::Option* target_opt = nullptr;
    std::string config;
    std::string out_path;
    bool no_meta = false;
  };
  std::vector<std::unique_ptr<Bound>> bound;
  for (const auto& spec : commands()) {
    auto b = std::make_unique<Bound>();
    b->sub = app.add_subcommand(spec.name, spec.help);
    for (const auto& f : spec.flags) {
      auto& slot = b->values[f.name];
      b->options[f.name] = b->sub->add_option(std::string("--") + f.name, slot, f.help);
    }
    if (uses_targets(spec.name)) {
      b->target_opt = b->sub->add_option("--target", b->targets, "target point x[,y] (repeatable)")
                          ->allow_extra_args(false);
    }
    b->sub->add_option("--config", b->config, "JSON config; flags take precedence");
    b->sub->add_option("--out", b->out_path, "JSON report path (standard output when absent)");
    b->sub->add_flag("--no-meta", b->no_meta, "omit the metadata block");
    bound.push_back(std::move(b));
  }

  if (!args.empty() && !args.front().starts_with("-")) {
    const auto& names = commands();
    if (std::none_of(names.begin(), names.end(), [&](const auto& c) { return args.front() == c.name; })) {
      err << "error: unknown command '" << args.front() << "'\n";
      return 2;
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << one_line(e.what()) << '\n';
    return 2;
  }

  Bound* active = nullptr;
  for (auto& b : bound) {
    if (b->sub->parsed()) active = b.get();
  }
  if (active == nullptr) {
    err << "error: a command is required\n";
    return 2;
  }
  const std::string command = active->sub->get_name();

  Outcome outcome;
  Json params;
  try {
    Json merged = Json::object();
    if (!active->config.empty()) merged = read_config(active->config);
    for (const auto& [name, opt] : active->options) {
      if (opt->count() > 0) merged[name] = active->values.at(name);
    }
    if (active->target_opt && active->target_opt->count() > 0) {
      Json t = Json::array();
      for (const auto& s : active->targets) t.push_back(s);
      merged["target"] = t;
    }
    params = merged;
    outcome = dispatch(command, Params(std::move(merged)));
  } catch (const UsageError& e) {
    err << "error: " << one_line(e.what()) << '\n';
    return 2;
  } catch (const InvalidArgument& e) {
    err << "error: " << one_line(e.what()) << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << one_line(e.what()) << '\n';
    return 1;
  }

  Json doc;
  doc["command"] = command;
  doc["params"] = params;
  doc["status"] = outcome.status;
  doc["result"] = std::move(outcome.result);
  if (!active->no_meta) {
    Json argv = Json::array();
    for (const auto& a : args) argv.push_back(a);
    doc["meta"] = Json{{"tool", kToolName}, {"version", kVersion}, {"generated_at", utc_timestamp()}, {"argv", argv}};
  }
  const std::string text = io::dump(doc);

  if (active->out_path.empty()) {
    out << text;
  } else {
    namespace fs = std::filesystem;
    const fs::path path(active->out_path);
    std::ofstream file(path, std::ios::binary);
    if (!file) {
      err << "error: cannot write " << in_quotes(active->out_path) << '\n';
      return 1;
    }
    file << text;
    fs::path stem = path;
    if (stem.extension() == ".json") stem.replace_extension();
    for (const auto& [suffix, content] : outcome.csv) {
      std::ofstream csv(stem.string() + "." + suffix + ".csv", std::ios::binary);
      if (!csv) {
        err << "error: cannot write CSV next to " << in_quotes(active->out_path) << '\n';
        return 1;
      }
      csv << content;
    }
  }
  return outcome.status;
}

}  // namespace hlab::cli
