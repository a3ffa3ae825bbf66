#include "hlab/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace hlab::io {

namespace {

const char* kind_name(MetricKind k) {
  switch (k) {
    case MetricKind::euclidean: return "euclidean";
    case MetricKind::scaled: return "scaled";
    case MetricKind::snowflake: return "snowflake";
    case MetricKind::cantor_pullback: return "cantor_pullback";
    case MetricKind::table: return "table";
  }
  return "?";
}

Json point_json(std::span<const double> p) {
  Json a = Json::array();
  for (double v : p) a.push_back(v);
  return a;
}

Json vec2_json(Vec2 v) { return Json::array({v.x, v.y}); }

bool scalar(const Json& j) { return !j.is_object() && !j.is_array(); }

void write_value(std::string& out, const Json& j, int depth) {
  const std::string pad(static_cast<std::size_t>(depth + 1) * 2, ' ');
  const std::string close_pad(static_cast<std::size_t>(depth) * 2, ' ');
  switch (j.type()) {
    case Json::value_t::null: out += "null"; return;
    case Json::value_t::boolean: out += j.get<bool>() ? "true" : "false"; return;
    case Json::value_t::number_integer: out += std::to_string(j.get<std::int64_t>()); return;
    case Json::value_t::number_unsigned: out += std::to_string(j.get<std::uint64_t>()); return;
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? format_double(v) : "null";
      return;
    }
    case Json::value_t::string: out += j.dump(); return;
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      const bool flat = std::all_of(j.begin(), j.end(), scalar);
      out += "[";
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += ",";
        first = false;
        if (flat) {
          if (out.back() == ',') out += " ";
        } else {
          out += "\n" + pad;
        }
        write_value(out, v, depth + 1);
      }
      if (!flat) out += "\n" + close_pad;
      out += "]";
      return;
    }
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        out += first ? "\n" : ",\n";
        first = false;
        out += pad + Json(it.key()).dump() + ": ";
        write_value(out, it.value(), depth + 1);
      }
      out += "\n" + close_pad + "}";
      return;
    }
    default: out += "null"; return;
  }
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string dump(const Json& doc) {
  std::string out;
  write_value(out, doc, 0);
  out += "\n";
  return out;
}

Json to_json(const MetricSpec& spec) {
  Json j;
  j["kind"] = kind_name(spec.kind);
  switch (spec.kind) {
    case MetricKind::scaled: j["scale"] = spec.scale; break;
    case MetricKind::snowflake: j["alpha"] = spec.alpha; break;
    case MetricKind::cantor_pullback:
      j["level"] = spec.level;
      j["order"] = spec.order == RankOrder::index ? "index" : "lex";
      break;
    case MetricKind::table: {
      Json rows = Json::array();
      for (const auto& r : spec.table) rows.push_back(point_json(r));
      j["matrix"] = rows;
      break;
    }
    default: break;
  }
  j["describe"] = spec.describe();
  return j;
}

Json to_json(const Shape& shape) {
  Json j;
  switch (shape.kind) {
    case ShapeKind::cantor:
      j["kind"] = "cantor";
      j["level"] = shape.level;
      break;
    case ShapeKind::grid:
      j["kind"] = "grid";
      j["lower"] = point_json(shape.lower);
      j["upper"] = point_json(shape.upper);
      j["points_per_axis"] = shape.points_per_axis;
      break;
    case ShapeKind::ball_grid:
      j["kind"] = "ball";
      j["radius"] = shape.radius;
      j["points_per_axis"] = shape.points_per_axis;
      j["dim"] = shape.dim;
      break;
    case ShapeKind::explicit_list: {
      j["kind"] = "points";
      Json pts = Json::array();
      for (const auto& p : shape.points) pts.push_back(point_json(p));
      j["points"] = pts;
      break;
    }
  }
  j["describe"] = shape.describe();
  return j;
}

Json to_json(const MetricReport& r) {
  Json j;
  j["passed"] = r.passed;
  j["tolerance"] = r.tolerance;
  j["symmetry_violation"] = r.symmetry_violation;
  j["triangle_violation"] = r.triangle_violation;
  j["self_distance_max"] = r.self_distance_max;
  j["min_off_diagonal"] = r.min_off_diagonal;
  j["pairs_checked"] = r.pairs_checked;
  j["triples_checked"] = r.triples_checked;
  j["exhaustive_pairs"] = r.exhaustive_pairs;
  j["exhaustive_triples"] = r.exhaustive_triples;
  j["worst_triple"] = Json::array({r.worst_triple[0], r.worst_triple[1], r.worst_triple[2]});
  return j;
}

Json to_json(const Cover& cover) {
  Json j;
  j["id"] = cover.id;
  j["metric"] = to_json(cover.metric);
  j["delta"] = cover.delta;
  j["cloud_size"] = cover.cloud_size;
  Json blocks = Json::array();
  for (std::size_t b = 0; b < cover.blocks.size(); ++b) {
    Json block;
    block["members"] = cover.blocks[b];
    block["diameter"] = cover.diameters[b];
    blocks.push_back(block);
  }
  j["blocks"] = blocks;
  return j;
}

Json to_json(const MeasureEstimate& e) {
  Json j;
  j["s"] = e.s;
  j["delta"] = e.delta;
  j["value"] = e.value;
  j["is_upper_bound"] = e.is_upper_bound;
  j["cover_id"] = e.cover_id;
  j["family"] = e.family;
  j["level"] = e.level;
  j["blocks"] = e.blocks;
  j["mesh"] = e.mesh;
  return j;
}

Json to_json(const DimensionEstimate& e) {
  Json j;
  j["dim"] = e.dim;
  j["intercept"] = e.intercept;
  j["r_squared"] = e.r_squared;
  j["reliable"] = e.reliable;
  Json scales = Json::array();
  for (const auto& s : e.scales) scales.push_back(Json{{"level", s.level}, {"delta", s.delta}, {"count", s.count}});
  j["scales"] = scales;
  return j;
}

Json to_json(const EnvelopeResult& env) {
  Json j;
  j["field"] = env.field.name;
  j["metric"] = to_json(env.metric.spec());
  j["eps"] = env.eps;
  j["lipschitz_bound"] = env.lipschitz_bound;
  Json pts = Json::array();
  for (std::size_t i = 0; i < env.values.size(); ++i) {
    Json p;
    if (env.field.cloud) p["x"] = point_json((*env.field.cloud)[i]);
    p["f"] = env.field.values[i];
    p["value"] = env.values[i];
    p["witness"] = env.witnesses[i];
    pts.push_back(p);
  }
  j["points"] = pts;
  return j;
}

Json to_json(const std::vector<DeviationPoint>& curve) {
  Json a = Json::array();
  for (const auto& p : curve) a.push_back(Json{{"eps", p.eps}, {"sup_deviation", p.deviation}});
  return a;
}

Json to_json(const EpsHat& e) {
  Json j;
  j["eps_hat"] = e.eps_hat;
  j["deviation"] = e.deviation;
  j["curve"] = to_json(e.curve);
  return j;
}

Json to_json(const DegreeResult& r) {
  Json j;
  j["target"] = vec2_json(r.target);
  j["degree"] = r.degree;
  j["winding_sum"] = r.winding_sum;
  j["integer_error"] = std::abs(r.winding_sum - r.degree);
  j["certified"] = r.certified;
  j["min_boundary_gap"] = r.min_boundary_gap;
  j["max_increment"] = r.max_increment;
  j["arcs"] = r.arcs;
  j["refinements"] = r.refinements;
  return j;
}

Json to_json(const HomotopyScan& scan) {
  Json j;
  j["verdict"] = scan.verdict_text();
  if (scan.first_failure_t) j["first_failure_t"] = *scan.first_failure_t;
  Json steps = Json::array();
  for (const auto& s : scan.steps) {
    Json step;
    step["t"] = s.t;
    if (s.result) {
      step["degree"] = s.result->degree;
      step["winding_sum"] = s.result->winding_sum;
      step["min_boundary_gap"] = s.result->min_boundary_gap;
    } else {
      step["failure"] = s.failure;
    }
    steps.push_back(step);
  }
  j["steps"] = steps;
  return j;
}

Json to_json(const Preimage& p) {
  Json j;
  j["found"] = p.found;
  j["index"] = p.index;
  j["witness"] = point_json(p.witness);
  j["residual"] = p.residual;
  return j;
}

Json to_json(const TheoremReport& r) {
  Json j;
  j["metric"] = to_json(r.metric);
  j["n"] = r.n;
  j["window"] = to_json(r.window);
  j["cloud_size"] = r.cloud_size;
  j["mesh"] = r.mesh;
  j["metric_report"] = to_json(r.metric_report);
  j["deviation_target"] = r.deviation_target;
  j["eps_hat"] = r.eps.eps_hat;
  j["eps_hat_deviation"] = r.eps.deviation;
  j["deviation_curve"] = to_json(r.eps.curve);
  j["lipschitz_constant"] = r.lipschitz_constant;
  j["degree_boundary"] = r.degree_boundary;
  Json degrees = Json::array();
  for (const auto& d : r.degrees) {
    Json e;
    e["target"] = point_json(d.target);
    e["degree"] = d.degree;
    e["certified"] = d.certified;
    e["degrees_along_homotopy"] = d.degrees_along;
    e["homotopy"] = d.homotopy_verdict;
    e["min_boundary_gap"] = d.min_boundary_gap;
    e["max_integer_error"] = d.max_integer_error;
    degrees.push_back(e);
  }
  j["degrees"] = degrees;
  j["preimage_tolerance"] = r.preimage_tolerance;
  Json pre = Json::array();
  for (const auto& p : r.preimages) {
    Json e = to_json(p.preimage);
    pre.push_back(Json{{"target", point_json(p.target)},
                       {"found", e["found"]},
                       {"witness", e["witness"]},
                       {"residual", e["residual"]}});
  }
  j["preimages"] = pre;
  Json ladder = Json::array();
  for (const auto& m : r.measure_rho) ladder.push_back(to_json(m));
  j["measure_rho"] = ladder;
  j["ladder_nondecreasing"] = r.ladder_nondecreasing;
  j["lipschitz_image_bound"] = r.lipschitz_image_bound;
  j["consistent"] = r.consistent;
  j["verdict"] = r.verdict;
  return j;
}

Json to_json(const CounterexampleReport& r) {
  Json j;
  j["n"] = r.n;
  j["sample_level"] = r.sample_level;
  j["window_points"] = r.window_points;
  j["pairing"] = r.pairing;
  Json levels = Json::array();
  Json bounds = Json::array();
  for (const auto& l : r.levels) {
    levels.push_back(Json{{"level", l.level},
                          {"blocks", l.blocks},
                          {"block_diameter", l.block_diameter},
                          {"upper_bound", l.upper_bound},
                          {"occupied_blocks", l.occupied_blocks},
                          {"transport_error", l.transport_error}});
    bounds.push_back(l.upper_bound);
  }
  j["levels"] = levels;
  j["upper_bounds"] = bounds;
  j["max_transport_error"] = r.max_transport_error;
  j["strictly_decreasing"] = r.strictly_decreasing;
  return j;
}

Json to_json(const SnowflakeReport& r) {
  Json j;
  j["alpha"] = r.alpha;
  j["shape"] = to_json(r.shape);
  j["euclidean"] = to_json(r.euclidean);
  j["snowflake"] = to_json(r.snowflake);
  j["ratio"] = r.ratio;
  j["expected_ratio"] = r.expected_ratio;
  j["ratio_relative_error"] = r.ratio_relative_error;
  Json transport = Json::array();
  for (const auto& t : r.transport) {
    transport.push_back(Json{{"level", t.level},
                             {"s", t.s},
                             {"delta", t.delta},
                             {"euclidean_value", t.euclidean_value},
                             {"snowflake_value", t.snowflake_value},
                             {"relative_error", t.relative_error}});
  }
  j["transport"] = transport;
  j["max_transport_error"] = r.max_transport_error;
  j["consistent"] = r.consistent;
  return j;
}

void write_deviation_csv(std::ostream& os, const std::vector<DeviationPoint>& curve) {
  os << "eps,sup_deviation\n";
  for (const auto& p : curve) os << format_double(p.eps) << ',' << format_double(p.deviation) << '\n';
}

void write_scales_csv(std::ostream& os, const std::vector<ScaleSample>& scales) {
  os << "level,delta,count\n";
  for (const auto& s : scales) os << s.level << ',' << format_double(s.delta) << ',' << format_double(s.count) << '\n';
}

void write_loop_csv(std::ostream& os, const BoundaryLoop& loop) {
  os << "t,x1,x2,f1,f2\n";
  for (const auto& s : loop.samples) {
    os << format_double(s.t) << ',' << format_double(s.domain.x) << ',' << format_double(s.domain.y) << ','
       << format_double(s.image.x) << ',' << format_double(s.image.y) << '\n';
  }
}

void write_ladder_csv(std::ostream& os, const std::vector<MeasureEstimate>& ladder) {
  os << "delta,s,value,level\n";
  for (const auto& m : ladder) {
    os << format_double(m.delta) << ',' << format_double(m.s) << ',' << format_double(m.value) << ',' << m.level
       << '\n';
  }
}

}  // namespace hlab::io
