#pragma once

// JSON and CSV forms of the report types. Doubles are written with 17
// significant digits; NaN and infinities become null.

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "hlab/covers.hpp"
#include "hlab/degree.hpp"
#include "hlab/envelope.hpp"
#include "hlab/metric.hpp"
#include "hlab/pipelines.hpp"

namespace hlab::io {

using Json = nlohmann::ordered_json;

Json to_json(const MetricSpec& spec);
Json to_json(const Shape& shape);
Json to_json(const MetricReport& report);
Json to_json(const Cover& cover);
Json to_json(const MeasureEstimate& estimate);
Json to_json(const DimensionEstimate& estimate);
Json to_json(const EnvelopeResult& envelope);
Json to_json(const std::vector<DeviationPoint>& curve);
Json to_json(const EpsHat& eps);
Json to_json(const DegreeResult& result);
Json to_json(const HomotopyScan& scan);
Json to_json(const Preimage& preimage);
Json to_json(const TheoremReport& report);
Json to_json(const CounterexampleReport& report);
Json to_json(const SnowflakeReport& report);

/// "%.17g"; non-finite values as "nan", "inf", "-inf".
std::string format_double(double v);

/// Deterministic text form of a JSON document (2-space indent, trailing newline).
std::string dump(const Json& doc);

// CSV side files; headers are fixed.
void write_deviation_csv(std::ostream& os, const std::vector<DeviationPoint>& curve);  // eps,sup_deviation
void write_scales_csv(std::ostream& os, const std::vector<ScaleSample>& scales);        // level,delta,count
void write_loop_csv(std::ostream& os, const BoundaryLoop& loop);                        // t,x1,x2,f1,f2
void write_ladder_csv(std::ostream& os, const std::vector<MeasureEstimate>& ladder);    // delta,s,value,level

}  // namespace hlab::io
