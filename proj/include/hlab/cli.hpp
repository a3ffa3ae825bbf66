#pragma once

// Command-line front end. Mini-grammar for flags:
//   metric  euclidean | scaled:c | snowflake:a | cantor_pullback:L[:index|:lex] | table:<json matrix>
//   shape   cantor:L | grid:lo:hi:ppa[:dim] | ball:r:ppa[:dim] | box:lo:hi[:dim] | points:x,y;x,y;...
//   domain  disk[:r[:cx:cy]] | box:lo:hi | box:x0:y0:x1:y1 | interval:a:b
//   levels  a..b
//   point   x[,y,...]
// The JSON config accepts the same strings or structured objects such as
// {"metric": {"kind": "snowflake", "alpha": 0.5}}.

#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "hlab/covers.hpp"
#include "hlab/degree.hpp"
#include "hlab/metric.hpp"
#include "hlab/serialize.hpp"

namespace hlab::cli {

inline constexpr const char* kToolName = "hlab";
inline constexpr const char* kVersion = "1.0.0";

/// Bad flags, grammar or missing parameters; maps to exit status 2.
class UsageError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

double parse_number(std::string_view text, std::string_view what);
long long parse_integer(std::string_view text, std::string_view what);
Point parse_point(std::string_view text);
LevelRange parse_levels(std::string_view text);

MetricSpec parse_metric(std::string_view text);
Shape parse_shape(std::string_view text);
MetricSpec metric_from_json(const io::Json& j);
Shape shape_from_json(const io::Json& j);

struct PlanarDomain {
  bool one_dimensional = false;
  double a = 0.0, b = 1.0;  // interval
  BoundaryDomain boundary = BoundaryDomain::disk({0.0, 0.0}, 1.0);
};
PlanarDomain parse_domain(std::string_view text);
PlanarMap parse_planar_map(std::string_view text);
std::function<double(double)> parse_line_map(std::string_view text);

/// args excludes the program name. Returns 0 on success or consistent
/// verdicts, 1 on a failed verdict or computation, 2 on usage errors.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hlab::cli
