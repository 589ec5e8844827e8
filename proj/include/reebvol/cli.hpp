#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "reebvol/error.hpp"
#include "reebvol/invariants.hpp"

namespace reebvol::cli {

struct SpecOptions {
  std::vector<unsigned long> m_grid{25, 50, 100, 200, 400};
  unsigned long t_max = 200;
  Rational tolerance{1, 100};
  std::vector<Rational> homogeneity{Rational(1, 3), Rational(2), Rational(7, 2)};
  std::optional<int> decimal;
  bool ceiling = false;
  bool clamp = false;
};

struct ProblemSpec {
  PolarizedToricSetup setup;
  SpecOptions options;
};

/// Parses and validates a problem specification. Every failure is an Error
/// whose field() names the JSON path ("xi", "filtration.branches[1]", ...);
/// malformed JSON is Error(Parse) with the parser's line/column message.
/// `force_clamp` applies clamp mode before validation.
ProblemSpec parse_spec(std::string_view text, bool force_clamp = false);

using Json = nlohmann::ordered_json;

Json rational_json(const Rational& r, int digits);
Json to_json(const Cone& c);
Json to_json(const Polytope& p);
Json to_json(const PLConcave& f);
Json to_json(const InvariantReport& r, int digits);

/// Rebuilds rank, exact values, traces, verdicts and notes from report JSON.
InvariantReport report_from_json(const nlohmann::json& j);

/// RFC 4180 field quoting.
std::string csv_field(std::string_view s);

/// 2 for Error(Parse), 3 otherwise. `run` also maps every error raised while
/// reading the spec and flags to 2.
int exit_code(const Error& e);

/// Runs one command line (args exclude the program name). A spec path of
/// "-" reads `in`. Output is written only once it is complete. Exit status:
/// 0 ok, 2 bad input, 3 mathematical failure, 4 failed gating verdict.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace reebvol::cli
