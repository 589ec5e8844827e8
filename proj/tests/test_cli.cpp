#include <cstdlib>
#include <random>
#include <sstream>

#include "doctest.h"
#include "reebvol/cli.hpp"
#include "test_support.hpp"

using namespace reebvol;
using namespace reebvol::test;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args, const std::string& spec) {
  std::istringstream in(spec);
  std::ostringstream out, err;
  const int code = cli::run(args, in, out, err);
  return {code, out.str(), err.str()};
}

const std::string orthant12 = R"({"rank": 2, "sigma_rays": [["1","0"],["0","1"]], "xi": ["1","2"]})";
const std::string anchor = R"({"rank": 2, "sigma_rays": [["1","0"],["0","1"]], "xi": ["1","1"], "eta": ["1","0"]})";
const std::string min_orthant = R"({
  "rank": 2, "sigma_rays": [[1,0],[0,1]], "xi": ["1","1"],
  "filtration": {"branches": [{"linear": ["1","0"], "constant": "0"}, {"linear": ["0","1"]}]}
})";
const std::string rank3 = R"({
  "rank": 3, "sigma_rays": [[1,0,0],[0,1,0],[0,0,1]], "xi": ["1","2","3"],
  "filtration": {"branches": [{"linear": [1,0,0]}, {"linear": [0,1,1], "constant": "1"}]}
})";

Error parse_error(const std::string& text) {
  try {
    cli::parse_spec(text);
  } catch (const Error& e) {
    return e;
  }
  FAIL("expected a parse failure for " << text);
  return Error(ErrorCode::Parse, "unreachable");
}

// Independent RFC 4180 record splitter for one line set.
std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows(1);
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      rows.back().push_back(field);
      field.clear();
    } else if (c == '\n') {
      rows.back().push_back(field);
      field.clear();
      rows.emplace_back();
    } else {
      field += c;
    }
  }
  if (rows.back().empty()) rows.pop_back();
  return rows;
}

}  // namespace

TEST_CASE("parse_spec accepts a minimal orthant") {
  const cli::ProblemSpec s = cli::parse_spec(R"({"rank": 2, "sigma_rays": [["1","0"],["0","1"]], "xi": ["1","1"]})");
  CHECK(s.setup.sigma == orthant(2));
  CHECK(s.setup.xi == vec({1, 1}));
  CHECK_FALSE(s.setup.eta);
  CHECK_FALSE(s.setup.psi);
  CHECK(s.options.m_grid == std::vector<unsigned long>{25, 50, 100, 200, 400});
  CHECK(s.options.tolerance == q(1, 100));

  const cli::ProblemSpec t = cli::parse_spec(rank3);
  REQUIRE(t.setup.psi);
  CHECK(t.setup.psi->branches()[1].constant == 1);
}

TEST_CASE("parse diagnostics name the field") {
  Error e = parse_error(R"({"rank": 2, "sigma_rays": [["1","0"],["0","1"]], "xi": ["1","-1"]})");
  CHECK(e.code() == ErrorCode::NotReebField);
  CHECK(e.field() == "xi");

  e = parse_error(R"({"rank": 2, "sigma_rays": [[1,0],[0,1]], "xi": [1,1],
    "filtration": {"branches": [{"linear": [1,0]}, {"linear": [1,0,0]}]}})");
  CHECK(e.code() == ErrorCode::Dimension);
  CHECK(e.field() == "filtration.branches[1]");

  e = parse_error(R"({"rank": 2, "sigma_rays": [[1,0],[0,1]], "xi": [1,1)");
  CHECK(e.code() == ErrorCode::Parse);
  CHECK(std::string(e.what()).find("line 1") != std::string::npos);

  e = parse_error(R"({"rank": 2, "sigma_rays": [[1,0],[0,1]], "xi": [1, 0.5]})");
  CHECK(e.field() == "xi[1]");
  e = parse_error(R"({"rank": 2, "sigma_rays": [[1,0],[0,1]], "xi": [1,"1/0"]})");
  CHECK(e.field() == "xi[1]");
  e = parse_error(R"({"rank": 2, "sigma_rays": [[1,0],[0,1,2]], "xi": [1,1]})");
  CHECK(e.field() == "sigma_rays[1]");
  e = parse_error(R"({"rank": 2, "sigma_rays": [[1,0],[-1,0]], "xi": [1,1]})");
  CHECK(e.field() == "sigma_rays");
  e = parse_error(R"({"rank": 2, "sigma_rays": [[1,0],[0,1]], "xi": [1,1], "eta": [1]})");
  CHECK(e.field() == "eta");
  e = parse_error(R"({"rank": 2, "sigma_rays": [[1,0],[0,1]], "xi": [1,1], "colour": 3})");
  CHECK(e.field() == "colour");
  e = parse_error(R"({"rank": 2, "sigma_rays": [[1,0],[0,1]], "xi": [1,1], "options": {"m_grid": [0]}})");
  CHECK(e.field() == "options.m_grid[0]");
  e = parse_error(R"({"rank": 2, "sigma_rays": [[1,0],[0,1]], "xi": [1,1], "basis": [[2,0],[0,1]]})");
  CHECK(e.field() == "basis");
  e = parse_error(R"({"rank": 2, "sigma_rays": [[1,0],[0,1]], "xi": [1,1],
    "filtration": {"branches": [{"linear": [1,-1]}]}})");
  CHECK(e.code() == ErrorCode::InvalidFiltration);
  CHECK(e.field() == "filtration");
}

TEST_CASE("every parse failure exits with 2") {
  const Result r = run_cli({"volume", "-"}, R"({"rank": 2, "sigma_rays": [[1,0],[0,1]], "xi": [1,-1]})");
  CHECK(r.code == 2);
  CHECK(r.out.empty());
  CHECK(r.err.find("at xi") != std::string::npos);
  CHECK(run_cli({"volume", "-"}, "{").code == 2);
  CHECK(run_cli({"volume", "/nonexistent/spec.json"}, "").code == 2);
  CHECK(run_cli({"frobnicate", "-"}, anchor).code == 2);
  CHECK(run_cli({"volume"}, anchor).code == 2);
  CHECK(run_cli({"volume", "-", "--format", "xml"}, anchor).code == 2);
  CHECK(run_cli({"jumping", "-"}, anchor).code == 2);  // --m is required
  CHECK(run_cli({"converge", "-", "--m-grid", "10,x"}, anchor).code == 2);
  CHECK(run_cli({"report", "-", "--tolerance", "1/0"}, anchor).code == 2);
  CHECK(run_cli({"legendre", "-", "--v", "1,2,3"}, anchor).code == 2);
  CHECK(run_cli({"derivative", "-"}, orthant12).code == 2);  // no eta
  CHECK(run_cli({"jumping", "-", "--m", "2"}, orthant12).code == 2);  // no filtration
  CHECK(run_cli({"volume", "--help"}, "").code == 0);
}

TEST_CASE("math failures exit with 3 and failed verdicts with 4") {
  const std::string half = R"({"rank": 2, "sigma_rays": [[1,0],[0,1]], "xi": ["1/2","1"], "eta": [1,0]})";
  const Result r = run_cli({"stilde", "-", "--t-max", "10"}, half);
  CHECK(r.code == 3);
  CHECK(r.err.find("quasi-regular-required") != std::string::npos);

  const Result f = run_cli({"report", "-", "--m-grid", "5,10,20", "--t-max", "20"}, rank3);
  CHECK(f.code == 4);
  CHECK_FALSE(f.out.empty());
}

TEST_CASE("volume command") {
  const Result t = run_cli({"volume", "-"}, orthant12);
  CHECK(t.code == 0);
  CHECK(t.out.find("vol_xi  1/2  0.500000\n") != std::string::npos);
  const Result c = run_cli({"volume", "-", "--format", "csv"}, orthant12);
  CHECK(c.out == "quantity,value\nrank,2\nvol_xi,1/2\nvol_q,1/4\n");

  const Result j = run_cli({"volume", "-", "--format", "json", "--decimal", "3"}, orthant12);
  const auto doc = nlohmann::json::parse(j.out);
  CHECK(doc["vol_xi"]["exact"] == "1/2");
  CHECK(doc["vol_xi"]["decimal"] == "0.500");
  CHECK(doc["rank"] == 2);
  const auto& qx = doc["q_xi"];
  CHECK(qx["rank"] == 2);
  CHECK(qx["vertices"] == nlohmann::json::parse(R"([["0","0"],["0","1/2"],["1","0"]])"));
  CHECK(qx["rays"].empty());
  // Every vertex satisfies every stored halfspace.
  for (const auto& v : qx["vertices"]) {
    for (const auto& h : qx["halfspaces"]) {
      Rational lhs = 0;
      for (std::size_t i = 0; i < 2; ++i) {
        lhs += Rational::parse(h["normal"][i].get<std::string>()) * Rational::parse(v[i].get<std::string>());
      }
      CHECK(lhs <= Rational::parse(h["offset"].get<std::string>()));
    }
  }
  CHECK(doc["sigma"]["rays"] == nlohmann::json::parse(R"([["0","1"],["1","0"]])"));
}

TEST_CASE("jumping command") {
  const Result r = run_cli({"jumping", "-", "--m", "2", "--format", "csv"}, anchor);
  CHECK(r.code == 0);
  CHECK(r.out == "value,multiplicity\n0,3\n1,2\n2,1\n");

  const Result d = run_cli({"jumping", "-", "--m", "2", "--format", "csv", "--decimal", "2"}, anchor);
  CHECK(d.out == "value,value_decimal,multiplicity\n0,0.00,3\n1,1.00,2\n2,2.00,1\n");

  const Result c = run_cli({"jumping", "-", "--m", "3", "--format", "csv", "--ceiling"},
                           R"({"rank": 2, "sigma_rays": [[1,0],[0,1]], "xi": [1,1], "eta": ["1/2",0]})");
  CHECK(c.out == "value,multiplicity\n0,4\n1,5\n2,1\n");

  const auto j = nlohmann::json::parse(run_cli({"jumping", "-", "--m", "2", "--format", "json"}, anchor).out);
  CHECK(j["count"] == 6);
  CHECK(j["s_m"]["exact"] == "1/3");
  CHECK(j["spectrum"].size() == 3);
}

TEST_CASE("report verdicts") {
  const Result r = run_cli({"report", "-", "--format", "json"}, anchor);
  CHECK(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  bool seen = false;
  for (const auto& v : j["verdicts"]) {
    if (v["name"] != "thm4.2") continue;
    seen = true;
    CHECK(v["status"] == "PASS");
    CHECK(v["lhs"]["exact"] == "1/3");
    CHECK(v["rhs"]["exact"] == "1/3");
    CHECK(v["tolerance"].is_null());
  }
  CHECK(seen);
  CHECK(j["c_n_ratio"]["exact"] == "2");
  CHECK(j["passed"] == true);

  const Result t = run_cli({"report", "-"}, anchor);
  CHECK(t.out.find("thm4.2 ") != std::string::npos);
  const Result c = run_cli({"report", "-", "--format", "csv"}, anchor);
  const auto rows = parse_csv(c.out);
  REQUIRE(rows.size() > 1);
  CHECK(rows[0][0] == "name");
  CHECK(rows[1][0] == "thm4.2");
  CHECK(rows[1][1] == "PASS");
}

TEST_CASE("report JSON round-trips") {
  const std::vector<std::pair<std::string, std::vector<std::string>>> cases{
      {anchor, {"report", "-", "--format", "json"}},
      {min_orthant, {"report", "-", "--format", "json", "--m-grid", "10,20,40", "--t-max", "40"}},
      {rank3, {"report", "-", "--format", "json", "--m-grid", "5,10,20", "--t-max", "20"}},
      {orthant12, {"report", "-", "--format", "json", "--m-grid", "8,16"}},
  };
  bool saw_fail = false;
  for (const auto& [spec, args] : cases) {
    const Result r = run_cli(args, spec);
    const auto stored = nlohmann::json::parse(r.out);
    const InvariantReport back = cli::report_from_json(stored);
    REQUIRE(back.verdicts.size() == stored["verdicts"].size());
    for (const auto& v : back.verdicts) {
      const auto* trace = v.monotone_trace.empty() ? nullptr : back.trace(v.monotone_trace);
      CHECK_MESSAGE(recheck(v, trace) == v.status, v.name);
      saw_fail = saw_fail || v.status == Verdict::Status::Fail;
    }
    CHECK(back.passed() == stored["passed"].get<bool>());
    CHECK((r.code == 4) == !back.passed());
    // Exact values alone regenerate the same bytes.
    CHECK(cli::to_json(back, 6).dump(2) + "\n" == r.out);
  }
  CHECK(saw_fail);
}

TEST_CASE("output bytes are deterministic") {
  const std::vector<std::string> base{"report", "-", "--format", "json", "--m-grid", "10,20,40", "--t-max", "40"};
  for (const std::string& spec : {min_orthant, rank3}) {
    const std::string first = run_cli(base, spec).out;
    for (int i = 0; i < 2; ++i) CHECK(run_cli(base, spec).out == first);
    auto jobs = base;
    jobs.insert(jobs.end(), {"--jobs", "8"});
    CHECK(run_cli(jobs, spec).out == first);
    for (const char* format : {"table", "csv"}) {
      auto a = base, b = jobs;
      a[3] = b[3] = format;
      CHECK(run_cli(a, spec).out == run_cli(b, spec).out);
    }
  }
}

TEST_CASE("REEBVOL_JOBS is the fallback for --jobs") {
  const std::vector<std::string> args{"converge", "-", "--m-grid", "10,30", "--format", "csv"};
  const std::string serial = run_cli(args, min_orthant).out;
  ::setenv("REEBVOL_JOBS", "6", 1);
  CHECK(run_cli(args, min_orthant).out == serial);
  ::setenv("REEBVOL_JOBS", "lots", 1);
  CHECK(run_cli(args, min_orthant).code == 2);
  auto explicit_jobs = args;
  explicit_jobs.insert(explicit_jobs.end(), {"--jobs", "2"});
  CHECK(run_cli(explicit_jobs, min_orthant).code == 0);
  ::unsetenv("REEBVOL_JOBS");
}

TEST_CASE("converge, energy, legendre and profile") {
  const auto conv = parse_csv(run_cli({"converge", "-", "--m-grid", "3,7", "--format", "csv"}, anchor).out);
  REQUIRE(conv.size() == 3);
  CHECK(conv[0] == std::vector<std::string>{"m", "s_m", "s_m_error", "vol_m", "vol_error", "cdf_distance"});
  for (std::size_t i = 1; i < 3; ++i) {
    CHECK(conv[i][1] == "1/3");  // linear psi: S_m = S for every m
    CHECK(conv[i][2] == "0");
  }
  // The grid from the spec options is used when no flag is given.
  const std::string with_grid = R"({"rank": 2, "sigma_rays": [[1,0],[0,1]], "xi": [1,1], "eta": [1,0],
    "options": {"m_grid": [4, 5, 6], "decimal": 2}})";
  const auto opt = parse_csv(run_cli({"converge", "-", "--format", "csv"}, with_grid).out);
  REQUIRE(opt.size() == 4);
  CHECK(opt[0][2] == "s_m_decimal");
  CHECK(opt[3][0] == "6");

  const auto e = nlohmann::json::parse(run_cli({"energy", "-", "--format", "json"}, min_orthant).out);
  CHECK(e["s_exact"]["exact"] == "1/6");
  CHECK(e["energy_tc"].is_null());
  CHECK(e["c_n_ratio"]["exact"] == "2");

  const auto l = nlohmann::json::parse(run_cli({"legendre", "-", "--v", "0,0", "--format", "json"}, min_orthant).out);
  CHECK(l["legendre"]["exact"] == "1/2");  // max of min(u1,u2) over the triangle

  const Result p = run_cli({"profile", "-", "--format", "csv"}, min_orthant);
  const PLConcave psi({AffineForm{vec({1, 0}), 0}, AffineForm{vec({0, 1}), 0}});
  CHECK(p.out == superlevel_profile(psi, standard_simplex(2)).csv());
}

TEST_CASE("clamp mode admits negative filtrations") {
  const std::string neg = R"({"rank": 2, "sigma_rays": [[1,0],[0,1]], "xi": [1,1],
    "filtration": {"branches": [{"linear": [1,0], "constant": "-1/2"}]}})";
  const Result plain = run_cli({"energy", "-"}, neg);
  CHECK(plain.code == 2);
  CHECK(plain.err.find("filtration") != std::string::npos);
  const Result clamped = run_cli({"jumping", "-", "--m", "2", "--format", "csv", "--clamp"}, neg);
  CHECK(clamped.code == 0);
  // max(u1 - 1/2, 0) over 2Q: u1 = 0,1,2 with 3,2,1 points.
  CHECK(clamped.out == "value,multiplicity\n0,3\n1/2,2\n3/2,1\n");
}

TEST_CASE("csv quoting round-trips") {
  CHECK(cli::csv_field("1/2") == "1/2");
  CHECK(cli::csv_field("a,b") == "\"a,b\"");
  CHECK(cli::csv_field("say \"x\"") == "\"say \"\"x\"\"\"");
  std::mt19937 rng(7);
  const std::string alphabet = "ab,\"\n\r 1/";
  for (int i = 0; i < 300; ++i) {
    std::vector<std::string> fields(1 + rng() % 4);
    std::string line;
    for (std::size_t k = 0; k < fields.size(); ++k) {
      for (unsigned c = rng() % 6; c > 0; --c) fields[k] += alphabet[rng() % alphabet.size()];
      line += (k ? "," : "") + cli::csv_field(fields[k]);
    }
    const auto rows = parse_csv(line + "\n");
    REQUIRE(rows.size() == 1);
    CHECK(rows[0] == fields);
  }
}
