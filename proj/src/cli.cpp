#include "reebvol/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <set>
#include <sstream>
#include <variant>

#include "CLI11.hpp"

namespace reebvol::cli {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& path, const std::string& msg, ErrorCode code = ErrorCode::Parse) {
  throw Error(code, msg, path);
}

std::string at(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

void allow_keys(const json& j, const std::string& path, const std::set<std::string>& keys) {
  if (!j.is_object()) bad(path.empty() ? "$" : path, "expected an object");
  for (const auto& [k, v] : j.items()) {
    if (!keys.count(k)) bad(path.empty() ? k : path + "." + k, "unknown field");
  }
}

Rational read_rational(const json& j, const std::string& path) {
  if (j.is_number_integer()) return Rational(j.get<long long>());
  if (!j.is_string()) bad(path, "expected an exact rational (\"p/q\" or an integer)");
  try {
    return Rational::parse(j.get<std::string>());
  } catch (const Error& e) {
    bad(path, e.what());
  }
}

RationalVector read_vector(const json& j, const std::string& path) {
  if (!j.is_array()) bad(path, "expected an array of rationals");
  std::vector<Rational> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(read_rational(j[i], at(path, i)));
  return RationalVector(std::move(out));
}

RationalVector read_vector(const json& j, const std::string& path, std::size_t rank) {
  RationalVector v = read_vector(j, path);
  if (v.rank() != rank) {
    bad(path, "rank " + std::to_string(v.rank()) + " does not match rank " + std::to_string(rank), ErrorCode::Dimension);
  }
  return v;
}

unsigned long read_count(const json& j, const std::string& path, unsigned long lo) {
  if (!j.is_number_integer() || j.get<long long>() < static_cast<long long>(lo)) {
    bad(path, "expected an integer >= " + std::to_string(lo));
  }
  return j.get<unsigned long>();
}

bool read_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) bad(path, "expected true or false");
  return j.get<bool>();
}

SpecOptions read_options(const json& j) {
  allow_keys(j, "options", {"m_grid", "t_max", "tolerance", "homogeneity", "decimal", "ceiling", "clamp"});
  SpecOptions o;
  if (j.contains("m_grid")) {
    const json& g = j["m_grid"];
    if (!g.is_array() || g.empty()) bad("options.m_grid", "expected a non-empty array");
    o.m_grid.clear();
    for (std::size_t i = 0; i < g.size(); ++i) o.m_grid.push_back(read_count(g[i], at("options.m_grid", i), 1));
  }
  if (j.contains("t_max")) o.t_max = read_count(j["t_max"], "options.t_max", 1);
  if (j.contains("tolerance")) {
    o.tolerance = read_rational(j["tolerance"], "options.tolerance");
    if (o.tolerance.sign() < 0) bad("options.tolerance", "must be non-negative");
  }
  if (j.contains("homogeneity")) {
    const json& h = j["homogeneity"];
    if (!h.is_array()) bad("options.homogeneity", "expected an array");
    o.homogeneity.clear();
    for (std::size_t i = 0; i < h.size(); ++i) {
      o.homogeneity.push_back(read_rational(h[i], at("options.homogeneity", i)));
      if (o.homogeneity.back().sign() <= 0) bad(at("options.homogeneity", i), "must be positive");
    }
  }
  if (j.contains("decimal")) o.decimal = static_cast<int>(read_count(j["decimal"], "options.decimal", 0));
  if (j.contains("ceiling")) o.ceiling = read_bool(j["ceiling"], "options.ceiling");
  if (j.contains("clamp")) o.clamp = read_bool(j["clamp"], "options.clamp");
  return o;
}

PLConcave read_filtration(const json& j, std::size_t rank, bool clamp) {
  allow_keys(j, "filtration", {"branches", "clamp"});
  if (!j.contains("branches") || !j["branches"].is_array() || j["branches"].empty()) {
    bad("filtration.branches", "expected a non-empty array");
  }
  if (j.contains("clamp")) clamp = read_bool(j["clamp"], "filtration.clamp") || clamp;
  std::vector<AffineForm> branches;
  const json& b = j["branches"];
  for (std::size_t i = 0; i < b.size(); ++i) {
    const std::string path = at("filtration.branches", i);
    allow_keys(b[i], path, {"linear", "constant"});
    if (!b[i].contains("linear")) bad(path + ".linear", "missing");
    RationalVector linear = read_vector(b[i]["linear"], path + ".linear");
    if (linear.rank() != rank) {
      bad(path, "branch has rank " + std::to_string(linear.rank()) + " under a rank " + std::to_string(rank) + " cone",
          ErrorCode::Dimension);
    }
    const Rational constant = b[i].contains("constant") ? read_rational(b[i]["constant"], path + ".constant") : Rational(0);
    branches.push_back(AffineForm{std::move(linear), constant});
  }
  return PLConcave(std::move(branches), clamp);
}

}  // namespace

ProblemSpec parse_spec(std::string_view text, bool force_clamp) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Parse, std::string("malformed JSON: ") + e.what());
  }
  allow_keys(j, "", {"rank", "sigma_rays", "xi", "eta", "filtration", "basis", "options"});
  if (!j.contains("rank")) bad("rank", "missing");
  const std::size_t n = read_count(j["rank"], "rank", 1);

  if (!j.contains("sigma_rays") || !j["sigma_rays"].is_array() || j["sigma_rays"].empty()) {
    bad("sigma_rays", "expected a non-empty array of rays");
  }
  std::vector<RationalVector> rays;
  for (std::size_t i = 0; i < j["sigma_rays"].size(); ++i) {
    rays.push_back(read_vector(j["sigma_rays"][i], at("sigma_rays", i), n));
  }
  if (!j.contains("xi")) bad("xi", "missing");
  RationalVector xi = read_vector(j["xi"], "xi", n);

  SpecOptions options = j.contains("options") ? read_options(j["options"]) : SpecOptions{};
  options.clamp = options.clamp || force_clamp;

  std::optional<Cone> sigma;
  try {
    sigma = Cone::from_rays(std::move(rays));
  } catch (const Error& e) {
    throw Error(e.code(), e.what(), "sigma_rays");
  }
  ProblemSpec spec{PolarizedToricSetup{std::move(*sigma), std::move(xi), std::nullopt, std::nullopt, std::nullopt},
                   std::move(options)};
  if (j.contains("eta") && !j["eta"].is_null()) spec.setup.eta = read_vector(j["eta"], "eta", n);
  if (j.contains("filtration") && !j["filtration"].is_null()) {
    spec.setup.psi = read_filtration(j["filtration"], n, spec.options.clamp);
  }
  if (j.contains("basis") && !j["basis"].is_null()) {
    const json& b = j["basis"];
    if (!b.is_array() || b.size() != n) bad("basis", "expected " + std::to_string(n) + " rows", ErrorCode::Dimension);
    std::vector<RationalVector> rows;
    for (std::size_t i = 0; i < n; ++i) rows.push_back(read_vector(b[i], at("basis", i), n));
    spec.setup.basis = RationalMatrix(std::move(rows));
  }
  validate(spec.setup);
  return spec;
}

Json rational_json(const Rational& r, int digits) {
  Json j;
  j["exact"] = r.str();
  j["decimal"] = r.decimal(digits);
  return j;
}

namespace {

Json exact_row(const RationalVector& v) {
  Json a = Json::array();
  for (const auto& x : v) a.push_back(x.str());
  return a;
}

Json rows_json(const std::vector<RationalVector>& rows) {
  Json a = Json::array();
  for (const auto& r : rows) a.push_back(exact_row(r));
  return a;
}

}  // namespace

Json to_json(const Cone& c) {
  // Same shape as polytopes: normal . x <= 0 per facet, apex as the vertex.
  Json j;
  j["rank"] = c.rank();
  j["rays"] = rows_json(c.rays());
  Json hs = Json::array();
  for (const auto& u : c.halfspaces()) hs.push_back(Json{{"normal", exact_row(-u)}, {"offset", "0"}});
  j["halfspaces"] = hs;
  j["vertices"] = rows_json({RationalVector(c.rank())});
  return j;
}

Json to_json(const Polytope& p) {
  Json j;
  j["rank"] = p.rank();
  j["rays"] = Json::array();
  Json hs = Json::array();
  for (const auto& h : p.halfspaces()) hs.push_back(Json{{"normal", exact_row(h.normal)}, {"offset", h.offset.str()}});
  j["halfspaces"] = hs;
  j["vertices"] = rows_json(p.vertices());
  return j;
}

Json to_json(const PLConcave& f) {
  Json j;
  Json b = Json::array();
  for (const auto& br : f.branches()) b.push_back(Json{{"linear", exact_row(br.linear)}, {"constant", br.constant.str()}});
  j["branches"] = b;
  if (f.clamped()) j["clamp"] = true;
  return j;
}

namespace {

Json optional_json(const std::optional<Rational>& r, int digits) {
  return r ? rational_json(*r, digits) : Json(nullptr);
}

Json trace_json(const std::vector<TracePoint>& t, int digits) {
  Json a = Json::array();
  for (const auto& p : t) {
    a.push_back(Json{{"index", p.index}, {"value", rational_json(p.value, digits)}, {"error", rational_json(p.error, digits)}});
  }
  return a;
}

const char* const kTraces[] = {"s_m_trace", "vol_trace", "cdf_trace", "s_tilde_trace"};

std::vector<TracePoint>& trace_ref(InvariantReport& r, std::string_view name) {
  if (name == "s_m_trace") return r.s_m_trace;
  if (name == "vol_trace") return r.vol_trace;
  if (name == "cdf_trace") return r.cdf_trace;
  return r.s_tilde_trace;
}

}  // namespace

Json to_json(const InvariantReport& r, int digits) {
  Json j;
  j["rank"] = r.rank;
  j["basis"] = r.basis;
  j["vol_xi"] = rational_json(r.vol_xi, digits);
  j["vol_delta"] = rational_json(r.vol_delta, digits);
  j["d_vol"] = optional_json(r.d_vol, digits);
  j["energy_tc"] = optional_json(r.energy_tc, digits);
  j["s_exact"] = optional_json(r.s_exact, digits);
  j["big_t"] = optional_json(r.big_t, digits);
  if (r.energy_pxi) {
    j["energy_pxi"] = Json{{"paper_normalized", rational_json(r.energy_pxi->paper_normalized, digits)},
                           {"cone_normalized", rational_json(r.energy_pxi->cone_normalized, digits)},
                           {"slice_measure", rational_json(r.energy_pxi->slice_measure, digits)}};
  } else {
    j["energy_pxi"] = nullptr;
  }
  j["c_n_ratio"] = optional_json(r.c_n_ratio, digits);
  j["c_reference"] = optional_json(r.c_reference, digits);
  j["s_tilde_extrapolated"] = optional_json(r.s_tilde_extrapolated, digits);
  Json traces;
  for (const char* name : kTraces) traces[name] = trace_json(*r.trace(name), digits);
  j["traces"] = traces;
  Json vs = Json::array();
  for (const auto& v : r.verdicts) {
    Json o;
    o["name"] = v.name;
    o["status"] = to_string(v.status);
    o["gating"] = v.gating;
    o["lhs"] = rational_json(v.lhs, digits);
    o["rhs"] = rational_json(v.rhs, digits);
    o["tolerance"] = optional_json(v.tolerance, digits);
    o["scale"] = rational_json(v.scale, digits);
    o["monotone_trace"] = v.monotone_trace;
    o["monotone_only"] = v.monotone_only;
    o["detail"] = v.detail;
    vs.push_back(o);
  }
  j["verdicts"] = vs;
  j["notes"] = r.notes;
  j["passed"] = r.passed();
  return j;
}

namespace {

Rational exact_of(const json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("exact")) bad(path, "expected {\"exact\": ...}");
  return read_rational(j["exact"], path + ".exact");
}

std::optional<Rational> optional_exact(const json& j, const std::string& key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return exact_of(j[key], key);
}

Verdict::Status status_of(const json& j, const std::string& path) {
  const std::string s = j.is_string() ? j.get<std::string>() : std::string();
  if (s == "PASS") return Verdict::Status::Pass;
  if (s == "FAIL") return Verdict::Status::Fail;
  if (s == "SKIPPED") return Verdict::Status::Skipped;
  bad(path, "expected PASS, FAIL or SKIPPED");
}

}  // namespace

InvariantReport report_from_json(const json& j) {
  if (!j.is_object()) bad("$", "expected a report object");
  InvariantReport r;
  r.rank = read_count(j.value("rank", json()), "rank", 0);
  r.basis = j.value("basis", std::string());
  r.vol_xi = exact_of(j.value("vol_xi", json()), "vol_xi");
  r.vol_delta = exact_of(j.value("vol_delta", json()), "vol_delta");
  r.d_vol = optional_exact(j, "d_vol");
  r.energy_tc = optional_exact(j, "energy_tc");
  r.s_exact = optional_exact(j, "s_exact");
  r.big_t = optional_exact(j, "big_t");
  if (j.contains("energy_pxi") && !j["energy_pxi"].is_null()) {
    const json& e = j["energy_pxi"];
    r.energy_pxi = SliceEnergy{exact_of(e.value("paper_normalized", json()), "energy_pxi.paper_normalized"),
                               exact_of(e.value("cone_normalized", json()), "energy_pxi.cone_normalized"),
                               exact_of(e.value("slice_measure", json()), "energy_pxi.slice_measure")};
  }
  r.c_n_ratio = optional_exact(j, "c_n_ratio");
  r.c_reference = optional_exact(j, "c_reference");
  r.s_tilde_extrapolated = optional_exact(j, "s_tilde_extrapolated");
  const json traces = j.value("traces", json::object());
  for (const char* name : kTraces) {
    if (!traces.contains(name)) continue;
    const std::string path = std::string("traces.") + name;
    for (std::size_t i = 0; i < traces[name].size(); ++i) {
      const json& p = traces[name][i];
      trace_ref(r, name).push_back(TracePoint{read_count(p.value("index", json()), at(path, i) + ".index", 0),
                                              exact_of(p.value("value", json()), at(path, i) + ".value"),
                                              exact_of(p.value("error", json()), at(path, i) + ".error")});
    }
  }
  const json verdicts = j.value("verdicts", json::array());
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    const json& o = verdicts[i];
    const std::string path = at("verdicts", i);
    Verdict v;
    v.name = o.value("name", std::string());
    v.detail = o.value("detail", std::string());
    v.status = status_of(o.value("status", json()), path + ".status");
    v.gating = o.value("gating", true);
    v.lhs = exact_of(o.value("lhs", json()), path + ".lhs");
    v.rhs = exact_of(o.value("rhs", json()), path + ".rhs");
    v.tolerance = optional_exact(o, "tolerance");
    v.scale = exact_of(o.value("scale", json()), path + ".scale");
    v.monotone_trace = o.value("monotone_trace", std::string());
    v.monotone_only = o.value("monotone_only", false);
    r.verdicts.push_back(std::move(v));
  }
  for (const auto& note : j.value("notes", json::array())) r.notes.push_back(note.get<std::string>());
  return r;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

int exit_code(const Error& e) { return e.code() == ErrorCode::Parse ? 2 : 3; }

namespace {

// ---- Output documents: scalars plus named sheets, rendered per format.

using Cell = std::variant<std::monostate, std::string, mpz_class, Rational>;

struct Sheet {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

struct Document {
  std::vector<std::pair<std::string, Cell>> scalars;
  std::vector<Sheet> sheets;
  std::vector<std::pair<std::string, Json>> attachments;  // JSON only
  void add(std::string name, Cell c) { scalars.emplace_back(std::move(name), std::move(c)); }
  void add_opt(std::string name, const std::optional<Rational>& r) {
    add(std::move(name), r ? Cell(*r) : Cell(std::monostate{}));
  }
};

struct Format {
  std::string kind = "table";
  int digits = 6;
  bool decimal_explicit = false;
};

std::string exact_text(const Cell& c, const char* null_text) {
  if (std::holds_alternative<std::monostate>(c)) return null_text;
  if (auto* s = std::get_if<std::string>(&c)) return *s;
  if (auto* z = std::get_if<mpz_class>(&c)) return z->get_str();
  return std::get<Rational>(c).str();
}

std::string decimal_text(const Cell& c, int digits) {
  if (auto* r = std::get_if<Rational>(&c)) return r->decimal(digits);
  return "";
}

Json cell_json(const Cell& c, int digits) {
  if (std::holds_alternative<std::monostate>(c)) return nullptr;
  if (auto* s = std::get_if<std::string>(&c)) return *s;
  if (auto* z = std::get_if<mpz_class>(&c)) {
    if (z->fits_slong_p()) return z->get_si();
    return z->get_str();
  }
  return rational_json(std::get<Rational>(c), digits);
}

bool has_rational(const Sheet& s, std::size_t col) {
  return std::any_of(s.rows.begin(), s.rows.end(),
                     [col](const auto& row) { return std::holds_alternative<Rational>(row[col]); });
}

/// Expands a sheet to plain text cells, with a decimal column after every
/// column holding rationals when `decimals` is set.
std::vector<std::vector<std::string>> flatten(const Sheet& s, bool decimals, int digits, const char* null_text) {
  std::vector<bool> dec(s.columns.size());
  for (std::size_t c = 0; c < s.columns.size(); ++c) dec[c] = decimals && has_rational(s, c);
  std::vector<std::vector<std::string>> out(1);
  for (std::size_t c = 0; c < s.columns.size(); ++c) {
    out[0].push_back(s.columns[c]);
    if (dec[c]) out[0].push_back(s.columns[c] + "_decimal");
  }
  for (const auto& row : s.rows) {
    std::vector<std::string> line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      line.push_back(exact_text(row[c], null_text));
      if (dec[c]) line.push_back(decimal_text(row[c], digits));
    }
    out.push_back(std::move(line));
  }
  return out;
}

void aligned(std::ostream& os, const std::vector<std::vector<std::string>>& lines) {
  std::vector<std::size_t> width;
  for (const auto& l : lines) {
    width.resize(std::max(width.size(), l.size()));
    for (std::size_t c = 0; c < l.size(); ++c) width[c] = std::max(width[c], l[c].size());
  }
  for (const auto& l : lines) {
    std::string text;
    for (std::size_t c = 0; c < l.size(); ++c) {
      text += l[c];
      if (c + 1 < l.size()) text += std::string(width[c] - l[c].size() + 2, ' ');
    }
    while (!text.empty() && text.back() == ' ') text.pop_back();
    os << text << "\n";
  }
}

Sheet scalar_sheet(const Document& d) {
  Sheet s{"", {"quantity", "value"}, {}};
  for (const auto& [k, v] : d.scalars) s.rows.push_back({k, v});
  return s;
}

std::string render(const Document& d, const Format& f) {
  std::ostringstream os;
  if (f.kind == "json") {
    Json j;
    for (const auto& [k, v] : d.scalars) j[k] = cell_json(v, f.digits);
    for (const auto& [k, v] : d.attachments) j[k] = v;
    for (const auto& s : d.sheets) {
      Json rows = Json::array();
      for (const auto& row : s.rows) {
        Json o;
        for (std::size_t c = 0; c < s.columns.size(); ++c) o[s.columns[c]] = cell_json(row[c], f.digits);
        rows.push_back(o);
      }
      j[s.name] = rows;
    }
    os << j.dump(2) << "\n";
  } else if (f.kind == "csv") {
    const Sheet s = d.sheets.empty() ? scalar_sheet(d) : d.sheets.front();
    for (const auto& line : flatten(s, f.decimal_explicit, f.digits, "")) {
      for (std::size_t c = 0; c < line.size(); ++c) os << (c ? "," : "") << csv_field(line[c]);
      os << "\n";
    }
  } else {
    std::vector<std::vector<std::string>> lines;
    for (const auto& [k, v] : d.scalars) {
      std::vector<std::string> l{k, exact_text(v, "-")};
      if (std::holds_alternative<Rational>(v)) l.push_back(decimal_text(v, f.digits));
      lines.push_back(std::move(l));
    }
    aligned(os, lines);
    for (const auto& s : d.sheets) {
      os << "\n[" << s.name << "]\n";
      aligned(os, flatten(s, true, f.digits, "-"));
    }
  }
  return os.str();
}

// ---- Commands.

struct Settings {
  Format format;
  unsigned jobs = 1;
  std::vector<unsigned long> m_grid;
  unsigned long t_max = 200;
  Rational tolerance;
  std::vector<Rational> homogeneity;
  bool ceiling = false;
  unsigned long m = 0;
  RationalVector v;
};

struct Outcome {
  std::string text;
  bool verdict_failed = false;
};

struct Context {
  const PolarizedToricSetup& s;
  const Settings& opt;
  Cone dual;
  ReebSlice slice;

  Context(const PolarizedToricSetup& setup, const Settings& settings)
      : s(setup), opt(settings), dual(dual_cone(setup.sigma)), slice(reeb_slice(dual, setup.xi)) {}

  GradingOptions grading() const { return GradingOptions{opt.ceiling, opt.jobs}; }
  PLConcave psi() const { return *effective_filtration(s); }
  PLConcave homogenized() const { return homogenize(psi(), dual, slice.q); }
};

Outcome cmd_volume(const Context& c) {
  Document d;
  d.add("rank", mpz_class(static_cast<unsigned long>(c.s.sigma.rank())));
  d.add("vol_xi", vol_xi(c.s.sigma, c.s.xi));
  d.add("vol_q", volume(c.slice.q));
  d.attachments.emplace_back("sigma", to_json(c.s.sigma));
  d.attachments.emplace_back("dual", to_json(c.dual));
  d.attachments.emplace_back("q_xi", to_json(c.slice.q));
  d.attachments.emplace_back("p_xi", to_json(c.slice.p));
  return {render(d, c.opt.format)};
}

Outcome cmd_derivative(const Context& c) {
  Document d;
  d.add("vol_xi", vol_xi(c.s.sigma, c.s.xi));
  d.add("d_vol", d_vol(c.s.sigma, c.s.xi, *c.s.eta));
  d.add("energy_tc", energy_tc(c.s.sigma, c.s.xi, *c.s.eta));
  return {render(d, c.opt.format)};
}

Outcome cmd_jumping(const Context& c) {
  const GradedSetup g(c.dual, c.s.xi, c.psi());
  const JumpingSpectrum spec = jumping_spectrum(g, c.opt.m, c.grading());
  Document d;
  d.add("m", mpz_class(spec.m));
  d.add("count", spec.count);
  d.add("sum", spec.sum);
  d.add("s_m", s_m(spec));
  d.add("t_m", t_m(spec));
  Sheet s{"spectrum", {"value", "multiplicity"}, {}};
  for (const auto& [v, mult] : spec.values) s.rows.push_back({v, mult});
  d.sheets.push_back(std::move(s));
  return {render(d, c.opt.format)};
}

Outcome cmd_converge(const Context& c) {
  const PLConcave psi = c.psi();
  const GradedSetup g(c.dual, c.s.xi, psi);
  const std::size_t n = c.s.sigma.rank();
  const Rational exact = s_exact(c.s.sigma, c.s.xi, psi);
  const Rational vol = vol_xi(c.s.sigma, c.s.xi);
  const SuperlevelProfile profile = superlevel_profile(c.homogenized(), c.slice.q);
  Document d;
  d.add("s_exact", exact);
  d.add("vol_xi", vol);
  d.add("mass", profile.total());
  Sheet s{"trace", {"m", "s_m", "s_m_error", "vol_m", "vol_error", "cdf_distance"}, {}};
  for (unsigned long m : c.opt.m_grid) {
    const JumpingSpectrum spec = jumping_spectrum(g, m, c.grading());
    const Rational sm = s_m(spec);
    const Rational vm = Rational(factorial(static_cast<unsigned>(n))) * Rational(spec.count) /
                        pow(Rational(m), static_cast<unsigned>(n));
    s.rows.push_back({mpz_class(m), sm, (sm - exact).abs(), vm, (vm - vol).abs(),
                      cdf_sup_distance(mu_m_cdf(spec, n), profile)});
  }
  d.sheets.push_back(std::move(s));
  return {render(d, c.opt.format)};
}

Outcome cmd_energy(const Context& c) {
  const PLConcave psi = c.psi();
  const Rational s = s_exact(c.s.sigma, c.s.xi, psi);
  const SliceEnergy e = energy_pxi(c.s.sigma, c.s.xi, psi);
  Document d;
  d.add("s_exact", s);
  d.add_opt("energy_tc", c.s.eta ? std::optional<Rational>(energy_tc(c.s.sigma, c.s.xi, *c.s.eta)) : std::nullopt);
  d.add("energy_pxi_paper", e.paper_normalized);
  d.add("energy_pxi_cone", e.cone_normalized);
  d.add("slice_measure", e.slice_measure);
  d.add_opt("c_n_ratio", e.paper_normalized.is_zero() ? std::nullopt : std::optional<Rational>(s / e.paper_normalized));
  d.add("big_t", big_t_exact(GradedSetup(c.dual, c.s.xi, psi)));
  return {render(d, c.opt.format)};
}

Outcome cmd_stilde(const Context& c) {
  const QuasiRegularResult q = quasi_regular_check(c.s, c.opt.t_max, c.opt.tolerance, c.grading());
  Document d;
  d.add("s_exact", q.verdict.lhs);
  d.add("s_tilde_extrapolated", q.extrapolated);
  d.add("verdict", std::string(to_string(q.verdict.status)));
  d.add("count_leading", q.count_leading);
  d.add("count_leading_expected", q.count_leading_expected);
  Sheet s{"degrees", {"t", "s_tilde", "error"}, {}};
  for (const auto& p : q.trace) s.rows.push_back({mpz_class(p.index), p.value, p.error});
  d.sheets.push_back(std::move(s));
  return {render(d, c.opt.format), q.verdict.gating && q.verdict.status == Verdict::Status::Fail};
}

Outcome cmd_legendre(const Context& c) {
  if (c.opt.v.rank() != c.s.sigma.rank()) bad("--v", "wrong rank", ErrorCode::Dimension);
  Document d;
  d.add("v", c.opt.v.str());
  d.add("legendre", legendre(c.homogenized(), c.slice.q, c.opt.v));
  return {render(d, c.opt.format)};
}

Outcome cmd_profile(const Context& c) {
  const SuperlevelProfile p = superlevel_profile(c.homogenized(), c.slice.q);
  Document d;
  d.add("total", p.total());
  d.add("top", p.top());
  d.add("integral", p.integral());
  Sheet s{"profile", {"t_lo", "t_hi"}, {}};
  const std::size_t coeffs = p.pieces().empty() ? 0 : p.pieces().front().size();
  for (std::size_t k = 0; k < coeffs; ++k) s.columns.push_back("c" + std::to_string(k));
  for (std::size_t i = 0; i < p.pieces().size(); ++i) {
    std::vector<Cell> row{p.breakpoints()[i], p.breakpoints()[i + 1]};
    for (const auto& x : p.pieces()[i]) row.emplace_back(x);
    s.rows.push_back(std::move(row));
  }
  d.sheets.push_back(std::move(s));
  return {render(d, c.opt.format)};
}

Document report_document(const InvariantReport& r) {
  Document d;
  d.add("rank", mpz_class(static_cast<unsigned long>(r.rank)));
  d.add("basis", r.basis);
  d.add("vol_xi", r.vol_xi);
  d.add("vol_delta", r.vol_delta);
  d.add_opt("d_vol", r.d_vol);
  d.add_opt("energy_tc", r.energy_tc);
  d.add_opt("s_exact", r.s_exact);
  d.add_opt("big_t", r.big_t);
  d.add_opt("energy_pxi_paper", r.energy_pxi ? std::optional<Rational>(r.energy_pxi->paper_normalized) : std::nullopt);
  d.add_opt("energy_pxi_cone", r.energy_pxi ? std::optional<Rational>(r.energy_pxi->cone_normalized) : std::nullopt);
  d.add_opt("slice_measure", r.energy_pxi ? std::optional<Rational>(r.energy_pxi->slice_measure) : std::nullopt);
  d.add_opt("c_n_ratio", r.c_n_ratio);
  d.add_opt("c_reference", r.c_reference);
  d.add_opt("s_tilde_extrapolated", r.s_tilde_extrapolated);
  d.add("passed", std::string(r.passed() ? "yes" : "no"));
  Sheet v{"verdicts", {"name", "status", "gating", "lhs", "rhs", "tolerance", "scale", "monotone_trace", "detail"}, {}};
  for (const auto& x : r.verdicts) {
    v.rows.push_back({x.name, std::string(to_string(x.status)), std::string(x.gating ? "yes" : "no"), x.lhs, x.rhs,
                      x.tolerance ? Cell(*x.tolerance) : Cell(), x.scale, x.monotone_trace, x.detail});
  }
  d.sheets.push_back(std::move(v));
  for (const char* name : kTraces) {
    Sheet t{name, {"index", "value", "error"}, {}};
    for (const auto& p : *r.trace(name)) t.rows.push_back({mpz_class(p.index), p.value, p.error});
    if (!t.rows.empty()) d.sheets.push_back(std::move(t));
  }
  Sheet notes{"notes", {"note"}, {}};
  for (const auto& n : r.notes) notes.rows.push_back({n});
  d.sheets.push_back(std::move(notes));
  return d;
}

Outcome cmd_report(const Context& c) {
  ReportOptions o;
  o.m_grid = c.opt.m_grid;
  o.t_max = c.opt.t_max;
  o.tolerance = c.opt.tolerance;
  o.homogeneity = c.opt.homogeneity;
  o.ceiling = c.opt.ceiling;
  o.jobs = c.opt.jobs;
  const InvariantReport r = consistency_report(c.s, o);
  std::string text = c.opt.format.kind == "json" ? to_json(r, c.opt.format.digits).dump(2) + "\n"
                                                 : render(report_document(r), c.opt.format);
  return {std::move(text), !r.passed()};
}

// ---- Command line.

struct Flags {
  std::string command;
  std::string spec_path;
  std::string format = "table";
  std::optional<int> decimal;
  std::string m_grid;
  std::optional<unsigned long> t_max;
  std::string tolerance;
  bool ceiling = false;
  bool clamp = false;
  std::optional<unsigned> jobs;
  unsigned long m = 0;
  std::string v;
};

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

std::string read_text(const std::string& path, std::istream& in) {
  if (path == "-") return std::string(std::istreambuf_iterator<char>(in), {});
  std::ifstream f(path, std::ios::binary);
  if (!f) bad("spec", "cannot read " + path);
  return std::string(std::istreambuf_iterator<char>(f), {});
}

unsigned resolve_jobs(const Flags& f) {
  if (f.jobs) return *f.jobs;
  const char* env = std::getenv("REEBVOL_JOBS");
  if (!env || !*env) return 1;
  try {
    std::size_t used = 0;
    const long v = std::stol(env, &used);
    if (used == std::string_view(env).size() && v >= 1 && v <= 1024) return static_cast<unsigned>(v);
  } catch (const std::exception&) {
  }
  bad("REEBVOL_JOBS", std::string("expected an integer in 1..1024, got '") + env + "'");
}

Settings resolve(const Flags& f, const ProblemSpec& spec) {
  Settings s;
  s.format.kind = f.format;
  s.format.decimal_explicit = f.decimal || spec.options.decimal;
  s.format.digits = f.decimal ? *f.decimal : spec.options.decimal.value_or(6);
  s.jobs = resolve_jobs(f);
  s.m_grid = spec.options.m_grid;
  if (!f.m_grid.empty()) {
    s.m_grid.clear();
    for (const auto& item : split(f.m_grid)) {
      try {
        std::size_t used = 0;
        const long m = std::stol(item, &used);
        if (used != item.size() || m < 1) throw std::invalid_argument(item);
        s.m_grid.push_back(static_cast<unsigned long>(m));
      } catch (const std::exception&) {
        bad("--m-grid", "expected positive integers separated by commas, got '" + item + "'");
      }
    }
    if (s.m_grid.empty()) bad("--m-grid", "empty grid");
  }
  s.t_max = f.t_max.value_or(spec.options.t_max);
  s.tolerance = spec.options.tolerance;
  if (!f.tolerance.empty()) {
    try {
      s.tolerance = Rational::parse(f.tolerance);
    } catch (const Error& e) {
      bad("--tolerance", e.what());
    }
    if (s.tolerance.sign() < 0) bad("--tolerance", "must be non-negative");
  }
  s.homogeneity = spec.options.homogeneity;
  s.ceiling = f.ceiling || spec.options.ceiling;
  s.m = f.m;
  if (f.command == "legendre") {
    std::vector<Rational> v;
    for (const auto& item : split(f.v)) {
      try {
        v.push_back(Rational::parse(item));
      } catch (const Error& e) {
        bad("--v", e.what());
      }
    }
    s.v = RationalVector(std::move(v));
    if (s.v.rank() != spec.setup.sigma.rank()) bad("--v", "wrong rank", ErrorCode::Dimension);
  }
  return s;
}

void require_inputs(const std::string& command, const PolarizedToricSetup& s) {
  if (command == "derivative" && !s.eta) bad("eta", "the derivative needs a direction eta");
  const bool needs_psi = command == "jumping" || command == "converge" || command == "energy" ||
                         command == "stilde" || command == "legendre" || command == "profile";
  if (needs_psi && !effective_filtration(s)) bad("filtration", "this command needs a filtration or eta");
}

using Command = Outcome (*)(const Context&);

const std::vector<std::pair<std::string, Command>>& commands() {
  static const std::vector<std::pair<std::string, Command>> table{
      {"volume", cmd_volume},     {"derivative", cmd_derivative}, {"jumping", cmd_jumping},
      {"converge", cmd_converge}, {"energy", cmd_energy},         {"stilde", cmd_stilde},
      {"legendre", cmd_legendre}, {"report", cmd_report},         {"profile", cmd_profile},
  };
  return table;
}

const char* describe(const std::string& name) {
  if (name == "volume") return "n! vol(Q_xi) and the polyhedra behind it";
  if (name == "derivative") return "directional derivative of vol along eta and the test-configuration energy";
  if (name == "jumping") return "jumping numbers of level m with multiplicities";
  if (name == "converge") return "S_m, lattice volume and CDF distance along an m-grid";
  if (name == "energy") return "S and the slice energies";
  if (name == "stilde") return "per-degree averages and their extrapolation (integral xi)";
  if (name == "legendre") return "Legendre transform of the homogenised filtration at v";
  if (name == "report") return "every route and identity check";
  return "superlevel volume profile of the homogenised filtration";
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact volumes, jumping numbers and energies of filtrations on toric cones", "reebvol"};
  app.require_subcommand(1);
  Flags f;
  for (const auto& [name, fn] : commands()) {
    CLI::App* sub = app.add_subcommand(name, describe(name));
    sub->add_option("spec", f.spec_path, "problem specification (JSON file, - for stdin)")->required();
    sub->add_option("--format", f.format, "table, json or csv")->check(CLI::IsMember({"table", "json", "csv"}));
    sub->add_option("--decimal", f.decimal, "digits of the decimal renderings (default 6)")->check(CLI::Range(0, 100));
    sub->add_option("--tolerance", f.tolerance, "relative tolerance as an exact rational");
    sub->add_flag("--ceiling", f.ceiling, "round jumping numbers up");
    sub->add_flag("--clamp", f.clamp, "replace psi by max(psi, 0)");
    sub->add_option("--jobs", f.jobs, "worker threads (default REEBVOL_JOBS, else 1)")->check(CLI::Range(1u, 1024u));
    if (name == "jumping") sub->add_option("--m", f.m, "level")->required()->check(CLI::Range(1ul, 1ul << 40));
    if (name == "converge" || name == "report") sub->add_option("--m-grid", f.m_grid, "levels, e.g. 25,50,100");
    if (name == "stilde" || name == "report") sub->add_option("--t-max", f.t_max)->check(CLI::Range(1ul, 1ul << 40));
    if (name == "legendre") sub->add_option("--v", f.v, "point of N, e.g. 1,1/2")->required();
    sub->callback([&f, name = name] { f.command = name; });
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  std::optional<ProblemSpec> spec;
  std::optional<Settings> settings;
  try {
    spec = parse_spec(read_text(f.spec_path, in), f.clamp);
    settings = resolve(f, *spec);
    require_inputs(f.command, spec->setup);
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]";
    if (!e.field().empty()) err << " at " << e.field();
    err << ": " << e.what() << "\n";
    return 2;
  }

  try {
    const Context c(spec->setup, *settings);
    Command fn = nullptr;
    for (const auto& [name, cmd] : commands())
      if (name == f.command) fn = cmd;
    const Outcome o = fn(c);
    out << o.text;
    if (o.verdict_failed) {
      err << "gating verdict failed\n";
      return 4;
    }
    return 0;
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]";
    if (!e.field().empty()) err << " at " << e.field();
    err << ": " << e.what() << "\n";
    return exit_code(e);
  }
}

}  // namespace reebvol::cli
