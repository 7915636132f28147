#include "optrans/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>

namespace optrans::io {

namespace {

[[noreturn]] void fail(const std::string& what) { throw ParseError(what); }

const json& field(const json& j, const char* key) {
  if (!j.is_object()) fail(std::string("expected an object holding '") + key + "'");
  auto it = j.find(key);
  if (it == j.end()) fail(std::string("missing field '") + key + "'");
  return *it;
}

double number(const json& j, const char* what) {
  if (!j.is_number()) fail(std::string("field '") + what + "' must be a number");
  return j.get<double>();
}

std::int64_t integer(const json& j, const char* what) {
  if (!j.is_number_integer()) fail(std::string("field '") + what + "' must be an integer");
  return j.get<std::int64_t>();
}

int dimension(const json& j) {
  const auto d = integer(field(j, "d"), "d");
  if (d < 1 || d > kMaxDim) fail("dimension d=" + std::to_string(d) + " out of range");
  return static_cast<int>(d);
}

template <class Fn>
auto guarded(Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(e.what());
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) fail("cannot format number");
  return {buf, end};
}

json to_json(const LatticePoint& p) {
  json a = json::array();
  for (auto v : p.coords()) a.push_back(v);
  return a;
}

json to_json(const GaborOperator& op) {
  json j;
  j["d"] = op.dim();
  json entries = json::array();
  for (const auto& e : op.entries()) {
    json x;
    x["m"] = to_json(e.m);
    x["k"] = to_json(e.k);
    x["re"] = e.c.real();
    x["im"] = e.c.imag();
    entries.push_back(std::move(x));
  }
  j["entries"] = std::move(entries);
  return j;
}

json to_json(const FramePlan& plan) {
  json j;
  j["p"] = plan.schedule.p;
  j["d"] = plan.schedule.d;
  j["strategy"] = std::string(strategy_name(plan.strategy));
  json caps = json::array();
  for (std::size_t b = 0; b < plan.schedule.window.size(); ++b) {
    json c;
    c["m"] = to_json(plan.schedule.window[b].m);
    c["k"] = to_json(plan.schedule.window[b].k);
    c["n"] = plan.schedule.capacities[b];
    caps.push_back(std::move(c));
  }
  j["capacities"] = std::move(caps);
  json sets = json::array();
  for (std::size_t b = 0; b < plan.family.sets.size(); ++b) {
    json s;
    s["m"] = to_json(plan.family.pairs[b].m);
    s["k"] = to_json(plan.family.pairs[b].k);
    json idx = json::array();
    for (const auto& i : plan.family.sets[b]) idx.push_back(to_json(i));
    s["indices"] = std::move(idx);
    sets.push_back(std::move(s));
  }
  j["index_sets"] = std::move(sets);
  j["generator"] = to_json(plan.generator);
  return j;
}

json to_json(const qha::PhaseSpaceMap& f) {
  json j;
  j["N"] = f.n();
  j["L"] = f.grid().l();
  json vals = json::array();
  for (auto v : f.values()) vals.push_back(json::array({v.real(), v.imag()}));
  j["values"] = std::move(vals);
  return j;
}

LatticePoint lattice_point_from_json(const json& j, int d) {
  return guarded([&] {
    if (!j.is_array() || j.size() != static_cast<std::size_t>(2 * d)) {
      fail("lattice point must be an array of " + std::to_string(2 * d) + " integers");
    }
    std::vector<std::int64_t> c;
    for (const auto& v : j) c.push_back(integer(v, "coordinate"));
    return LatticePoint(std::span<const std::int64_t>(c));
  });
}

GaborOperator gabor_operator_from_json(const json& j) {
  return guarded([&] {
    const int d = dimension(j);
    const auto& entries = field(j, "entries");
    if (!entries.is_array()) fail("'entries' must be an array");
    std::vector<GaborOperator::Entry> e;
    for (const auto& x : entries) {
      e.push_back({lattice_point_from_json(field(x, "m"), d), lattice_point_from_json(field(x, "k"), d),
                   {number(field(x, "re"), "re"), number(field(x, "im"), "im")}});
    }
    try {
      return GaborOperator::from_distinct_entries(d, std::move(e));
    } catch (const CollisionError& err) {
      fail(std::string("operator lists a coefficient twice: ") + err.what());
    }
  });
}

FramePlan plan_from_json(const json& j) {
  return guarded([&] {
    FramePlan plan;
    const double p = number(field(j, "p"), "p");
    const int d = dimension(j);
    try {
      plan.strategy = parse_strategy(field(j, "strategy").get<std::string>());
    } catch (const InvalidArgument& e) {
      fail(e.what());
    }

    const auto& caps = field(j, "capacities");
    if (!caps.is_array() || caps.empty()) fail("'capacities' must be a nonempty array");
    std::vector<LatticePair> window;
    std::vector<std::int64_t> n;
    for (const auto& c : caps) {
      window.push_back({lattice_point_from_json(field(c, "m"), d), lattice_point_from_json(field(c, "k"), d)});
      n.push_back(integer(field(c, "n"), "n"));
      if (n.back() < 1) fail("capacity must be positive");
    }
    if (!(p > 2.0)) fail("plan has p=" + format_double(p) + "; the construction requires p > 2");
    plan.schedule.p = p;
    plan.schedule.d = d;
    plan.schedule.window = window;
    plan.schedule.capacities = n;
    for (auto v : n) plan.schedule.budget += std::pow(static_cast<double>(v), 1.0 - p / 2.0);

    const auto& sets = field(j, "index_sets");
    if (!sets.is_array() || sets.size() != window.size()) fail("'index_sets' must list one set per capacity");
    std::vector<std::vector<LatticePoint>> idx(window.size());
    for (std::size_t b = 0; b < sets.size(); ++b) {
      const LatticePair pr{lattice_point_from_json(field(sets[b], "m"), d),
                           lattice_point_from_json(field(sets[b], "k"), d)};
      if (!(pr == window[b])) fail("index set " + std::to_string(b) + " does not match capacity entry");
      const auto& list = field(sets[b], "indices");
      if (!list.is_array()) fail("'indices' must be an array");
      for (const auto& i : list) idx[b].push_back(lattice_point_from_json(i, d));
    }
    plan.family = IndexFamily(d, std::move(window), std::move(idx));
    plan.generator = gabor_operator_from_json(field(j, "generator"));
    if (plan.generator.dim() != d) fail("generator dimension differs from the plan");
    return plan;
  });
}

qha::PhaseSpaceMap phase_space_map_from_json(const json& j) {
  return guarded([&] {
    const auto n = integer(field(j, "N"), "N");
    const double l = number(field(j, "L"), "L");
    if (n < 8) fail("grid size too small");
    const auto& vals = field(j, "values");
    if (!vals.is_array() || vals.size() != static_cast<std::size_t>(n * n)) fail("'values' must hold N*N entries");
    std::vector<qha::cplx> v;
    v.reserve(vals.size());
    for (const auto& x : vals) {
      if (!x.is_array() || x.size() != 2) fail("each value must be [re, im]");
      v.emplace_back(number(x[0], "re"), number(x[1], "im"));
    }
    try {
      return qha::PhaseSpaceMap(qha::Grid(static_cast<std::size_t>(n), l), std::move(v));
    } catch (const InvalidArgument& e) {
      fail(e.what());
    }
  });
}

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(e.what());
  }
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write '" + path + "'");
  out << text;
  if (!out) throw InvalidArgument("write to '" + path + "' failed");
}

void write_csv(std::ostream& os, const qha::PhaseSpaceMap& f) {
  os << "# N=" << f.n() << ",L=" << format_double(f.grid().l()) << "\n";
  os << "x,w,re,im\n";
  const long lo = f.grid().lo();
  for (long a = lo; a < -lo; ++a) {
    for (long b = lo; b < -lo; ++b) {
      const auto z = f.point(a, b);
      const auto v = f.at(a, b);
      os << format_double(z.x) << ',' << format_double(z.w) << ',' << format_double(v.real()) << ','
         << format_double(v.imag()) << '\n';
    }
  }
}

qha::PhaseSpaceMap read_phase_space_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) fail("empty phase-space CSV");
  std::size_t n = 0;
  double l = 0.0;
  {
    char tail = 0;
    if (std::sscanf(line.c_str(), "# N=%zu,L=%lf%c", &n, &l, &tail) != 2) fail("phase-space CSV needs a '# N=..,L=..' header");
  }
  if (!std::getline(is, line) || line != "x,w,re,im") fail("phase-space CSV needs the 'x,w,re,im' column row");
  std::optional<qha::Grid> grid;
  try {
    grid.emplace(n, l);
  } catch (const InvalidArgument& e) {
    fail(e.what());
  }
  qha::PhaseSpaceMap f(*grid);
  std::size_t rows = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    double x, w, re, im;
    char tail = 0;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf%c", &x, &w, &re, &im, &tail) != 4) fail("bad CSV row: " + line);
    try {
      const auto s = qha::align(*grid, {x, w});
      f.at(s.a, s.b) = {re, im};
    } catch (const Error& e) {
      fail(std::string("CSV row off the grid: ") + e.what());
    }
    ++rows;
  }
  if (rows != n * n) fail("phase-space CSV has " + std::to_string(rows) + " rows, expected " + std::to_string(n * n));
  return f;
}

void write_csv(std::ostream& os, const ResidualReport& report) {
  os << "M,target_id,residual\n";
  for (std::size_t t = 0; t < report.curves.size(); ++t) {
    for (std::size_t m = 0; m < report.curves[t].size(); ++m) {
      os << (m + 1) << ',' << t << ',' << format_double(report.curves[t][m]) << '\n';
    }
  }
}

}  // namespace optrans::io
