// optrans: build frame plans, run the verification suites, emit JSON reports.
//
// Exit codes: 0 all checks pass, 1 a property failed, 2 invalid parameters,
// 3 malformed input (unreadable plan or config, misaligned shift).

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "optrans/frame.hpp"
#include "optrans/io.hpp"
#include "optrans/qha.hpp"
#include "optrans/translates.hpp"

namespace {

using optrans::io::json;
namespace qha = optrans::qha;

constexpr double kPi = std::numbers::pi;

enum Exit { kPass = 0, kPropertyFailure = 1, kInvalidParameters = 2, kMalformedInput = 3 };

// Above this many indices the quadratic condition checks are skipped in frame-verify.
constexpr std::int64_t kConditionCheckLimit = 4000;

struct Config {
  double p = 4.0;
  int dim = 1;
  std::int64_t radius = -1;  // per-command default when negative
  std::size_t grid_n = 0;    // per-command default when zero
  double grid_l = 8.0;
  double decay_a = 0.5;
  std::uint64_t seed = 1;
  int trials = 10;
  double tolerance_scale = 1.0;
  std::string out;
  std::string report;
  std::string plan;
  std::string strategy = "auto";
  std::vector<double> shift{0.5, 0.25};
};

struct InvalidParameters : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raw flag values; only those given on the command line override the config file.
struct Flags {
  Config v;
  std::vector<std::pair<std::string, CLI::Option*>> given;
  std::string config_path;
};

void add_common(CLI::App* sub, Flags& f) {
  auto reg = [&](const char* name, CLI::Option* o) { f.given.emplace_back(name, o); };
  reg("p", sub->add_option("--p", f.v.p, "Schatten exponent, p > 2"));
  reg("dim", sub->add_option("--dim", f.v.dim, "Dimension d"));
  reg("radius", sub->add_option("--radius", f.v.radius, "Window radius (l1)"));
  reg("grid-n", sub->add_option("--grid-n", f.v.grid_n, "Grid size N (power of two)"));
  reg("grid-l", sub->add_option("--grid-l", f.v.grid_l, "Grid period L"));
  reg("decay-a", sub->add_option("--decay-a", f.v.decay_a, "Perturbation decay base a in (0,1)"));
  reg("seed", sub->add_option("--seed", f.v.seed, "Random seed"));
  reg("trials", sub->add_option("--trials", f.v.trials, "Random trials"));
  reg("out", sub->add_option("--out", f.v.out, "Artifact path (plan JSON, residual CSV)"));
  reg("report", sub->add_option("--report", f.v.report, "Also write the report here"));
  reg("tolerance-scale", sub->add_option("--tolerance-scale", f.v.tolerance_scale, "Multiplies every tolerance"));
  reg("plan", sub->add_option("--plan", f.v.plan, "Plan JSON"));
  reg("strategy", sub->add_option("--strategy", f.v.strategy, "greedy, sidon or auto"));
  reg("shift", sub->add_option("--shift", f.v.shift, "Phase-space shift x w")->expected(2));
  sub->add_option("--config", f.config_path, "JSON config; flags override it");
}

template <class T>
void take(const json& j, const char* key, T& dst) {
  if (auto it = j.find(key); it != j.end()) {
    try {
      dst = it->get<T>();
    } catch (const nlohmann::json::exception&) {
      throw optrans::ParseError(std::string("config field '") + key + "' has the wrong type");
    }
  }
}

Config resolve(const Flags& f) {
  Config c;
  if (!f.config_path.empty()) {
    const json j = optrans::io::read_json_file(f.config_path);
    if (!j.is_object()) throw optrans::ParseError("config must be a JSON object");
    static const char* const known[] = {"p",   "dim",    "radius", "grid-n", "grid-l",          "decay-a", "seed",
                                        "trials", "out", "report", "plan",   "tolerance-scale", "strategy", "shift"};
    for (const auto& [key, _] : j.items()) {
      if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
        throw optrans::ParseError("unknown config field '" + key + "'");
      }
    }
    take(j, "p", c.p);
    take(j, "dim", c.dim);
    take(j, "radius", c.radius);
    take(j, "grid-n", c.grid_n);
    take(j, "grid-l", c.grid_l);
    take(j, "decay-a", c.decay_a);
    take(j, "seed", c.seed);
    take(j, "trials", c.trials);
    take(j, "out", c.out);
    take(j, "report", c.report);
    take(j, "plan", c.plan);
    take(j, "tolerance-scale", c.tolerance_scale);
    take(j, "strategy", c.strategy);
    take(j, "shift", c.shift);
  }
  for (const auto& [name, opt] : f.given) {
    if (opt->count() == 0) continue;
    if (name == "p") c.p = f.v.p;
    else if (name == "dim") c.dim = f.v.dim;
    else if (name == "radius") c.radius = f.v.radius;
    else if (name == "grid-n") c.grid_n = f.v.grid_n;
    else if (name == "grid-l") c.grid_l = f.v.grid_l;
    else if (name == "decay-a") c.decay_a = f.v.decay_a;
    else if (name == "seed") c.seed = f.v.seed;
    else if (name == "trials") c.trials = f.v.trials;
    else if (name == "out") c.out = f.v.out;
    else if (name == "report") c.report = f.v.report;
    else if (name == "tolerance-scale") c.tolerance_scale = f.v.tolerance_scale;
    else if (name == "plan") c.plan = f.v.plan;
    else if (name == "strategy") c.strategy = f.v.strategy;
    else if (name == "shift") c.shift = f.v.shift;
  }
  if (!(c.tolerance_scale > 0.0)) throw InvalidParameters("--tolerance-scale must be positive");
  if (c.trials < 0) throw InvalidParameters("--trials must be nonnegative");
  if (c.shift.size() != 2) throw InvalidParameters("--shift takes two numbers, x and w");
  return c;
}

void require_p(double p) {
  if (!(p > 2.0)) {
    std::ostringstream msg;
    msg << "p = " << p << " is not allowed: the frame construction requires p > 2";
    throw InvalidParameters(msg.str());
  }
}

void require_d1(const Config& c, const char* what) {
  if (c.dim != 1) throw InvalidParameters(std::string(what) + " samples the phase space R^2 only; use --dim 1");
}

qha::Grid grid_of(const Config& c, std::size_t default_n) {
  const std::size_t n = c.grid_n ? c.grid_n : default_n;
  try {
    return qha::Grid(n, c.grid_l);
  } catch (const optrans::InvalidArgument& e) {
    throw InvalidParameters(e.what());
  }
}

json point_json(const qha::PhaseSpacePoint& z) { return json::array({z.x, z.w}); }

json check(const char* name, bool passed) {
  json j;
  j["name"] = name;
  j["passed"] = passed;
  return j;
}

// ---------------------------------------------------------------- frame-build

int cmd_frame_build(const Config& c, json& rep) {
  require_p(c.p);
  const std::int64_t radius = c.radius < 0 ? 0 : c.radius;
  optrans::FamilyStrategy strategy;
  try {
    strategy = optrans::parse_strategy(c.strategy);
  } catch (const optrans::InvalidArgument& e) {
    throw InvalidParameters(e.what());
  }
  optrans::FramePlan plan;
  try {
    plan = optrans::build_plan(c.p, c.dim, radius, strategy);
  } catch (const optrans::DimensionMismatch& e) {
    throw InvalidParameters(e.what());
  }
  const auto& sched = plan.schedule;

  std::vector<double> expect;
  for (auto n : sched.capacities) expect.insert(expect.end(), static_cast<std::size_t>(n), 1.0 / std::sqrt(double(n)));
  const optrans::SingularSpectrum closed(std::move(expect));
  const auto svd = optrans::singular_values(plan.generator);
  const double dev = optrans::SingularSpectrum::max_deviation(svd, closed);
  const double norm_expected = std::pow(sched.budget, 1.0 / c.p);
  const double norm_measured = svd.schatten_norm(c.p);
  const double norm_rel = std::abs(norm_measured - norm_expected) / norm_expected;
  const double tol = 1e-10 * c.tolerance_scale;

  rep["command"] = "frame-build";
  rep["p"] = c.p;
  rep["d"] = c.dim;
  rep["radius"] = radius;
  rep["strategy_requested"] = c.strategy;
  rep["strategy"] = std::string(optrans::strategy_name(plan.strategy));
  rep["window_size"] = sched.window.size();
  rep["total_indices"] = sched.total();
  rep["budget"] = sched.budget;
  rep["frame_bound"] = sched.frame_bound();
  rep["generator_support"] = plan.generator.support_size();
  json checks = json::array();
  auto spec = check("generator_spectrum", dev <= tol);
  spec["max_deviation"] = dev;
  spec["tolerance"] = tol;
  checks.push_back(spec);
  auto nrm = check("generator_norm", norm_rel <= tol);
  nrm["expected"] = norm_expected;
  nrm["measured"] = norm_measured;
  nrm["relative_error"] = norm_rel;
  nrm["tolerance"] = tol;
  checks.push_back(nrm);
  auto bound = check("frame_bound_at_most_half", sched.frame_bound() <= 0.5);
  bound["value"] = sched.frame_bound();
  checks.push_back(bound);
  bool ok = true;
  for (const auto& ch : checks) ok = ok && ch["passed"].get<bool>();
  rep["checks"] = std::move(checks);
  rep["passed"] = ok;
  if (!c.out.empty()) optrans::io::write_text_file(c.out, optrans::io::to_json(plan).dump(2) + "\n");
  return ok ? kPass : kPropertyFailure;
}

// --------------------------------------------------------------- frame-verify

json violation_json(const optrans::Condition2Violation& v) {
  json j;
  j["i"] = optrans::io::to_json(v.i);
  j["it"] = optrans::io::to_json(v.it);
  j["j"] = optrans::io::to_json(v.j);
  j["jt"] = optrans::io::to_json(v.jt);
  j["blocks"] = json::array({v.block_i, v.block_it, v.block_j, v.block_jt});
  j["on_k"] = v.on_k;
  j["on_m"] = v.on_m;
  return j;
}

json violation_json(const optrans::Condition1Violation& v) {
  json j;
  j["i"] = optrans::io::to_json(v.i);
  j["it"] = optrans::io::to_json(v.it);
  j["blocks"] = json::array({v.block_i, v.block_it});
  j["on_k"] = v.on_k;
  j["on_m"] = v.on_m;
  return j;
}

int cmd_frame_verify(const Config& c, json& rep) {
  if (c.plan.empty()) throw optrans::ParseError("frame-verify needs --plan <file>");
  const auto plan = optrans::io::plan_from_json(optrans::io::read_json_file(c.plan));
  const auto& sched = plan.schedule;
  const double tol = c.tolerance_scale;

  rep["command"] = "frame-verify";
  json info;
  info["p"] = sched.p;
  info["d"] = sched.d;
  info["strategy"] = std::string(optrans::strategy_name(plan.strategy));
  info["window_size"] = sched.window.size();
  info["total_indices"] = sched.total();
  info["frame_bound"] = sched.frame_bound();
  rep["plan"] = std::move(info);
  rep["trials"] = c.trials;
  rep["seed"] = c.seed;
  json checks = json::array();
  bool ok = true;

  {
    bool sizes = true;
    for (std::size_t b = 0; b < plan.family.sets.size(); ++b) {
      sizes = sizes && static_cast<std::int64_t>(plan.family.sets[b].size()) == sched.capacities[b];
    }
    bool generator = false;
    std::string why;
    try {
      generator = optrans::build_frame_generator(sched, plan.family) == plan.generator;
      if (!generator) why = "stored generator differs from the one the family defines";
    } catch (const optrans::CollisionError& e) {
      why = e.what();
    }
    auto s = check("structure", sizes && generator);
    s["set_sizes_match_capacities"] = sizes;
    s["generator_matches_family"] = generator;
    if (!why.empty()) s["detail"] = why;
    ok = ok && s["passed"].get<bool>();
    checks.push_back(std::move(s));
  }

  for (int which : {2, 1}) {
    json s;
    s["name"] = which == 2 ? "condition_2" : "condition_1";
    if (sched.total() > kConditionCheckLimit) {
      s["status"] = "skipped";
      s["reason"] = "family has " + std::to_string(sched.total()) + " indices; the check is quadratic (limit " +
                    std::to_string(kConditionCheckLimit) + ")";
    } else if (which == 2) {
      const auto v = optrans::verify_condition2_fast(plan.family, 1);
      s["status"] = v.empty() ? "passed" : "failed";
      if (!v.empty()) s["witness"] = violation_json(v.front());
      ok = ok && v.empty();
    } else {
      const auto v = optrans::verify_condition1(plan.family, 1);
      s["status"] = v.empty() ? "passed" : "failed";
      if (!v.empty()) s["witness"] = violation_json(v.front());
      ok = ok && v.empty();
    }
    checks.push_back(std::move(s));
  }

  if (c.trials > 0) {
    std::mt19937_64 rng(c.seed);
    double spec_dev = 0.0, bound_ratio = 0.0, neumann_ratio = 0.0, neumann_final = 0.0;
    int spec_fail = -1, bound_fail = -1, neumann_fail = -1;
    std::string neumann_detail;
    const double spec_tol = 1e-8 * tol, ratio_cap = 0.55, final_tol = 1e-9 * tol;
    const double bound = sched.frame_bound();
    for (int t = 0; t < c.trials; ++t) {
      const auto u = optrans::random_window_operator(rng, plan);
      const auto resid = optrans::subtract(optrans::frame_apply(u, plan), u);
      const double dev = optrans::SingularSpectrum::max_deviation(optrans::singular_values(resid),
                                                                   optrans::residual_spectrum_closed_form(u, plan));
      spec_dev = std::max(spec_dev, dev);
      if (dev > spec_tol && spec_fail < 0) spec_fail = t;
      const double ratio = optrans::schatten_norm(resid, sched.p) / optrans::schatten_norm(u, sched.p);
      bound_ratio = std::max(bound_ratio, ratio);
      if ((ratio > bound || ratio > 0.5) && bound_fail < 0) bound_fail = t;
      try {
        const auto nr = optrans::neumann_reconstruct(u, plan);
        for (std::size_t k = 1; k < nr.relative_errors.size(); ++k) {
          const double prev = nr.relative_errors[k - 1];
          if (prev > 0.0) neumann_ratio = std::max(neumann_ratio, nr.relative_errors[k] / prev);
        }
        neumann_final = std::max(neumann_final, nr.relative_errors.back());
        if ((neumann_ratio > ratio_cap || nr.relative_errors.back() > final_tol) && neumann_fail < 0) neumann_fail = t;
      } catch (const optrans::NonContraction& e) {
        if (neumann_fail < 0) {
          neumann_fail = t;
          neumann_detail = e.what();
        }
      }
    }
    auto s = check("residual_spectrum", spec_fail < 0);
    s["max_deviation"] = spec_dev;
    s["tolerance"] = spec_tol;
    if (spec_fail >= 0) s["failing_trial"] = spec_fail;
    checks.push_back(std::move(s));
    auto b = check("frame_bound", bound_fail < 0);
    b["max_ratio"] = bound_ratio;
    b["bound"] = bound;
    if (bound_fail >= 0) b["failing_trial"] = bound_fail;
    checks.push_back(std::move(b));
    auto n = check("neumann", neumann_fail < 0);
    n["max_ratio"] = neumann_ratio;
    n["ratio_cap"] = ratio_cap;
    n["max_final_error"] = neumann_final;
    n["final_tolerance"] = final_tol;
    if (neumann_fail >= 0) n["failing_trial"] = neumann_fail;
    if (!neumann_detail.empty()) n["detail"] = neumann_detail;
    checks.push_back(std::move(n));
    ok = ok && spec_fail < 0 && bound_fail < 0 && neumann_fail < 0;
  }
  rep["checks"] = std::move(checks);
  rep["passed"] = ok;
  return ok ? kPass : kPropertyFailure;
}

// ----------------------------------------------------------------- qha-verify

using qha::cplx;

double fw_gaussian(const qha::PhaseSpacePoint& z) { return std::exp(-kPi * (z.x * z.x + z.w * z.w) / 2); }

qha::SampledOperator random_sampled_operator(std::mt19937_64& rng, const qha::Grid& g) {
  std::normal_distribution<double> normal;
  qha::SampledOperator s(g);
  for (auto& v : s.kernel()) {
    const double re = normal(rng);
    v = {re, normal(rng)};
  }
  return s;
}

int cmd_qha_verify(const Config& c, json& rep) {
  require_d1(c, "qha-verify");
  const qha::Grid coarse = grid_of(c, 32);
  const qha::Grid fine(2 * coarse.n(), coarse.l());
  const qha::PhaseSpacePoint z0{c.shift[0], c.shift[1]};
  qha::align(coarse, z0);  // MisalignedPoint -> exit 3
  const double tol = c.tolerance_scale;
  std::mt19937_64 rng(c.seed);

  rep["command"] = "qha-verify";
  rep["grid_n"] = coarse.n();
  rep["grid_n_fine"] = fine.n();
  rep["grid_l"] = coarse.l();
  rep["shift"] = point_json(z0);
  rep["seed"] = c.seed;
  json checks = json::array();

  {
    qha::PhaseSpaceMap f(coarse);
    std::normal_distribution<double> normal;
    for (auto& v : f.values()) {
      const double re = normal(rng);
      v = {re, normal(rng)};
    }
    const double err = qha::max_abs_diff(qha::symplectic_fourier(qha::symplectic_fourier(f)), f);
    auto s = check("symplectic_involution", err <= 1e-10 * tol);
    s["error"] = err;
    s["tolerance"] = 1e-10 * tol;
    checks.push_back(std::move(s));
  }
  {
    // F_W(alpha_z S)(u) = e^{2 pi i sigma(z,u)} F_W S(u) on a lattice of shifts and probes
    const auto s = random_sampled_operator(rng, coarse);
    const double hx = coarse.h(), hw = 1.0 / coarse.l();
    const auto zs = qha::rectangle(8 * hx, 4 * hx, 4 * hw, 2 * hw);
    const auto us = qha::rectangle(12 * hx, 6 * hx, 6 * hw, 3 * hw);
    const auto base = qha::fourier_wigner(s, us);
    double worst = 0.0;
    for (const auto& z : zs) {
      const auto moved = qha::fourier_wigner(qha::heisenberg_translate(s, z), us);
      for (std::size_t i = 0; i < us.size(); ++i) {
        worst = std::max(worst, std::abs(moved[i] - std::polar(1.0, 2 * kPi * qha::symplectic_form(z, us[i])) * base[i]));
      }
    }
    auto j = check("fourier_wigner_covariance", worst <= 1e-8 * tol);
    j["error"] = worst;
    j["tolerance"] = 1e-8 * tol;
    j["shifts"] = zs.size();
    j["probes"] = us.size();
    checks.push_back(std::move(j));
  }
  const auto region = qha::refinement_region(coarse, fine);
  auto refinement = [&](const char* name, double e_coarse, double e_fine) {
    const double ratio = e_fine > 0.0 ? e_coarse / e_fine : std::numeric_limits<double>::infinity();
    auto j = check(name, ratio >= 1.5);
    j["error_coarse"] = e_coarse;
    j["error_fine"] = e_fine;
    j["ratio"] = std::isfinite(ratio) ? json(ratio) : json("inf");
    j["fail_below"] = 1.5;
    return j;
  };
  {
    auto f = [](const qha::PhaseSpacePoint& z) { return cplx(std::exp(-kPi * (z.x * z.x + z.w * z.w))); };
    checks.push_back(refinement("quantization_roundtrip", qha::quantization_roundtrip_error(coarse, f, region),
                                qha::quantization_roundtrip_error(fine, f, region)));
  }
  {
    auto ref = [&](const qha::PhaseSpacePoint& z) {
      return std::polar(fw_gaussian(z) * fw_gaussian(z), 2 * kPi * qha::symplectic_form(z0, z));
    };
    double raw[2], cont[2];
    int idx = 0;
    for (const qha::Grid* g : {&coarse, &fine}) {
      const auto s = qha::gaussian_projection(*g);
      const auto t = qha::heisenberg_translate(s, z0);
      raw[idx] = qha::verify_convolution_theorem(s, t);
      cont[idx] = qha::convolution_theorem_discrepancy(s, t, ref, region);
      ++idx;
    }
    auto j = refinement("convolution_theorem", cont[0], cont[1]);
    j["discrete_discrepancy_coarse"] = raw[0];
    j["discrete_discrepancy_fine"] = raw[1];
    checks.push_back(std::move(j));
  }
  bool ok = true;
  for (const auto& ch : checks) ok = ok && ch["passed"].get<bool>();
  rep["checks"] = std::move(checks);
  rep["passed"] = ok;
  return ok ? kPass : kPropertyFailure;
}

// ------------------------------------------------------------------------- t2

json special_form_json(const optrans::SpecialFormResult& r) {
  json j;
  j["holds"] = r.holds;
  if (r.witness) j["witness"] = point_json(*r.witness);
  json shifts = json::array();
  for (auto [a, b] : r.shifts) shifts.push_back(json::array({a, b}));
  j["shifts"] = std::move(shifts);
  return j;
}

int cmd_t2(const Config& c, json& rep) {
  require_d1(c, "t2");
  const qha::Grid g = grid_of(c, 64);
  const qha::PhaseSpacePoint z0{c.shift[0], c.shift[1]};
  qha::align(g, z0);
  const double tol = c.tolerance_scale;
  const long per_unit = std::lround(g.n() / g.l());
  if (std::abs(static_cast<double>(per_unit) - g.n() / g.l()) > 1e-12 || std::abs(g.l() - std::round(g.l())) > 1e-12 ||
      g.l() < 4.0) {
    throw InvalidParameters("t2 needs integer L >= 4 and integer N/L so unit cells sit on the grid");
  }
  const long rw = std::lround(g.l());

  rep["command"] = "t2";
  rep["grid_n"] = g.n();
  rep["grid_l"] = g.l();
  rep["shift"] = point_json(z0);
  json checks = json::array();

  {
    const auto r = optrans::is_special_form(optrans::SupportSet::box(per_unit, rw, 0.0, 1.0, 0.0, 1.0));
    auto j = check("special_form_unit_cell", r.holds);
    j["result"] = special_form_json(r);
    checks.push_back(std::move(j));
  }
  {
    const auto r = optrans::is_special_form(optrans::SupportSet::box(per_unit, rw, 0.0, 1.5, 0.0, 1.0));
    auto j = check("special_form_wide_box_fails", !r.holds && r.witness.has_value());
    j["result"] = special_form_json(r);
    checks.push_back(std::move(j));
  }
  const auto s = qha::gaussian_projection(g);
  {
    const auto m = optrans::span_membership(s, qha::heisenberg_translate(s, z0), 1e-6);
    auto j = check("span_membership_translate", m.member);
    j["offending_cells"] = m.offending_cells;
    checks.push_back(std::move(j));
  }
  {
    qha::PhaseSpaceMap band(g);
    const long lo = g.lo();
    const double cx = g.l() / 2 - 1.0, cw = static_cast<double>(g.n()) / (2 * g.l()) - 1.0;
    for (long a = lo; a < -lo; ++a)
      for (long b = lo; b < -lo; ++b) {
        const auto z = band.point(a, b);
        if (z.x > cx - 0.5 && z.w > cw - 0.5) {
          band.at(a, b) = std::exp(-kPi * ((z.x - cx) * (z.x - cx) + (z.w - cw) * (z.w - cw)));
        }
      }
    const auto m = optrans::span_membership(qha::weyl_quantize(band), s, 1e-3);
    auto j = check("span_membership_disjoint_band_fails", !m.member);
    j["offending_cells"] = m.offending_cells;
    if (m.first_offender) j["first_offender"] = point_json(*m.first_offender);
    checks.push_back(std::move(j));
  }
  {
    const auto ghat = qha::fourier_wigner(s);
    const auto h = optrans::integer_orthogonal_witness(ghat);
    const double per = optrans::periodized_product_max(h, ghat);
    const auto t = qha::weyl_quantize(h);
    double worst = 0.0;
    for (long n1 = -3; n1 <= 3; ++n1)
      for (long n2 = -3; n2 <= 3; ++n2) {
        if (std::abs(n1) + std::abs(n2) > 3) continue;
        const qha::PhaseSpacePoint n{double(n1), double(n2)};
        worst = std::max(worst, std::abs(qha::trace_pairing(t, qha::heisenberg_translate(s, n))));
      }
    auto j = check("orthogonal_witness", per <= 1e-12 * tol && worst <= 1e-8 * tol && h.max_abs() > 0.0);
    j["periodized_product_max"] = per;
    j["pairing_max"] = worst;
    j["pairing_tolerance"] = 1e-8 * tol;
    j["witness_max_abs"] = h.max_abs();
    checks.push_back(std::move(j));
  }
  bool ok = true;
  for (const auto& ch : checks) ok = ok && ch["passed"].get<bool>();
  rep["checks"] = std::move(checks);
  rep["passed"] = ok;
  return ok ? kPass : kPropertyFailure;
}

// ------------------------------------------------------------------ perturbed

int cmd_perturbed(const Config& c, json& rep) {
  require_d1(c, "perturbed");
  if (!(c.decay_a > 0.0 && c.decay_a < 1.0)) throw InvalidParameters("--decay-a must lie in (0, 1)");
  const std::int64_t radius = c.radius < 0 ? 3 : c.radius;
  const qha::Grid g = grid_of(c, 128);
  const qha::PhaseSpacePoint z0{c.shift[0], c.shift[1]};
  qha::align(g, z0);

  const auto s = optrans::classK_operator(g);
  const auto phi = qha::gaussian_projection(g);
  const std::vector<qha::SampledOperator> targets{phi, qha::heisenberg_translate(phi, z0)};
  const auto res = optrans::completeness_residual(s, optrans::perturbed_lattice(c.decay_a, radius), targets);

  rep["command"] = "perturbed";
  rep["decay_a"] = c.decay_a;
  rep["radius"] = radius;
  rep["grid_n"] = g.n();
  rep["grid_l"] = g.l();
  rep["targets"] = json::array({"gaussian", "gaussian shifted by " + optrans::io::format_double(z0.x) + "," +
                                                 optrans::io::format_double(z0.w)});
  json tr = json::array();
  std::size_t accepted = 0;
  for (const auto& t : res.translates) {
    json j;
    j["n"] = optrans::io::to_json(t.n);
    j["exact"] = point_json(t.exact);
    j["rounded"] = point_json(t.rounded);
    j["rounding"] = t.rounding;
    j["accepted"] = t.accepted;
    accepted += t.accepted;
    tr.push_back(std::move(j));
  }
  rep["translates"] = std::move(tr);
  rep["accepted"] = accepted;
  rep["max_condition"] = res.max_condition;

  const double mono_tol = 1e-10;
  bool ok = true;
  json curves = json::array();
  for (std::size_t k = 0; k < res.curves.size(); ++k) {
    const auto& cv = res.curves[k];
    json j;
    j["target_id"] = k;
    j["residuals"] = cv;
    double worst_rise = 0.0;
    int strict = 0;
    for (std::size_t m = 1; m < cv.size(); ++m) {
      worst_rise = std::max(worst_rise, cv[m] - cv[m - 1]);
      strict += cv[m] < cv[m - 1] - mono_tol;
    }
    const bool mono = worst_rise <= mono_tol;
    j["nonincreasing"] = mono;
    j["max_increase"] = worst_rise;
    j["strict_decreases"] = strict;
    if (!cv.empty()) j["final_over_initial"] = cv.back() / cv.front();
    ok = ok && mono && strict >= 3;
    curves.push_back(std::move(j));
  }
  rep["curves"] = std::move(curves);
  rep["passed"] = ok;
  if (!c.out.empty()) {
    std::ostringstream csv;
    optrans::io::write_csv(csv, res);
    optrans::io::write_text_file(c.out, csv.str());
  }
  return ok ? kPass : kPropertyFailure;
}

void emit(const Config& c, const json& rep) {
  const std::string text = rep.dump(2) + "\n";
  std::cout << text;
  if (!c.report.empty()) optrans::io::write_text_file(c.report, text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Operator translates: frame plans and numerical verification"};
  app.require_subcommand(1);
  Flags flags;
  struct Sub {
    const char* name;
    const char* help;
    int (*run)(const Config&, json&);
  };
  const Sub subs[] = {
      {"frame-build", "Build a frame plan and check the generator spectrum", cmd_frame_build},
      {"frame-verify", "Check a plan: conditions, residual spectrum, bound, reconstruction", cmd_frame_verify},
      {"qha-verify", "Transform identities and refinement studies", cmd_qha_verify},
      {"t2", "Support certificates and the integer-translate witness", cmd_t2},
      {"perturbed", "Least-squares residuals over perturbed integer translates", cmd_perturbed},
  };
  std::vector<std::pair<CLI::App*, const Sub*>> registered;
  for (const auto& s : subs) {
    auto* sub = app.add_subcommand(s.name, s.help);
    add_common(sub, flags);
    registered.emplace_back(sub, &s);
  }
  // each subcommand registered its own copy of the flags; keep only the chosen one
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalidParameters;
  }

  const Sub* chosen = nullptr;
  for (auto [sub, s] : registered) {
    if (sub->parsed()) chosen = s;
  }
  json rep;
  Config cfg;
  try {
    cfg = resolve(flags);
    const int code = chosen->run(cfg, rep);
    emit(cfg, rep);
    return code;
  } catch (const InvalidParameters& e) {
    std::cerr << "invalid parameters: " << e.what() << "\n";
    return kInvalidParameters;
  } catch (const optrans::MisalignedPoint& e) {
    std::cerr << "misaligned shift: " << e.what() << "\n";
    return kMalformedInput;
  } catch (const optrans::ParseError& e) {
    std::cerr << "malformed input: " << e.what() << "\n";
    return kMalformedInput;
  } catch (const optrans::CollisionError& e) {
    std::cerr << "malformed input: " << e.what() << "\n";
    return kMalformedInput;
  } catch (const optrans::InvalidArgument& e) {
    std::cerr << "invalid parameters: " << e.what() << "\n";
    return kInvalidParameters;
  } catch (const optrans::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kPropertyFailure;
  }
}
