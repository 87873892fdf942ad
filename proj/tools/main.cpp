#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "report.hpp"

using namespace finslerlab;
using cli::Check;
using cli::json;
using cli::Report;
using cli::UsageError;

namespace {

struct OutputOpts {
  std::string out;
  std::string format = "json";
  bool no_timestamp = false;
  std::optional<int> threads;
};

struct ModelOpts {
  std::string model = "funk";
  int dim = 3;
  double mu = 0.0;
  double sigma = 0.0;
  std::optional<double> eps;
  int sign = 1;
  double lambda = 0.3;
  std::string metric;
  std::string form;
  std::string phi = "randers";
  std::string phi_k;
  double radius = 1.0;
};

void add_output_options(CLI::App* sub, OutputOpts& o) {
  sub->add_option("--out", o.out, "Report file (default: stdout)");
  sub->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
  sub->add_flag("--no-timestamp", o.no_timestamp, "Omit timestamp and timing so reports are byte-identical");
  sub->add_option("--threads", o.threads, "Worker threads (fallback: FINSLERLAB_THREADS, then 1)");
}

void add_model_options(CLI::App* sub, ModelOpts& m) {
  sub->add_option("--model", m.model, "funk|berwald|space-form|sigma|example63|example64|perturbed-funk|euclidean");
  sub->add_option("--dim", m.dim, "Dimension");
  sub->add_option("--mu", m.mu, "Curvature of the space form");
  sub->add_option("--sigma", m.sigma, "sigma of the phi_sigma family");
  sub->add_option("--eps", m.eps, "phi'(0)");
  sub->add_option("--sign", m.sign, "Sign of the example63 variant (+1 or -1)");
  sub->add_option("--lambda", m.lambda, "beta- = lambda <x,y> for the example metrics");
  sub->add_option("--metric", m.metric, "Custom a_ij as rows 'a11,a12;a21,a22' over x1..xn");
  sub->add_option("--form", m.form, "Custom b_i as 'b1,b2,...' (default 0)");
  sub->add_option("--phi", m.phi, "phi of a custom metric")
      ->check(CLI::IsMember({"riemannian", "randers", "berwald", "quadrature"}));
  sub->add_option("--phi-k", m.phi_k, "k1,k2,k3 for --phi quadrature");
  sub->add_option("--radius", m.radius, "Domain radius of a custom metric");
}

int resolve_threads(const std::optional<int>& flag) {
  int t = 1;
  if (flag) {
    t = *flag;
  } else if (const char* env = std::getenv("FINSLERLAB_THREADS"); env && *env) {
    try {
      std::size_t used = 0;
      t = std::stoi(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument(env);
    } catch (const std::exception&) {
      throw UsageError(std::string("FINSLERLAB_THREADS is not an integer: ") + env);
    }
  }
  if (t < 1) throw UsageError("thread count must be at least 1");
  return t;
}

std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(std::string("bad number '") + item + "' in " + what);
    }
  }
  return out;
}

/// "k1,k2,k3" or "k1,k2,k3,eps".
OdeParams parse_k(const std::string& s, std::optional<double> eps, const char* what) {
  const std::vector<double> v = parse_list(s, what);
  if (v.size() != 3 && v.size() != 4) throw UsageError(std::string(what) + " needs k1,k2,k3 or k1,k2,k3,eps");
  OdeParams k{v[0], v[1], v[2], v.size() == 4 ? v[3] : eps.value_or(0.0)};
  if (v.size() == 4 && eps && *eps != v[3]) throw UsageError("eps given twice with different values");
  try {
    k.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return k;
}

Point parse_point(const std::string& s, int dim, const char* what) {
  std::vector<double> v = parse_list(s, what);
  if (static_cast<int>(v.size()) != dim) throw UsageError(std::string(what) + " has the wrong dimension");
  return Point(std::move(v));
}

json k_json(const OdeParams& k) { return {{"k1", k.k1}, {"k2", k.k2}, {"k3", k.k3}, {"eps", k.eps}}; }

json vec_json(const Vec<double>& v) {
  json j = json::array();
  for (double c : v) j.push_back(c);
  return j;
}

json mat_json(const Mat<double>& m) {
  json j = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    j.push_back(std::move(row));
  }
  return j;
}

double max_diff(const Mat<double>& a, const Mat<double>& b) { return max_abs(a - b); }

double max_diff(const Vec<double>& a, const Vec<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

ModelKind model_kind(const std::string& name) {
  for (ModelKind k : {ModelKind::Funk, ModelKind::Berwald, ModelKind::SpaceForm, ModelKind::FamilySigma,
                      ModelKind::Example63, ModelKind::Example64, ModelKind::PerturbedFunk, ModelKind::Euclidean})
    if (name == to_string(k)) return k;
  throw UsageError("unknown model '" + name + "'");
}

ABMetric build_model(const ModelOpts& o) {
  try {
    if (!o.metric.empty()) {
      const MetricField a = parse_metric(o.metric, o.radius);
      const OneFormField b = o.form.empty() ? constant_form(Vec<double>(static_cast<std::size_t>(a.dim()), 0.0), o.radius)
                                            : parse_form(o.form, a.dim(), o.radius);
      PhiSpec phi;
      if (o.phi == "riemannian") phi = phi_riemannian();
      else if (o.phi == "randers") phi = phi_randers(o.eps.value_or(1.0));
      else if (o.phi == "berwald") phi = phi_berwald();
      else {
        if (o.phi_k.empty()) throw UsageError("--phi quadrature needs --phi-k");
        phi = phi_quadrature(parse_k(o.phi_k, o.eps, "--phi-k"));
      }
      return ABMetric{a, b, phi, "custom"};
    }
    if (!o.form.empty()) throw UsageError("--form needs --metric");
    ModelId id;
    id.kind = model_kind(o.model);
    id.dim = o.dim;
    id.mu = o.mu;
    id.sigma = o.sigma;
    id.sign = o.sign;
    id.lambda = o.lambda;
    if (id.kind == ModelKind::FamilySigma && !o.eps) throw UsageError("--model sigma needs --eps");
    id.eps = o.eps.value_or(0.3);
    return make_model(id);
  } catch (const Error& e) {
    throw UsageError(std::string("model: ") + e.what());
  }
}

json model_config(const ModelOpts& o, const ABMetric& m) {
  json j;
  if (!o.metric.empty()) {
    j["model"] = "custom";
    j["metric"] = o.metric;
    j["form"] = o.form;
    j["radius"] = o.radius;
  } else {
    j["model"] = o.model;
    j["mu"] = o.mu;
    j["sigma"] = o.sigma;
    j["sign"] = o.sign;
    j["lambda"] = o.lambda;
  }
  j["dim"] = m.dim();
  j["phi"] = m.phi.name();
  if (o.eps) j["eps"] = *o.eps;
  return j;
}

int finish(Report& r, const OutputOpts& o, std::chrono::steady_clock::time_point start) {
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  cli::emit(o.out, std::cout, [&](std::ostream& os) {
    if (o.format == "csv") {
      cli::write_checks_csv(os, r);
    } else {
      cli::write_json(os, cli::to_json(r, !o.no_timestamp));
      os << "\n";
    }
  });
  for (const Check& c : r.checks)
    if (!c.pass)
      std::cerr << "FAIL " << c.name << ": " << cli::format_double(c.max_residual) << " > "
                << cli::format_double(c.tolerance) << (c.note.empty() ? "" : " (" + c.note + ")") << "\n";
  return r.pass() ? cli::kPass : cli::kCheckFailed;
}

// ---------------------------------------------------------------- verify

struct VerifyOpts {
  ModelOpts model;
  OutputOpts output;
  int samples = 100;
  std::uint64_t seed = 12345;
  double tol = 1e-6;
  double step = 1e-3;
  int traces = 5;
};

int cmd_verify(const VerifyOpts& v) {
  const auto start = std::chrono::steady_clock::now();
  if (v.samples < 1) throw UsageError("--samples must be at least 1");
  if (!(v.tol > 0.0)) throw UsageError("--tol must be positive");
  if (!(v.step > 0.0)) throw UsageError("--step must be positive");
  if (v.traces < 0) throw UsageError("--traces must be non-negative");
  const int threads = resolve_threads(v.output.threads);
  const ABMetric m = build_model(v.model);

  Report r;
  r.command = "verify";
  r.config = model_config(v.model, m);
  r.config["samples"] = v.samples;
  r.config["seed"] = v.seed;
  r.config["tol"] = v.tol;
  r.config["step"] = v.step;
  r.config["traces"] = v.traces;

  FlatnessOptions opt;
  opt.samples = v.samples;
  opt.seed = v.seed;
  opt.tolerance = v.tol;
  opt.threads = threads;
  try {
    const FlatnessReport f = certify_flatness(m, opt);
    r.checks.push_back(cli::make_check("hamel", f.max_hamel, v.tol));
    r.checks.push_back(cli::make_check("rapcsak", f.max_rapcsak, v.tol));
    r.checks.push_back(cli::make_check("spray_proportionality", f.max_spray_dev, v.tol));
    r.result["worst_x"] = vec_json(f.worst_x.coords);
    r.result["worst_y"] = vec_json(f.worst_y.comps);
  } catch (const Error& e) {
    r.checks.push_back(cli::failed_check("flatness", v.tol, e.what()));
  }

  if (v.traces > 0) {
    const double R = working_radius(m);
    const SampleSet s = sample_points(m.dim(), v.traces, 0.5 * R, v.seed + 1);
    const auto n = static_cast<std::size_t>(v.traces);
    std::vector<double> dev(n);
    std::vector<std::string> notes(n);
    parallel_for(n, threads, [&](std::size_t i) {
      try {
        const GeodesicTrace tr = integrate_geodesic(m, s.x[i], s.y[i], 0.9 * R, v.step);
        dev[i] = straightness_deviation(tr);
        if (tr.truncated) notes[i] = tr.note;
      } catch (const Error& e) {
        dev[i] = std::numeric_limits<double>::infinity();
        notes[i] = e.what();
      }
    });
    double worst = 0.0;
    std::string note;
    for (std::size_t i = 0; i < n; ++i) {
      worst = std::max(worst, dev[i]);
      if (note.empty() && !notes[i].empty()) note = "trace " + std::to_string(i) + ": " + notes[i];
    }
    r.checks.push_back(cli::make_check("geodesic_straightness", worst, v.tol, note));
  }
  return finish(r, v.output, start);
}

// ---------------------------------------------------------------- classify

struct ClassifyOpts {
  OutputOpts output;
  std::string k;
  std::optional<double> eps;
};

json signature_json(const InvariantSignature& s) {
  json j;
  j["delta1"] = s.d1;
  j["delta2"] = s.d2;
  j["delta3"] = s.d3;
  j["p"] = {{"tag", to_string(s.p.tag)}, {"coef", s.p.coef}, {"text", s.p.str()}};
  j["q"] = {{"tag", to_string(s.q.tag)}, {"value", s.q.value}, {"text", s.q.str()}};
  return j;
}

int cmd_classify(const ClassifyOpts& c) {
  const auto start = std::chrono::steady_clock::now();
  const OdeParams k = parse_k(c.k, c.eps, "--k");
  Report r;
  r.command = "classify";
  r.config = k_json(k);

  const InvariantSignature sig = invariants(k);
  r.result["invariants"] = signature_json(sig);
  std::string type = "non-randers";
  if (sig.p.tag == PTag::Zero) type = sig.q.tag == QTag::Zero ? "riemannian" : "randers";
  r.result["type"] = type;
  const double scale = 1.0 + std::abs(sig.d1) + std::abs(sig.d2) + sig.d3 * sig.d3;
  r.checks.push_back(cli::make_check("delta_identity", std::abs(sig.d1 - sig.d2 - sig.d3 * sig.d3) / scale, 1e-12));

  if (sig.p.tag != PTag::Zero) {
    const Reduction red = reduce(k);
    json rj;
    rj["form"] = to_string(red.form.kind);
    rj["sigma"] = red.form.sigma;
    rj["u"] = red.u;
    rj["v"] = red.v;
    rj["quadruple"] = k_json(red.reduced);
    const PValue tp = table_p(red.form);
    rj["table_p"] = tp.str();
    r.result["reduced"] = std::move(rj);
    r.checks.push_back(cli::make_check("reduction_same_type", same_type(k, red.reduced) ? 0.0 : 1.0, 0.0));
    r.checks.push_back(cli::make_check("table_p", same_p(tp, sig.p) ? 0.0 : 1.0, 0.0));
  } else {
    r.result["reduced"] = nullptr;
  }
  const CircleCoords cc = circle_coords(sig);
  r.result["circle"] = {{"x", cc.x}, {"y", cc.y}, {"residual", cc.circle_residual}};
  json named = json::array();
  for (const NamedType& t : named_types()) {
    const InvariantSignature ts = invariants(t.k);
    named.push_back({{"name", t.name},
                     {"same_type", same_type(k, t.k)},
                     {"same_p", same_p(sig.p, ts.p)},
                     {"same_q", same_q(sig.q, ts.q)}});
  }
  r.result["named"] = std::move(named);
  std::cerr << type << " p=" << sig.p.str() << " q=" << sig.q.str() << "\n";
  return finish(r, c.output, start);
}

// ---------------------------------------------------------------- geodesics

struct GeodesicOpts {
  ModelOpts model;
  OutputOpts output;
  int count = 20;
  std::uint64_t seed = 12345;
  double step = 1e-3;
  double stop = 0.9;
  std::string x0, y0;
  std::string csv, svg;
  bool require_straight = false;
  double tol = 1e-6;
};

void write_traces_csv(std::ostream& os, const std::vector<GeodesicTrace>& traces, int n) {
  os << "trace,t";
  for (int i = 1; i <= n; ++i) os << ",x" << i;
  for (int i = 1; i <= n; ++i) os << ",y" << i;
  os << ",flag\r\n";
  for (std::size_t t = 0; t < traces.size(); ++t) {
    const GeodesicTrace& tr = traces[t];
    for (std::size_t k = 0; k < tr.points.size(); ++k) {
      os << t << ',' << cli::format_double(tr.times[k]);
      for (double c : tr.points[k].coords) os << ',' << cli::format_double(c);
      for (double c : tr.velocities[k].comps) os << ',' << cli::format_double(c);
      const bool last = k + 1 == tr.points.size();
      os << ',' << (last && tr.truncated ? cli::csv_field("left_domain: " + tr.note) : "") << "\r\n";
    }
  }
}

int cmd_geodesics(const GeodesicOpts& g) {
  const auto start = std::chrono::steady_clock::now();
  if (!(g.step > 0.0)) throw UsageError("--step must be positive");
  if (!(g.stop > 0.0 && g.stop <= 1.0)) throw UsageError("--stop must be in (0, 1]");
  if (!(g.tol > 0.0)) throw UsageError("--tol must be positive");
  if (g.x0.empty() != g.y0.empty()) throw UsageError("--x0 and --y0 go together");
  const int threads = resolve_threads(g.output.threads);
  const ABMetric m = build_model(g.model);
  const double R = working_radius(m);

  SampleSet s;
  if (!g.x0.empty()) {
    s.x.push_back(parse_point(g.x0, m.dim(), "--x0"));
    s.y.emplace_back(parse_point(g.y0, m.dim(), "--y0").coords);
  } else {
    if (g.count < 1) throw UsageError("--count must be at least 1");
    s = sample_points(m.dim(), g.count, 0.5 * R * g.stop, g.seed);
  }

  Report r;
  r.command = "geodesics";
  r.config = model_config(g.model, m);
  r.config["count"] = static_cast<int>(s.x.size());
  r.config["seed"] = g.seed;
  r.config["step"] = g.step;
  r.config["stop"] = g.stop;
  r.config["tol"] = g.tol;

  const std::size_t n = s.x.size();
  std::vector<GeodesicTrace> traces(n);
  std::vector<double> dev(n, 0.0);
  parallel_for(n, threads, [&](std::size_t i) {
    try {
      traces[i] = integrate_geodesic(m, s.x[i], s.y[i], g.stop * R, g.step);
      dev[i] = straightness_deviation(traces[i]);
    } catch (const Error& e) {
      traces[i].points = {s.x[i]};
      traces[i].velocities = {s.y[i]};
      traces[i].times = {0.0};
      traces[i].truncated = true;
      traces[i].note = e.what();
    }
  });

  json tj = json::array();
  double worst = 0.0;
  int flagged = 0;
  for (std::size_t i = 0; i < n; ++i) {
    worst = std::max(worst, dev[i]);
    flagged += traces[i].truncated ? 1 : 0;
    json t;
    t["x0"] = vec_json(s.x[i].coords);
    t["y0"] = vec_json(s.y[i].comps);
    t["steps"] = static_cast<int>(traces[i].points.size()) - 1;
    t["deviation"] = dev[i];
    t["reached_stop"] = traces[i].reached_stop;
    t["truncated"] = traces[i].truncated;
    if (!traces[i].note.empty()) t["note"] = traces[i].note;
    tj.push_back(std::move(t));
  }
  r.result["max_deviation"] = worst;
  r.result["flagged"] = flagged;
  r.result["traces"] = std::move(tj);
  if (g.require_straight) r.checks.push_back(cli::make_check("geodesic_straightness", worst, g.tol));

  if (!g.csv.empty()) cli::emit(g.csv, std::cout, [&](std::ostream& os) { write_traces_csv(os, traces, m.dim()); });
  if (!g.svg.empty()) cli::emit(g.svg, std::cout, [&](std::ostream& os) { cli::write_svg(os, traces, R); });
  std::cerr << "max deviation " << cli::format_double(worst) << ", " << flagged << " flagged\n";
  return finish(r, g.output, start);
}

// ---------------------------------------------------------------- deform

struct DeformOpts {
  ModelOpts model;
  OutputOpts output;
  std::string k;
  int points = 50;
  std::uint64_t seed = 12345;
  double tol = 1e-7;
  double tol_roundtrip = 1e-9;
  int dump = 3;
};

struct DeformSample {
  double round_trip = 0.0;
  double norm = 0.0;
  double closed = 0.0;
  double conformal = 0.0;
  double projective = 0.0;
  std::string error;
};

int cmd_deform(const DeformOpts& d) {
  const auto start = std::chrono::steady_clock::now();
  if (d.points < 1) throw UsageError("--points must be at least 1");
  if (!(d.tol > 0.0) || !(d.tol_roundtrip > 0.0)) throw UsageError("tolerances must be positive");
  const int threads = resolve_threads(d.output.threads);
  const ABMetric m = build_model(d.model);
  OdeParams k;
  if (!d.k.empty()) {
    k = parse_k(d.k, std::nullopt, "--k");
  } else if (m.phi.ode()) {
    k = *m.phi.ode();
  } else {
    throw UsageError("--k is required for this model");
  }

  Report r;
  r.command = "deform";
  r.config = model_config(d.model, m);
  r.config["k"] = k_json(k);
  r.config["points"] = d.points;
  r.config["seed"] = d.seed;
  r.config["tol"] = d.tol;
  r.config["tol_roundtrip"] = d.tol_roundtrip;

  const FieldPair fwd = forward_chain(m.alpha, m.beta, k);
  const FieldPair back = inverse_chain(fwd.a, fwd.b, k);
  const ABMetric bar{fwd.a, fwd.b, phi_riemannian(), "bar"};
  const SampleSet s = sample_points(m.dim(), d.points, 0.8 * working_radius(m), d.seed);
  const auto n = s.x.size();
  std::vector<DeformSample> out(n);
  parallel_for(n, threads, [&](std::size_t i) {
    DeformSample& o = out[i];
    const Point& x = s.x[i];
    try {
      o.round_trip = std::max(max_diff(back.a(x), m.alpha(x)), max_diff(back.b(x), m.beta(x)));
      o.norm = std::abs(norm_b(fwd.a, fwd.b, x) - norm_b(m.alpha, m.beta, x));
      const CovariantData cd = covariant_derivative(fwd.b, fwd.a, x);
      o.closed = max_abs(cd.sij);
      o.conformal = conformal_fit(cd).residual;
      o.projective = spray_proportionality_residual(bar, x, s.y[i]);
    } catch (const Error& e) {
      o.error = e.what();
    }
  });

  std::string diag;
  for (std::size_t i = 0; i < n && diag.empty(); ++i)
    if (!out[i].error.empty()) {
      std::ostringstream os;
      os.precision(17);
      os << "at x = (";
      for (std::size_t c = 0; c < s.x[i].size(); ++c) os << (c ? ", " : "") << s.x[i][c];
      os << "): " << out[i].error;
      diag = os.str();
    }
  if (!diag.empty()) {
    r.checks.push_back(cli::failed_check("positivity", 0.0, diag));
    std::cerr << "positivity violated " << diag << "\n";
    return finish(r, d.output, start);
  }
  r.checks.push_back(cli::make_check("positivity", 0.0, 0.0));
  DeformSample worst;
  for (const DeformSample& o : out) {
    worst.round_trip = std::max(worst.round_trip, o.round_trip);
    worst.norm = std::max(worst.norm, o.norm);
    worst.closed = std::max(worst.closed, o.closed);
    worst.conformal = std::max(worst.conformal, o.conformal);
    worst.projective = std::max(worst.projective, o.projective);
  }
  r.checks.push_back(cli::make_check("round_trip", worst.round_trip, d.tol_roundtrip));
  r.checks.push_back(cli::make_check("norm_preserved", worst.norm, d.tol_roundtrip));
  r.checks.push_back(cli::make_check("closedness", worst.closed, d.tol));
  r.checks.push_back(cli::make_check("conformality", worst.conformal, d.tol));
  r.checks.push_back(cli::make_check("abar_projective", worst.projective, d.tol));

  json samples = json::array();
  for (std::size_t i = 0; i < std::min<std::size_t>(n, static_cast<std::size_t>(std::max(0, d.dump))); ++i) {
    const Point& x = s.x[i];
    samples.push_back({{"x", vec_json(x.coords)},
                       {"a", mat_json(m.alpha(x))},
                       {"b", vec_json(m.beta(x))},
                       {"abar", mat_json(fwd.a(x))},
                       {"bbar", vec_json(fwd.b(x))}});
  }
  r.result["samples"] = std::move(samples);
  return finish(r, d.output, start);
}

// ---------------------------------------------------------------- phi

struct PhiOpts {
  OutputOpts output;
  std::string family;
  std::string k;
  std::optional<double> eps;
  std::optional<double> sigma;
  std::optional<double> p;
  int grid = 50;
  std::optional<double> smax;
  std::optional<double> b;
  double tol = 1e-8;
};

PhiSpec select_phi(const PhiOpts& o) {
  std::string family = o.family;
  if (family.empty()) family = o.k.empty() ? "" : "quadrature";
  if (family.empty()) throw UsageError("phi needs --family or --k");
  auto need_eps = [&] {
    if (!o.eps) throw UsageError("--family " + family + " needs --eps");
    return *o.eps;
  };
  try {
    if (family == "quadrature") {
      if (o.k.empty()) throw UsageError("--family quadrature needs --k");
      return phi_quadrature(parse_k(o.k, o.eps, "--k"));
    }
    if (!o.k.empty()) throw UsageError("--k only applies to --family quadrature");
    if (family == "sigma") {
      if (!o.sigma) throw UsageError("--family sigma needs --sigma");
      return phi_sigma(*o.sigma, need_eps());
    }
    if (family == "zero-p") {
      if (!o.p) throw UsageError("--family zero-p needs --p");
      return phi_zero_p(*o.p, need_eps());
    }
    if (family == "randers") return phi_randers(o.eps.value_or(1.0));
    if (family == "riemannian") return phi_riemannian();
    if (family == "berwald") return phi_berwald();
    if (family == "berwald-shifted") return phi_berwald_shifted();
  } catch (const Error& e) {
    throw UsageError(std::string("phi: ") + e.what());
  }
  throw UsageError("unknown family '" + family + "'");
}

int cmd_phi(const PhiOpts& o) {
  const auto start = std::chrono::steady_clock::now();
  if (o.grid < 2) throw UsageError("--grid must be at least 2");
  if (!(o.tol > 0.0)) throw UsageError("--tol must be positive");
  const PhiSpec phi = select_phi(o);
  const double R = phi.validity_radius();
  const double smax = o.smax.value_or(std::min(0.9, 0.9 * R));
  if (!(smax > 0.0 && smax < R)) throw UsageError("--smax must lie in (0, validity radius)");
  const double b = o.b.value_or(smax);
  if (!(b >= smax)) throw UsageError("--b must be at least --smax");
  const std::optional<OdeParams> k = phi.ode();

  struct Row {
    double s, f0, f1, f2, res, margin;
  };
  std::vector<Row> rows;
  double worst = 0.0;
  try {
    for (int i = 0; i < o.grid; ++i) {
      const double s = -smax + 2.0 * smax * i / (o.grid - 1);
      const Jet2 j = phi.jet(s);
      const double res = k ? std::abs(ode_residual(phi, *k, s)) : std::numeric_limits<double>::quiet_NaN();
      const double f = j.f0 - s * j.f1;
      rows.push_back({s, j.f0, j.f1, j.f2, res, std::min(f, f + (b * b - s * s) * j.f2)});
      if (k) worst = std::max(worst, res);
    }
  } catch (const Error& e) {
    throw UsageError(std::string("phi: ") + e.what());
  }

  Report r;
  r.command = "phi";
  r.config = {{"phi", phi.name()}, {"variant", to_string(phi.variant())}, {"grid", o.grid}, {"smax", smax}, {"b", b}};
  if (k) {
    r.config["k"] = k_json(*k);
    r.checks.push_back(cli::make_check("ode_residual", worst, o.tol));
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  cli::emit(o.output.out, std::cout, [&](std::ostream& os) {
    if (o.output.format == "csv") {
      os << "s,phi,dphi,ddphi,ode_residual,regularity_margin\r\n";
      for (const Row& w : rows)
        os << cli::format_double(w.s) << ',' << cli::format_double(w.f0) << ',' << cli::format_double(w.f1) << ','
           << cli::format_double(w.f2) << ',' << (k ? cli::format_double(w.res) : "") << ','
           << cli::format_double(w.margin) << "\r\n";
      return;
    }
    json table = json::array();
    for (const Row& w : rows)
      table.push_back({{"s", w.s}, {"phi", w.f0}, {"dphi", w.f1}, {"ddphi", w.f2}, {"ode_residual", w.res},
                       {"regularity_margin", w.margin}});
    r.result["table"] = std::move(table);
    cli::write_json(os, cli::to_json(r, !o.output.no_timestamp));
    os << "\n";
  });
  if (!r.pass()) std::cerr << "FAIL ode_residual: " << cli::format_double(worst) << "\n";
  return r.pass() ? cli::kPass : cli::kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finslerlab: projectively flat (alpha,beta)-metrics"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  std::function<int()> run;

  VerifyOpts vo;
  auto* verify = app.add_subcommand("verify", "Hamel, Rapcsak, spray and geodesic checks on a metric");
  add_model_options(verify, vo.model);
  add_output_options(verify, vo.output);
  verify->add_option("--samples", vo.samples, "Sample count");
  verify->add_option("--seed", vo.seed, "Sampling seed");
  verify->add_option("--tol", vo.tol, "Tolerance for every check");
  verify->add_option("--step", vo.step, "RK4 step for geodesic traces");
  verify->add_option("--traces", vo.traces, "Number of geodesic traces");
  verify->callback([&] { run = [&] { return cmd_verify(vo); }; });

  ClassifyOpts co;
  co.output.format = "json";
  auto* classify = app.add_subcommand("classify", "Invariants, normal form and type of a quadruple");
  add_output_options(classify, co.output);
  classify->add_option("--k", co.k, "k1,k2,k3 or k1,k2,k3,eps")->required()->allow_extra_args(false);
  classify->add_option("--eps", co.eps, "eps = phi'(0)");
  classify->callback([&] { run = [&] { return cmd_classify(co); }; });

  GeodesicOpts go;
  auto* geo = app.add_subcommand("geodesics", "Integrate geodesics and measure their straightness");
  add_model_options(geo, go.model);
  add_output_options(geo, go.output);
  geo->add_option("--count", go.count, "Number of random traces");
  geo->add_option("--seed", go.seed, "Sampling seed");
  geo->add_option("--step", go.step, "RK4 step");
  geo->add_option("--stop", go.stop, "Stop at this fraction of the domain radius");
  geo->add_option("--x0", go.x0, "Initial point of a single trace");
  geo->add_option("--y0", go.y0, "Initial velocity of a single trace");
  geo->add_option("--csv", go.csv, "Trace file (t, x, y per row)");
  geo->add_option("--svg", go.svg, "Plot of the traces on (x1, x2)");
  geo->add_flag("--require-straight", go.require_straight, "Exit 1 when a trace deviates more than --tol");
  geo->add_option("--tol", go.tol, "Straightness tolerance");
  geo->callback([&] { run = [&] { return cmd_geodesics(go); }; });

  DeformOpts dop;
  auto* deform = app.add_subcommand("deform", "Run the deformation chain on a model's (alpha, beta)");
  add_model_options(deform, dop.model);
  add_output_options(deform, dop.output);
  deform->add_option("--k", dop.k, "k1,k2,k3 of the chain (default: the model's phi constants)");
  deform->add_option("--points", dop.points, "Sample points");
  deform->add_option("--seed", dop.seed, "Sampling seed");
  deform->add_option("--tol", dop.tol, "Closedness, conformality and projective tolerance");
  deform->add_option("--tol-roundtrip", dop.tol_roundtrip, "Round-trip tolerance");
  deform->add_option("--dump", dop.dump, "Number of field samples written to the report");
  deform->callback([&] { run = [&] { return cmd_deform(dop); }; });

  PhiOpts po;
  po.output.format = "csv";
  auto* phi = app.add_subcommand("phi", "Tabulate phi, its derivatives, ODE residual and regularity margin");
  add_output_options(phi, po.output);
  phi->add_option("--family", po.family, "quadrature|sigma|zero-p|randers|riemannian|berwald|berwald-shifted");
  phi->add_option("--k", po.k, "k1,k2,k3 (quadrature)");
  phi->add_option("--eps", po.eps, "eps = phi'(0)");
  phi->add_option("--sigma", po.sigma, "sigma (family sigma)");
  phi->add_option("--p", po.p, "p (family zero-p)");
  phi->add_option("--grid", po.grid, "Grid points");
  phi->add_option("--smax", po.smax, "Grid covers [-smax, smax]");
  phi->add_option("--b", po.b, "b used in the regularity margin (default smax)");
  phi->add_option("--tol", po.tol, "ODE residual tolerance");
  phi->callback([&] { run = [&] { return cmd_phi(po); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kPass : cli::kUsage;
  }
  try {
    return run();
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kUsage;
  } catch (const std::exception& e) {
    std::cerr << "check failed: " << e.what() << "\n";
    return cli::kCheckFailed;
  }
}
