#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unistd.h>

#include "eqlab/correspondence.hpp"
#include "eqlab/dsl/model.hpp"
#include "eqlab/dsl/parser.hpp"
#include "eqlab/errors.hpp"
#include "eqlab/normal_order.hpp"
#include "eqlab/rotsym.hpp"

namespace eqlab::cli {

namespace {

using Json = nlohmann::ordered_json;

// Thrown for bad flags or override values; maps to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown for a model file that does not parse; diagnostics already printed.
struct ParseFailure {};

struct Common {
  std::string model_path;
  std::string format;
  std::string output;
  std::vector<std::string> params;
  std::string hbar;
  std::string omega;
  std::optional<int> truncation;
  std::optional<double> basis_omega;
  double leakage_bound = fock::kDefaultLeakageBound;
};

Rational rational_arg(const std::string& flag, const std::string& text) {
  auto r = parse_rational(text);
  if (!r) throw UsageError(flag + ": '" + text + "' is not a rational number (use a or a/b)");
  return *r;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

dsl::ModelSpec load_spec(const std::string& path, std::ostream& err) {
  auto r = dsl::parse_model(read_file(path));
  for (const auto& d : r.diagnostics) err << dsl::render(d, path) << "\n";
  if (!r.ok()) throw ParseFailure{};
  return *r.model;
}

void apply_overrides(dsl::ModelSpec& spec, const Common& c) {
  for (const auto& kv : c.params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--param expects name=value, got '" + kv + "'");
    const std::string name = kv.substr(0, eq);
    if (!spec.parameter(name)) throw UsageError("--param: model has no parameter '" + name + "'");
    dsl::override_parameter(spec, name, rational_arg("--param " + name, kv.substr(eq + 1)));
  }
  if (!c.hbar.empty()) dsl::override_parameter(spec, "hbar", rational_arg("--hbar", c.hbar));
  if (!c.omega.empty()) {
    if (!spec.parameter("omega")) throw UsageError("--omega: model has no parameter 'omega'");
    dsl::override_parameter(spec, "omega", rational_arg("--omega", c.omega));
  }
}

std::optional<int> env_truncation() {
  const char* env = std::getenv("EQLAB_TRUNCATION");
  if (!env || !*env) return std::nullopt;
  char* end = nullptr;
  const long d = std::strtol(env, &end, 10);
  if (*end != '\0' || d < dsl::kMinTruncation || d > 4096) {
    throw UsageError(std::string("EQLAB_TRUNCATION='") + env + "' is not a valid truncation");
  }
  return static_cast<int>(d);
}

correspondence::NumericOptions numeric_options(const dsl::CheckedModel& model, const Common& c) {
  correspondence::NumericOptions o;
  o.truncation = c.truncation;
  if (!o.truncation && !model.spec.truncation) o.truncation = env_truncation();
  o.omega_rep = c.basis_omega;
  o.leakage_bound = c.leakage_bound;
  return o;
}

dsl::CheckedModel load_model(const Common& c, std::ostream& err) {
  dsl::ModelSpec spec = load_spec(c.model_path, err);
  apply_overrides(spec, c);
  return dsl::validate(spec);
}

std::vector<std::string> coordinate_names(const dsl::CheckedModel& model) {
  std::vector<std::string> names;
  for (GeneratorKind kind : {GeneratorKind::kMomentum, GeneratorKind::kPosition}) {
    for (const auto& [set, index] : model.shifted_modes()) names.push_back(to_string(shift_atom(set, kind, index)));
  }
  return names;
}

correspondence::PhasePoint phase_point(const dsl::CheckedModel& model, std::vector<double> p, std::vector<double> q) {
  const std::size_t n = model.shifted_modes().size();
  if (p.empty()) p.assign(n, 0.0);
  if (q.empty()) q.assign(n, 0.0);
  if (p.size() != n || q.size() != n) {
    throw UsageError("--p and --q need " + std::to_string(n) + " comma-separated values each");
  }
  return {std::move(p), std::move(q)};
}

std::pair<int, double> grid_spec(const std::string& text) {
  const auto colon = text.find(':');
  try {
    std::size_t used = 0;
    const int n = std::stoi(text.substr(0, colon), &used);
    if (used != colon && colon != std::string::npos) throw std::invalid_argument("");
    const double range = colon == std::string::npos ? 1.0 : std::stod(text.substr(colon + 1));
    if (n < 1 || range < 0) throw std::invalid_argument("");
    return {n, range};
  } catch (const std::logic_error&) {
    throw UsageError("--grid expects COUNT[:RANGE], got '" + text + "'");
  }
}

void check_format(const std::string& format, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed) {
    if (format == a) return;
  }
  throw UsageError("--format '" + format + "' is not supported by this command");
}

// Output goes to a sibling temp file first so readers never see a partial file.
void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw UsageError("cannot write " + tmp.string());
    f << text;
    f.close();
    if (!f) throw UsageError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw UsageError("cannot move output into place: " + ec.message());
  }
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

void add_common(CLI::App* cmd, Common& c, bool needs_model) {
  auto* m = cmd->add_option("--model", c.model_path, "model file (.eqm)")->check(CLI::ExistingFile);
  if (needs_model) m->required();
  cmd->add_option("--format", c.format, "json or csv");
  cmd->add_option("-o,--output", c.output, "write result to FILE (atomically)");
  cmd->add_option("--param", c.params, "override a parameter, name=a/b")->expected(1)->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  cmd->add_option("--hbar", c.hbar, "override hbar (rational)");
  cmd->add_option("--omega", c.omega, "override the omega parameter (rational)");
  cmd->add_option("--truncation", c.truncation, "per-mode Fock dimension")->check(CLI::Range(dsl::kMinTruncation, 4096));
  cmd->add_option("--basis-omega", c.basis_omega, "frequency of the number basis")->check(CLI::PositiveNumber);
  cmd->add_option("--leakage-bound", c.leakage_bound, "truncation leakage tolerance")->check(CLI::PositiveNumber);
}

int cmd_parse(const std::string& path, std::ostream& out, std::ostream& err) {
  const dsl::ModelSpec spec = load_spec(path, err);
  const dsl::CheckedModel model = dsl::validate(spec);
  const int n = model.total_modes();
  out << "ok: " << n << (n == 1 ? " mode" : " modes") << ", hermitian\n";
  return kExitOk;
}

int cmd_normal_order(const Common& c, const std::string& frame_name, bool use_wick, const std::string& text,
                     std::ostream& out, std::ostream& err) {
  const dsl::CheckedModel model = load_model(c, err);
  auto frame = model.fiducial;
  if (!frame_name.empty()) {
    auto it = model.frames.find(frame_name);
    if (it == model.frames.end()) throw UsageError("model has no frame '" + frame_name + "'");
    frame = it->second;
  }
  auto parsed = dsl::parse_expression(text, &model.spec);
  for (const auto& d : parsed.diagnostics) err << dsl::render(d, "<expr>") << "\n";
  if (!parsed.expr) throw ParseFailure{};
  const OperatorExpr e = dsl::lower(*parsed.expr, model.spec, model.frames);
  const NormalOrderedExpr n = use_wick ? wick(e, frame) : normal_order(e, frame);

  const std::string format = c.format.empty() ? "text" : c.format;
  check_format(format, {"text", "json"});
  if (format == "text") {
    emit(to_string(n) + "\n", c.output, out);
  } else {
    Json j;
    j["schema"] = "eqlab.normal_order/1";
    j["input"] = text;
    j["mode"] = use_wick ? "wick" : "identity";
    j["normal_ordered"] = to_string(n);
    j["generator_form"] = render_generator_form(n);
    j["vacuum_expectation"] = to_string(n.scalar_part());
    emit(dump(j), c.output, out);
  }
  return kExitOk;
}

int cmd_wcp(const Common& c, const std::string& grid, const std::vector<double>& p, const std::vector<double>& q,
            std::ostream& out, std::ostream& err) {
  const dsl::CheckedModel model = load_model(c, err);
  std::vector<correspondence::PhasePoint> points;
  if (!p.empty() || !q.empty()) {
    points.push_back(phase_point(model, p, q));
  } else {
    const auto [n, range] = grid_spec(grid);
    points = correspondence::grid(model.shifted_modes().size(), n, range);
  }
  const auto report =
      correspondence::wcp_numeric(model, points, numeric_options(model, c), std::filesystem::path(c.model_path).stem().string());
  const std::string format = c.format.empty() ? "json" : c.format;
  check_format(format, {"json", "csv"});
  emit(format == "json" ? dump(report.to_json()) : report.to_csv(), c.output, out);
  for (const auto& pt : report.points) {
    if (pt.flagged) {
      err << "warning: truncation leakage " << pt.leakage << " above bound at a grid point\n";
      break;
    }
  }
  return kExitOk;
}

int cmd_metric(const Common& c, const std::vector<double>& p, const std::vector<double>& q, double step,
               std::ostream& out, std::ostream& err) {
  const dsl::CheckedModel model = load_model(c, err);
  const auto point = phase_point(model, p, q);
  const auto nm = correspondence::prepare(model, numeric_options(model, c));
  const auto g = correspondence::fubini_study_metric(nm.space, nm.fiducial.state, nm.shifted, point, step, {},
                                                     nm.leakage_bound);
  const auto names = coordinate_names(model);
  const std::string format = c.format.empty() ? "json" : c.format;
  check_format(format, {"json", "csv"});
  if (format == "json") {
    Json j = g.to_json(names);
    j["point"] = {{"p", point.p}, {"q", point.q}};
    emit(dump(j), c.output, out);
  } else {
    std::ostringstream os;
    os.precision(17);
    os << "row";
    for (const auto& n : names) os << "," << n;
    os << "\n";
    for (Eigen::Index i = 0; i < g.matrix.rows(); ++i) {
      os << names[static_cast<std::size_t>(i)];
      for (Eigen::Index k = 0; k < g.matrix.cols(); ++k) os << "," << g.matrix(i, k);
      os << "\n";
    }
    emit(os.str(), c.output, out);
  }
  return kExitOk;
}

int cmd_evolve(const Common& c, const std::vector<double>& p, std::vector<double> q, double dt, double horizon,
               std::ostream& out, std::ostream& err) {
  const dsl::CheckedModel model = load_model(c, err);
  if (q.empty()) q.assign(model.shifted_modes().size(), 1.0);
  const auto start = phase_point(model, p, q);
  const dynamics::TimeGrid grid{dt, horizon};
  const auto ev = correspondence::evolve_model(model, start, grid, numeric_options(model, c));
  const std::string format = c.format.empty() ? "csv" : c.format;
  check_format(format, {"json", "csv"});
  if (format == "csv") {
    emit(dynamics::merge(ev.full, ev.reduced).to_csv(), c.output, out);
  } else {
    Json j;
    j["schema"] = "eqlab.evolve/1";
    j["model"] = std::filesystem::path(c.model_path).stem().string();
    j["start"] = {{"p", start.p}, {"q", start.q}};
    j["dt"] = dt;
    j["horizon"] = horizon;
    j["steps"] = grid.steps();
    j["norm_drift"] = ev.full.norm_drift();
    j["energy_drift_full"] = ev.full.energy_drift();
    j["energy_drift_reduced"] = ev.reduced.energy_drift();
    j["deviation"] = ev.deviation.to_json();
    emit(dump(j), c.output, out);
  }
  return kExitOk;
}

int cmd_rotsym(const rotsym::RotsymParams& params, const rotsym::NumericCheck& numeric, const Common& c,
               std::ostream& out) {
  const auto report = rotsym::verify_match(params, numeric);
  const std::string format = c.format.empty() ? "json" : c.format;
  check_format(format, {"json"});
  emit(dump(report.to_json()), c.output, out);
  return report.exact_match ? kExitOk : kExitFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"eqlab: enhanced-quantization workbench"};
  app.name("eqlab");
  app.require_subcommand(1);

  std::string parse_path;
  auto* parse = app.add_subcommand("parse", "validate a model file");
  parse->add_option("file", parse_path, "model file (.eqm)")->required();

  Common no;
  std::string frame_name, expr_text;
  bool use_wick = false;
  auto* nord = app.add_subcommand("normal-order", "normal-order an expression in a frame");
  add_common(nord, no, true);
  nord->add_option("--frame", frame_name, "frame name (default: fiducial frame)");
  nord->add_flag("--wick", use_wick, "apply :[...]: instead of the identity rewrite");
  nord->add_option("expr", expr_text, "expression in model syntax")->required();

  Common wc;
  std::string grid = "3:1";
  std::vector<double> wp, wq;
  auto* wcp = app.add_subcommand("wcp", "coherent-state symbol, numeric against symbolic");
  add_common(wcp, wc, true);
  wcp->add_option("--grid", grid, "COUNT[:RANGE] points per axis on [-RANGE, RANGE]");
  wcp->add_option("--p", wp, "momenta of a single point")->delimiter(',')->expected(1);
  wcp->add_option("--q", wq, "positions of a single point")->delimiter(',')->expected(1);

  Common mc;
  std::vector<double> mp, mq;
  double step = correspondence::kDefaultMetricStep;
  auto* metric = app.add_subcommand("metric", "2 hbar times the Fubini-Study metric");
  add_common(metric, mc, true);
  metric->add_option("--p", mp, "momenta")->delimiter(',')->expected(1);
  metric->add_option("--q", mq, "positions")->delimiter(',')->expected(1);
  metric->add_option("--step", step, "finite-difference step")->check(CLI::PositiveNumber);

  Common ec;
  std::vector<double> ep, eq;
  double dt = 1e-2, horizon = 10.0;
  auto* evolve = app.add_subcommand("evolve", "full quantum against reduced dynamics");
  add_common(evolve, ec, true);
  evolve->add_option("--p", ep, "starting momenta (default 0)")->delimiter(',')->expected(1);
  evolve->add_option("--q", eq, "starting positions (default 1)")->delimiter(',')->expected(1);
  evolve->add_option("--dt", dt, "time step")->check(CLI::PositiveNumber);
  evolve->add_option("--horizon", horizon, "final time")->check(CLI::NonNegativeNumber);

  Common rc;
  int n = 1;
  std::string m_text = "1", zeta_text = "1/2", v_text = "1";
  bool no_numeric = false, force_numeric = false;
  rotsym::NumericCheck numeric;
  std::string rgrid = "3:1";
  auto* rot = app.add_subcommand("rotsym", "reducible rotationally symmetric model");
  rot->add_option("--N", n, "number of modes per set")->check(CLI::PositiveNumber);
  rot->add_option("--m", m_text, "mass (rational)");
  rot->add_option("--zeta", zeta_text, "coupling in (0, 1) (rational)");
  rot->add_option("--v", v_text, "quartic strength (rational)");
  rot->add_option("--truncation", numeric.truncation, "per-mode Fock dimension for the numeric check")
      ->check(CLI::Range(dsl::kMinTruncation, 4096));
  rot->add_option("--grid", rgrid, "COUNT[:RANGE] for the numeric check");
  rot->add_flag("--no-numeric", no_numeric, "symbolic check only");
  rot->add_flag("--numeric", force_numeric, "numeric check even for N > 1 (dimension D^(2N))");
  rot->add_option("--format", rc.format, "json");
  rot->add_option("-o,--output", rc.output, "write result to FILE (atomically)");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    if (auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front()) {
      err << "run 'eqlab " << sub->get_name() << " --help' for usage\n";
    } else {
      err << "run 'eqlab --help' for usage\n";
    }
    return kExitUsage;
  }

  try {
    if (parse->parsed()) return cmd_parse(parse_path, out, err);
    if (nord->parsed()) return cmd_normal_order(no, frame_name, use_wick, expr_text, out, err);
    if (wcp->parsed()) return cmd_wcp(wc, grid, wp, wq, out, err);
    if (metric->parsed()) return cmd_metric(mc, mp, mq, step, out, err);
    if (evolve->parsed()) return cmd_evolve(ec, ep, eq, dt, horizon, out, err);
    if (rot->parsed()) {
      const rotsym::RotsymParams params{n, rational_arg("--m", m_text), rational_arg("--zeta", zeta_text),
                                        rational_arg("--v", v_text)};
      numeric.enabled = !no_numeric && (n == 1 || force_numeric);
      std::tie(numeric.per_axis, numeric.range) = grid_spec(rgrid);
      return cmd_rotsym(params, numeric, rc, out);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseFailure&) {
    return kExitFailure;
  } catch (const Error& e) {
    err << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace eqlab::cli
