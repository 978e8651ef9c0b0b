// hyperloss command-line front end.
//
// Exit status: 0 success, 1 selftest failure or unexpected error, 2 config error,
// 3 non-physical state.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hyperloss/hyperloss.hpp"

namespace hl = hyperloss;
using hl::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNonPhysical = 3;

struct Common {
  std::string spec_path;
  std::string out_path;
  std::string format = "csv";
  std::vector<std::string> overrides;
};

struct Resolved {
  json doc;
  hl::AnySpec spec;
};

Resolved resolve(const Common& c) {
  if (c.spec_path.empty()) throw hl::ConfigError("--spec", "a spec file is required");
  json doc = hl::load_document(c.spec_path);
  hl::apply_overrides(doc, c.overrides);
  return {doc, hl::spec_from_json(doc)};
}

const hl::NetworkSpec& require_network(const Resolved& r, const char* command) {
  if (const auto* net = std::get_if<hl::NetworkSpec>(&r.spec)) return *net;
  throw hl::ConfigError("--spec", std::string(command) + " needs a network spec, got a chain spec");
}

std::string fmt(const char* pattern, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, x);
  return buf;
}

/// Physical readout statistics satisfy V_min V_max >= 1.
void check_uncertainty(double v_min, double v_max, const std::string& where) {
  if (!(v_min > 0.0) || v_min * v_max < 1.0 - 1e-9)
    throw hl::InvalidState("non-physical readout at " + where + ": V_min*V_max = " + hl::format_number(v_min * v_max));
}

struct Row {
  std::optional<double> phi;
  double omega = 0.0;
  double v_min = 1.0;
  double v_max = 1.0;
  double v_locked = 1.0;
  std::optional<double> cold;
  std::optional<double> eps;
};

const char* kColumns =
    "phi_rad,omega_hz,v_min_rel_shot,v_max_rel_shot,squeezing_db,cold_loss_frac,eps,v_locked_rel_shot,"
    "locked_squeezing_db";

std::string opt_number(const std::optional<double>& x) { return x ? hl::format_number(*x) : std::string(); }

/// CSV (one row per point, header with resolved config) or JSON document.
std::string render(const std::string& format, const std::string& command, const json& config, const std::vector<Row>& rows,
                   const json& extra) {
  for (std::size_t k = 0; k < rows.size(); ++k) check_uncertainty(rows[k].v_min, rows[k].v_max, "row " + std::to_string(k));
  if (format == "json") {
    json doc;
    doc["schema"] = hl::kSchemaVersion;
    doc["command"] = command;
    doc["config"] = config;
    doc["summary"] = extra;
    json arr = json::array();
    for (const auto& r : rows) {
      json j = {{"phi_rad", r.phi ? json(*r.phi) : json(nullptr)},
                {"omega_hz", r.omega / hl::kTwoPi},
                {"v_min_rel_shot", r.v_min},
                {"v_max_rel_shot", r.v_max},
                {"squeezing_db", hl::variance_to_db(r.v_min)},
                {"v_locked_rel_shot", r.v_locked},
                {"locked_squeezing_db", hl::variance_to_db(r.v_locked)}};
      if (r.cold) j["cold_loss_frac"] = *r.cold;
      if (r.eps) j["eps"] = *r.eps;
      arr.push_back(j);
    }
    doc["rows"] = arr;
    return doc.dump(2) + "\n";
  }
  std::string out;
  out += "# hyperloss " + command + " csv schema " + std::to_string(hl::kSchemaVersion) + "\n";
  out += "# config: " + config.dump() + "\n";
  if (!extra.empty()) out += "# summary: " + extra.dump() + "\n";
  out += "# variances relative to shot noise (vacuum = 1); squeezing_db = -10 log10(v), positive below shot noise\n";
  out += std::string(kColumns) + "\n";
  for (const auto& r : rows) {
    out += opt_number(r.phi) + "," + hl::format_number(r.omega / hl::kTwoPi) + "," + hl::format_number(r.v_min) +
           "," + hl::format_number(r.v_max) + "," + hl::format_number(hl::variance_to_db(r.v_min)) + "," +
           opt_number(r.cold) + "," + opt_number(r.eps) + "," + hl::format_number(r.v_locked) + "," +
           hl::format_number(hl::variance_to_db(r.v_locked)) + "\n";
  }
  return out;
}

void emit(const Common& c, const std::string& command, const json& config, const std::vector<Row>& rows,
          const json& extra = json::object()) {
  if (c.format != "csv" && c.format != "json") throw hl::ConfigError("--format", "expected csv or json");
  const std::string text = render(c.format, command, config, rows, extra);
  if (c.out_path.empty()) return;
  hl::write_file_atomic(c.out_path, text);
}

std::vector<Row> sweep_rows(const hl::SweepResult& s) {
  std::vector<Row> rows;
  for (std::size_t k = 0; k < s.size(); ++k) {
    Row r;
    r.omega = s.omega;
    r.v_min = s.v_min[k];
    r.v_max = s.v_max[k];
    r.v_locked = s.v_locked[k];
    if (s.cold_loss) r.cold = (*s.cold_loss)[k];
    if (s.axis == "phi") {
      r.phi = s.grid[k];
    } else {
      r.eps = s.grid[k];
    }
    rows.push_back(r);
  }
  return rows;
}

hl::Readout parse_readout(const std::string& s) {
  if (s == "optimal") return hl::Readout::optimal;
  if (s == "locked") return hl::Readout::locked;
  throw hl::ConfigError("--readout", "expected optimal or locked");
}

std::string dB_report(double variance) {
  const double db = hl::variance_to_db(variance);
  return db >= 0.0 ? fmt("%.2f dB below shot noise", db) : fmt("%.2f dB above shot noise", -db);
}

// ---------------------------------------------------------------------------

int cmd_coldloss(double eps1, double eps2, const std::string& phi_text) {
  const double phi = hl::parse_angle(phi_text);
  std::printf("lambda = %.4f\n", hl::cold_loss_exact(eps1, eps2, phi));
  std::printf("lambda_smallk = %.4f\n", hl::cold_loss_smallk(eps1, eps2, phi));
  return 0;
}

int cmd_mz(double eps1, double eps2, const std::string& phi_text, double sqz_db, double external_loss) {
  const hl::MzParams p{eps1, eps2, hl::parse_angle(phi_text), hl::db_to_r(sqz_db)};
  const auto h = hl::mz_readout(p, external_loss);
  check_uncertainty(h.v_min, h.v_max, "mz readout");
  std::printf("V_min = %.2f dB\n", hl::variance_to_db(h.v_min));
  std::printf("V_squeezed_quadrature = %.2f dB  (closed form %.2f dB)\n", hl::variance_to_db(h.v_locked),
              hl::variance_to_db(external_loss * 1.0 + (1.0 - external_loss) * hl::hot_variance(p)));
  const auto ch = hl::effective_channel(p);
  std::printf("lambda_smm = %.4f  T = %.4f\n", ch.lambda_smm, ch.temperature);
  if (h.v_locked > 1.0)
    std::printf("hyperloss in the squeezed quadrature: %s\n", dB_report(h.v_locked).c_str());
  else
    std::printf("no hyperloss in the squeezed quadrature\n");
  return 0;
}

struct ChainArgs {
  int nodes = 10;
  double eps = 0.01;
  double sqz_db = 15.0;
  int phi_points = 720;
  double threshold_db = 10.0;
  std::string policy = "shared";
  std::string order = "after";
  std::string readout = "locked";
};

int cmd_chain(const Common& c, const ChainArgs& a) {
  json doc;
  if (!c.spec_path.empty()) {
    doc = hl::load_document(c.spec_path);
  } else {
    doc = {{"schema", hl::kSchemaVersion},
           {"chain",
            {{"nodes", a.nodes},
             {"eps", a.eps},
             {"phi", 0.0},
             {"sqz_db", a.sqz_db},
             {"policy", a.policy},
             {"phase_order", a.order},
             {"readout", a.readout}}}};
  }
  hl::apply_overrides(doc, c.overrides);
  const hl::ChainSpec chain = hl::chain_from_json(doc);
  if (a.phi_points < 1) throw hl::ConfigError("--phi-sweep", "must be >= 1");
  const auto grid = hl::uniform_phase_grid(static_cast<std::size_t>(a.phi_points));

  const double frac = hl::fraction_below_threshold(chain, a.threshold_db, grid);
  std::printf("chain: N=%d eps=%s input %.2f dB, threshold %.2f dB, %d phase points\n", chain.n_nodes,
              hl::format_number(chain.eps).c_str(), hl::r_to_db(chain.r_in), a.threshold_db, a.phi_points);
  std::printf("fraction below threshold = %.4f  (policy=%s, phase_order=%s, readout=%s)\n", frac,
              hl::policy_name(chain.policy), hl::order_name(chain.order), hl::readout_name(chain.readout));
  std::printf("fraction at or above threshold = %.4f\n", 1.0 - frac);
  std::printf("conventions:\n  %-10s %-7s %-8s %10s %9s %9s\n", "policy", "order", "readout", "frac_below", "best_db",
              "worst_db");
  for (const auto& row : hl::chain_conventions(chain, a.threshold_db, grid))
    std::printf("  %-10s %-7s %-8s %10.4f %9.3f %9.3f\n", hl::policy_name(row.policy), hl::order_name(row.order),
                hl::readout_name(row.readout), row.fraction_below, row.best_db, row.worst_db);
  const double baseline = hl::incoherent_baseline(chain.n_nodes, chain.eps, chain.r_in);
  std::printf("incoherent baseline (loss 1-(1-eps)^N) = %.2f dB\n", baseline);
  // Widely quoted figures for this exact configuration that the loss model does not reproduce.
  if (chain.n_nodes == 10 && std::abs(hl::r_to_db(chain.r_in) - 15.0) < 1e-9) {
    const double quoted = chain.eps == 0.01 ? 10.2 : chain.eps == 0.02 ? 7.4 : std::nan("");
    if (std::isfinite(quoted))
      std::printf("DISCREPANCY: reference incoherent baseline %.1f dB vs computed %.2f dB (not matched)\n", quoted,
                  baseline);
  }

  if (!c.out_path.empty()) {
    const auto sweep = hl::phase_sweep(chain, grid);
    json extra = {{"threshold_db", a.threshold_db}, {"fraction_below", frac}, {"incoherent_baseline_db", baseline}};
    emit(c, "chain", doc, sweep_rows(sweep), extra);
  }
  return 0;
}

int cmd_sweep(const Common& c, const std::string& axis, int points, double eps_max, double omega_hz,
              const std::string& readout_text) {
  const Resolved r = resolve(c);
  if (points < 1) throw hl::ConfigError("--points", "must be >= 1");
  const hl::Readout readout = parse_readout(readout_text);
  hl::SweepResult s;
  if (axis == "phi") {
    const auto grid = hl::uniform_phase_grid(static_cast<std::size_t>(points));
    s = std::visit(
        [&](const auto& spec) -> hl::SweepResult {
          if constexpr (std::is_same_v<std::decay_t<decltype(spec)>, hl::NetworkSpec>)
            return hl::phase_sweep(spec, grid, hl::kTwoPi * omega_hz);
          else
            return hl::phase_sweep(spec, grid);
        },
        r.spec);
  } else if (axis == "eps") {
    if (!(eps_max > 0.0 && eps_max < 1.0)) throw hl::ConfigError("--eps-max", "must lie in (0, 1)");
    std::vector<double> grid(static_cast<std::size_t>(points));
    for (int k = 0; k < points; ++k) grid[static_cast<std::size_t>(k)] = points == 1 ? eps_max : eps_max * k / (points - 1);
    s = std::visit(
        [&](const auto& spec) -> hl::SweepResult {
          if constexpr (std::is_same_v<std::decay_t<decltype(spec)>, hl::NetworkSpec>)
            return hl::mismatch_sweep(spec, grid, std::nullopt, hl::kTwoPi * omega_hz);
          else
            return hl::mismatch_sweep(spec, grid, spec.node_phi(0));
        },
        r.spec);
  } else {
    throw hl::ConfigError("--axis", "expected phi or eps");
  }
  const auto region = hl::hyperloss_region(s, readout);
  json extra = {{"axis", axis}, {"readout", hl::readout_name(readout)}, {"hyperloss_points", region.size()}};
  emit(c, "sweep", r.doc, sweep_rows(s), extra);

  const auto& v = s.variance(readout);
  std::size_t worst = 0;
  for (std::size_t k = 1; k < v.size(); ++k)
    if (v[k] > v[worst]) worst = k;
  if (region.empty())
    std::printf("no hyperloss on the %s grid (%s readout); worst V = %s\n", axis.c_str(), hl::readout_name(readout),
                dB_report(v[worst]).c_str());
  else
    std::printf("hyperloss detected at %s=%.3f, V_min=%+.1f dB above shot noise (%zu of %zu points, %s readout)\n",
                axis.c_str(), s.grid[worst], -hl::variance_to_db(v[worst]), region.size(), v.size(),
                hl::readout_name(readout));
  return 0;
}

int cmd_map(const Common& c, int phi_points) {
  const Resolved r = resolve(c);
  const hl::NetworkSpec& net = require_network(r, "map");
  if (phi_points < 1) throw hl::ConfigError("--phi-points", "must be >= 1");
  const auto grid = hl::uniform_phase_grid(static_cast<std::size_t>(phi_points));
  const hl::PhaseMap map = hl::hyperloss_map(net, grid);

  // V_max comes from a second pass only for the output rows; the map itself holds V_min.
  const std::size_t cols = map.omega_grid.size();
  const std::size_t idx = hl::designated_phase(net);
  const auto cells = hl::parallel_map(grid.size() * cols, [&](std::size_t k) {
    hl::NetworkSpec n = net;
    hl::set_phase(n, idx, grid[k / cols]);
    return hl::readout_at(n, map.omega_grid[k % cols]);
  });
  std::vector<Row> rows;
  for (std::size_t k = 0; k < cells.size(); ++k)
    rows.push_back({grid[k / cols], map.omega_grid[k % cols], cells[k].v_min, cells[k].v_max, cells[k].v_locked, {}, {}});

  const std::size_t col = map.column_nearest(hl::kSliceOmega);
  const std::size_t hot_row = map.hyperloss_row();
  Eigen::Index best_index = 0;
  map.v_min.col(static_cast<Eigen::Index>(col)).minCoeff(&best_index);
  const auto best_row = static_cast<std::size_t>(best_index);
  const double slice_hz = map.omega_grid[col] / hl::kTwoPi;
  const double v_hot = map.v_min(static_cast<Eigen::Index>(hot_row), static_cast<Eigen::Index>(col));
  const double v_best = map.v_min(static_cast<Eigen::Index>(best_row), static_cast<Eigen::Index>(col));
  json extra = {{"slice_hz", slice_hz},
                {"hyperloss_row_phi", grid[hot_row]},
                {"hyperloss_row_v_min", v_hot},
                {"best_row_phi", grid[best_row]},
                {"best_row_v_min", v_best}};
  emit(c, "map", r.doc, rows, extra);

  if (v_hot > 1.0 + hl::kThresholdGuard)
    std::printf("hyperloss detected at phi=%.3f, V_min=%+.1f dB above shot noise (slice %.3f MHz)\n", grid[hot_row],
                -hl::variance_to_db(v_hot), slice_hz * 1e-6);
  else
    std::printf("no hyperloss row at %.3f MHz; noisiest row phi=%.3f, V_min %s\n", slice_hz * 1e-6, grid[hot_row],
                dB_report(v_hot).c_str());
  std::printf("best row phi=%.3f, V_min %s\n", grid[best_row], dB_report(v_best).c_str());
  return 0;
}

struct OptimizeArgs {
  double omega_hz = 0.0;
  std::string readout = "optimal";
  int grid_density = 32;
  int seeds = 4;
  std::uint64_t rng_seed = 0;
  double sigma = 0.0;
  int samples = 0;
};

int cmd_optimize(const Common& c, const OptimizeArgs& a) {
  const Resolved r = resolve(c);
  hl::OptProblem problem = std::visit(
      [&](const auto& spec) {
        if constexpr (std::is_same_v<std::decay_t<decltype(spec)>, hl::NetworkSpec>)
          return hl::make_problem(spec, parse_readout(a.readout), hl::kTwoPi * a.omega_hz);
        else
          return hl::make_problem(spec);
      },
      r.spec);
  const auto res = hl::optimize_phases(problem, a.grid_density, a.seeds, a.rng_seed);

  std::string phis;
  json phi_json = json::array();
  for (double p : res.phi_star) {
    phis += (phis.empty() ? "" : ", ") + hl::format_fixed(p, 6);
    phi_json.push_back(p);
  }
  std::printf("phi* = [%s]\n", phis.c_str());
  std::printf("squeezing = %.4f dB (%s readout, %zu evaluations)\n", res.value, hl::readout_name(problem.readout),
              res.n_evals);
  json extra = {{"phi_star", phi_json},
                {"value_db", res.value},
                {"best_seed_db", res.best_seed_value},
                {"n_evals", res.n_evals},
                {"grid_density", a.grid_density},
                {"seed_count", a.seeds},
                {"rng_seed", a.rng_seed}};

  if (const auto* net = std::get_if<hl::NetworkSpec>(&r.spec); net && res.phi_star.size() == 1) {
    const auto rep = hl::recovery_report(*net, res.phi_star[0], problem.omega);
    std::printf("effective loss = %.4f (mismatch part %.4f, geometric mismatch %.4f)\n", rep.effective_loss,
                rep.mismatch_loss, rep.geometric_mismatch);
    extra["effective_loss"] = rep.effective_loss;
    extra["mismatch_loss"] = rep.mismatch_loss;
    extra["geometric_mismatch"] = rep.geometric_mismatch;
  }
  if (a.samples > 0) {
    const auto rob = hl::robustness(problem, res.phi_star, a.sigma, static_cast<std::size_t>(a.samples), a.rng_seed);
    std::printf("robustness sigma=%.4f: mean %.4f dB, p05 %.4f dB\n", a.sigma, rob.mean_db, rob.p05_db);
    extra["robustness"] = {{"sigma", a.sigma}, {"samples", a.samples}, {"mean_db", rob.mean_db}, {"p05_db", rob.p05_db}};
  }

  if (!c.out_path.empty()) {
    json trace = json::array();
    for (const auto& t : res.trace) trace.push_back({{"stage", t.stage}, {"phi", t.phi}, {"value_db", t.value}, {"evals", t.evals}});
    extra["trace"] = trace;
    json doc = {{"schema", hl::kSchemaVersion}, {"command", "optimize"}, {"config", r.doc}, {"summary", extra}};
    hl::write_file_atomic(c.out_path, doc.dump(2) + "\n");
  }
  return 0;
}

int cmd_selftest() {
  const auto rep = hl::run_selftest();
  std::printf("%s", rep.format().c_str());
  std::printf("selftest %s\n", rep.passed() ? "passed" : "FAILED");
  return rep.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hyperloss: squeezed-light degradation by coherent spatial-mode mixing"};
  app.require_subcommand(1);

  auto add_common = [](CLI::App* sub, Common& c, bool with_spec) {
    if (with_spec) sub->add_option("--spec", c.spec_path, "Network or chain spec (JSON, schema 1)");
    sub->add_option("-o,--out", c.out_path, "Output file (written atomically)");
    sub->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--set", c.overrides, "Override a spec value: dotted.key=value (repeatable)");
  };

  double eps1 = 0.08, eps2 = 0.08, sqz_db = 15.0, ext_loss = 0.0;
  std::string phi_text = "0";
  auto* coldloss = app.add_subcommand("coldloss", "Coherent-probe loss of the two-coupler cell");
  coldloss->add_option("--eps1", eps1)->required();
  coldloss->add_option("--eps2", eps2)->required();
  coldloss->add_option("--phi", phi_text, "Differential phase (rad, or pi, pi/2, ...)")->required();

  auto* mz = app.add_subcommand("mz", "Squeezed readout of the two-coupler cell");
  mz->add_option("--eps1", eps1)->required();
  mz->add_option("--eps2", eps2)->required();
  mz->add_option("--phi", phi_text)->required();
  mz->add_option("--sqz-db", sqz_db, "Input squeezing, dB below shot noise");
  mz->add_option("--external-loss", ext_loss);

  Common chain_common;
  ChainArgs chain_args;
  auto* chain = app.add_subcommand("chain", "N-node chain threshold statistics");
  add_common(chain, chain_common, true);
  chain->add_option("--nodes", chain_args.nodes);
  chain->add_option("--eps", chain_args.eps);
  chain->add_option("--sqz-db", chain_args.sqz_db);
  chain->add_option("--phi-sweep", chain_args.phi_points, "Number of common-phase grid points over [0, 2pi)");
  chain->add_option("--threshold-db", chain_args.threshold_db);
  chain->add_option("--policy", chain_args.policy)->check(CLI::IsMember({"shared", "refreshed"}));
  chain->add_option("--phase-order", chain_args.order)->check(CLI::IsMember({"after", "before"}));
  chain->add_option("--readout", chain_args.readout)->check(CLI::IsMember({"locked", "optimal"}));

  Common sweep_common;
  std::string axis = "phi", sweep_readout = "optimal";
  int points = 720;
  double eps_max = 0.2, omega_hz = 0.0;
  auto* sweep = app.add_subcommand("sweep", "Phase or mismatch sweep");
  add_common(sweep, sweep_common, true);
  sweep->add_option("--axis", axis)->check(CLI::IsMember({"phi", "eps"}));
  sweep->add_option("--points", points);
  sweep->add_option("--eps-max", eps_max);
  sweep->add_option("--omega-hz", omega_hz, "Sideband frequency (Hz)");
  sweep->add_option("--readout", sweep_readout)->check(CLI::IsMember({"optimal", "locked"}));

  Common map_common;
  int phi_points = 720;
  auto* map = app.add_subcommand("map", "(phi, Omega) map of the optimal-angle variance");
  add_common(map, map_common, true);
  map->add_option("--phi-points", phi_points);

  Common opt_common;
  OptimizeArgs opt_args;
  auto* optimize = app.add_subcommand("optimize", "Maximize output squeezing over the free phases");
  add_common(optimize, opt_common, true);
  optimize->add_option("--omega-hz", opt_args.omega_hz);
  optimize->add_option("--readout", opt_args.readout)->check(CLI::IsMember({"optimal", "locked"}));
  optimize->add_option("--grid-density", opt_args.grid_density);
  optimize->add_option("--seeds", opt_args.seeds);
  optimize->add_option("--rng-seed", opt_args.rng_seed);
  optimize->add_option("--robust-sigma", opt_args.sigma, "Uniform phase error half-width (rad)");
  optimize->add_option("--robust-samples", opt_args.samples);

  auto* selftest = app.add_subcommand("selftest", "Oracle, identity and symplectic checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*coldloss) return cmd_coldloss(eps1, eps2, phi_text);
    if (*mz) return cmd_mz(eps1, eps2, phi_text, sqz_db, ext_loss);
    if (*chain) return cmd_chain(chain_common, chain_args);
    if (*sweep) return cmd_sweep(sweep_common, axis, points, eps_max, omega_hz, sweep_readout);
    if (*map) return cmd_map(map_common, phi_points);
    if (*optimize) return cmd_optimize(opt_common, opt_args);
    if (*selftest) return cmd_selftest();
  } catch (const hl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const hl::InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const hl::InvalidProblem& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const hl::BudgetExceeded& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const hl::InvalidState& e) {
    std::cerr << "non-physical state: " << e.what() << "\n";
    return kExitNonPhysical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
