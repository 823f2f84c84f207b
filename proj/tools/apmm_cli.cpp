// Command-line driver: single runs, the three studies, field dumps and
// config validation. Exit codes: 0 success, 1 configuration error,
// 2 numerical failure.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "apmm/apmm.hpp"

namespace {

using Overrides = std::vector<std::pair<std::string, std::string>>;

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::string matrix_out;
  // Named flags, forwarded verbatim to the config parser.
  std::vector<std::pair<std::string, std::string>> flags = {
      {"scheme", ""}, {"source", ""}, {"eta", ""}, {"nu", ""}, {"lambda", ""}, {"L", ""}, {"l", ""},
      {"T", ""},      {"dx", ""},     {"dy", ""},  {"dt", ""}, {"mode", ""},   {"output", ""}, {"hs", ""}, {"etas", ""}};
};

void add_common(CLI::App& sub, Common& c) {
  sub.add_option("-c,--config", c.config, "key=value configuration file");
  sub.add_option("--set", c.sets, "extra key=value override (repeatable)");
  for (auto& [key, value] : c.flags) sub.add_option("--" + key, value, "override '" + key + "'");
}

Overrides collect(const Common& c, apmm::Study study) {
  Overrides o{{"study", apmm::to_string(study)}};
  for (const auto& [k, v] : c.flags)
    if (!v.empty()) o.emplace_back(k, v);
  for (const auto& s : c.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw apmm::Error(apmm::ErrorKind::ParseError, "--set expects key=value, got '" + s + "'");
    o.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  return o;
}

std::string out_path(const apmm::RunSpec& spec, const std::string& name) {
  return (std::filesystem::path(spec.output_dir) / name).string();
}

std::vector<double> etas_of(const apmm::RunSpec& spec) {
  return spec.etas.empty() ? apmm::default_etas(spec.study) : spec.etas;
}

struct RunOutcome {
  apmm::Grid grid;
  apmm::State state;
};

RunOutcome single_run(const apmm::RunSpec& spec, const std::string& matrix_out) {
  using namespace apmm;
  Grid g = build_grid(spec.phys, spec.disc);
  const Problem pb = make_problem(spec.source, spec.phys);
  if (!matrix_out.empty()) write_matrix_market(assemble_matrix(spec.scheme, g, spec.phys, spec.disc).matrix, matrix_out);

  double spread = 0.0;
  std::vector<Observer> obs;
  if (spec.scheme == Scheme::AP)
    obs.push_back([&](const State& s) { spread = std::max(spread, micro_macro_spread(g, s, spec.phys.eta)); });
  RunResult r = run(g, spec.phys, spec.disc, spec.scheme, pb.terms, pb.phi_ini, obs);

  if (r.non_integral_step_count) std::cerr << "warning: T/dt is not an integer, took " << r.steps << " steps\n";
  if (r.final_state.x_dependent_initial) std::cerr << "warning: initial data depends on x\n";
  std::cout << "steps " << r.steps << "\n"
            << "t " << format_double(r.final_state.t) << "\n"
            << "factorizations " << r.factorizations << "\n";
  if (spec.scheme == Scheme::AP) std::cout << "micro_macro_spread " << format_double(spread) << "\n";
  if (pb.exact) {
    auto err = sample(g, [&](double x, double y) { return pb.exact(r.final_state.t, x, y); });
    for (int id = 0; id < g.node_count(); ++id) err[id] -= r.final_state.phi[id];
    std::cout << "err_l2 " << format_double(l2_norm(g, err)) << "\n";
  }
  std::cout << "phi_l2 " << format_double(l2_norm(g, r.final_state.phi)) << "\n";
  return {std::move(g), std::move(r.final_state)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Micro-macro and naive solvers for the anisotropic edge-plasma potential model"};
  app.require_subcommand(1);

  Common run_c, conv_c, eta_c, cond_c, dump_c, val_c;
  auto* run_cmd = app.add_subcommand("run", "integrate one configuration to T");
  add_common(*run_cmd, run_c);
  run_cmd->add_option("--dump-matrix", run_c.matrix_out, "write the system matrix in MatrixMarket format");
  auto* conv_cmd = app.add_subcommand("mms-convergence", "spatial order against the manufactured solution");
  add_common(*conv_cmd, conv_c);
  auto* eta_cmd = app.add_subcommand("eta-sweep", "distance to the eta = 0 limit for a list of eta");
  add_common(*eta_cmd, eta_c);
  auto* cond_cmd = app.add_subcommand("condition-study", "2-norm condition numbers of both schemes");
  add_common(*cond_cmd, cond_c);
  auto* dump_cmd = app.add_subcommand("dump-fields", "run and write the final phi and q fields");
  add_common(*dump_cmd, dump_c);
  auto* val_cmd = app.add_subcommand("validate", "check the configuration and initial compatibility");
  add_common(*val_cmd, val_c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  using namespace apmm;
  try {
    if (run_cmd->parsed()) {
      const RunSpec spec = parse_config(run_c.config, collect(run_c, Study::Run));
      write_config_echo(spec, out_path(spec, "config.txt"));
      single_run(spec, run_c.matrix_out);
    } else if (dump_cmd->parsed()) {
      const RunSpec spec = parse_config(dump_c.config, collect(dump_c, Study::Run));
      write_config_echo(spec, out_path(spec, "config.txt"));
      const auto out = single_run(spec, "");
      dump_field(out.grid, out.state, out_path(spec, "fields.txt"), config_echo(spec));
      std::cout << "wrote " << out_path(spec, "fields.txt") << "\n";
    } else if (conv_cmd->parsed()) {
      const RunSpec spec = parse_config(conv_c.config, collect(conv_c, Study::MmsConvergence));
      write_config_echo(spec, out_path(spec, "config.txt"));
      const auto res = run_mms_convergence(spec.phys, spec.hs, spec.disc.dt, spec.source, spec.scheme, spec.disc.mode);
      write_csv(res.rows, out_path(spec, "convergence.csv"));
      for (const auto& r : res.rows) std::cout << "h " << format_double(r.h) << " err_l2 " << format_double(r.err_l2) << "\n";
      std::cout << "order " << format_double(res.order) << "\n";
    } else if (eta_cmd->parsed()) {
      RunSpec base;
      base.source = SourceKind::Eq4;
      const RunSpec spec = parse_config(eta_c.config, collect(eta_c, Study::EtaSweep), base);
      write_config_echo(spec, out_path(spec, "config.txt"));
      const auto res = run_eta_sweep(spec.phys, spec.disc, etas_of(spec), spec.source);
      write_csv(res.rows, out_path(spec, "eta_sweep.csv"));
      for (const auto& r : res.rows)
        std::cout << "eta " << format_double(r.eta) << " l1 " << format_double(r.err_l1_time) << " l2 "
                  << format_double(r.err_l2_time) << "\n";
      std::cout << "slope_l1 " << format_double(res.slope_l1) << "\nslope_l2 " << format_double(res.slope_l2) << "\n";
    } else if (cond_cmd->parsed()) {
      const RunSpec spec = parse_config(cond_c.config, collect(cond_c, Study::ConditionStudy));
      write_config_echo(spec, out_path(spec, "config.txt"));
      const auto rows = run_condition_study(spec.phys, spec.disc, etas_of(spec));
      write_csv(rows, out_path(spec, "condition.csv"));
      for (const auto& r : rows) {
        std::cout << "eta " << format_double(r.eta) << " kappa_ap " << format_double(r.kappa_ap) << " kappa_naive "
                  << (r.kappa_naive ? format_double(*r.kappa_naive) : "-");
        if (!r.converged) std::cout << " (estimate not converged)";
        std::cout << "\n";
      }
    } else if (val_cmd->parsed()) {
      const RunSpec spec = parse_config(val_c.config, collect(val_c, Study::Run));
      const Grid g = build_grid(spec.phys, spec.disc);
      const Layout lay = layout_for(spec.scheme);
      std::cout << "mode " << to_string(spec.disc.mode) << "\n"
                << "plasma_nodes " << g.plasma_count() << "\n"
                << "ghost_nodes " << g.ghost_count() << "\n"
                << "unknowns " << lay.size(g) << "\n";
      const Problem pb = make_problem(spec.source, spec.phys);
      const auto rep = validate_compatibility(spec.phys, pb.phi_ini, pb.terms.source);
      std::cout << "compatibility " << rep.message << "\n";
      if (spec.source == SourceKind::Eq3Literal) {
        const double res = mms_sheath_residual<double>(MmsVariant::Literal, -1, spec.phys.T, 0.25, spec.phys.L,
                                                       spec.phys.eta, spec.phys.lambda_ref);
        std::cout << "warning: literal manufactured solution violates the sheath condition (residual "
                  << format_double(res) << " at t=T, y=0.25)\n";
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_numerical(e.kind()) ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
