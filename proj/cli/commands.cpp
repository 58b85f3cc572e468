#include "commands.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include "momentdro/bivariate.hpp"
#include "momentdro/newsvendor.hpp"
#include "momentdro/sdp.hpp"
#include "momentdro/version.hpp"

namespace momentdro::cli {

namespace {

using nlohmann::json;

json spec_json(const MomentSpec& s) {
  return {{"mu1", s.mu1}, {"mu2", s.mu2}, {"a", s.a}, {"b", s.b},
          {"c", s.c}, {"rho", covariance_view(s).rho}};
}

json distribution_json(const DiscreteDistribution& d) {
  json pts = json::array();
  for (const auto& p : d.points) pts.push_back({p[0], p[1]});
  return {{"points", pts}, {"probs", d.probs}};
}

json report_json(const ConditionReport& r) {
  return {{"condition", to_string(r.condition)},
          {"case", to_string(r.case_label)},
          {"boundary_case", r.boundary_case},
          {"pooled", r.pooled},
          {"q_a", r.q_a},
          {"q_b", r.q_b},
          {"q_c", r.q_c}};
}

std::string timestamp_utc() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

json make_manifest(const std::string& command, const json& params,
                   unsigned seed) {
  return {{"command", command},
          {"params", params},
          {"seed", seed},
          {"version", kVersion},
          {"timestamp", timestamp_utc()}};
}

json bound_json(const MomentSpec& spec, double q, bool with_distribution,
                bool with_dual, bool verify) {
  const auto [value, report] = worst_case_value(spec, q);
  json out = {{"spec", spec_json(spec)},
              {"q", q},
              {"value", value},
              {"condition", to_string(report.condition)},
              {"report", report_json(report)}};
  if (with_distribution) {
    try {
      out["distribution"] =
          distribution_json(worst_case_distribution(spec, q));
      out["distribution_source"] = "closed_form";
    } catch (const degenerate_error& e) {
      const OracleResult fallback = lp_worst_case(spec, q, GridConfig{});
      out["distribution"] = distribution_json(fallback.distribution);
      out["distribution_source"] = "lp_oracle_fallback";
      out["warning"] = std::string("closed-form support degenerate (") +
                       e.what() + "); reporting a grid approximation";
    }
  }
  if (with_dual) {
    try {
      const DualCertificate cert = dual_certificate(spec, q);
      out["dual"] = {{"z", cert.z}, {"objective", cert.objective(spec)}};
    } catch (const degenerate_error& e) {
      out["dual"] = nullptr;
      out["warning"] = std::string("dual certificate degenerate: ") +
                       e.what();
    }
  }
  if (verify) {
    const GapReport gap = verify_duality(spec, q);
    json g = {{"primal", gap.primal},
              {"feasible_primal", gap.feasible_primal},
              {"dual_skipped", gap.dual_skipped}};
    if (!gap.dual_skipped) {
      g["dual"] = gap.dual;
      g["gap"] = gap.gap;
      g["feasible_dual"] = gap.feasible_dual;
    }
    if (!gap.skip_reason.empty()) g["skip_reason"] = gap.skip_reason;
    out["verify"] = g;
  }
  return out;
}

namespace {

json solution_json(const NewsvendorSolution& sol) {
  json out = {{"model", to_string(sol.model)},
              {"q_star", sol.q_star},
              {"total_order", sol.total_order()},
              {"objective", sol.objective}};
  if (sol.active_condition) {
    out["active_condition"] = report_json(*sol.active_condition);
  }
  json cands = json::array();
  for (const auto& c : sol.candidates) {
    cands.push_back({{"condition", to_string(c.condition)},
                     {"q", c.q},
                     {"objective", c.objective},
                     {"stationary", c.stationary}});
  }
  out["candidates"] = cands;
  return out;
}

}  // namespace

json newsvendor_json(const MomentSpec& spec, const std::string& model,
                     double eta) {
  NewsvendorSolution sol;
  if (model == "bcm") {
    sol = solve_bcm(spec, eta);
  } else if (model == "bdm") {
    sol = solve_bdm(spec, eta);
  } else if (model == "ucm") {
    sol = solve_ucm(spec, eta);
  } else {
    throw infeasible_error("model must be one of bcm, bdm, ucm");
  }
  json out = solution_json(sol);
  out["spec"] = spec_json(spec);
  out["eta"] = eta;
  return out;
}

SweepAxis parse_range(const std::string& text) {
  SweepAxis axis;
  char colon1 = 0, colon2 = 0;
  std::istringstream in(text);
  if (!(in >> axis.lo >> colon1 >> axis.hi >> colon2 >> axis.n) ||
      colon1 != ':' || colon2 != ':' || !in.eof()) {
    throw infeasible_error("range must be lo:hi:n");
  }
  if (axis.n < 1) throw infeasible_error("range count must be >= 1");
  if (axis.hi < axis.lo) throw infeasible_error("range hi < lo");
  return axis;
}

namespace {

std::vector<double> axis_points(const SweepAxis& axis) {
  std::vector<double> pts;
  if (axis.n == 1) {
    pts.push_back(axis.lo);
    return pts;
  }
  for (int i = 0; i < axis.n; ++i) {
    pts.push_back(axis.lo + (axis.hi - axis.lo) * i / (axis.n - 1));
  }
  return pts;
}

}  // namespace

std::string sweep_csv(double mu1, double mu2, double a, double b,
                      const std::string& vary, const SweepAxis& rho_axis,
                      const SweepAxis& eta_axis, double fixed_rho,
                      double fixed_eta) {
  std::vector<double> rhos, etas;
  if (vary == "rho") {
    rhos = axis_points(rho_axis);
    etas = {fixed_eta};
  } else if (vary == "eta") {
    rhos = {fixed_rho};
    etas = axis_points(eta_axis);
  } else if (vary == "both") {
    rhos = axis_points(rho_axis);
    etas = axis_points(eta_axis);
  } else {
    throw infeasible_error("vary must be one of rho, eta, both");
  }

  std::ostringstream out;
  out << "rho,eta,v_bcm,v_bdm,v_ucm,kappa,q_bcm,q1_bdm,q2_bdm,q_ucm,"
         "order_gap\n";
  for (double rho : rhos) {
    for (double eta : etas) {
      out << format_full(rho) << "," << format_full(eta);
      try {
        const MomentSpec spec = from_correlation(mu1, mu2, a, b, rho);
        const NewsvendorSolution bcm = solve_bcm(spec, eta);
        const NewsvendorSolution bdm = solve_bdm(spec, eta);
        const NewsvendorSolution ucm = solve_ucm(spec, eta);
        const double kappa =
            (bdm.objective - bcm.objective) / bcm.objective;
        const double gap = bdm.total_order() - bcm.total_order();
        for (double v :
             {bcm.objective, bdm.objective, ucm.objective, kappa,
              bcm.q_star[0], bdm.q_star[0], bdm.q_star[1], ucm.q_star[0],
              gap}) {
          out << "," << format_full(v);
        }
        out << "\n";
      } catch (const infeasible_error&) {
        for (int i = 0; i < 9; ++i) out << ",infeasible";
        out << "\n";
      }
    }
  }
  return out.str();
}

json oracle_json(const MomentSpec& spec, std::optional<double> q,
                 std::optional<double> prob_below, const GridConfig& grid) {
  if (q.has_value() == prob_below.has_value()) {
    throw infeasible_error("pass exactly one of --q and --prob-below");
  }
  json out = {{"spec", spec_json(spec)},
              {"grid",
               {{"n_per_axis", grid.n_per_axis},
                {"box_scale", grid.box_scale},
                {"augment", grid.augment}}}};
  if (q) {
    const double closed = worst_case_value(spec, *q).first;
    const OracleResult res = lp_worst_case(spec, *q, grid);
    out["q"] = *q;
    out["closed_form"] = closed;
    out["oracle"] = res.value;
    out["relative_gap"] =
        std::abs(res.value - closed) / std::max(std::abs(closed), 1e-300);
    out["slack"] = res.slack;
    out["slack_used"] = res.slack_used;
    out["support_size"] = res.distribution.points.size();
  } else {
    out["xi"] = *prob_below;
    out["probability"] = max_prob_below(spec, *prob_below, grid);
    out["shifting_bound"] = shifting_bound(spec);
  }
  return out;
}

json sdp_export_json(const MomentSpec& spec, std::optional<double> q,
                     const std::optional<std::string>& pieces_path,
                     const std::string& out_path) {
  if (q.has_value() == pieces_path.has_value()) {
    throw infeasible_error("pass exactly one of --q and --pieces");
  }
  PiecewiseQuadratic pw;
  if (q) {
    pw = PiecewiseQuadratic::shortfall(*q);
  } else {
    std::ifstream in(*pieces_path);
    if (!in) throw std::ios_base::failure("cannot open " + *pieces_path);
    json doc = json::parse(in);
    for (const auto& row : doc.at("pieces")) {
      std::array<double, 6> w{};
      if (row.size() != 6) {
        throw infeasible_error("each piece needs 6 coefficients");
      }
      for (int i = 0; i < 6; ++i) w[i] = row[i].get<double>();
      pw.pieces.push_back(w);
    }
  }
  const SdpProblem problem = build_sdp(spec, pw);
  export_sdpa(problem, out_path);
  const SdpaFile data = sdpa_data(problem);
  return {{"spec", spec_json(spec)},
          {"out", out_path},
          {"n_vars", data.n_vars},
          {"n_blocks", data.block_sizes.size()},
          {"block_sizes", data.block_sizes},
          {"n_entries", data.entries.size()}};
}

std::string resolve_out_path(const std::string& path) {
  if (path.find('/') != std::string::npos) return path;
  const char* dir = std::getenv("MOMENTDRO_OUT_DIR");
  if (dir == nullptr || *dir == '\0') return path;
  std::string out(dir);
  if (out.back() != '/') out += '/';
  return out + path;
}

namespace {

struct CommonFlags {
  double mu1 = 1.0, mu2 = 1.0, a = 2.0, b = 2.0;
  double c = 0.0, rho = 0.0;
  bool has_c = false, has_rho = false;
  unsigned seed = 0;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--mu1", f.mu1, "mean of X1")->required();
  cmd->add_option("--mu2", f.mu2, "mean of X2")->required();
  cmd->add_option("--a", f.a, "E[X1^2] / mu1^2")->required();
  cmd->add_option("--b", f.b, "E[X2^2] / mu2^2")->required();
  cmd->add_option("--c", f.c, "E[X1 X2] / (mu1 mu2)");
  cmd->add_option("--rho", f.rho, "correlation of (X1, X2)");
  cmd->add_option("--seed", f.seed, "seed recorded in the manifest");
}

MomentSpec build_spec(CLI::App* cmd, CommonFlags& f) {
  f.has_c = cmd->count("--c") > 0;
  f.has_rho = cmd->count("--rho") > 0;
  if (f.has_c == f.has_rho) {
    throw infeasible_error("pass exactly one of --c and --rho");
  }
  if (f.has_rho) return from_correlation(f.mu1, f.mu2, f.a, f.b, f.rho);
  const MomentSpec spec{f.mu1, f.mu2, f.a, f.b, f.c};
  require_valid(spec);
  return spec;
}

json common_params(const CommonFlags& f) {
  json p = {{"mu1", f.mu1}, {"mu2", f.mu2}, {"a", f.a}, {"b", f.b}};
  if (f.has_c) p["c"] = f.c;
  if (f.has_rho) p["rho"] = f.rho;
  return p;
}

void emit(json doc, const json& manifest) {
  doc["manifest"] = manifest;
  std::cout << doc.dump(2) << "\n";
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"exact worst-case bounds for bivariate demand with "
               "mean-covariance ambiguity"};
  app.require_subcommand(1);

  CommonFlags bound_f;
  double bound_q = 0.0;
  bool with_dist = false, with_dual = false, do_verify = false;
  CLI::App* bound = app.add_subcommand(
      "bound", "worst-case expected shortfall at a fixed order");
  add_common(bound, bound_f);
  bound->add_option("--q", bound_q, "order quantity")->required();
  bound->add_flag("--with-distribution", with_dist,
                  "include a worst-case distribution");
  bound->add_flag("--with-dual", with_dual, "include the dual certificate");
  bound->add_flag("--verify", do_verify, "run the duality gap check");

  CommonFlags nv_f;
  std::string nv_model = "bcm";
  double nv_eta = 0.5;
  CLI::App* nv = app.add_subcommand("newsvendor", "robust newsvendor solve");
  add_common(nv, nv_f);
  nv->add_option("--model", nv_model, "bcm, bdm, or ucm");
  nv->add_option("--eta", nv_eta, "critical ratio in (0,1)")->required();

  double sw_mu1 = 1.0, sw_mu2 = 1.0, sw_a = 2.0, sw_b = 6.0;
  std::string sw_vary = "rho";
  std::string sw_range = "-0.44:1:21";
  std::string sw_eta_range = "0.1:0.9:9";
  double sw_rho = 0.3, sw_eta = 0.5;
  std::string sw_out = "sweep.csv";
  unsigned sw_seed = 0;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "grid evaluation of the three models as CSV");
  sweep->add_option("--mu1", sw_mu1, "mean of X1");
  sweep->add_option("--mu2", sw_mu2, "mean of X2");
  sweep->add_option("--a", sw_a, "E[X1^2] / mu1^2");
  sweep->add_option("--b", sw_b, "E[X2^2] / mu2^2");
  sweep->add_option("--vary", sw_vary, "rho, eta, or both");
  sweep->add_option("--range", sw_range, "rho range lo:hi:n");
  sweep->add_option("--eta-range", sw_eta_range, "eta range lo:hi:n");
  sweep->add_option("--rho", sw_rho, "fixed rho when varying eta");
  sweep->add_option("--eta", sw_eta, "fixed eta when varying rho");
  sweep->add_option("--out", sw_out, "output CSV path");
  sweep->add_option("--seed", sw_seed, "seed recorded in the manifest");

  CommonFlags or_f;
  double or_q = 0.0, or_xi = 0.0;
  GridConfig or_grid;
  bool or_no_augment = false;
  CLI::App* oracle = app.add_subcommand(
      "oracle", "grid LP cross-check of the closed forms");
  add_common(oracle, or_f);
  oracle->add_option("--q", or_q, "order quantity for the shortfall check");
  oracle->add_option("--prob-below", or_xi,
                     "threshold for the worst-case P(X1 <= xi)");
  oracle->add_option("--grid-n", or_grid.n_per_axis, "intervals per axis");
  oracle->add_option("--box-k", or_grid.box_scale, "box size in sigma units");
  oracle->add_option("--slack", or_grid.moment_slack,
                     "moment slack (negative selects the default)");
  oracle->add_flag("--no-augment", or_no_augment,
                   "skip injecting analytic support points");

  CommonFlags sdp_f;
  double sdp_q = 0.0;
  std::string sdp_pieces;
  std::string sdp_out = "problem.dat-s";
  CLI::App* sdp = app.add_subcommand(
      "sdp-export", "write the piecewise-quadratic bound SDP as SDPA");
  add_common(sdp, sdp_f);
  sdp->add_option("--q", sdp_q, "encode the two-piece shortfall at q");
  sdp->add_option("--pieces", sdp_pieces, "JSON file with piece coefficients");
  sdp->add_option("--out", sdp_out, "output .dat-s path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (bound->parsed()) {
      const MomentSpec spec = build_spec(bound, bound_f);
      json params = common_params(bound_f);
      params["q"] = bound_q;
      const json doc =
          bound_json(spec, bound_q, with_dist, with_dual, do_verify);
      std::fprintf(stderr, "value %.2f condition %s\n",
                   doc["value"].get<double>(),
                   doc["condition"].get<std::string>().c_str());
      emit(doc, make_manifest("bound", params, bound_f.seed));
    } else if (nv->parsed()) {
      const MomentSpec spec = build_spec(nv, nv_f);
      json params = common_params(nv_f);
      params["model"] = nv_model;
      params["eta"] = nv_eta;
      const json doc = newsvendor_json(spec, nv_model, nv_eta);
      std::fprintf(stderr, "model %s q* %.2f objective %.2f\n",
                   nv_model.c_str(), doc["total_order"].get<double>(),
                   doc["objective"].get<double>());
      emit(doc, make_manifest("newsvendor", params, nv_f.seed));
    } else if (sweep->parsed()) {
      const SweepAxis rho_axis = parse_range(sw_range);
      const SweepAxis eta_axis = parse_range(sw_eta_range);
      const std::string csv =
          sweep_csv(sw_mu1, sw_mu2, sw_a, sw_b, sw_vary, rho_axis, eta_axis,
                    sw_rho, sw_eta);
      const std::string path = resolve_out_path(sw_out);
      {
        std::ofstream out(path);
        if (!out) throw std::ios_base::failure("cannot open " + path);
        out << csv;
        if (!out) throw std::ios_base::failure("write failed: " + path);
      }
      const json params = {{"mu1", sw_mu1},   {"mu2", sw_mu2},
                           {"a", sw_a},       {"b", sw_b},
                           {"vary", sw_vary}, {"range", sw_range},
                           {"eta_range", sw_eta_range}, {"rho", sw_rho},
                           {"eta", sw_eta},   {"out", path}};
      const json manifest = make_manifest("sweep", params, sw_seed);
      {
        std::ofstream mout(path + ".manifest.json");
        if (!mout) {
          throw std::ios_base::failure("cannot open " + path +
                                       ".manifest.json");
        }
        mout << manifest.dump(2) << "\n";
      }
      std::fprintf(stderr, "wrote %s\n", path.c_str());
      std::cout << path << "\n";
    } else if (oracle->parsed()) {
      const MomentSpec spec = build_spec(oracle, or_f);
      or_grid.augment = !or_no_augment;
      std::optional<double> q, xi;
      if (oracle->count("--q") > 0) q = or_q;
      if (oracle->count("--prob-below") > 0) xi = or_xi;
      json params = common_params(or_f);
      params["grid_n"] = or_grid.n_per_axis;
      params["box_k"] = or_grid.box_scale;
      if (q) params["q"] = *q;
      if (xi) params["prob_below"] = *xi;
      const json doc = oracle_json(spec, q, xi, or_grid);
      if (q) {
        std::fprintf(stderr, "closed %.6f oracle %.6f gap %.4f%%\n",
                     doc["closed_form"].get<double>(),
                     doc["oracle"].get<double>(),
                     100.0 * doc["relative_gap"].get<double>());
      } else {
        std::fprintf(stderr, "probability %.6f\n",
                     doc["probability"].get<double>());
      }
      emit(doc, make_manifest("oracle", params, or_f.seed));
    } else if (sdp->parsed()) {
      const MomentSpec spec = build_spec(sdp, sdp_f);
      std::optional<double> q;
      std::optional<std::string> pieces;
      if (sdp->count("--q") > 0) q = sdp_q;
      if (sdp->count("--pieces") > 0) pieces = sdp_pieces;
      const std::string path = resolve_out_path(sdp_out);
      json params = common_params(sdp_f);
      if (q) params["q"] = *q;
      if (pieces) params["pieces"] = *pieces;
      params["out"] = path;
      const json doc = sdp_export_json(spec, q, pieces, path);
      std::fprintf(stderr, "wrote %s (%d vars, %zu blocks)\n", path.c_str(),
                   doc["n_vars"].get<int>(),
                   doc["n_blocks"].get<std::size_t>());
      emit(doc, make_manifest("sdp-export", params, sdp_f.seed));
    }
  } catch (const infeasible_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const lp_infeasible_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const degenerate_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const consistency_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::ios_base::failure& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}

}  // namespace momentdro::cli
