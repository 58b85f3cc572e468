#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "momentdro/bivariate.hpp"
#include "momentdro/newsvendor.hpp"
#include "momentdro/oracle.hpp"
#include "momentdro/scarf.hpp"
#include "momentdro/sdp.hpp"
#include "momentdro/version.hpp"

namespace py = pybind11;
using namespace momentdro;

namespace {

py::dict report_dict(const ConditionReport& r) {
  py::dict d;
  d["condition"] = to_string(r.condition);
  d["case"] = to_string(r.case_label);
  d["q_a"] = r.q_a;
  d["q_b"] = r.q_b;
  d["q_c"] = r.q_c;
  d["zeta_a"] = r.zeta_a;
  d["zeta_b"] = r.zeta_b;
  d["boundary_case"] = r.boundary_case;
  d["pooled"] = r.pooled;
  py::list intervals;
  for (const auto& iv : r.interval_table) {
    py::dict e;
    e["empty"] = iv.empty;
    if (!iv.empty) {
      e["lo"] = iv.lo;
      e["hi"] = iv.hi;
      e["lo_closed"] = iv.lo_closed;
      e["hi_closed"] = iv.hi_closed;
    }
    intervals.append(e);
  }
  d["intervals"] = intervals;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "exact worst-case bounds for bivariate demand under "
            "mean-covariance ambiguity";
  m.attr("__version__") = kVersion;

  py::register_exception<infeasible_error>(m, "InfeasibleError",
                                           PyExc_ValueError);
  py::register_exception<degenerate_error>(m, "DegenerateError",
                                           PyExc_ArithmeticError);
  py::register_exception<consistency_error>(m, "ConsistencyError",
                                            PyExc_RuntimeError);
  py::register_exception<lp_infeasible_error>(m, "LpInfeasibleError",
                                              PyExc_ArithmeticError);

  py::class_<MomentSpec>(m, "MomentSpec")
      .def(py::init([](double mu1, double mu2, double a, double b, double c) {
             MomentSpec s{mu1, mu2, a, b, c};
             require_valid(s);
             return s;
           }),
           py::arg("mu1"), py::arg("mu2"), py::arg("a"), py::arg("b"),
           py::arg("c"))
      .def_readwrite("mu1", &MomentSpec::mu1)
      .def_readwrite("mu2", &MomentSpec::mu2)
      .def_readwrite("a", &MomentSpec::a)
      .def_readwrite("b", &MomentSpec::b)
      .def_readwrite("c", &MomentSpec::c)
      .def_property_readonly(
          "rho", [](const MomentSpec& s) { return covariance_view(s).rho; })
      .def("__repr__", [](const MomentSpec& s) {
        return "MomentSpec(mu1=" + std::to_string(s.mu1) +
               ", mu2=" + std::to_string(s.mu2) + ", a=" + std::to_string(s.a) +
               ", b=" + std::to_string(s.b) + ", c=" + std::to_string(s.c) +
               ")";
      });

  m.def("from_correlation", &from_correlation, py::arg("mu1"), py::arg("mu2"),
        py::arg("a"), py::arg("b"), py::arg("rho"));
  m.def("validate", [](const MomentSpec& s) {
    const ValidationResult r = validate(s);
    py::dict d;
    d["ok"] = r.ok;
    d["boundary"] = r.boundary;
    py::list v;
    for (const auto& viol : r.violations) {
      v.append(py::make_tuple(viol.inequality, viol.residual));
    }
    d["violations"] = v;
    return d;
  });
  m.def("pooled_moments", &pooled_moments);

  py::class_<DiscreteDistribution>(m, "DiscreteDistribution")
      .def_readonly("points", &DiscreteDistribution::points)
      .def_readonly("probs", &DiscreteDistribution::probs)
      .def("expected_shortfall", &DiscreteDistribution::expected_shortfall)
      .def("moments", &DiscreteDistribution::moments)
      .def("total_mass", &DiscreteDistribution::total_mass);

  py::class_<UnivariateSpec>(m, "UnivariateSpec")
      .def(py::init([](double mu, double sigma2) {
             return UnivariateSpec{mu, sigma2};
           }),
           py::arg("mu"), py::arg("sigma2"))
      .def_readwrite("mu", &UnivariateSpec::mu)
      .def_readwrite("sigma2", &UnivariateSpec::sigma2);

  m.def("scarf_value", [](const UnivariateSpec& u, double q) {
    return scarf_bound(u, q).value;
  });
  m.def("scarf_distribution", [](const UnivariateSpec& u, double q) {
    return scarf_bound(u, q).distribution;
  });
  m.def("scarf_order", &scarf_order, py::arg("uspec"), py::arg("eta"));

  m.def("classify", [](const MomentSpec& s, double q) {
    return report_dict(classify_condition(s, q));
  });
  m.def("worst_case_value", [](const MomentSpec& s, double q) {
    return worst_case_value(s, q).first;
  });
  m.def("worst_case_condition", [](const MomentSpec& s, double q) {
    return std::string(to_string(worst_case_value(s, q).second.condition));
  });
  m.def("worst_case_distribution", &worst_case_distribution);

  py::class_<DualCertificate>(m, "DualCertificate")
      .def_readonly("z", &DualCertificate::z)
      .def_readonly("q", &DualCertificate::q)
      .def("h1", &DualCertificate::h1)
      .def("h2", &DualCertificate::h2)
      .def("objective", &DualCertificate::objective);
  m.def("dual_certificate", &dual_certificate);

  py::class_<GapReport>(m, "GapReport")
      .def_readonly("primal", &GapReport::primal)
      .def_readonly("dual", &GapReport::dual)
      .def_readonly("gap", &GapReport::gap)
      .def_readonly("feasible_primal", &GapReport::feasible_primal)
      .def_readonly("feasible_dual", &GapReport::feasible_dual)
      .def_readonly("dual_skipped", &GapReport::dual_skipped)
      .def_readonly("skip_reason", &GapReport::skip_reason);
  m.def("verify_duality", &verify_duality);

  py::class_<ReducedLoss>(m, "ReducedLoss")
      .def_readonly("scale", &ReducedLoss::scale)
      .def_readonly("offset", &ReducedLoss::offset)
      .def_readonly("reduced_spec", &ReducedLoss::reduced_spec)
      .def_readonly("reduced_q", &ReducedLoss::reduced_q)
      .def("evaluate_worst_case", &ReducedLoss::evaluate_worst_case);
  m.def("reduce_loss", &reduce_loss, py::arg("u1"), py::arg("u2"),
        py::arg("v1"), py::arg("v2"), py::arg("w"), py::arg("spec"));

  py::class_<NewsvendorSolution>(m, "NewsvendorSolution")
      .def_property_readonly(
          "model",
          [](const NewsvendorSolution& s) {
            return std::string(to_string(s.model));
          })
      .def_readonly("q_star", &NewsvendorSolution::q_star)
      .def_readonly("objective", &NewsvendorSolution::objective)
      .def("total_order", &NewsvendorSolution::total_order)
      .def_property_readonly(
          "active_condition",
          [](const NewsvendorSolution& s) -> py::object {
            if (!s.active_condition) return py::none();
            return report_dict(*s.active_condition);
          })
      .def_property_readonly("candidates", [](const NewsvendorSolution& s) {
        py::list out;
        for (const auto& c : s.candidates) {
          py::dict d;
          d["condition"] = to_string(c.condition);
          d["q"] = c.q;
          d["objective"] = c.objective;
          d["stationary"] = c.stationary;
          out.append(d);
        }
        return out;
      });

  m.def("bcm_objective", &bcm_objective, py::arg("spec"), py::arg("eta"),
        py::arg("q"));
  m.def("solve_bcm", &solve_bcm, py::arg("spec"), py::arg("eta"));
  m.def("solve_bdm", &solve_bdm, py::arg("spec"), py::arg("eta"));
  m.def("solve_ucm", &solve_ucm, py::arg("spec"), py::arg("eta"));
  m.def("relative_gap", &relative_gap, py::arg("spec"), py::arg("eta"));
  m.def("order_gap", &order_gap, py::arg("spec"), py::arg("eta"));
  m.def("stationary_points", [](const MomentSpec& s, double eta) {
    const StationaryTable t = stationary_points(s, eta);
    py::list rows;
    for (int i = 0; i < 6; ++i) {
      py::dict d;
      d["condition"] = "C" + std::to_string(i + 1);
      d["q"] = t.q[i];
      d["window_ok"] = t.window_ok[i];
      d["eta_window"] = t.eta_window[i];
      rows.append(d);
    }
    return rows;
  });

  py::class_<MarginalBlock>(m, "MarginalBlock")
      .def_static(
          "univariate",
          [](double mu, double sigma2, double w) {
            MarginalBlock b;
            b.uni = UnivariateSpec{mu, sigma2};
            b.w = {w, 0.0};
            return b;
          },
          py::arg("mu"), py::arg("sigma2"), py::arg("w") = 1.0)
      .def_static(
          "bivariate",
          [](const MomentSpec& spec, double w1, double w2) {
            MarginalBlock b;
            b.biv = spec;
            b.w = {w1, w2};
            return b;
          },
          py::arg("spec"), py::arg("w1") = 1.0, py::arg("w2") = 1.0);
  m.def("multivariate_upper_bound", &multivariate_upper_bound,
        py::arg("blocks"), py::arg("u1"), py::arg("u2"), py::arg("v1"),
        py::arg("v2"));

  py::class_<GridConfig>(m, "GridConfig")
      .def(py::init<>())
      .def_readwrite("n_per_axis", &GridConfig::n_per_axis)
      .def_readwrite("box_scale", &GridConfig::box_scale)
      .def_readwrite("moment_slack", &GridConfig::moment_slack)
      .def_readwrite("augment", &GridConfig::augment);

  py::class_<OracleResult>(m, "OracleResult")
      .def_readonly("value", &OracleResult::value)
      .def_readonly("distribution", &OracleResult::distribution)
      .def_readonly("slack_used", &OracleResult::slack_used)
      .def_readonly("slack", &OracleResult::slack);

  m.def("lp_worst_case", &lp_worst_case, py::arg("spec"), py::arg("q"),
        py::arg("grid") = GridConfig{});
  m.def("max_prob_below", &max_prob_below, py::arg("spec"), py::arg("xi"),
        py::arg("grid") = GridConfig{});
  m.def("shifting_bound", &shifting_bound);

  py::class_<PiecewiseQuadratic>(m, "PiecewiseQuadratic")
      .def(py::init([](const std::vector<std::array<double, 6>>& pieces) {
             PiecewiseQuadratic pw;
             pw.pieces = pieces;
             return pw;
           }),
           py::arg("pieces"))
      .def_static("shortfall", &PiecewiseQuadratic::shortfall)
      .def_readonly("pieces", &PiecewiseQuadratic::pieces)
      .def("evaluate", &PiecewiseQuadratic::evaluate);

  py::class_<SdpProblem>(m, "SdpProblem")
      .def_readonly("objective", &SdpProblem::objective)
      .def("bound", &SdpProblem::bound);
  m.def("build_sdp", &build_sdp);

  py::class_<SdpaFile>(m, "SdpaFile")
      .def_readonly("n_vars", &SdpaFile::n_vars)
      .def_readonly("block_sizes", &SdpaFile::block_sizes)
      .def_readonly("objective", &SdpaFile::objective)
      .def_property_readonly("entries", [](const SdpaFile& f) {
        py::list out;
        for (const auto& e : f.entries) {
          out.append(py::make_tuple(e.matno, e.block, e.row, e.col, e.value));
        }
        return out;
      });
  m.def("sdpa_data", &sdpa_data);
  m.def("export_sdpa", &export_sdpa, py::arg("problem"), py::arg("path"));
  m.def("parse_sdpa", &parse_sdpa, py::arg("path"));

  m.def("verify_certificate",
        [](const MomentSpec& spec, const PiecewiseQuadratic& pw,
           const std::array<double, 6>& z,
           const std::vector<std::array<double, 3>>& G,
           const std::vector<std::array<double, 3>>& H) {
          const CertificateCheck c = verify_certificate(spec, pw, z, G, H);
          py::dict d;
          d["upper_bound"] = c.upper_bound;
          d["psd_ok"] = c.psd_ok;
          d["min_eigs"] = c.min_eigs;
          return d;
        });
  m.def("find_sos_witness",
        [](const MomentSpec& spec, const PiecewiseQuadratic& pw,
           const std::array<double, 6>& z) -> py::object {
          const auto w = find_sos_witness(spec, pw, z);
          if (!w) return py::none();
          py::dict d;
          d["G"] = w->G;
          d["H"] = w->H;
          d["min_eigs"] = w->min_eigs;
          return d;
        });
}
