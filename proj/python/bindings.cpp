#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "magtrap/classical.hpp"
#include "magtrap/observables.hpp"
#include "magtrap/quantum.hpp"
#include "magtrap/scenario.hpp"

namespace py = pybind11;
using namespace magtrap;

namespace {

std::shared_ptr<const RadialField> make_field(const FieldParams& p, const std::string& kind) {
  if (kind == "linear") return make_linear_field(p);
  if (kind == "uniform") return make_uniform_field(p);
  throw std::invalid_argument("field kind must be 'linear' or 'uniform'");
}

py::array_t<double> as_array(const std::vector<Vec2>& v) {
  py::array_t<double> out({static_cast<py::ssize_t>(v.size()), py::ssize_t{2}});
  auto m = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < v.size(); ++i) {
    m(i, 0) = v[i].x();
    m(i, 1) = v[i].y();
  }
  return out;
}

py::dict trajectory_dict(const TrajectoryResult& r) {
  const auto n = static_cast<py::ssize_t>(r.samples.size());
  py::array_t<double> t(n), x(n), y(n), vx(n), vy(n);
  for (py::ssize_t i = 0; i < n; ++i) {
    const auto& s = r.samples[static_cast<std::size_t>(i)];
    t.mutable_at(i) = s.t;
    x.mutable_at(i) = s.x;
    y.mutable_at(i) = s.y;
    vx.mutable_at(i) = s.vx;
    vy.mutable_at(i) = s.vy;
  }
  py::dict d;
  d["t"] = t;
  d["x"] = x;
  d["y"] = y;
  d["vx"] = vx;
  d["vy"] = vy;
  d["steps_taken"] = r.steps_taken;
  if (const auto* e = std::get_if<Escaped>(&r.outcome)) {
    d["outcome"] = "escaped";
    d["exit_angle"] = e->exit_angle;
  } else {
    d["outcome"] = "trapped";
    d["max_radius"] = std::get<Trapped>(r.outcome).max_radius;
  }
  return d;
}

py::dict series_dict(const ObservableSeries& s) {
  py::dict d;
  d["step"] = s.step;
  d["t"] = s.t;
  d["x"] = as_array(s.x_exp);
  d["p"] = as_array(s.p_exp);
  d["v"] = as_array(s.v_exp);
  d["speed"] = s.speed;
  d["energy"] = s.energy;
  d["norm"] = s.norm;
  d["prob_in_R"] = s.prob_in_R;
  d["f_lhs"] = as_array(s.f_lhs);
  d["f_ehrenfest"] = as_array(s.f_ehrenfest);
  d["f_classicalish"] = as_array(s.f_classicalish);
  d["endpoint"] = s.endpoint;
  return d;
}

}  // namespace

PYBIND11_MODULE(_magtrap, m) {
  m.doc() = "Charged-particle escape from a flux-free magnetic region";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

  py::class_<FieldParams>(m, "FieldParams")
      .def(py::init([](double B0, double R, double q, double mass) {
             FieldParams p{B0, R, q, mass};
             p.validate();
             return p;
           }),
           py::arg("B0") = 1.0, py::arg("R") = 1.0, py::arg("q") = 1.0, py::arg("m") = 1.0)
      .def_readwrite("B0", &FieldParams::B0)
      .def_readwrite("R", &FieldParams::R)
      .def_readwrite("q", &FieldParams::q)
      .def_readwrite("m", &FieldParams::m)
      .def("__repr__", [](const FieldParams& p) {
        return "FieldParams(B0=" + format_double(p.B0) + ", R=" + format_double(p.R) +
               ", q=" + format_double(p.q) + ", m=" + format_double(p.m) + ")";
      });

  m.def("eval_B", py::vectorize([](double s, FieldParams p) { return eval_B(p, s); }),
        py::arg("s"), py::arg("params") = FieldParams{});
  m.def("eval_A", py::vectorize([](double s, FieldParams p) { return eval_A(p, s); }),
        py::arg("s"), py::arg("params") = FieldParams{});
  m.def("flux_check", py::overload_cast<const FieldParams&, int>(&flux_check),
        py::arg("params") = FieldParams{}, py::arg("n_quad") = 1000);
  m.def("escape_speed", py::overload_cast<const FieldParams&>(&escape_speed),
        py::arg("params") = FieldParams{});
  m.def("bounding_radius", py::overload_cast<const FieldParams&, double>(&bounding_radius),
        py::arg("params"), py::arg("v0"));

  m.def(
      "integrate",
      [](double v0, double h, double t_max, const FieldParams& p, const std::string& kind,
         std::size_t stride) {
        const auto field = make_field(p, kind);
        TrajectoryResult r;
        {
          py::gil_scoped_release release;
          r = integrate(*field, v0, h, t_max, IntegrateOptions{stride});
        }
        return trajectory_dict(r);
      },
      py::arg("v0"), py::arg("h") = 1e-3, py::arg("t_max") = 200.0,
      py::arg("params") = FieldParams{}, py::arg("kind") = "linear", py::arg("stride") = 1);

  m.def(
      "initial_gaussian",
      [](int n, double L, double a_bar, double p_bar) {
        const Grid g(n, L);
        return ComplexVector(initial_gaussian(g, a_bar, p_bar).amps);
      },
      py::arg("N") = 200, py::arg("L") = 10.0, py::arg("a_bar") = 1.0, py::arg("p_bar") = 4.0);

  m.def(
      "expectations",
      [](const ComplexVector& psi, int n, double L, double radius) {
        const Grid g(n, L);
        if (psi.size() != static_cast<Eigen::Index>(g.size())) {
          throw std::invalid_argument("psi has the wrong length for an N x N grid");
        }
        const WaveState s{psi, 0};
        py::dict d;
        d["norm"] = total_probability(s, g);
        d["x"] = Vec2(expect_position(s, g));
        d["p"] = Vec2(expect_momentum(s, g));
        d["prob_in_R"] = prob_within_radius(s, g, radius);
        return d;
      },
      py::arg("psi"), py::arg("N") = 200, py::arg("L") = 10.0, py::arg("radius") = 2.0);

  m.def(
      "evolve",
      [](double alpha, std::size_t steps, int n, double L, double dt, double a_bar, double p_bar,
         double R_bar, double B0, const std::string& kind, std::size_t stride, bool keep_states) {
        SolverConfig c{dt, steps, alpha, a_bar, p_bar, R_bar, B0, stride};
        const Grid g(n, L);
        const auto field = make_field(FieldParams{B0, R_bar, 1.0, 1.0}, kind);
        std::optional<EvolveResult> r;
        std::optional<ObservableSeries> series;
        {
          py::gil_scoped_release release;
          r.emplace(evolve(c, g, *field));
          series.emplace(compute_series(r->states, r->hamiltonian, *field, dt, R_bar));
        }
        py::dict d;
        d["series"] = series_dict(*series);
        const bool escaped = first_exit_index(*series, R_bar) > 0;
        d["escaped"] = escaped;
        d["exit_angle"] = escaped ? py::cast(exit_angle_quantum(*series, R_bar)) : py::none();
        const ForceFit fit = force_fit(*series);
        d["force_fit"] = py::make_tuple(fit.rms_ehrenfest, fit.rms_classicalish);
        if (keep_states) {
          py::list states;
          for (const auto& st : r->states) states.append(py::cast(st.amps));
          d["states"] = states;
        }
        return d;
      },
      py::arg("alpha") = 5.0, py::arg("steps") = 60, py::arg("N") = 200, py::arg("L") = 10.0,
      py::arg("dt") = 0.01, py::arg("a_bar") = 1.0, py::arg("p_bar") = 4.0,
      py::arg("R_bar") = 2.0, py::arg("B0") = 1.0, py::arg("kind") = "linear",
      py::arg("stride") = 1, py::arg("keep_states") = false);

  py::class_<Scenario>(m, "Scenario")
      .def_property_readonly("text", &serialize_scenario)
      .def("__eq__", [](const Scenario& a, const Scenario& b) { return a == b; })
      .def("__repr__", [](const Scenario& s) { return "Scenario(\n" + serialize_scenario(s) + ")"; });

  m.def("parse_scenario", [](const std::string& text) { return parse_scenario(text); });
  m.def("load_scenario", &load_scenario);
  m.def("preset", [](const std::string& name) { return preset(name); });
  m.def("preset_names", &preset_names);
  m.def(
      "_run_json",
      [](const Scenario& s, std::optional<std::filesystem::path> out_dir,
         std::optional<std::size_t> stride) {
        nlohmann::json j;
        {
          py::gil_scoped_release release;
          j = run(s, RunOptions{std::move(out_dir), stride, true});
        }
        return j.dump();
      },
      py::arg("scenario"), py::arg("out_dir") = py::none(), py::arg("stride") = py::none());
}
