#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "starkecho/analysis.hpp"
#include "starkecho/io.hpp"

namespace py = pybind11;
using namespace starkecho;

namespace {

Simulation make_sim(const PulseSequence& seq, const std::string& method, unsigned threads) {
  Simulation sim = Simulation::from(seq);
  sim.config.method = parse_method(method);
  sim.config.threads = threads;
  return sim;
}

py::dict traces_dict(const TraceSet& t) {
  const auto n = static_cast<py::ssize_t>(t.size());
  py::array_t<double> times(n);
  py::array_t<std::complex<double>> rho({n, py::ssize_t{3}, py::ssize_t{3}});
  auto tv = times.mutable_unchecked<1>();
  auto rv = rho.mutable_unchecked<3>();
  for (py::ssize_t k = 0; k < n; ++k) {
    tv(k) = t.times[k];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) rv(k, i, j) = t.macro[k](i, j);
  }
  py::dict d;
  d["times"] = times;
  d["rho"] = rho;
  if (!t.per_group.empty()) {
    py::array_t<std::complex<double>> groups({static_cast<py::ssize_t>(t.per_group.size()), n});
    auto gv = groups.mutable_unchecked<2>();
    for (std::size_t j = 0; j < t.per_group.size(); ++j)
      for (py::ssize_t k = 0; k < n; ++k) gv(j, k) = t.per_group[j][k];
    d["rho12_groups"] = groups;
    d["group_deltas_khz"] = t.group_deltas_khz;
    d["group_weights"] = t.group_weights;
  }
  return d;
}

py::dict echo_dict(const PredictedEcho& e) {
  py::dict d;
  d["label"] = e.label;
  d["nominal_time_us"] = e.nominal_time_us;
  d["effective_time_us"] = e.effective_time_us;
  d["coherence"] = e.coherence;
  d["quadrature"] = std::string(to_string(e.quadrature));
  d["character"] = std::string(to_string(e.character));
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Photon-echo simulator core";
  m.attr("__version__") = io::kToolVersion;

  py::enum_<Channel>(m, "Channel").value("probe", Channel::probe).value("control", Channel::control);

  py::class_<Pulse>(m, "Pulse")
      .def(py::init([](std::string name, Channel channel, double t_on, double duration, double rabi, double detune) {
             return Pulse{std::move(name), channel, t_on, duration, rabi, detune};
           }),
           py::arg("name"), py::arg("channel") = Channel::probe, py::arg("t_on_us") = 0.0,
           py::arg("duration_us") = 0.1, py::arg("rabi_mhz") = 0.0, py::arg("detune_mhz") = 0.0)
      .def_readwrite("name", &Pulse::name)
      .def_readwrite("channel", &Pulse::channel)
      .def_readwrite("t_on_us", &Pulse::t_on_us)
      .def_readwrite("duration_us", &Pulse::duration_us)
      .def_readwrite("rabi_mhz", &Pulse::rabi_mhz)
      .def_readwrite("detune_mhz", &Pulse::detune_mhz)
      .def("__repr__", [](const Pulse& p) {
        return "<Pulse " + p.name + " at " + io::format_number(p.t_on_us) + " us>";
      });

  py::class_<PulseSequence>(m, "Sequence")
      .def(py::init<>())
      .def_readwrite("pulses", &PulseSequence::pulses)
      .def_readwrite("t_end_us", &PulseSequence::t_end_us)
      .def_readwrite("dt_us", &PulseSequence::dt_us)
      .def("validate", [](const PulseSequence& s) {
        std::vector<std::string> out;
        for (const auto& v : validate(s)) out.push_back(std::string(to_string(v.code)) + ": " + v.message);
        return out;
      })
      .def("__str__", &serialize_sequence);

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<SequenceError>(m, "SequenceError", PyExc_ValueError);
  py::register_exception<OracleError>(m, "OracleError", PyExc_ValueError);

  m.def("preset_names", &preset_names);
  m.def("preset", [](const std::string& name) { return preset(name); }, py::arg("name"));
  m.def("parse_sequence", [](const std::string& text) { return parse_sequence(text); }, py::arg("text"));
  m.def("serialize_sequence", &serialize_sequence, py::arg("sequence"));
  m.def("pulse_area", &pulse_area, py::arg("pulse"));
  m.def("stark_phase", &stark_phase, py::arg("pulse"));

  m.def(
      "build_ensemble",
      [](double fwhm_khz, double spacing_khz, int group_count) {
        const Ensemble e = build_ensemble({fwhm_khz, spacing_khz, group_count});
        std::vector<double> deltas, weights;
        for (const auto& g : e.groups) {
          deltas.push_back(g.delta_khz);
          weights.push_back(g.weight);
        }
        py::dict d;
        d["delta_khz"] = deltas;
        d["weight"] = weights;
        d["raw_coverage"] = e.raw_coverage;
        d["sigma_khz"] = e.sigma_khz();
        return d;
      },
      py::arg("fwhm_khz") = 850.0, py::arg("spacing_khz") = 10.0, py::arg("group_count") = 201);

  m.def(
      "run",
      [](const PulseSequence& seq, const std::string& method, bool per_group, unsigned threads) {
        const Simulation sim = make_sim(seq, method, threads);
        TraceSet t;
        {
          py::gil_scoped_release release;
          t = sim.run(seq, per_group);
        }
        return traces_dict(t);
      },
      py::arg("sequence"), py::arg("method") = "exact", py::arg("per_group") = false, py::arg("threads") = 0,
      "Propagate the ensemble; returns times and the macroscopic 3x3 density matrices.");

  m.def(
      "oracle",
      [](const PulseSequence& seq) {
        py::list out;
        for (const auto& e : oracle_predict(seq).echoes) out.append(echo_dict(e));
        return out;
      },
      py::arg("sequence"));

  m.def(
      "analyze",
      [](const PulseSequence& seq, unsigned threads) {
        const Simulation sim = make_sim(seq, "exact", threads);
        EchoAnalysis a;
        {
          py::gil_scoped_release release;
          a = analyze(seq, sim);
        }
        py::list echoes;
        for (const auto& c : a.report.checks) {
          py::dict d = echo_dict(c.predicted);
          d["simulated_time_us"] = c.simulated.echo_time_us;
          d["simulated_character"] = std::string(to_string(c.simulated.character));
          d["amplitude"] = c.simulated.amplitude;
          d["passed"] = c.passed();
          echoes.append(d);
        }
        py::dict d;
        d["echoes"] = echoes;
        d["notes"] = a.report.notes;
        d["passed"] = a.report.passed();
        return d;
      },
      py::arg("sequence"), py::arg("threads") = 0, "Simulate, predict and compare the echoes.");

  m.def(
      "efficiency_sweep",
      [](const PulseSequence& seq, const std::vector<double>& phis, unsigned threads) {
        const Simulation sim = make_sim(seq, "exact", threads);
        SweepResult r;
        {
          py::gil_scoped_release release;
          r = efficiency_sweep(seq, phis, sim);
        }
        std::vector<double> amp, hom, signed_amp;
        for (const auto& row : r.rows) {
          amp.push_back(row.amplitude);
          hom.push_back(row.amplitude_homogeneous);
          signed_amp.push_back(row.signed_amplitude);
        }
        py::dict d;
        d["phi"] = phis;
        d["amplitude"] = amp;
        d["signed_amplitude"] = signed_amp;
        d["amplitude_homogeneous"] = hom;
        d["silence_threshold"] = r.silence_threshold;
        d["bare_amplitude"] = r.bare_amplitude;
        d["bare_amplitude_homogeneous"] = r.bare_amplitude_homogeneous;
        return d;
      },
      py::arg("sequence"), py::arg("phis"), py::arg("threads") = 0);
}
