#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pseudoboost/distributions.hpp"
#include "pseudoboost/harness.hpp"
#include "pseudoboost/losses.hpp"
#include "pseudoboost/oracles.hpp"
#include "pseudoboost/rng.hpp"
#include "pseudoboost/selftrain.hpp"
#include "pseudoboost/special.hpp"
#include "pseudoboost/supervised.hpp"
#include "pseudoboost/vec.hpp"

namespace py = pybind11;
using namespace pseudoboost;

namespace {

std::vector<std::pair<std::vector<double>, int>> sample_py(const MixtureModel& model, int n,
                                                           std::uint64_t seed,
                                                           std::uint64_t stream) {
    RngStream rng(seed, stream);
    std::vector<LabeledSample> raw = sample(model, n, rng);
    std::vector<std::pair<std::vector<double>, int>> out;
    out.reserve(raw.size());
    for (LabeledSample& s : raw) out.emplace_back(std::move(s.x), s.y);
    return out;
}

py::dict report_to_dict(const VerificationReport& r) {
    py::dict d;
    d["name"] = r.name;
    d["pass"] = r.pass;
    d["vacuous"] = r.vacuous;
    d["estimate"] = r.estimate;
    d["bound"] = r.bound;
    d["stderr"] = r.stderr_;
    d["params"] = r.params;
    d["note"] = r.note;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "self-training with pseudolabels on two-component symmetric mixtures";

    py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
    py::register_exception<DegenerateInputError>(m, "DegenerateInputError", PyExc_ValueError);
    py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
    py::register_exception<CertificationError>(m, "CertificationError", PyExc_RuntimeError);
    py::register_exception<UnsupportedOracleError>(m, "UnsupportedOracleError",
                                                   PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<PipelineAbortError>(m, "PipelineAbortError", PyExc_RuntimeError);
    py::register_exception<DegeneratePseudolabelerError>(m, "DegeneratePseudolabelerError",
                                                         PyExc_RuntimeError);

    py::class_<RngStream>(m, "RngStream")
        .def(py::init<std::uint64_t, std::uint64_t>(), py::arg("seed"), py::arg("stream") = 0)
        .def("next_u64", &RngStream::next_u64)
        .def("next_double", &RngStream::next_double)
        .def("next_normal", &RngStream::next_normal);

    py::class_<NoiseSpec>(m, "NoiseSpec")
        .def_static("gaussian", &NoiseSpec::gaussian)
        .def_static("uniform_ball", &NoiseSpec::uniform_ball)
        .def_static("radial_gamma", &NoiseSpec::radial_gamma)
        .def_static("parse", &NoiseSpec::parse, py::arg("name"))
        .def_property_readonly("name", [](const NoiseSpec& s) { return std::string(s.name()); });

    py::class_<LossSpec>(m, "LossSpec")
        .def_static("exponential", &LossSpec::exponential)
        .def_static("logistic", &LossSpec::logistic)
        .def_static("parse", &LossSpec::parse, py::arg("name"))
        .def("loss", &LossSpec::loss, py::arg("z"))
        .def("dloss", &LossSpec::dloss, py::arg("z"))
        .def_property_readonly("c_ell", &LossSpec::c_ell)
        .def_property_readonly("name", [](const LossSpec& s) { return std::string(s.name()); });

    py::class_<DistParams>(m, "DistParams")
        .def_readonly("K", &DistParams::K)
        .def_readonly("U", &DistParams::U)
        .def_readonly("U_prime", &DistParams::U_prime)
        .def_readonly("R", &DistParams::R);

    py::class_<MixtureModel>(m, "MixtureModel")
        .def(py::init<int, Vector, NoiseSpec>(), py::arg("dim"), py::arg("mu"), py::arg("noise"))
        .def_static("axis_aligned", &MixtureModel::axis_aligned, py::arg("dim"),
                    py::arg("mu_norm"), py::arg("noise"))
        .def_readonly("d", &MixtureModel::d)
        .def_readonly("mu", &MixtureModel::mu)
        .def("mu_norm", &MixtureModel::mu_norm)
        .def("mu_bar", &MixtureModel::mu_bar);

    m.def("certify_params", &certify_params, py::arg("noise"), py::arg("dim"),
          py::arg("R") = 1.0);
    m.def("sample", &sample_py, py::arg("model"), py::arg("n"), py::arg("seed"),
          py::arg("stream") = 0, "draw n labeled samples as (x, y) pairs");
    m.def("normal_cdf", &normal_cdf, py::arg("x"));

    py::class_<SelfTrainConfig>(m, "SelfTrainConfig")
        .def(py::init<>())
        .def_readwrite("eta", &SelfTrainConfig::eta)
        .def_readwrite("sigma", &SelfTrainConfig::sigma)
        .def_readwrite("batch_size", &SelfTrainConfig::batch_size)
        .def_readwrite("iterations", &SelfTrainConfig::iterations)
        .def_readwrite("loss", &SelfTrainConfig::loss)
        .def_readwrite("seed", &SelfTrainConfig::seed)
        .def_readwrite("stream", &SelfTrainConfig::stream)
        .def_readwrite("err_mc_samples", &SelfTrainConfig::err_mc_samples);

    py::class_<IterateRecord>(m, "IterateRecord")
        .def_readonly("t", &IterateRecord::t)
        .def_readonly("theta", &IterateRecord::theta)
        .def_readonly("delta_sq", &IterateRecord::delta_sq)
        .def_readonly("err", &IterateRecord::err)
        .def_readonly("grad_norm", &IterateRecord::grad_norm)
        .def_readonly("alignment", &IterateRecord::alignment)
        .def_property_readonly("err_method", [](const IterateRecord& r) {
            return std::string(err_method_name(r.err_method));
        });

    py::class_<TrainTrace>(m, "TrainTrace")
        .def_readonly("records", &TrainTrace::records)
        .def_readonly("final_beta", &TrainTrace::final_beta)
        .def_readonly("final_err", &TrainTrace::final_err)
        .def_readonly("err_mu_bar", &TrainTrace::err_mu_bar)
        .def_property_readonly("err_method", [](const TrainTrace& t) {
            return std::string(err_method_name(t.err_method));
        });

    m.def(
        "pseudo_gradient",
        [](const Vector& beta, const std::vector<Vector>& batch, double sigma,
           const LossSpec& loss) { return pseudo_gradient(beta, batch, sigma, loss); },
        py::arg("beta"), py::arg("batch"), py::arg("sigma"), py::arg("loss"));
    m.def(
        "selftrain_run",
        [](const MixtureModel& model, const Vector& beta0, const SelfTrainConfig& cfg) {
            return run(model, beta0, cfg);
        },
        py::arg("model"), py::arg("beta0"), py::arg("config"),
        "weight-normalized self-training from the given unit direction");
    m.def("theorem_schedule", &theorem_schedule, py::arg("model"), py::arg("params"),
          py::arg("loss"), py::arg("eps"), py::arg("delta"), py::arg("batch_constant") = 2.0);

    py::class_<SupervisedConfig>(m, "SupervisedConfig")
        .def(py::init<>())
        .def_readwrite("eta", &SupervisedConfig::eta)
        .def_readwrite("iterations", &SupervisedConfig::iterations)
        .def_readwrite("runs", &SupervisedConfig::runs)
        .def_readwrite("validation_size", &SupervisedConfig::validation_size)
        .def_readwrite("seed", &SupervisedConfig::seed)
        .def_readwrite("stream", &SupervisedConfig::stream);

    py::class_<PseudolabelerResult>(m, "PseudolabelerResult")
        .def_readonly("beta_pl", &PseudolabelerResult::beta_pl)
        .def_readonly("selected_run", &PseudolabelerResult::selected_run)
        .def_readonly("selected_iter", &PseudolabelerResult::selected_iter)
        .def_readonly("validation_err", &PseudolabelerResult::validation_err)
        .def_readonly("all_iterates_kept", &PseudolabelerResult::all_iterates_kept)
        .def_readonly("labeled_count", &PseudolabelerResult::labeled_count);

    m.def(
        "supervised_run",
        [](const MixtureModel& model, const SupervisedConfig& cfg) {
            return run_supervised(model, cfg);
        },
        py::arg("model"), py::arg("config"),
        "online logistic SGD with validation-based iterate selection");
    m.def("theorem2_schedule", &theorem2_schedule, py::arg("model"), py::arg("c_err"),
          py::arg("delta"), py::arg("validation_size") = 200);

    m.def(
        "exact_gaussian_err",
        [](const Vector& beta, const MixtureModel& model) {
            const ErrEstimate e = exact_gaussian_err(beta, model);
            return e.value;
        },
        py::arg("beta"), py::arg("model"));
    m.def("exact_gaussian_err_at_angle", &exact_gaussian_err_at_angle, py::arg("mu_norm"),
          py::arg("theta"));
    m.def(
        "mc_err",
        [](const Vector& beta, const MixtureModel& model, long n, std::uint64_t seed,
           std::uint64_t stream) {
            RngStream rng(seed, stream);
            const ErrEstimate e = mc_err(beta, model, n, rng);
            return py::make_tuple(e.value, e.stderr_);
        },
        py::arg("beta"), py::arg("model"), py::arg("n"), py::arg("seed"), py::arg("stream") = 0);
    m.def("c_err_threshold", &c_err_threshold, py::arg("params"), py::arg("loss"));
    m.def("surrogate_loss_quadrature", &surrogate_loss_quadrature, py::arg("model"),
          py::arg("loss"));

    py::class_<RecursionParams>(m, "RecursionParams")
        .def(py::init<>())
        .def_readwrite("c_g", &RecursionParams::c_g)
        .def_readwrite("c_d", &RecursionParams::c_d)
        .def_readwrite("sigma", &RecursionParams::sigma)
        .def_readwrite("eps", &RecursionParams::eps)
        .def_readwrite("delta0_sq", &RecursionParams::delta0_sq);

    m.def(
        "recursion_simulate",
        [](const RecursionParams& p) {
            const RecursionResult r = recursion_simulate(p);
            return py::make_tuple(r.t_star, r.delta_final_sq);
        },
        py::arg("params"), "returns (t_star, final squared chord distance)");

    m.def(
        "bayes_optimality_check",
        [](const MixtureModel& model, int n_directions, long n_mc, std::uint64_t seed) {
            RngStream rng(seed, 0);
            return report_to_dict(bayes_optimality_check(model, n_directions, n_mc, rng));
        },
        py::arg("model"), py::arg("n_directions"), py::arg("n_mc"), py::arg("seed"));

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::vector<const char*> argv;
            argv.reserve(args.size() + 1);
            argv.push_back("pseudoboost");
            for (const std::string& a : args) argv.push_back(a.c_str());
            return run_cli(static_cast<int>(argv.size()), argv.data());
        },
        py::arg("args"), "invoke the command-line interface in-process");

#ifdef VERSION_INFO
    m.attr("__version__") = VERSION_INFO;
#else
    m.attr("__version__") = "dev";
#endif
}
