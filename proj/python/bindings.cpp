#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "lsc/encoder.hpp"
#include "lsc/errors.hpp"
#include "lsc/graph.hpp"
#include "lsc/io.hpp"
#include "lsc/penalties.hpp"
#include "lsc/rf_eval.hpp"
#include "lsc/simplex.hpp"
#include "lsc/trainer.hpp"

namespace py = pybind11;
using namespace lsc;

namespace {

PenaltyConfig make_penalty(const std::string& kind, double lambda, const std::optional<Matrix>& laplacian) {
    PenaltyConfig p;
    p.kind = parse_penalty_kind(kind);
    p.lambda = lambda;
    p.laplacian = laplacian;
    return p;
}

ReceptiveField field_from(const Matrix& image) {
    ReceptiveField rf;
    rf.image = from_matrix(image);
    rf.total_response = 1.0;
    return rf;
}

Matrix image_of(const Tensor& t) { return to_matrix(t); }

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Locality-regularized sparse coding core";

    py::register_exception<Error>(m, "LscError", PyExc_RuntimeError);

    m.def("project_simplex", &project_simplex, py::arg("x"));
    m.def("simplex_shift", &simplex_shift, py::arg("x"));
    m.def("quadratic_neuron", &quadratic_neuron, py::arg("y"), py::arg("atoms"));

    m.def(
        "momentum_schedule",
        [](int steps, const std::string& mode) {
            const auto s = momentum_schedule(steps, parse_momentum_mode(mode));
            return py::make_tuple(s.etas, s.gammas);
        },
        py::arg("steps"), py::arg("mode") = "aswritten", "Returns (etas, gammas).");
    m.def("spectral_norm_sq_inv", &spectral_norm_sq_inv, py::arg("atoms"));

    m.def(
        "wl_penalty", &wl_penalty, py::arg("stimuli"), py::arg("atoms"), py::arg("codes"), py::arg("lam"));
    m.def("lap_penalty", &lap_penalty, py::arg("codes"), py::arg("laplacian"), py::arg("lam"));
    m.def("wl_code_gradient", &wl_code_gradient, py::arg("y"), py::arg("atoms"), py::arg("x"), py::arg("lam"));
    m.def("wl_atom_gradient", &wl_atom_gradient, py::arg("stimuli"), py::arg("atoms"), py::arg("codes"),
          py::arg("lam"));
    m.def("lap_code_gradient", &lap_code_gradient, py::arg("atoms"), py::arg("stimuli"), py::arg("codes"),
          py::arg("laplacian"), py::arg("lam"));

    m.def(
        "encode",
        [](const Matrix& stimuli, const Matrix& atoms, const std::string& penalty, double lam, int steps,
           const std::string& momentum, std::optional<Matrix> laplacian, std::optional<double> step_size,
           int threads) {
            EncoderConfig cfg;
            cfg.steps = steps;
            cfg.penalty = make_penalty(penalty, lam, laplacian);
            cfg.momentum_mode = parse_momentum_mode(momentum);
            cfg.step_size_override = step_size;
            cfg.threads = threads;
            EncodeResult r;
            {
                py::gil_scoped_release release;
                r = encode(stimuli, atoms, cfg);
            }
            return py::make_tuple(r.codes, r.trace.objective_per_step);
        },
        py::arg("stimuli"), py::arg("atoms"), py::arg("penalty") = "wl", py::arg("lam") = 0.5,
        py::arg("steps") = 15, py::arg("momentum") = "aswritten", py::arg("laplacian") = py::none(),
        py::arg("step_size") = py::none(), py::arg("threads") = 1, "Returns (codes, objective_per_step).");

    m.def("init_dictionary", &init_dictionary, py::arg("d"), py::arg("m"), py::arg("seed"));
    m.def(
        "train",
        [](const Matrix& image, const std::string& penalty, double lam, int patch_side, int num_atoms, int steps,
           int epochs, int batches_per_epoch, int batch_size, double lr, int knn_k, std::uint64_t seed,
           bool standardize) {
            TrainConfig cfg;
            cfg.encoder.penalty = make_penalty(penalty, lam, std::nullopt);
            cfg.encoder.steps = steps;
            cfg.patch_side = patch_side;
            cfg.num_atoms = num_atoms;
            cfg.epochs = epochs;
            cfg.batches_per_epoch = batches_per_epoch;
            cfg.batch_size = batch_size;
            cfg.dict_learning_rate = lr;
            cfg.knn_k = knn_k;
            cfg.seed = seed;
            cfg.standardize = standardize;
            TrainedModel model;
            {
                py::gil_scoped_release release;
                model = train(from_matrix(image), cfg);
            }
            return py::make_tuple(model.dictionary.atoms, model.loss_history);
        },
        py::arg("image"), py::arg("penalty") = "wl", py::arg("lam") = 0.5, py::arg("patch_side") = 8,
        py::arg("num_atoms") = 64, py::arg("steps") = 15, py::arg("epochs") = 1, py::arg("batches_per_epoch") = 1,
        py::arg("batch_size") = 100, py::arg("lr") = 0.5, py::arg("knn_k") = 4, py::arg("seed") = 0,
        py::arg("standardize") = true, "Trains on one HxW image; returns (atoms, loss_history).");

    py::class_<GaborParams>(m, "GaborParams")
        .def(py::init<>())
        .def_readwrite("amplitude", &GaborParams::amplitude)
        .def_readwrite("u0", &GaborParams::u0)
        .def_readwrite("v0", &GaborParams::v0)
        .def_readwrite("theta", &GaborParams::theta)
        .def_readwrite("sigma_x", &GaborParams::sigma_x)
        .def_readwrite("sigma_y", &GaborParams::sigma_y)
        .def_readwrite("freq", &GaborParams::freq)
        .def_readwrite("phase", &GaborParams::phase)
        .def_readwrite("residual", &GaborParams::residual)
        .def_readwrite("converged", &GaborParams::converged)
        .def_readwrite("neuron_id", &GaborParams::neuron_id)
        .def("__repr__", [](const GaborParams& g) {
            return "GaborParams(theta=" + std::to_string(g.theta) + ", freq=" + std::to_string(g.freq) +
                   ", phase=" + std::to_string(g.phase) + ", residual=" + std::to_string(g.residual) +
                   ", converged=" + (g.converged ? "True" : "False") + ")";
        });

    m.def(
        "render_gabor", [](const GaborParams& p, int side) { return image_of(render_gabor(p, side)); },
        py::arg("params"), py::arg("side"));
    m.def(
        "gabor_fit", [](const Matrix& image) { return gabor_fit(field_from(image)); }, py::arg("image"),
        "Fits a Gabor to a square receptive-field image.");
    m.def("fold_phase", &fold_phase, py::arg("phase_rad"));
    m.def(
        "phase_histogram",
        [](const std::vector<GaborParams>& fits, int bins) {
            const auto h = phase_histogram(fits, bins);
            return py::make_tuple(h.bin_edges, h.counts, h.excluded);
        },
        py::arg("fits"), py::arg("bins") = 9, "Returns (bin_edges_deg, counts, excluded).");
    m.def(
        "symmetry_score",
        [](const std::vector<GaborParams>& fits, int bins) { return symmetry_score(phase_histogram(fits, bins)); },
        py::arg("fits"), py::arg("bins") = 9);
    m.def(
        "sta_receptive_fields",
        [](const std::function<Matrix(const Matrix&)>& respond, int patch_side, std::size_t samples,
           std::uint64_t seed) {
            StaOptions opts;
            opts.num_samples = samples;
            opts.seed = seed;
            std::vector<Matrix> images;
            for (const auto& rf : sta_receptive_fields(respond, patch_side, opts)) images.push_back(image_of(rf.image));
            return images;
        },
        py::arg("respond"), py::arg("patch_side"), py::arg("samples") = 100000, py::arg("seed") = 0);

    m.def("knn_adjacency", &knn_adjacency, py::arg("points"), py::arg("k") = 4);
    m.def(
        "laplacian", [](const Matrix& w) { return laplacian_from_adjacency(w).matrix; }, py::arg("adjacency"));
    m.def(
        "bipartite_laplacian", [](const Matrix& codes) { return bipartite_laplacian(codes).matrix; },
        py::arg("codes"));
    m.def(
        "eigh",
        [](const Matrix& sym) {
            const auto e = symmetric_eigendecomposition(sym);
            return py::make_tuple(e.values, e.vectors);
        },
        py::arg("matrix"), "Jacobi eigendecomposition; eigenvalues ascending.");
    m.def(
        "spectral_cluster",
        [](const Matrix& laplacian, int k, std::uint64_t seed) {
            return spectral_cluster(GraphLaplacian{laplacian}, k, seed).labels;
        },
        py::arg("laplacian"), py::arg("k"), py::arg("seed") = 0);

    m.def(
        "save_tensor", [](const Matrix& m2, const std::filesystem::path& p) { save_tensor(from_matrix(m2), p); },
        py::arg("matrix"), py::arg("path"), "Writes a 2D array as an SCT1 file.");
    m.def(
        "load_tensor",
        [](const std::filesystem::path& p) {
            const Tensor t = load_tensor(p);
            return py::make_tuple(t.dims(), std::vector<double>(t.data().begin(), t.data().end()));
        },
        py::arg("path"), "Returns (dims, flat row-major data).");
}
