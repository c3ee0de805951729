// Acceptance suite: one PASS/FAIL line per criterion, tolerances fixed below.
//
// Usage: lsc_acceptance [--workdir DIR] [--only N[,N...]]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lsc/cli.hpp"
#include "lsc/encoder.hpp"
#include "lsc/graph.hpp"
#include "lsc/io.hpp"
#include "lsc/penalties.hpp"
#include "lsc/rf_eval.hpp"
#include "lsc/simplex.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace lsc;
namespace o = lsc::oracle;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    double time_limit_s;  // 0 = untimed
    std::function<Outcome()> run;
};

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

fs::path g_workdir;

// -- 1 ----------------------------------------------------------------------

Outcome simplex_oracle() {
    CounterRng rng(derive_seed(2024, 1));
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto m = static_cast<Eigen::Index>(1 + rng.below(6));
        Vector x(m);
        for (Eigen::Index i = 0; i < m; ++i) x(i) = 2.0 * rng.normal();
        const Vector diff = project_simplex(x) - o::simplex_projection_by_enumeration(x);
        worst = std::max(worst, diff.cwiseAbs().maxCoeff());
    }
    return {worst < 1e-9, "max entry error " + fmt(worst)};
}

// -- 2 ----------------------------------------------------------------------

Matrix random_laplacian(Eigen::Index b, CounterRng& rng) {
    Matrix w = o::random_matrix(b, b, rng).cwiseAbs();
    w = (w + w.transpose()).eval();
    w.diagonal().setZero();
    return Matrix(w.rowwise().sum().asDiagonal()) - w;
}

Outcome gradient_suites() {
    CounterRng rng(derive_seed(2024, 2));
    double worst_wl = 0.0, worst_lap = 0.0, worst_atom = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const double lambda = 0.1 + rng.uniform();
        {
            const Matrix a = o::random_matrix(5, 7, rng);
            const Vector y = o::random_matrix(5, 1, rng).col(0);
            const Matrix x0 = o::random_matrix(7, 1, rng);
            auto f = [&](const Matrix& x) {
                double s = 0.5 * (y - a * x.col(0)).squaredNorm();
                for (int j = 0; j < 7; ++j) s += lambda * x(j, 0) * (y - a.col(j)).squaredNorm();
                return s;
            };
            worst_wl = std::max(worst_wl, o::relative_error(wl_code_gradient(y, a, x0.col(0), lambda),
                                                            o::finite_difference(f, x0)));
        }
        {
            const Matrix a = o::random_matrix(4, 6, rng);
            const Matrix y = o::random_matrix(4, 5, rng);
            const Matrix x0 = o::random_matrix(6, 5, rng);
            const Matrix g = random_laplacian(5, rng);
            auto f = [&](const Matrix& x) {
                return 0.5 * (y - a * x).squaredNorm() + lambda * (x * g * x.transpose()).trace();
            };
            worst_lap = std::max(worst_lap, o::relative_error(lap_code_gradient(a, y, x0, g, lambda),
                                                              o::finite_difference(f, x0)));
        }
        {
            const Matrix y = o::random_matrix(4, 6, rng);
            const Matrix a0 = o::random_matrix(4, 3, rng);
            Matrix x(3, 6);
            for (int i = 0; i < 6; ++i) x.col(i) = o::random_simplex(3, rng);
            auto f = [&](const Matrix& a) {
                double s = 0.5 * (y - a * x).squaredNorm();
                for (int i = 0; i < 6; ++i)
                    for (int j = 0; j < 3; ++j) s += lambda * x(j, i) * (y.col(i) - a.col(j)).squaredNorm();
                return s;
            };
            worst_atom = std::max(worst_atom, o::relative_error(wl_atom_gradient(y, a0, x, lambda),
                                                                o::finite_difference(f, a0)));
        }
    }
    const bool ok = worst_wl < 1e-6 && worst_lap < 1e-6 && worst_atom < 1e-6;
    return {ok, "max rel error wl_code " + fmt(worst_wl) + ", lap_code " + fmt(worst_lap) + ", wl_atom " +
                    fmt(worst_atom)};
}

// -- 3 ----------------------------------------------------------------------

Outcome momentum_exactness() {
    const auto s = momentum_schedule(15, MomentumMode::AsWritten);
    double worst = 0.0;
    auto track = [&](double got, double want) { worst = std::max(worst, std::abs(got - want)); };
    track(s.etas[0], 0.0);
    track(s.etas[1], 1.0);
    track(s.etas[2], (1.0 + std::sqrt(5.0)) / 2.0);
    track(s.gammas[0], -1.0);
    track(s.gammas[1], 0.0);
    for (std::size_t t = 0; t + 1 < s.etas.size(); ++t) {
        track(s.etas[t + 1], (1.0 + std::sqrt(1.0 + 4.0 * s.etas[t])) / 2.0);
        track(s.gammas[t], (s.etas[t] - 1.0) / s.etas[t + 1]);
    }
    return {worst <= 1e-15, "max deviation " + fmt(worst)};
}

// -- 4 ----------------------------------------------------------------------

Outcome encoder_descent() {
    CounterRng rng(derive_seed(2024, 4));
    double worst_rise = -std::numeric_limits<double>::infinity();
    double worst_simplex = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const Matrix a = o::random_matrix(16, 32, rng);
        const Matrix y = o::random_matrix(16, 8, rng);
        EncoderConfig cfg;
        cfg.steps = 15;
        cfg.momentum_mode = MomentumMode::None;
        cfg.penalty.kind = PenaltyKind::WeightedL1;
        cfg.penalty.lambda = 0.5;
        const auto r = encode(y, a, cfg);
        const auto& obj = r.trace.objective_per_step;
        // obj[0] is the infeasible zero start; descent is checked over the 15 iterates.
        for (std::size_t t = 2; t < obj.size(); ++t) worst_rise = std::max(worst_rise, obj[t] - obj[t - 1]);
        for (Eigen::Index j = 0; j < r.codes.cols(); ++j) {
            const Vector c = r.codes.col(j);
            worst_simplex = std::max({worst_simplex, std::abs(c.sum() - 1.0), std::max(0.0, -c.minCoeff())});
        }
    }
    return {worst_rise <= 1e-10 && worst_simplex <= 1e-12,
            "largest step increase " + fmt(worst_rise) + ", simplex violation " + fmt(worst_simplex)};
}

// -- 5 ----------------------------------------------------------------------

Outcome laplacian_invariants() {
    CounterRng rng(derive_seed(2024, 5));
    double worst_row = 0.0, min_eig = std::numeric_limits<double>::infinity();
    int multiplicity_ok = 0;
    std::set<int> component_counts;
    for (int trial = 0; trial < 100; ++trial) {
        const int b = 5 + static_cast<int>(rng.below(8));  // 5..12
        // Well-separated clusters of at least 5 points give several components.
        const int groups = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(b / 5)));
        Matrix pts(3, b);
        for (int i = 0; i < b; ++i) {
            const int g = i < groups * (b / groups) ? i / (b / groups) : groups - 1;
            for (int r = 0; r < 3; ++r) pts(r, i) = 1000.0 * g * (r == 0) + rng.normal();
        }
        const Matrix w = knn_adjacency(pts, 4);
        const Matrix g = laplacian_from_adjacency(w).matrix;
        worst_row = std::max(worst_row, g.rowwise().sum().cwiseAbs().maxCoeff());
        const auto eig = symmetric_eigendecomposition(g);
        min_eig = std::min(min_eig, eig.values.minCoeff());
        int comps = 0;
        o::connected_components(w, &comps);
        component_counts.insert(comps);
        const auto zeros = (eig.values.array().abs() < 1e-9).count();
        multiplicity_ok += zeros == comps;
    }
    std::string counts;
    for (int c : component_counts) counts += (counts.empty() ? "" : ",") + std::to_string(c);
    return {worst_row <= 1e-10 && min_eig >= -1e-9 && multiplicity_ok == 100,
            "row sum " + fmt(worst_row) + ", min eigenvalue " + fmt(min_eig) + ", multiplicity " +
                std::to_string(multiplicity_ok) + "/100 (component counts seen: " + counts + ")"};
}

// -- 6 ----------------------------------------------------------------------

Outcome spectral_exactness() {
    CounterRng rng(derive_seed(2024, 6));
    int exact = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int blocks = 2 + static_cast<int>(rng.below(2));  // 2..3
        std::vector<int> atoms_per, stim_per;
        int m = 0, n = 0;
        for (int c = 0; c < blocks; ++c) {
            atoms_per.push_back(1 + static_cast<int>(rng.below(2)));
            stim_per.push_back(1 + static_cast<int>(rng.below(2)));
            m += atoms_per.back();
            n += stim_per.back();
        }
        Matrix codes = Matrix::Zero(m, n);
        int a0 = 0, s0 = 0;
        for (int c = 0; c < blocks; ++c) {
            for (int s = 0; s < stim_per[static_cast<std::size_t>(c)]; ++s)
                codes.block(a0, s0 + s, atoms_per[static_cast<std::size_t>(c)], 1) =
                    o::random_simplex(atoms_per[static_cast<std::size_t>(c)], rng);
            a0 += atoms_per[static_cast<std::size_t>(c)];
            s0 += stim_per[static_cast<std::size_t>(c)];
        }
        const GraphLaplacian g = bipartite_laplacian(codes);
        Matrix w = -g.matrix;
        w.diagonal().setZero();
        int comps = 0;
        const auto truth = o::connected_components(w, &comps);
        const auto got = spectral_cluster(g, comps, static_cast<std::uint64_t>(trial));
        exact += o::same_partition(got.labels, truth);
    }
    return {exact == 100, std::to_string(exact) + "/100 exact"};
}

// -- 7 ----------------------------------------------------------------------

Outcome sta_oracle() {
    CounterRng rng(derive_seed(2024, 7));
    const Matrix a = o::unit_columns(o::random_matrix(64, 16, rng));
    auto respond = [&](const Matrix& y) { return Matrix((a.transpose() * y).cwiseMax(0.0)); };
    StaOptions opts;
    opts.num_samples = 100000;
    opts.seed = 7;
    const auto rfs = sta_receptive_fields(respond, 8, opts);
    double worst = 1.0;
    for (int j = 0; j < 16; ++j) {
        const auto& img = rfs[static_cast<std::size_t>(j)].image;
        const Eigen::Map<const Vector> v(img.data().data(), 64);
        worst = std::min(worst, v.dot(a.col(j)) / v.norm());
    }
    return {worst > 0.95, "min cosine " + fmt(worst)};
}

// -- 8 ----------------------------------------------------------------------

Outcome gabor_recovery() {
    CounterRng rng(derive_seed(2024, 8));
    int good = 0, wrong_converged = 0, missed = 0;
    for (int trial = 0; trial < 50; ++trial) {
        // Parameter grid: 5 orientations x 10 (frequency, phase, envelope) draws.
        GaborParams truth;
        truth.amplitude = 1.0;
        truth.theta = (trial % 5) * kPi / 5.0 + 0.2 * rng.uniform();
        truth.freq = 0.08 + 0.22 * rng.uniform();
        truth.phase = kPi - 2.0 * kPi * rng.uniform();
        truth.sigma_x = 2.0 + 2.0 * rng.uniform();
        truth.sigma_y = 2.0 + 2.0 * rng.uniform();
        truth.u0 = 7.5 + (rng.uniform() - 0.5);
        truth.v0 = 7.5 + (rng.uniform() - 0.5);
        ReceptiveField rf;
        rf.image = render_gabor(truth, 16);
        rf.total_response = 1.0;
        const GaborParams fit = gabor_fit(rf);

        double dtheta = std::fmod(std::abs(fit.theta - truth.theta), kPi);
        dtheta = std::min(dtheta, kPi - dtheta) * 180.0 / kPi;
        const bool accurate = dtheta < 5.0 && std::abs(fit.freq - truth.freq) / truth.freq < 0.1 &&
                              std::abs(fold_phase(fit.phase) - fold_phase(truth.phase)) < 10.0 &&
                              fit.residual < 1e-3;
        if (accurate && fit.converged) {
            ++good;
        } else if (fit.converged) {
            ++wrong_converged;
        } else {
            ++missed;
        }
    }
    return {good >= 48 && wrong_converged == 0,
            std::to_string(good) + "/50 recovered, " + std::to_string(missed) + " non-converged, " +
                std::to_string(wrong_converged) + " wrong-converged"};
}

// -- 9 / 10 -----------------------------------------------------------------

int cli(std::vector<std::string> args, std::string* captured = nullptr) {
    args.insert(args.begin(), "lsc");
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    if (captured) *captured = out.str();
    if (code != 0) std::cerr << "lsc " << args[1] << " failed: " << err.str();
    return code;
}

std::map<std::string, std::string> key_values(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

/// Whitened images are committed as 16-bit PGM covering +-8 sigma; decode
/// them back to unit-variance pixels once and reuse the float stack.
fs::path training_images() {
    const fs::path target = g_workdir / "white_images.sct";
    if (fs::exists(target)) return target;
    std::vector<fs::path> paths;
    for (const char* name : {"camera", "astronaut", "grass", "gravel", "brick", "moon"})
        paths.push_back(fs::path(LSC_TEST_DATA_DIR) / (std::string(name) + "_white.pgm"));
    Tensor stack = load_images(paths);
    for (double& v : stack.data()) v = v * 16.0 - 8.0;
    save_tensor(stack, target);
    return target;
}

struct PipelineRun {
    bool ok = false;
    std::map<std::string, std::string> summary;
    fs::path prefix;
};

PipelineRun pipeline(const std::string& penalty, const std::string& tag) {
    PipelineRun run;
    run.prefix = g_workdir / tag;
    const std::string prefix = run.prefix.string();
    if (cli({"train", "--data", training_images().string(), "--penalty", penalty, "--lambda", "0.5",
             "--patch-size", "8", "--num-atoms", "64", "--epochs", "20", "--batches-per-epoch", "10",
             "--batch-size", "100", "--lr", "0.5", "--no-standardize", "--seed", "7", "--out", prefix}) != 0)
        return run;
    std::string text;
    if (cli({"eval", "--model", prefix, "--source", "atoms", "--bins", "9", "--out", prefix}, &text) != 0)
        return run;
    if (cli({"render", "--tensor", prefix + ".sct", "--cols", "8", "--out", prefix + ".svg"}) != 0) return run;
    run.summary = key_values(text);
    run.ok = true;
    return run;
}

PipelineRun g_wl_run;

Outcome directional_reproduction() {
    g_wl_run = pipeline("wl", "wl_seed7");
    PipelineRun sc = pipeline("l1", "sc_seed7");
    if (!g_wl_run.ok || !sc.ok) return {false, "pipeline failed"};
    const double sym_wl = std::stod(g_wl_run.summary["symmetry_score"]);
    const double sym_sc = std::stod(sc.summary["symmetry_score"]);
    const double mass_wl = std::stod(g_wl_run.summary["mass_0_30"]);
    const double mass_sc = std::stod(sc.summary["mass_0_30"]);
    return {sym_wl > sym_sc && mass_wl > mass_sc,
            "symmetry WL " + fmt(sym_wl) + " vs SC " + fmt(sym_sc) + "; mass[0,30] WL " + fmt(mass_wl) +
                " vs SC " + fmt(mass_sc) + "; converged WL " + g_wl_run.summary["converged"] + "/64, SC " +
                sc.summary["converged"] + "/64"};
}

Outcome end_to_end_determinism() {
    if (!g_wl_run.ok) g_wl_run = pipeline("wl", "wl_seed7");
    const PipelineRun again = pipeline("wl", "wl_seed7_repeat");
    if (!g_wl_run.ok || !again.ok) return {false, "pipeline failed"};
    std::vector<std::string> differing;
    for (const char* ext : {".sct", ".gabor.csv", ".phases.csv", ".svg"}) {
        const std::string a = read_text_file(g_wl_run.prefix.string() + ext);
        const std::string b = read_text_file(again.prefix.string() + ext);
        if (a != b) differing.push_back(ext);
    }
    std::string detail = differing.empty() ? "dictionary, CSVs and SVG identical" : "differs:";
    for (const auto& d : differing) detail += " " + d;
    return {differing.empty(), detail};
}

} // namespace

int main(int argc, char** argv) {
    g_workdir = fs::temp_directory_path() / "lsc_acceptance";
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--workdir" && i + 1 < argc) {
            g_workdir = argv[++i];
        } else if (arg == "--only" && i + 1 < argc) {
            std::stringstream list(argv[++i]);
            for (std::string item; std::getline(list, item, ',');) only.insert(std::stoi(item));
        } else {
            std::cerr << "usage: lsc_acceptance [--workdir DIR] [--only N[,N...]]\n";
            return 2;
        }
    }
    fs::create_directories(g_workdir);

    const std::vector<Criterion> criteria = {
        {1, "simplex projection vs support enumeration", 5.0, simplex_oracle},
        {2, "gradients vs central differences", 10.0, gradient_suites},
        {3, "as-written momentum schedule", 0.0, momentum_exactness},
        {4, "encoder descent and feasibility", 0.0, encoder_descent},
        {5, "kNN Laplacian invariants", 0.0, laplacian_invariants},
        {6, "bipartite spectral clustering", 0.0, spectral_exactness},
        {7, "spike-triggered average recovery", 60.0, sta_oracle},
        {8, "Gabor parameter recovery", 0.0, gabor_recovery},
        {9, "WL vs SC phase symmetry (seed 7)", 900.0, directional_reproduction},
        {10, "end-to-end determinism", 0.0, end_to_end_determinism},
    };

    int failures = 0;
    for (const Criterion& c : criteria) {
        if (!only.empty() && !only.count(c.id)) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome result;
        try {
            result = c.run();
        } catch (const std::exception& e) {
            result = {false, std::string("exception: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        bool pass = result.pass;
        std::string timing = fmt(seconds, 3) + " s";
        if (c.time_limit_s > 0.0) {
            timing += " (limit " + fmt(c.time_limit_s, 3) + " s)";
            if (seconds >= c.time_limit_s) pass = false;
        }
        std::cout << (pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << ": " << result.detail << "; "
                  << timing << std::endl;
        failures += !pass;
    }
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << '\n';
    return failures == 0 ? 0 : 1;
}
