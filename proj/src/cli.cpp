#include "lsc/cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "lsc/encoder.hpp"
#include "lsc/errors.hpp"
#include "lsc/format.hpp"
#include "lsc/graph.hpp"
#include "lsc/io.hpp"
#include "lsc/manifest.hpp"
#include "lsc/render.hpp"
#include "lsc/rf_eval.hpp"
#include "lsc/trainer.hpp"

namespace lsc {
namespace {

namespace fs = std::filesystem;

/// Bad flag value detected after parsing.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<fs::path> split_paths(const std::string& list) {
    std::vector<fs::path> paths;
    std::stringstream in(list);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) paths.emplace_back(item);
    }
    return paths;
}

std::string joined(const std::vector<std::string>& args) {
    std::string s;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (i) s += ' ';
        s += args[i];
    }
    return s;
}

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// --------------------------------------------------------------------------

struct TrainArgs {
    std::string data;
    std::string penalty = "wl";
    double lambda = 0.5;
    int patch_size = 8;
    int num_atoms = 64;
    int steps = 15;
    std::string momentum = "aswritten";
    int epochs = 1;
    int batches_per_epoch = 1;
    int batch_size = 100;
    int knn_k = 4;
    double lr = 0.5;
    std::uint64_t seed = 0;
    std::optional<double> step_size;
    bool no_standardize = false;
    int threads = 1;
    std::string out;
};

int cmd_train(const TrainArgs& a, const std::string& command_line, std::ostream& out) {
    Stopwatch clock;
    TrainConfig cfg;
    cfg.num_atoms = a.num_atoms;
    cfg.patch_side = a.patch_size;
    cfg.encoder.steps = a.steps;
    cfg.encoder.penalty.kind = parse_penalty_kind(a.penalty);
    cfg.encoder.penalty.lambda = a.lambda;
    cfg.encoder.momentum_mode = parse_momentum_mode(a.momentum);
    cfg.encoder.step_size_override = a.step_size;
    cfg.encoder.threads = a.threads;
    cfg.epochs = a.epochs;
    cfg.batches_per_epoch = a.batches_per_epoch;
    cfg.batch_size = a.batch_size;
    cfg.dict_learning_rate = a.lr;
    cfg.knn_k = a.knn_k;
    cfg.seed = a.seed;
    cfg.standardize = !a.no_standardize;
    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        throw UsageError(e.what());
    }

    const auto sources = split_paths(a.data);
    const Tensor images = load_images(sources);
    const TrainedModel model = train(images, cfg);
    save_model(model, a.out);

    std::ostringstream loss;
    loss << "batch,loss\n";
    for (std::size_t i = 0; i < model.loss_history.size(); ++i) {
        loss << i << ',' << fmt_double(model.loss_history[i], 17) << '\n';
    }
    write_text_file(a.out + ".loss.csv", loss.str());

    const std::size_t total = model.loss_history.size();
    const std::size_t cadence = std::max<std::size_t>(1, total / 10);
    for (std::size_t i = 0; i < total; ++i) {
        if (i % cadence == 0 || i + 1 == total) {
            out << "batch " << i << " loss " << fmt_double(model.loss_history[i], 8) << '\n';
        }
    }
    out << "reinitialized atoms: " << model.reinitialized.size() << '\n';

    RunManifest manifest;
    manifest.command_line = command_line;
    manifest.config = config_to_map(cfg);
    manifest.config["threads"] = std::to_string(a.threads);
    for (const auto& p : sources) manifest.add_input(p);
    manifest.outputs = {a.out + ".sct", a.out + ".meta", a.out + ".loss.csv", a.out + ".manifest.txt"};
    manifest.wall_clock_seconds = clock.seconds();
    write_text_file(a.out + ".manifest.txt", manifest_text(manifest));
    return kExitOk;
}

// --------------------------------------------------------------------------

struct EvalArgs {
    std::string model;
    std::size_t samples = 100000;
    std::string source = "sta";
    int bins = 9;
    std::uint64_t seed = 0;
    int threads = 1;
    std::string out;
};

ResponseFn encoder_response(const TrainedModel& model, int threads) {
    EncoderConfig enc = model.config.encoder;
    enc.threads = threads;
    const Matrix atoms = model.dictionary.atoms;
    const int knn_k = model.config.knn_k;
    const Eigen::Index batch = model.config.batch_size;
    return [enc, atoms, knn_k, batch](const Matrix& stimuli) -> Matrix {
        if (enc.penalty.kind != PenaltyKind::Laplacian) return encode(stimuli, atoms, enc).codes;
        // Laplacian codes couple a batch; encode training-sized blocks.
        Matrix codes(atoms.cols(), stimuli.cols());
        for (Eigen::Index start = 0; start < stimuli.cols(); start += batch) {
            const Eigen::Index count = std::min(batch, stimuli.cols() - start);
            const Matrix block = stimuli.middleCols(start, count);
            EncoderConfig local = enc;
            local.penalty.laplacian = count > 1
                ? laplacian_from_adjacency(knn_adjacency(block, std::min<int>(knn_k, static_cast<int>(count) - 1))).matrix
                : Matrix::Zero(1, 1);
            codes.middleCols(start, count) = encode(block, atoms, local).codes;
        }
        return codes;
    };
}

int cmd_eval(const EvalArgs& a, const std::string& command_line, std::ostream& out) {
    Stopwatch clock;
    const TrainedModel model = load_model(a.model);
    const int side = model.config.patch_side;

    std::vector<ReceptiveField> fields;
    if (a.source == "atoms") {
        fields = atom_receptive_fields(model.dictionary.atoms, side);
    } else {
        StaOptions sta;
        sta.num_samples = a.samples;
        sta.seed = a.seed;
        if (model.config.encoder.penalty.kind == PenaltyKind::Laplacian) {
            sta.chunk = static_cast<std::size_t>(model.config.batch_size) * 40;
        }
        fields = sta_receptive_fields(encoder_response(model, a.threads), side, sta);
    }

    std::vector<GaborParams> fits;
    std::size_t dead = 0;
    for (const ReceptiveField& rf : fields) {
        if (rf.dead()) {
            ++dead;
            GaborParams g;
            g.neuron_id = rf.neuron_id;
            fits.push_back(g);
            continue;
        }
        fits.push_back(gabor_fit(rf));
    }
    write_text_file(a.out + ".gabor.csv", gabor_csv(fits));

    std::size_t converged = 0;
    double nx_sum = 0.0, ny_sum = 0.0;
    for (const GaborParams& g : fits) {
        if (!g.converged) continue;
        ++converged;
        const auto [nx, ny] = shape_metrics(g);
        nx_sum += nx;
        ny_sum += ny;
    }
    const PhaseHistogram hist = phase_histogram(fits, a.bins);
    write_text_file(a.out + ".phases.csv", histogram_csv(hist));

    std::ostringstream summary;
    summary << "source=" << a.source << '\n'
            << "neurons=" << fits.size() << '\n'
            << "dead=" << dead << '\n'
            << "converged=" << converged << '\n'
            << "non_converged=" << fits.size() - converged - dead << '\n'
            << "bins=" << a.bins << '\n'
            << "symmetry_score=" << fmt_double(symmetry_score(hist)) << '\n'
            << "mass_0_30=" << fmt_double(mass_fraction(hist, 0.0, 30.0)) << '\n'
            << "mean_n_x=" << fmt_double(nx_sum / static_cast<double>(converged)) << '\n'
            << "mean_n_y=" << fmt_double(ny_sum / static_cast<double>(converged)) << '\n';
    write_text_file(a.out + ".summary.txt", summary.str());
    out << summary.str();

    RunManifest manifest;
    manifest.command_line = command_line;
    manifest.config = {{"source", a.source}, {"samples", std::to_string(a.samples)},
                       {"bins", std::to_string(a.bins)}, {"seed", std::to_string(a.seed)}};
    manifest.add_input(a.model + ".sct");
    manifest.add_input(a.model + ".meta");
    manifest.outputs = {a.out + ".gabor.csv", a.out + ".phases.csv", a.out + ".summary.txt"};
    manifest.wall_clock_seconds = clock.seconds();
    write_text_file(a.out + ".manifest.txt", manifest_text(manifest));
    return kExitOk;
}

// --------------------------------------------------------------------------

struct ClusterArgs {
    std::string codes;
    int k = 2;
    std::string mode = "bipartite";
    int knn_k = 4;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_cluster(const ClusterArgs& a, const std::string& command_line, std::ostream& out) {
    Stopwatch clock;
    const Matrix data = to_matrix(load_tensor(a.codes));
    GraphLaplacian laplacian;
    Eigen::Index atoms = 0;
    if (a.mode == "bipartite") {
        laplacian = bipartite_laplacian(data);
        atoms = data.rows();
    } else {
        if (a.knn_k < 1 || a.knn_k >= data.cols()) {
            throw UsageError("--knn-k must be in [1, " + std::to_string(data.cols() - 1) + "]");
        }
        laplacian = laplacian_from_adjacency(knn_adjacency(data, a.knn_k));
    }
    if (a.k < 1 || a.k > laplacian.num_vertices()) {
        throw UsageError("--k must be in [1, " + std::to_string(laplacian.num_vertices()) + "]");
    }
    const ClusterAssignment labels = spectral_cluster(laplacian, a.k, a.seed);
    write_text_file(a.out, cluster_csv(labels, atoms));
    out << "clustered " << labels.labels.size() << " vertices into " << labels.k << " groups\n";

    RunManifest manifest;
    manifest.command_line = command_line;
    manifest.config = {{"mode", a.mode}, {"k", std::to_string(a.k)}, {"laplacian", "unnormalized"},
                       {"seed", std::to_string(a.seed)}};
    if (a.mode == "stimuli") manifest.config["knn_k"] = std::to_string(a.knn_k);
    manifest.add_input(a.codes);
    manifest.outputs = {a.out};
    manifest.wall_clock_seconds = clock.seconds();
    write_text_file(a.out + ".manifest.txt", manifest_text(manifest));
    return kExitOk;
}

// --------------------------------------------------------------------------

struct RenderArgs {
    std::string tensor;
    int cols = 8;
    int cell = 8;
    std::string out;
};

int cmd_render(const RenderArgs& a, std::ostream& out) {
    const Tensor t = load_tensor(a.tensor);
    if (t.rank() != 2) throw UsageError("render needs a 2D tensor, got " + shape_string(t.dims()));
    const Matrix filters = to_matrix(t);
    const auto side = static_cast<Eigen::Index>(std::lround(std::sqrt(static_cast<double>(filters.rows()))));
    if (side * side != filters.rows()) {
        throw UsageError("tensor rows " + std::to_string(filters.rows()) + " are not a square patch size");
    }
    write_text_file(a.out, render_filter_grid_svg(filters, a.cols, a.cell));
    out << "rendered " << filters.cols() << " filters to " << a.out << '\n';
    return kExitOk;
}

int cmd_verify(const std::string& path, std::ostream& out) {
    const RunManifest manifest = parse_manifest(read_text_file(path));
    const auto bad = verify_manifest_inputs(manifest);
    for (const auto& p : bad) out << "mismatch " << p << '\n';
    out << (bad.empty() ? "verified " : "failed ") << manifest.inputs.size() << " inputs\n";
    return bad.empty() ? kExitOk : kExitFailure;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Locality-regularized sparse coding toolkit", "lsc"};
    app.require_subcommand(1);

    TrainArgs train_args;
    auto* train = app.add_subcommand("train", "Learn a dictionary from image patches");
    train->add_option("--data", train_args.data, "PGM/SCT image source(s), comma separated")->required();
    train->add_option("--penalty", train_args.penalty)->check(CLI::IsMember({"l1", "wl", "lap"}));
    train->add_option("--lambda", train_args.lambda)->check(CLI::NonNegativeNumber);
    train->add_option("--patch-size", train_args.patch_size)->check(CLI::Range(2, 1024));
    train->add_option("--num-atoms", train_args.num_atoms)->check(CLI::PositiveNumber);
    train->add_option("--steps", train_args.steps)->check(CLI::PositiveNumber);
    train->add_option("--momentum", train_args.momentum)->check(CLI::IsMember({"aswritten", "fista", "none"}));
    train->add_option("--epochs", train_args.epochs)->check(CLI::NonNegativeNumber);
    train->add_option("--batches-per-epoch", train_args.batches_per_epoch)->check(CLI::PositiveNumber);
    train->add_option("--batch-size", train_args.batch_size)->check(CLI::PositiveNumber);
    train->add_option("--knn-k", train_args.knn_k)->check(CLI::PositiveNumber);
    train->add_option("--lr", train_args.lr)->check(CLI::PositiveNumber);
    train->add_option("--seed", train_args.seed);
    train->add_option("--step-size", train_args.step_size, "Fixed encoder step size")->check(CLI::PositiveNumber);
    train->add_flag("--no-standardize", train_args.no_standardize);
    train->add_option("--threads", train_args.threads)->check(CLI::PositiveNumber);
    train->add_option("--out", train_args.out, "Output prefix")->required();

    EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "Estimate receptive fields and fit Gabors");
    eval->add_option("--model", eval_args.model, "Model prefix")->required();
    eval->add_option("--samples", eval_args.samples)->check(CLI::PositiveNumber);
    eval->add_option("--source", eval_args.source)->check(CLI::IsMember({"sta", "atoms"}));
    eval->add_option("--bins", eval_args.bins)->check(CLI::Range(2, 3600));
    eval->add_option("--seed", eval_args.seed);
    eval->add_option("--threads", eval_args.threads)->check(CLI::PositiveNumber);
    eval->add_option("--out", eval_args.out, "Output prefix")->required();

    ClusterArgs cluster_args;
    auto* cluster = app.add_subcommand("cluster", "Spectral clustering of codes or stimuli");
    cluster->add_option("--codes", cluster_args.codes, "SCT tensor")->required();
    cluster->add_option("--k", cluster_args.k)->required();
    cluster->add_option("--mode", cluster_args.mode)->check(CLI::IsMember({"bipartite", "stimuli"}));
    cluster->add_option("--knn-k", cluster_args.knn_k);
    cluster->add_option("--seed", cluster_args.seed);
    cluster->add_option("--out", cluster_args.out, "Labels CSV")->required();

    RenderArgs render_args;
    auto* render = app.add_subcommand("render", "Draw tensor columns as an SVG filter grid");
    render->add_option("--tensor", render_args.tensor)->required();
    render->add_option("--cols", render_args.cols)->check(CLI::PositiveNumber);
    render->add_option("--cell", render_args.cell)->check(CLI::PositiveNumber);
    render->add_option("--out", render_args.out)->required();

    std::string manifest_path;
    auto* verify = app.add_subcommand("verify", "Check input digests recorded in a run manifest");
    verify->add_option("--manifest", manifest_path)->required();

    std::vector<std::string> rest(args.begin() + (args.empty() ? 0 : 1), args.end());
    std::reverse(rest.begin(), rest.end());  // CLI11 consumes vectors from the back
    try {
        app.parse(rest);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    }

    const std::string command_line = joined(args);
    try {
        if (*train) return cmd_train(train_args, command_line, out);
        if (*eval) return cmd_eval(eval_args, command_line, out);
        if (*cluster) return cmd_cluster(cluster_args, command_line, out);
        if (*render) return cmd_render(render_args, out);
        if (*verify) return cmd_verify(manifest_path, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}

} // namespace lsc
