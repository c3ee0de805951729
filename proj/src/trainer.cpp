#include "lsc/trainer.hpp"

#include <cmath>
#include <sstream>

#include "lsc/errors.hpp"
#include "lsc/format.hpp"
#include "lsc/graph.hpp"
#include "lsc/io.hpp"
#include "lsc/patches.hpp"
#include "lsc/rng.hpp"

namespace lsc {
namespace {

// Stream ids for derive_seed; keep distinct.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kBatchStream = 1'000'000;
constexpr std::uint64_t kStepStream = 2'000'000;
constexpr std::uint64_t kDeadStream = 3'000'000;

Vector random_unit_column(Eigen::Index d, std::uint64_t seed) {
    CounterRng rng(seed);
    Vector v(d);
    double norm = 0.0;
    while (norm == 0.0) {
        for (Eigen::Index i = 0; i < d; ++i) v(i) = rng.normal();
        norm = v.norm();
    }
    return v / norm;
}

} // namespace

void TrainConfig::validate() const {
    if (num_atoms < 1) throw ConfigError("num_atoms must be >= 1");
    if (patch_side < 2) throw ConfigError("patch_side must be >= 2");
    if (epochs < 0) throw ConfigError("epochs must be >= 0");
    if (batches_per_epoch < 1) throw ConfigError("batches_per_epoch must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (!(dict_learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
    if (knn_k < 1) throw ConfigError("knn_k must be >= 1");
    if (encoder.penalty.kind == PenaltyKind::Laplacian && knn_k >= batch_size) {
        throw ConfigError("knn_k must be smaller than the batch size");
    }
    encoder.validate();
}

Matrix init_dictionary(Eigen::Index d, Eigen::Index m, std::uint64_t seed) {
    if (d < 1 || m < 1) throw ConfigError("dictionary dimensions must be >= 1");
    CounterRng rng(seed);
    Matrix atoms(d, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        for (Eigen::Index i = 0; i < d; ++i) atoms(i, j) = rng.normal();
    }
    for (Eigen::Index j = 0; j < m; ++j) {
        const double norm = atoms.col(j).norm();
        if (norm > 0.0) {
            atoms.col(j) /= norm;
        } else {
            atoms.col(j) = random_unit_column(d, derive_seed(seed, static_cast<std::uint64_t>(j)));
        }
    }
    return atoms;
}

Matrix decode(const Matrix& atoms, const Matrix& codes) {
    if (atoms.cols() != codes.rows()) {
        throw ContractError("cannot decode " + std::to_string(codes.rows()) + "-row codes with " +
                            std::to_string(atoms.cols()) + " atoms");
    }
    return atoms * codes;
}

double batch_loss(const Matrix& stimuli, const Matrix& atoms, const Matrix& codes,
                  const PenaltyConfig& penalty) {
    return coding_objective(stimuli, atoms, codes, penalty) / static_cast<double>(stimuli.cols());
}

DictionaryStep dictionary_step(const Matrix& atoms, const Matrix& stimuli, const Matrix& codes,
                               const PenaltyConfig& penalty, double learning_rate,
                               std::uint64_t reinit_seed) {
    if (!(learning_rate >= 0.0)) throw ConfigError("learning rate must be non-negative");
    const double lambda = penalty.kind == PenaltyKind::WeightedL1 ? penalty.lambda : 0.0;
    const Matrix gradient = wl_atom_gradient(stimuli, atoms, codes, lambda);
    if (!gradient.allFinite()) throw DivergenceError("non-finite dictionary gradient");

    DictionaryStep out;
    out.atoms = atoms - (learning_rate / static_cast<double>(stimuli.cols())) * gradient;
    for (Eigen::Index j = 0; j < out.atoms.cols(); ++j) {
        const double norm = out.atoms.col(j).norm();
        if (norm > 1e-12) {
            out.atoms.col(j) /= norm;
        } else {
            out.atoms.col(j) = random_unit_column(out.atoms.rows(),
                                                  derive_seed(reinit_seed, static_cast<std::uint64_t>(j)));
            out.reinitialized.push_back(static_cast<int>(j));
        }
    }
    return out;
}

TrainedModel train(const Tensor& images, const TrainConfig& cfg) {
    cfg.validate();
    const Eigen::Index d = static_cast<Eigen::Index>(cfg.patch_side) * cfg.patch_side;

    TrainedModel model;
    model.config = cfg;
    model.dictionary.patch_side = cfg.patch_side;
    Matrix atoms = init_dictionary(d, cfg.num_atoms, derive_seed(cfg.seed, kInitStream));

    EncoderConfig encoder = cfg.encoder;
    Matrix last_patches;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        Vector activation = Vector::Zero(cfg.num_atoms);
        for (int b = 0; b < cfg.batches_per_epoch; ++b) {
            const auto batch_index = static_cast<std::uint64_t>(epoch) * cfg.batches_per_epoch + b;
            PatchSamplerConfig sampler;
            sampler.patch_side = cfg.patch_side;
            sampler.count = static_cast<std::size_t>(cfg.batch_size);
            sampler.seed = derive_seed(cfg.seed, kBatchStream + batch_index);
            sampler.standardize = cfg.standardize;
            const StimulusBatch batch = sample_patches(images, sampler);

            encoder.penalty = cfg.encoder.penalty;
            if (encoder.penalty.kind == PenaltyKind::Laplacian) {
                encoder.penalty.laplacian =
                    laplacian_from_adjacency(knn_adjacency(batch.patches, cfg.knn_k)).matrix;
            }
            const EncodeResult encoded = encode(batch.patches, atoms, encoder);
            const double loss = batch_loss(batch.patches, atoms, encoded.codes, encoder.penalty);
            if (!std::isfinite(loss)) {
                throw DivergenceError("non-finite training loss at batch " + std::to_string(batch_index));
            }
            model.loss_history.push_back(loss);
            activation += encoded.codes.cwiseAbs().rowwise().sum();

            DictionaryStep step = dictionary_step(atoms, batch.patches, encoded.codes, encoder.penalty,
                                                  cfg.dict_learning_rate,
                                                  derive_seed(cfg.seed, kStepStream + batch_index));
            for (int j : step.reinitialized) model.reinitialized.emplace_back(static_cast<int>(batch_index), j);
            atoms = std::move(step.atoms);
            if (b + 1 == cfg.batches_per_epoch) last_patches = batch.patches;
        }
        if (epoch + 1 == cfg.epochs) break;
        // Atoms unused for a whole epoch restart at a generator-chosen patch of
        // the epoch's last batch; skipped after the final epoch.
        const int last_batch = (epoch + 1) * cfg.batches_per_epoch - 1;
        CounterRng pick(derive_seed(cfg.seed, kDeadStream + static_cast<std::uint64_t>(epoch)));
        for (Eigen::Index j = 0; j < atoms.cols(); ++j) {
            if (activation(j) > 0.0) continue;
            const auto col = static_cast<Eigen::Index>(pick.below(static_cast<std::uint64_t>(last_patches.cols())));
            const double norm = last_patches.col(col).norm();
            atoms.col(j) = norm > 1e-12 ? Vector(last_patches.col(col) / norm)
                                        : random_unit_column(d, pick.next_u64());
            model.reinitialized.emplace_back(last_batch, static_cast<int>(j));
        }
    }
    model.dictionary.atoms = std::move(atoms);
    return model;
}

std::map<std::string, std::string> config_to_map(const TrainConfig& cfg) {
    std::map<std::string, std::string> kv;
    kv["penalty"] = std::string(to_string(cfg.encoder.penalty.kind));
    kv["lambda"] = fmt_double(cfg.encoder.penalty.lambda, 17);
    kv["patch_side"] = std::to_string(cfg.patch_side);
    kv["num_atoms"] = std::to_string(cfg.num_atoms);
    kv["steps"] = std::to_string(cfg.encoder.steps);
    kv["momentum_mode"] = std::string(to_string(cfg.encoder.momentum_mode));
    kv["seed"] = std::to_string(cfg.seed);
    kv["epochs"] = std::to_string(cfg.epochs);
    kv["batches_per_epoch"] = std::to_string(cfg.batches_per_epoch);
    kv["batch_size"] = std::to_string(cfg.batch_size);
    kv["knn_k"] = std::to_string(cfg.knn_k);
    kv["lr"] = fmt_double(cfg.dict_learning_rate, 17);
    kv["standardize"] = cfg.standardize ? "1" : "0";
    if (cfg.encoder.step_size_override) kv["step_size"] = fmt_double(*cfg.encoder.step_size_override, 17);
    return kv;
}

TrainConfig config_from_map(const std::map<std::string, std::string>& kv) {
    auto get = [&](const std::string& key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) throw FormatError("model metadata lacks key '" + key + "'");
        return it->second;
    };
    auto get_or = [&](const std::string& key, const std::string& fallback) {
        auto it = kv.find(key);
        return it == kv.end() ? fallback : it->second;
    };
    try {
        TrainConfig cfg;
        cfg.encoder.penalty.kind = parse_penalty_kind(get("penalty"));
        cfg.encoder.penalty.lambda = std::stod(get("lambda"));
        cfg.patch_side = std::stoi(get("patch_side"));
        cfg.encoder.steps = std::stoi(get("steps"));
        cfg.encoder.momentum_mode = parse_momentum_mode(get("momentum_mode"));
        cfg.seed = std::stoull(get("seed"));
        cfg.epochs = std::stoi(get("epochs"));
        cfg.batch_size = std::stoi(get("batch_size"));
        cfg.knn_k = std::stoi(get("knn_k"));
        cfg.num_atoms = std::stoi(get_or("num_atoms", "0"));
        cfg.batches_per_epoch = std::stoi(get_or("batches_per_epoch", "1"));
        cfg.dict_learning_rate = std::stod(get_or("lr", "0.1"));
        cfg.standardize = get_or("standardize", "1") != "0";
        if (kv.count("step_size")) cfg.encoder.step_size_override = std::stod(kv.at("step_size"));
        return cfg;
    } catch (const std::invalid_argument&) {
        throw FormatError("malformed numeric value in model metadata");
    } catch (const std::out_of_range&) {
        throw FormatError("numeric value out of range in model metadata");
    }
}

std::string meta_text(const std::map<std::string, std::string>& kv) {
    std::ostringstream out;
    for (const auto& [key, value] : kv) out << key << '=' << value << '\n';
    return out.str();
}

std::map<std::string, std::string> parse_meta(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw FormatError("metadata line without '=': " + line);
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

void save_model(const TrainedModel& model, const std::filesystem::path& prefix) {
    const std::string base = prefix.string();
    save_tensor(from_matrix(model.dictionary.atoms), base + ".sct");
    write_text_file(base + ".meta", meta_text(config_to_map(model.config)));
}

TrainedModel load_model(const std::filesystem::path& prefix) {
    const std::string base = prefix.string();
    TrainedModel model;
    model.config = config_from_map(parse_meta(read_text_file(base + ".meta")));
    model.dictionary.atoms = to_matrix(load_tensor(base + ".sct"));
    model.dictionary.patch_side = model.config.patch_side;
    const Eigen::Index d = static_cast<Eigen::Index>(model.config.patch_side) * model.config.patch_side;
    if (model.dictionary.atoms.rows() != d) {
        throw FormatError("dictionary has " + std::to_string(model.dictionary.atoms.rows()) +
                          " rows but patch_side " + std::to_string(model.config.patch_side));
    }
    model.config.num_atoms = static_cast<int>(model.dictionary.atoms.cols());
    return model;
}

} // namespace lsc
