#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "lsc/encoder.hpp"
#include "lsc/tensor.hpp"

namespace lsc {

/// d x m basis; column j is atom a_j, d = patch_side^2.
struct Dictionary {
    Matrix atoms;
    int patch_side = 0;
};

struct TrainConfig {
    int num_atoms = 64;
    int patch_side = 8;
    EncoderConfig encoder;  // encoder.penalty selects L1 / WL / LAP
    int epochs = 1;
    /// Fresh batches drawn per epoch; dead atoms are checked once per epoch.
    int batches_per_epoch = 1;
    int batch_size = 100;
    double dict_learning_rate = 0.5;
    int knn_k = 4;
    std::uint64_t seed = 0;
    bool standardize = true;

    void validate() const;
};

struct TrainedModel {
    Dictionary dictionary;
    TrainConfig config;
    /// Per-stimulus composite loss of each batch, measured before its update.
    std::vector<double> loss_history;
    /// (batch index, atom index) of every re-initialized column.
    std::vector<std::pair<int, int>> reinitialized;
};

/// Standard-normal entries from the seeded generator, unit-norm columns.
Matrix init_dictionary(Eigen::Index d, Eigen::Index m, std::uint64_t seed);

/// Linear readout AX.
Matrix decode(const Matrix& atoms, const Matrix& codes);

/// Per-stimulus composite loss: coding_objective / n.
double batch_loss(const Matrix& stimuli, const Matrix& atoms, const Matrix& codes,
                  const PenaltyConfig& penalty);

struct DictionaryStep {
    Matrix atoms;
    std::vector<int> reinitialized;
};

/// A' = A - (lr / b) grad_A, then unit-normalize columns. Zero-norm columns
/// are redrawn from `reinit_seed`. Only the WL penalty depends on A.
DictionaryStep dictionary_step(const Matrix& atoms, const Matrix& stimuli, const Matrix& codes,
                               const PenaltyConfig& penalty, double learning_rate,
                               std::uint64_t reinit_seed = 0);

/// Alternates encode and dictionary_step over freshly sampled batches.
TrainedModel train(const Tensor& images, const TrainConfig& cfg);

/// Writes <prefix>.sct (d x m dictionary) and <prefix>.meta (key=value lines).
void save_model(const TrainedModel& model, const std::filesystem::path& prefix);
TrainedModel load_model(const std::filesystem::path& prefix);

std::map<std::string, std::string> config_to_map(const TrainConfig& cfg);
TrainConfig config_from_map(const std::map<std::string, std::string>& kv);

std::string meta_text(const std::map<std::string, std::string>& kv);
std::map<std::string, std::string> parse_meta(const std::string& text);

} // namespace lsc
