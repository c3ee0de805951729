#include "lsc/patches.hpp"

#include <algorithm>

#include "lsc/errors.hpp"
#include "lsc/rng.hpp"

namespace lsc {

void standardize_columns(Matrix& patches) {
    for (Eigen::Index j = 0; j < patches.cols(); ++j) {
        auto col = patches.col(j);
        col.array() -= col.mean();
        const double norm = col.norm();
        // Constant patches stay at zero after centering.
        if (norm > 1e-12) col /= norm;
    }
}

StimulusBatch sample_patches(const Tensor& images, const PatchSamplerConfig& cfg) {
    if (cfg.patch_side < 2) throw ConfigError("patch_side must be >= 2");
    if (cfg.count < 1) throw ConfigError("patch count must be >= 1");
    if (images.rank() != 2 && images.rank() != 3) {
        throw ConfigError("images must be HxW or HxWxC, got " + shape_string(images.dims()));
    }
    const std::size_t height = images.dim(0);
    const std::size_t width = images.dim(1);
    const std::size_t planes = images.rank() == 3 ? images.dim(2) : 1;
    const auto side = static_cast<std::size_t>(cfg.patch_side);
    if (side > std::min(height, width)) {
        throw ConfigError("patch_side " + std::to_string(side) + " exceeds image size " +
                          shape_string(images.dims()));
    }

    StimulusBatch batch;
    batch.patch_side = cfg.patch_side;
    batch.patches.resize(static_cast<Eigen::Index>(side * side), static_cast<Eigen::Index>(cfg.count));
    batch.source_id = "patches" + shape_string(images.dims()) + "@seed" + std::to_string(cfg.seed);

    CounterRng rng(cfg.seed);
    const auto pixels = images.data();
    for (std::size_t n = 0; n < cfg.count; ++n) {
        const std::size_t plane = rng.below(planes);
        const std::size_t top = rng.below(height - side + 1);
        const std::size_t left = rng.below(width - side + 1);
        for (std::size_t r = 0; r < side; ++r) {
            for (std::size_t c = 0; c < side; ++c) {
                const std::size_t flat = ((top + r) * width + (left + c)) * planes + plane;
                batch.patches(static_cast<Eigen::Index>(r * side + c), static_cast<Eigen::Index>(n)) =
                    pixels[flat];
            }
        }
    }
    if (cfg.standardize) standardize_columns(batch.patches);
    return batch;
}

} // namespace lsc
