#pragma once

#include <cstdint>
#include <string>

#include "lsc/tensor.hpp"

namespace lsc {

struct PatchSamplerConfig {
    int patch_side = 8;
    std::size_t count = 1000;
    std::uint64_t seed = 0;
    /// Subtract the per-patch mean, then scale to unit l2 norm (constant
    /// patches are left as zero vectors).
    bool standardize = true;
};

/// d x n matrix of vectorized patches, d = patch_side^2, one patch per column.
struct StimulusBatch {
    Matrix patches;
    int patch_side = 0;
    std::string source_id;

    Eigen::Index dim() const noexcept { return patches.rows(); }
    Eigen::Index count() const noexcept { return patches.cols(); }
};

/// Draws cfg.count patches at uniform (image, row, col) corners from an HxW
/// or HxWxC image tensor. Patch pixel (r, c) lands in row r * side + c.
StimulusBatch sample_patches(const Tensor& images, const PatchSamplerConfig& cfg);

/// In-place per-column standardization used by the sampler.
void standardize_columns(Matrix& patches);

} // namespace lsc
