#pragma once

#include <string>

#include "lsc/tensor.hpp"

namespace lsc {

struct GridLayout {
    int patch_side = 0;
    int cols = 0;
    int rows = 0;
    int cell = 0;  // screen units per patch pixel
    int gap = 0;
    int width = 0;
    int height = 0;
};

/// Layout for drawing every column of a d x m matrix as a side x side tile.
GridLayout filter_grid_layout(const Matrix& filters, int cols, int cell);

/// Standalone SVG 1.1 filter grid. Each tile is min-max normalized to
/// grayscale on its own; constant tiles are drawn mid-gray.
std::string render_filter_grid_svg(const Matrix& filters, int cols, int cell);

} // namespace lsc
