#include "lsc/render.hpp"

#include <cmath>
#include <sstream>

#include "lsc/errors.hpp"

namespace lsc {

GridLayout filter_grid_layout(const Matrix& filters, int cols, int cell) {
    if (filters.cols() < 1 || filters.rows() < 1) throw ContractError("nothing to render");
    if (cols < 1) throw ConfigError("grid needs at least one column");
    if (cell < 1) throw ConfigError("cell size must be >= 1");
    const auto side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(filters.rows()))));
    if (static_cast<Eigen::Index>(side) * side != filters.rows()) {
        throw ConfigError("filter length " + std::to_string(filters.rows()) + " is not a perfect square");
    }
    GridLayout g;
    g.patch_side = side;
    g.cols = cols;
    g.rows = static_cast<int>((filters.cols() + cols - 1) / cols);
    g.cell = cell;
    g.gap = cell;
    const int tile = side * cell;
    g.width = g.cols * tile + (g.cols + 1) * g.gap;
    g.height = g.rows * tile + (g.rows + 1) * g.gap;
    return g;
}

std::string render_filter_grid_svg(const Matrix& filters, int cols, int cell) {
    const GridLayout g = filter_grid_layout(filters, cols, cell);
    const int tile = g.patch_side * g.cell;
    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << g.width << "\" height=\""
        << g.height << "\" viewBox=\"0 0 " << g.width << ' ' << g.height
        << "\" shape-rendering=\"crispEdges\">\n";
    out << "<rect x=\"0\" y=\"0\" width=\"" << g.width << "\" height=\"" << g.height << "\" fill=\"rgb(255,255,255)\"/>\n";
    for (Eigen::Index j = 0; j < filters.cols(); ++j) {
        const auto col = filters.col(j);
        const double lo = col.minCoeff(), hi = col.maxCoeff();
        const int gx = static_cast<int>(j % g.cols), gy = static_cast<int>(j / g.cols);
        const int x0 = g.gap + gx * (tile + g.gap), y0 = g.gap + gy * (tile + g.gap);
        out << "<g id=\"filter" << j << "\">\n";
        for (int r = 0; r < g.patch_side; ++r) {
            for (int c = 0; c < g.patch_side; ++c) {
                const double v = col(static_cast<Eigen::Index>(r) * g.patch_side + c);
                const long level = hi > lo ? std::lround(255.0 * (v - lo) / (hi - lo)) : 128;
                out << "<rect x=\"" << x0 + c * g.cell << "\" y=\"" << y0 + r * g.cell << "\" width=\"" << g.cell
                    << "\" height=\"" << g.cell << "\" fill=\"rgb(" << level << ',' << level << ',' << level
                    << ")\"/>\n";
            }
        }
        out << "</g>\n";
    }
    out << "</svg>\n";
    return out.str();
}

} // namespace lsc
