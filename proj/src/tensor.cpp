#include "lsc/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "lsc/errors.hpp"

namespace lsc {
namespace {

std::size_t checked_product(const std::vector<std::size_t>& dims) {
    if (dims.size() > kMaxTensorRank) {
        throw ContractError("tensor rank " + std::to_string(dims.size()) + " exceeds 4");
    }
    std::size_t total = 1;
    for (std::size_t extent : dims) {
        if (extent == 0) {
            throw ContractError("tensor extents must be >= 1, got " + shape_string(dims));
        }
        total *= extent;
    }
    return total;
}

} // namespace

Tensor::Tensor(std::vector<std::size_t> dims, double fill)
    : dims_(std::move(dims)), data_(checked_product(dims_), fill) {}

Tensor::Tensor(std::vector<std::size_t> dims, std::vector<double> data)
    : dims_(std::move(dims)), data_(std::move(data)) {
    const std::size_t expected = checked_product(dims_);
    if (expected != data_.size()) {
        throw ContractError("tensor of shape " + shape_string(dims_) + " needs " +
                            std::to_string(expected) + " values, got " +
                            std::to_string(data_.size()));
    }
}

std::size_t Tensor::flat_index(std::initializer_list<std::size_t> index) const {
    if (index.size() != dims_.size()) {
        throw ContractError("index arity does not match tensor rank");
    }
    std::size_t flat = 0;
    std::size_t axis = 0;
    for (std::size_t i : index) {
        if (i >= dims_[axis]) throw ContractError("tensor index out of range");
        flat = flat * dims_[axis] + i;
        ++axis;
    }
    return flat;
}

double Tensor::at(std::initializer_list<std::size_t> index) const { return data_[flat_index(index)]; }
double& Tensor::at(std::initializer_list<std::size_t> index) { return data_[flat_index(index)]; }

bool Tensor::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::string shape_string(const std::vector<std::size_t>& dims) {
    std::ostringstream out;
    out << '(';
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (i) out << ", ";
        out << dims[i];
    }
    out << ')';
    return out.str();
}

Matrix to_matrix(const Tensor& t) {
    if (t.rank() != 2) {
        throw ContractError("expected a rank-2 tensor, got shape " + shape_string(t.dims()));
    }
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    return Eigen::Map<const RowMajor>(t.data().data(), static_cast<Eigen::Index>(t.dim(0)),
                                      static_cast<Eigen::Index>(t.dim(1)));
}

Tensor from_matrix(const Matrix& m) {
    Tensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<RowMajor>(t.data().data(), m.rows(), m.cols()) = m;
    return t;
}

} // namespace lsc
