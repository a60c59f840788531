// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tensordec {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Dense order-3 tensor with a fixed linear layout: entry (i,j,k) lives at
/// flat offset (k*J + j)*I + i, i.e. mode-1 fibers are contiguous and the
/// mode-1 unfolding is a plain reshape of the buffer.
class DenseTensor3 {
 public:
  DenseTensor3() = default;

  DenseTensor3(Index i, Index j, Index k, double fill = 0.0)
      : dims_{i, j, k}, data_(static_cast<std::size_t>(check_dims(i, j, k)), fill) {}

  static DenseTensor3 from_data(Index i, Index j, Index k, std::vector<double> data) {
    if (static_cast<Index>(data.size()) != check_dims(i, j, k)) {
      throw std::invalid_argument("DenseTensor3: data length " + std::to_string(data.size()) +
                                  " does not match dims " + std::to_string(i) + "x" +
                                  std::to_string(j) + "x" + std::to_string(k));
    }
    DenseTensor3 t;
    t.dims_ = {i, j, k};
    t.data_ = std::move(data);
    return t;
  }

  std::array<Index, 3> dims() const { return dims_; }
  Index dim(int axis) const { return dims_.at(static_cast<std::size_t>(axis)); }
  Index size() const { return static_cast<Index>(data_.size()); }

  double operator()(Index i, Index j, Index k) const {
    return data_[static_cast<std::size_t>(offset(i, j, k))];
  }
  double& operator()(Index i, Index j, Index k) {
    return data_[static_cast<std::size_t>(offset(i, j, k))];
  }

  double at(Index i, Index j, Index k) const {
    check_index(i, j, k);
    return (*this)(i, j, k);
  }
  void set(Index i, Index j, Index k, double v) {
    check_index(i, j, k);
    (*this)(i, j, k) = v;
  }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  /// Flat view over the buffer in layout order.
  Eigen::Map<const Vector> flat() const {
    return Eigen::Map<const Vector>(data_.data(), size());
  }
  Eigen::Map<Vector> flat() {
    return Eigen::Map<Vector>(data_.data(), size());
  }

  /// Zero-copy mode-1 unfolding view, I x (J*K).
  Eigen::Map<const Matrix> mode1_view() const {
    return Eigen::Map<const Matrix>(data_.data(), dims_[0], dims_[1] * dims_[2]);
  }

  bool same_dims(const DenseTensor3& o) const { return dims_ == o.dims_; }

  Index offset(Index i, Index j, Index k) const {
    return (k * dims_[1] + j) * dims_[0] + i;
  }

 private:
  static Index check_dims(Index i, Index j, Index k) {
    if (i <= 0 || j <= 0 || k <= 0) {
      throw std::invalid_argument("DenseTensor3: dimensions must be positive");
    }
    return i * j * k;
  }
  void check_index(Index i, Index j, Index k) const {
    if (i < 0 || i >= dims_[0] || j < 0 || j >= dims_[1] || k < 0 || k >= dims_[2]) {
      throw std::out_of_range("DenseTensor3: index (" + std::to_string(i) + "," +
                              std::to_string(j) + "," + std::to_string(k) + ") out of range");
    }
  }

  std::array<Index, 3> dims_{0, 0, 0};
  std::vector<double> data_;
};

inline double frobenius_norm(const DenseTensor3& t) {
  return t.flat().norm();
}

/// Row-vector flattening with the last index varying fastest:
/// (a111, ..., a11K, a121, ..., a1JK, a211, ...). This is a compatibility
/// view only; the storage layout and all unfoldings use the mode-1
/// column-major order documented on DenseTensor3.
inline Eigen::RowVectorXd vectorize(const DenseTensor3& t) {
  const auto d = t.dims();
  Eigen::RowVectorXd out(t.size());
  Index pos = 0;
  for (Index i = 0; i < d[0]; ++i)
    for (Index j = 0; j < d[1]; ++j)
      for (Index k = 0; k < d[2]; ++k) out(pos++) = t(i, j, k);
  return out;
}

inline bool all_finite(const DenseTensor3& t) {
  return t.flat().allFinite();
}

/// Largest CP rank a decomposition routine will accept for these dims.
inline Index max_cp_rank(const std::array<Index, 3>& d) {
  return std::min({d[0] * d[1], d[1] * d[2], d[0] * d[2]});
}

}  // namespace tensordec
