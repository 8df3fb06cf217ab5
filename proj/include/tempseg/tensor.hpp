#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace tempseg {

using Index = Eigen::Index;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using ArrayX = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

/// Dense rank-4 tensor in NCHW layout (w fastest), backed by contiguous
/// storage with value semantics. Eigen maps expose the views the math needs:
/// per-sample (H*W) x C matrices for GEMM-based convolution, per-channel
/// H x W planes, and a flat array for elementwise work.
template <typename Scalar>
class Tensor4 {
 public:
  Tensor4() : dims_{0, 0, 0, 0} {}
  Tensor4(Index n, Index c, Index h, Index w) : dims_{n, c, h, w}, data_(static_cast<size_t>(n * c * h * w)) {}

  static Tensor4 zeros(Index n, Index c, Index h, Index w) { return Tensor4(n, c, h, w); }
  static Tensor4 ones(Index n, Index c, Index h, Index w) {
    Tensor4 t(n, c, h, w);
    t.fill(Scalar(1));
    return t;
  }

  Index n() const { return dims_[0]; }
  Index c() const { return dims_[1]; }
  Index h() const { return dims_[2]; }
  Index w() const { return dims_[3]; }
  Index plane_size() const { return dims_[2] * dims_[3]; }
  Index size() const { return dims_[0] * dims_[1] * dims_[2] * dims_[3]; }
  bool empty() const { return size() == 0; }
  const std::array<Index, 4>& dims() const { return dims_; }

  bool same_shape(const Tensor4& o) const { return dims_ == o.dims_; }

  Scalar* data() { return data_.data(); }
  const Scalar* data() const { return data_.data(); }

  Scalar& operator()(Index n, Index c, Index y, Index x) { return data_[offset(n, c, y, x)]; }
  const Scalar& operator()(Index n, Index c, Index y, Index x) const { return data_[offset(n, c, y, x)]; }

  void fill(Scalar v) { std::fill(data_.begin(), data_.end(), v); }
  void set_zero() { fill(Scalar(0)); }

  /// Sample n as a (H*W) x C column-major matrix; column c is channel c's
  /// plane, contiguous in memory.
  auto sample(Index n) {
    return Eigen::Map<MatrixX<Scalar>>(data() + n * dims_[1] * plane_size(), plane_size(), dims_[1]);
  }
  auto sample(Index n) const {
    return Eigen::Map<const MatrixX<Scalar>>(data() + n * dims_[1] * plane_size(), plane_size(), dims_[1]);
  }

  /// Channel plane (n, c) as an H x W row-major matrix view.
  auto plane(Index n, Index c) {
    return Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        data() + (n * dims_[1] + c) * plane_size(), dims_[2], dims_[3]);
  }
  auto plane(Index n, Index c) const {
    return Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        data() + (n * dims_[1] + c) * plane_size(), dims_[2], dims_[3]);
  }

  auto flat() { return Eigen::Map<ArrayX<Scalar>>(data(), size()); }
  auto flat() const { return Eigen::Map<const ArrayX<Scalar>>(data(), size()); }

  std::string shape_str() const {
    return "(" + std::to_string(dims_[0]) + "," + std::to_string(dims_[1]) + "," + std::to_string(dims_[2]) + "," +
           std::to_string(dims_[3]) + ")";
  }

 private:
  Index offset(Index n, Index c, Index y, Index x) const {
    return ((n * dims_[1] + c) * dims_[2] + y) * dims_[3] + x;
  }

  std::array<Index, 4> dims_;
  std::vector<Scalar> data_;
};

/// Concatenate along the channel axis.
template <typename Scalar>
Tensor4<Scalar> concat_channels(const Tensor4<Scalar>& a, const Tensor4<Scalar>& b) {
  if (a.n() != b.n() || a.h() != b.h() || a.w() != b.w())
    throw std::invalid_argument("concat_channels: shapes " + a.shape_str() + " vs " + b.shape_str());
  Tensor4<Scalar> out(a.n(), a.c() + b.c(), a.h(), a.w());
  for (Index n = 0; n < a.n(); ++n) {
    out.sample(n).leftCols(a.c()) = a.sample(n);
    out.sample(n).rightCols(b.c()) = b.sample(n);
  }
  return out;
}

/// Split a channel-concatenated gradient back into its two parts.
template <typename Scalar>
void split_channels(const Tensor4<Scalar>& cat, Tensor4<Scalar>& da, Tensor4<Scalar>& db) {
  for (Index n = 0; n < cat.n(); ++n) {
    da.sample(n) = cat.sample(n).leftCols(da.c());
    db.sample(n) = cat.sample(n).rightCols(db.c());
  }
}

}  // namespace tempseg
