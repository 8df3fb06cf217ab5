#pragma once

#define EIGEN_DONT_PARALLELIZE

#include "tempseg/rng.hpp"
#include "tempseg/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace tempseg::nn {

struct shape_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ParamKind { ConvWeight, Bias, BnGamma, BnBeta };

/// Non-owning view of one trainable tensor, used by the optimizer, the
/// initializer, the checkpoint writer and the gradient checker.
template <typename T>
struct ParamView {
  std::string name;
  T* value = nullptr;
  T* grad = nullptr;
  Index size = 0;
  Index fan_in = 0;
  Index fan_out = 0;
  ParamKind kind = ParamKind::ConvWeight;
};

/// Non-owning view of a persistent but non-trainable buffer (batch-norm
/// running statistics); saved in checkpoints, ignored by the optimizer.
template <typename T>
struct BufferView {
  std::string name;
  T* value = nullptr;
  Index size = 0;
};

inline Index conv_out_dim(Index in, Index k, Index stride, Index pad) { return (in + 2 * pad - k) / stride + 1; }

// ---------------------------------------------------------------------------
// Conv2d: im2col + GEMM, tiled over output rows to bound workspace size.
// ---------------------------------------------------------------------------

template <typename T>
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(std::string name, Index in_ch, Index out_ch, Index k, Index stride, Index pad)
      : name_(std::move(name)),
        in_ch_(in_ch),
        out_ch_(out_ch),
        k_(k),
        stride_(stride),
        pad_(pad),
        weight_(out_ch, in_ch, k, k),
        grad_weight_(out_ch, in_ch, k, k),
        bias_(VectorX<T>::Zero(out_ch)),
        grad_bias_(VectorX<T>::Zero(out_ch)) {}

  Index in_channels() const { return in_ch_; }
  Index out_channels() const { return out_ch_; }
  const std::string& name() const { return name_; }

  Tensor4<T> forward(const Tensor4<T>& x) const {
    check_input(x);
    const Index ho = conv_out_dim(x.h(), k_, stride_, pad_);
    const Index wo = conv_out_dim(x.w(), k_, stride_, pad_);
    Tensor4<T> y(x.n(), out_ch_, ho, wo);
    const auto wmap = weight_matrix();
    const Index tiles = row_tiles(ho, wo);
#pragma omp parallel for collapse(2) schedule(static)
    for (Index n = 0; n < x.n(); ++n) {
      for (Index t = 0; t < tiles; ++t) {
        auto [r0, r1] = tile_range(t, tiles, ho);
        if (k_ == 1 && stride_ == 1 && pad_ == 0) {
          y.sample(n).middleRows(r0 * wo, (r1 - r0) * wo).noalias() =
              x.sample(n).middleRows(r0 * wo, (r1 - r0) * wo) * wmap;
        } else {
          MatrixX<T> col((r1 - r0) * wo, in_ch_ * k_ * k_);
          im2col(x, n, r0, r1, wo, col);
          y.sample(n).middleRows(r0 * wo, (r1 - r0) * wo).noalias() = col * wmap;
        }
        for (Index c = 0; c < out_ch_; ++c)
          y.sample(n).col(c).segment(r0 * wo, (r1 - r0) * wo).array() += bias_[c];
      }
    }
    return y;
  }

  /// dx may be null when the input gradient is not needed (network input).
  /// Parameter gradients are accumulated (not overwritten).
  void backward(const Tensor4<T>& x, const Tensor4<T>& dy, Tensor4<T>* dx) {
    const Index ho = dy.h(), wo = dy.w();
    const auto wmap = weight_matrix();
    const Index tiles = row_tiles(ho, wo);
    std::vector<MatrixX<T>> dw_per_n(x.n());
    std::vector<VectorX<T>> db_per_n(x.n());
    if (dx) dx->set_zero();
#pragma omp parallel for schedule(static)
    for (Index n = 0; n < x.n(); ++n) {
      MatrixX<T> dw = MatrixX<T>::Zero(in_ch_ * k_ * k_, out_ch_);
      for (Index t = 0; t < tiles; ++t) {
        auto [r0, r1] = tile_range(t, tiles, ho);
        const auto dy_rows = dy.sample(n).middleRows(r0 * wo, (r1 - r0) * wo);
        if (k_ == 1 && stride_ == 1 && pad_ == 0) {
          dw.noalias() += x.sample(n).middleRows(r0 * wo, (r1 - r0) * wo).transpose() * dy_rows;
          if (dx) dx->sample(n).middleRows(r0 * wo, (r1 - r0) * wo).noalias() += dy_rows * wmap.transpose();
        } else {
          MatrixX<T> col((r1 - r0) * wo, in_ch_ * k_ * k_);
          im2col(x, n, r0, r1, wo, col);
          dw.noalias() += col.transpose() * dy_rows;
          if (dx) {
            MatrixX<T> dcol = dy_rows * wmap.transpose();
            col2im_add(*dx, n, r0, r1, wo, dcol);
          }
        }
      }
      dw_per_n[n] = std::move(dw);
      db_per_n[n] = dy.sample(n).colwise().sum().transpose();
    }
    // fixed-order reduction keeps gradients deterministic
    auto gw = grad_weight_matrix();
    for (Index n = 0; n < x.n(); ++n) {
      gw += dw_per_n[n];
      grad_bias_ += db_per_n[n];
    }
  }

  void collect_params(std::vector<ParamView<T>>& out) {
    const Index fan_in = in_ch_ * k_ * k_;
    const Index fan_out = out_ch_ * k_ * k_;
    out.push_back({name_ + ".weight", weight_.data(), grad_weight_.data(), weight_.size(), fan_in, fan_out,
                   ParamKind::ConvWeight});
    out.push_back({name_ + ".bias", bias_.data(), grad_bias_.data(), bias_.size(), fan_in, fan_out, ParamKind::Bias});
  }

  Tensor4<T>& weight() { return weight_; }
  VectorX<T>& bias() { return bias_; }

 private:
  void check_input(const Tensor4<T>& x) const {
    if (x.c() != in_ch_)
      throw shape_error(name_ + ": expected " + std::to_string(in_ch_) + " input channels, got " + x.shape_str());
  }

  auto weight_matrix() const {
    return Eigen::Map<const MatrixX<T>>(weight_.data(), in_ch_ * k_ * k_, out_ch_);
  }
  auto grad_weight_matrix() {
    return Eigen::Map<MatrixX<T>>(grad_weight_.data(), in_ch_ * k_ * k_, out_ch_);
  }

  static Index row_tiles(Index ho, Index wo) {
    const Index target_px = 16384;
    const Index rows = std::max<Index>(1, target_px / std::max<Index>(1, wo));
    return (ho + rows - 1) / rows;
  }
  static std::pair<Index, Index> tile_range(Index t, Index tiles, Index ho) {
    const Index rows = (ho + tiles - 1) / tiles;
    const Index r0 = t * rows;
    return {r0, std::min(ho, r0 + rows)};
  }

  // col is ((r1-r0)*wo) x (in_ch*k*k), column j = (c*k + ky)*k + kx.
  void im2col(const Tensor4<T>& x, Index n, Index r0, Index r1, Index wo, MatrixX<T>& col) const {
    const Index h = x.h(), w = x.w();
    for (Index c = 0; c < in_ch_; ++c) {
      for (Index ky = 0; ky < k_; ++ky) {
        for (Index kx = 0; kx < k_; ++kx) {
          const Index j = (c * k_ + ky) * k_ + kx;
          T* dst = col.col(j).data();
          for (Index oy = r0; oy < r1; ++oy, dst += wo) {
            const Index iy = oy * stride_ + ky - pad_;
            if (iy < 0 || iy >= h) {
              std::fill(dst, dst + wo, T(0));
              continue;
            }
            const T* src = &x(n, c, iy, 0);
            if (stride_ == 1) {
              const Index ix0 = kx - pad_;  // input x for ox = 0
              Index lo = std::max<Index>(0, -ix0);
              Index hi = std::min<Index>(wo, w - ix0);
              if (lo > 0) std::fill(dst, dst + lo, T(0));
              if (hi > lo) std::copy(src + ix0 + lo, src + ix0 + hi, dst + lo);
              if (hi < wo) std::fill(dst + std::max(lo, hi), dst + wo, T(0));
            } else {
              for (Index ox = 0; ox < wo; ++ox) {
                const Index ix = ox * stride_ + kx - pad_;
                dst[ox] = (ix >= 0 && ix < w) ? src[ix] : T(0);
              }
            }
          }
        }
      }
    }
  }

  void col2im_add(Tensor4<T>& dx, Index n, Index r0, Index r1, Index wo, const MatrixX<T>& dcol) const {
    const Index h = dx.h(), w = dx.w();
    for (Index c = 0; c < in_ch_; ++c) {
      for (Index ky = 0; ky < k_; ++ky) {
        for (Index kx = 0; kx < k_; ++kx) {
          const Index j = (c * k_ + ky) * k_ + kx;
          const T* src = dcol.col(j).data();
          for (Index oy = r0; oy < r1; ++oy, src += wo) {
            const Index iy = oy * stride_ + ky - pad_;
            if (iy < 0 || iy >= h) continue;
            T* dst = &dx(n, c, iy, 0);
            for (Index ox = 0; ox < wo; ++ox) {
              const Index ix = ox * stride_ + kx - pad_;
              if (ix >= 0 && ix < w) dst[ix] += src[ox];
            }
          }
        }
      }
    }
  }

  std::string name_;
  Index in_ch_ = 0, out_ch_ = 0, k_ = 0, stride_ = 1, pad_ = 0;
  Tensor4<T> weight_, grad_weight_;
  VectorX<T> bias_, grad_bias_;
};

// ---------------------------------------------------------------------------
// ConvTranspose2d with a 2x2 kernel and stride 2 (the decoder up-convolution).
// Kernel windows do not overlap, so each (dy,dx) offset is an independent
// GEMM plus a strided scatter.
// ---------------------------------------------------------------------------

template <typename T>
class Deconv2x2 {
 public:
  Deconv2x2() = default;
  Deconv2x2(std::string name, Index in_ch, Index out_ch)
      : name_(std::move(name)),
        in_ch_(in_ch),
        out_ch_(out_ch),
        weight_(in_ch, out_ch, 2, 2),
        grad_weight_(in_ch, out_ch, 2, 2),
        bias_(VectorX<T>::Zero(out_ch)),
        grad_bias_(VectorX<T>::Zero(out_ch)) {}

  Index in_channels() const { return in_ch_; }
  Index out_channels() const { return out_ch_; }
  const std::string& name() const { return name_; }

  Tensor4<T> forward(const Tensor4<T>& x) const {
    if (x.c() != in_ch_)
      throw shape_error(name_ + ": expected " + std::to_string(in_ch_) + " input channels, got " + x.shape_str());
    Tensor4<T> y(x.n(), out_ch_, x.h() * 2, x.w() * 2);
    const auto wk = offset_weights();
#pragma omp parallel for schedule(static)
    for (Index n = 0; n < x.n(); ++n) {
      for (int dy = 0; dy < 2; ++dy) {
        for (int dxo = 0; dxo < 2; ++dxo) {
          MatrixX<T> tmp = x.sample(n) * wk[dy * 2 + dxo];  // (h*w) x out_ch
          for (Index c = 0; c < out_ch_; ++c) {
            for (Index iy = 0; iy < x.h(); ++iy) {
              T* dst = &y(n, c, 2 * iy + dy, dxo);
              const T* src = tmp.col(c).data() + iy * x.w();
              for (Index ix = 0; ix < x.w(); ++ix) dst[2 * ix] = src[ix] + bias_[c];
            }
          }
        }
      }
    }
    return y;
  }

  void backward(const Tensor4<T>& x, const Tensor4<T>& dy, Tensor4<T>* dx) {
    const auto wk = offset_weights();
    std::vector<std::array<MatrixX<T>, 4>> dw_per_n(x.n());
    std::vector<VectorX<T>> db_per_n(x.n());
    if (dx) dx->set_zero();
#pragma omp parallel for schedule(static)
    for (Index n = 0; n < x.n(); ++n) {
      db_per_n[n] = VectorX<T>::Zero(out_ch_);
      for (int dyo = 0; dyo < 2; ++dyo) {
        for (int dxo = 0; dxo < 2; ++dxo) {
          MatrixX<T> dtmp(x.h() * x.w(), out_ch_);
          for (Index c = 0; c < out_ch_; ++c) {
            for (Index iy = 0; iy < x.h(); ++iy) {
              const T* src = &dy(n, c, 2 * iy + dyo, dxo);
              T* dst = dtmp.col(c).data() + iy * x.w();
              for (Index ix = 0; ix < x.w(); ++ix) dst[ix] = src[2 * ix];
            }
          }
          dw_per_n[n][dyo * 2 + dxo].noalias() = x.sample(n).transpose() * dtmp;
          db_per_n[n] += dtmp.colwise().sum().transpose();
          if (dx) dx->sample(n).noalias() += dtmp * wk[dyo * 2 + dxo].transpose();
        }
      }
    }
    for (Index n = 0; n < x.n(); ++n) {
      grad_bias_ += db_per_n[n];
      for (int k = 0; k < 4; ++k) {
        const MatrixX<T>& dwk = dw_per_n[n][k];
        for (Index ci = 0; ci < in_ch_; ++ci)
          for (Index co = 0; co < out_ch_; ++co) grad_weight_(ci, co, k / 2, k % 2) += dwk(ci, co);
      }
    }
  }

  void collect_params(std::vector<ParamView<T>>& out) {
    const Index fan_in = in_ch_ * 4;
    const Index fan_out = out_ch_ * 4;
    out.push_back({name_ + ".weight", weight_.data(), grad_weight_.data(), weight_.size(), fan_in, fan_out,
                   ParamKind::ConvWeight});
    out.push_back({name_ + ".bias", bias_.data(), grad_bias_.data(), bias_.size(), fan_in, fan_out, ParamKind::Bias});
  }

 private:
  std::array<MatrixX<T>, 4> offset_weights() const {
    std::array<MatrixX<T>, 4> wk;
    for (int k = 0; k < 4; ++k) {
      wk[k].resize(in_ch_, out_ch_);
      for (Index ci = 0; ci < in_ch_; ++ci)
        for (Index co = 0; co < out_ch_; ++co) wk[k](ci, co) = weight_(ci, co, k / 2, k % 2);
    }
    return wk;
  }

  std::string name_;
  Index in_ch_ = 0, out_ch_ = 0;
  Tensor4<T> weight_, grad_weight_;
  VectorX<T> bias_, grad_bias_;
};

// ---------------------------------------------------------------------------
// BatchNorm2d. Batch statistics during training, running averages at
// evaluation; running averages updated with the unbiased variance.
// ---------------------------------------------------------------------------

template <typename T>
class BatchNorm2d {
 public:
  struct Cache {
    VectorX<T> mean, invstd;
  };

  BatchNorm2d() = default;
  BatchNorm2d(std::string name, Index channels, T momentum = T(0.1), T eps = T(1e-5))
      : name_(std::move(name)),
        channels_(channels),
        momentum_(momentum),
        eps_(eps),
        gamma_(VectorX<T>::Ones(channels)),
        beta_(VectorX<T>::Zero(channels)),
        grad_gamma_(VectorX<T>::Zero(channels)),
        grad_beta_(VectorX<T>::Zero(channels)),
        running_mean_(VectorX<T>::Zero(channels)),
        running_var_(VectorX<T>::Ones(channels)) {}

  const std::string& name() const { return name_; }

  Tensor4<T> forward(const Tensor4<T>& x, bool training, Cache* cache, bool update_running = true) {
    if (x.c() != channels_) throw shape_error(name_ + ": channel mismatch " + x.shape_str());
    Tensor4<T> y(x.n(), x.c(), x.h(), x.w());
    const Index m = x.n() * x.plane_size();
    if (training) {
      VectorX<T> mean(channels_), var(channels_);
#pragma omp parallel for schedule(static)
      for (Index c = 0; c < channels_; ++c) {
        T s = 0, s2 = 0;
        for (Index n = 0; n < x.n(); ++n) {
          auto p = x.plane(n, c);
          s += p.sum();
          s2 += p.array().square().sum();
        }
        mean[c] = s / T(m);
        var[c] = std::max(T(0), s2 / T(m) - mean[c] * mean[c]);
      }
      VectorX<T> invstd = (var.array() + eps_).rsqrt();
#pragma omp parallel for schedule(static)
      for (Index c = 0; c < channels_; ++c)
        for (Index n = 0; n < x.n(); ++n)
          y.plane(n, c) = ((x.plane(n, c).array() - mean[c]) * invstd[c] * gamma_[c] + beta_[c]).matrix();
      if (update_running) {
        const T unbias = m > 1 ? T(m) / T(m - 1) : T(1);
        running_mean_ = (T(1) - momentum_) * running_mean_ + momentum_ * mean;
        running_var_ = (T(1) - momentum_) * running_var_ + momentum_ * (var * unbias);
      }
      if (cache) {
        cache->mean = std::move(mean);
        cache->invstd = std::move(invstd);
      }
    } else {
      VectorX<T> invstd = (running_var_.array() + eps_).rsqrt();
#pragma omp parallel for schedule(static)
      for (Index c = 0; c < channels_; ++c)
        for (Index n = 0; n < x.n(); ++n)
          y.plane(n, c) = ((x.plane(n, c).array() - running_mean_[c]) * invstd[c] * gamma_[c] + beta_[c]).matrix();
    }
    return y;
  }

  Tensor4<T> backward(const Tensor4<T>& x, const Tensor4<T>& dy, const Cache& cache) {
    Tensor4<T> dx(x.n(), x.c(), x.h(), x.w());
    const Index m = x.n() * x.plane_size();
#pragma omp parallel for schedule(static)
    for (Index c = 0; c < channels_; ++c) {
      T sum_dy = 0, sum_dy_xhat = 0;
      for (Index n = 0; n < x.n(); ++n) {
        auto xp = x.plane(n, c).array();
        auto dyp = dy.plane(n, c).array();
        sum_dy += dyp.sum();
        sum_dy_xhat += (dyp * (xp - cache.mean[c]) * cache.invstd[c]).sum();
      }
      grad_gamma_[c] += sum_dy_xhat;
      grad_beta_[c] += sum_dy;
      const T scale = gamma_[c] * cache.invstd[c] / T(m);
      for (Index n = 0; n < x.n(); ++n) {
        auto xp = x.plane(n, c).array();
        auto dyp = dy.plane(n, c).array();
        auto xhat = (xp - cache.mean[c]) * cache.invstd[c];
        dx.plane(n, c) = (scale * (T(m) * dyp - sum_dy - xhat * sum_dy_xhat)).matrix();
      }
    }
    return dx;
  }

  void collect_params(std::vector<ParamView<T>>& out) {
    out.push_back({name_ + ".gamma", gamma_.data(), grad_gamma_.data(), channels_, channels_, channels_,
                   ParamKind::BnGamma});
    out.push_back(
        {name_ + ".beta", beta_.data(), grad_beta_.data(), channels_, channels_, channels_, ParamKind::BnBeta});
  }

  void collect_buffers(std::vector<BufferView<T>>& out) {
    out.push_back({name_ + ".running_mean", running_mean_.data(), channels_});
    out.push_back({name_ + ".running_var", running_var_.data(), channels_});
  }

 private:
  std::string name_;
  Index channels_ = 0;
  T momentum_ = T(0.1), eps_ = T(1e-5);
  VectorX<T> gamma_, beta_, grad_gamma_, grad_beta_;
  VectorX<T> running_mean_, running_var_;
};

// ---------------------------------------------------------------------------
// Elementwise / structural ops as free functions.
// ---------------------------------------------------------------------------

template <typename T>
Tensor4<T> relu(const Tensor4<T>& x) {
  Tensor4<T> y = x;
  y.flat() = y.flat().max(T(0));
  return y;
}

/// dx = dy where the stored output was positive.
template <typename T>
Tensor4<T> relu_backward(const Tensor4<T>& y, const Tensor4<T>& dy) {
  Tensor4<T> dx = dy;
  dx.flat() = (y.flat() > T(0)).select(dx.flat(), T(0));
  return dx;
}

template <typename T>
struct PoolResult {
  Tensor4<T> y;
  std::vector<std::uint8_t> argmax;  // 0..3 per output element
};

template <typename T>
PoolResult<T> maxpool2x2(const Tensor4<T>& x) {
  if (x.h() % 2 != 0 || x.w() % 2 != 0) throw shape_error("maxpool2x2: odd input dims " + x.shape_str());
  PoolResult<T> r{Tensor4<T>(x.n(), x.c(), x.h() / 2, x.w() / 2), {}};
  r.argmax.resize(static_cast<size_t>(r.y.size()));
#pragma omp parallel for collapse(2) schedule(static)
  for (Index n = 0; n < x.n(); ++n) {
    for (Index c = 0; c < x.c(); ++c) {
      const Index ho = x.h() / 2, wo = x.w() / 2;
      for (Index oy = 0; oy < ho; ++oy) {
        for (Index ox = 0; ox < wo; ++ox) {
          T best = x(n, c, 2 * oy, 2 * ox);
          std::uint8_t arg = 0;
          const T cands[3] = {x(n, c, 2 * oy, 2 * ox + 1), x(n, c, 2 * oy + 1, 2 * ox), x(n, c, 2 * oy + 1, 2 * ox + 1)};
          for (int i = 0; i < 3; ++i)
            if (cands[i] > best) {
              best = cands[i];
              arg = static_cast<std::uint8_t>(i + 1);
            }
          r.y(n, c, oy, ox) = best;
          r.argmax[static_cast<size_t>(((n * x.c() + c) * ho + oy) * wo + ox)] = arg;
        }
      }
    }
  }
  return r;
}

template <typename T>
Tensor4<T> maxpool2x2_backward(const Tensor4<T>& dy, const std::vector<std::uint8_t>& argmax, Index in_h, Index in_w) {
  Tensor4<T> dx(dy.n(), dy.c(), in_h, in_w);
  dx.set_zero();
#pragma omp parallel for collapse(2) schedule(static)
  for (Index n = 0; n < dy.n(); ++n) {
    for (Index c = 0; c < dy.c(); ++c) {
      for (Index oy = 0; oy < dy.h(); ++oy) {
        for (Index ox = 0; ox < dy.w(); ++ox) {
          const std::uint8_t a = argmax[static_cast<size_t>(((n * dy.c() + c) * dy.h() + oy) * dy.w() + ox)];
          dx(n, c, 2 * oy + a / 2, 2 * ox + a % 2) = dy(n, c, oy, ox);
        }
      }
    }
  }
  return dx;
}

/// Bilinear interpolation with half-pixel centers; channels unchanged.
template <typename T>
Tensor4<T> resample_bilinear(const Tensor4<T>& x, Index out_h, Index out_w) {
  if (out_h < 1 || out_w < 1) throw shape_error("resample_bilinear: target dims must be >= 1");
  if (out_h == x.h() && out_w == x.w()) return x;
  Tensor4<T> y(x.n(), x.c(), out_h, out_w);
  const double sy = static_cast<double>(x.h()) / out_h;
  const double sx = static_cast<double>(x.w()) / out_w;
#pragma omp parallel for collapse(2) schedule(static)
  for (Index n = 0; n < x.n(); ++n) {
    for (Index c = 0; c < x.c(); ++c) {
      for (Index oy = 0; oy < out_h; ++oy) {
        const double fy = std::max(0.0, (oy + 0.5) * sy - 0.5);
        const Index y0 = std::min<Index>(static_cast<Index>(fy), x.h() - 1);
        const Index y1 = std::min<Index>(y0 + 1, x.h() - 1);
        const T wy = static_cast<T>(fy - y0);
        for (Index ox = 0; ox < out_w; ++ox) {
          const double fx = std::max(0.0, (ox + 0.5) * sx - 0.5);
          const Index x0 = std::min<Index>(static_cast<Index>(fx), x.w() - 1);
          const Index x1 = std::min<Index>(x0 + 1, x.w() - 1);
          const T wx = static_cast<T>(fx - x0);
          y(n, c, oy, ox) = (T(1) - wy) * ((T(1) - wx) * x(n, c, y0, x0) + wx * x(n, c, y0, x1)) +
                            wy * ((T(1) - wx) * x(n, c, y1, x0) + wx * x(n, c, y1, x1));
        }
      }
    }
  }
  return y;
}

template <typename T>
Tensor4<T> resample_bilinear_backward(const Tensor4<T>& dy, Index in_h, Index in_w) {
  if (dy.h() == in_h && dy.w() == in_w) return dy;
  Tensor4<T> dx(dy.n(), dy.c(), in_h, in_w);
  dx.set_zero();
  const double sy = static_cast<double>(in_h) / dy.h();
  const double sx = static_cast<double>(in_w) / dy.w();
#pragma omp parallel for collapse(2) schedule(static)
  for (Index n = 0; n < dy.n(); ++n) {
    for (Index c = 0; c < dy.c(); ++c) {
      for (Index oy = 0; oy < dy.h(); ++oy) {
        const double fy = std::max(0.0, (oy + 0.5) * sy - 0.5);
        const Index y0 = std::min<Index>(static_cast<Index>(fy), in_h - 1);
        const Index y1 = std::min<Index>(y0 + 1, in_h - 1);
        const T wy = static_cast<T>(fy - y0);
        for (Index ox = 0; ox < dy.w(); ++ox) {
          const double fx = std::max(0.0, (ox + 0.5) * sx - 0.5);
          const Index x0 = std::min<Index>(static_cast<Index>(fx), in_w - 1);
          const Index x1 = std::min<Index>(x0 + 1, in_w - 1);
          const T wx = static_cast<T>(fx - x0);
          const T g = dy(n, c, oy, ox);
          dx(n, c, y0, x0) += (T(1) - wy) * (T(1) - wx) * g;
          dx(n, c, y0, x1) += (T(1) - wy) * wx * g;
          dx(n, c, y1, x0) += wy * (T(1) - wx) * g;
          dx(n, c, y1, x1) += wy * wx * g;
        }
      }
    }
  }
  return dx;
}

/// Per-pixel softmax over the channel axis.
template <typename T>
Tensor4<T> softmax_channels(const Tensor4<T>& logits) {
  Tensor4<T> p(logits.n(), logits.c(), logits.h(), logits.w());
  const Index C = logits.c();
#pragma omp parallel for schedule(static)
  for (Index n = 0; n < logits.n(); ++n) {
    for (Index y = 0; y < logits.h(); ++y) {
      for (Index x = 0; x < logits.w(); ++x) {
        T mx = logits(n, 0, y, x);
        for (Index c = 1; c < C; ++c) mx = std::max(mx, logits(n, c, y, x));
        T z = 0;
        for (Index c = 0; c < C; ++c) z += std::exp(logits(n, c, y, x) - mx);
        for (Index c = 0; c < C; ++c) p(n, c, y, x) = std::exp(logits(n, c, y, x) - mx) / z;
      }
    }
  }
  return p;
}

}  // namespace tempseg::nn
