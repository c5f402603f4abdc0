// Copyright 2026 The mtseg Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <Eigen/Core>
#include <algorithm>
#include <cstdint>
#include <vector>

#include "mtseg/kernels.hpp"
#include "mtseg/tensor.hpp"

namespace mtseg::kernels::parallel {
namespace {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatrixMap = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMatrixMap = Eigen::Map<const RowMatrix<T>>;

template <typename T>
AlignedVector<T>& scratch(int slot) {
  thread_local AlignedVector<T> buffers[2];
  return buffers[slot];
}

// Rows are (channel, kernel row, kernel col); columns are output pixels.
// `ld` is the row stride of `cols`, so several images can share one matrix.
template <typename T>
void im2col(const ConvShape& s, const T* x, T* cols, std::size_t ld, std::size_t r0, std::size_t r1) {
  const auto H = static_cast<std::ptrdiff_t>(s.height);
  const auto W = static_cast<std::ptrdiff_t>(s.width);
  const auto K = static_cast<std::ptrdiff_t>(s.kernel);
  const auto P = static_cast<std::ptrdiff_t>(s.pad());
  for (std::size_t i = 0; i < s.in_channels; ++i) {
    const T* plane = x + i * s.height * s.width;
    for (std::ptrdiff_t kr = 0; kr < K; ++kr) {
      for (std::ptrdiff_t kc = 0; kc < K; ++kc) {
        T* row = cols + ((i * s.kernel + kr) * s.kernel + kc) * ld;
        for (auto r = static_cast<std::ptrdiff_t>(r0); r < static_cast<std::ptrdiff_t>(r1); ++r) {
          const std::ptrdiff_t rr = r + kr - P;
          T* out = row + (r - static_cast<std::ptrdiff_t>(r0)) * W;
          if (rr < 0 || rr >= H) {
            std::fill(out, out + W, T{0});
            continue;
          }
          const T* in = plane + rr * W;
          const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, P - kc);
          const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(W, W + P - kc);
          std::fill(out, out + lo, T{0});
          std::copy(in + lo + kc - P, in + hi + kc - P, out + lo);
          std::fill(out + hi, out + W, T{0});
        }
      }
    }
  }
}

// Accumulates into dx; the caller zeroes it.
template <typename T>
void col2im(const ConvShape& s, const T* cols, std::size_t ld, std::size_t r0, std::size_t r1, T* dx) {
  const auto H = static_cast<std::ptrdiff_t>(s.height);
  const auto W = static_cast<std::ptrdiff_t>(s.width);
  const auto K = static_cast<std::ptrdiff_t>(s.kernel);
  const auto P = static_cast<std::ptrdiff_t>(s.pad());
  for (std::size_t i = 0; i < s.in_channels; ++i) {
    T* plane = dx + i * s.height * s.width;
    for (std::ptrdiff_t kr = 0; kr < K; ++kr) {
      for (std::ptrdiff_t kc = 0; kc < K; ++kc) {
        const T* row = cols + ((i * s.kernel + kr) * s.kernel + kc) * ld;
        for (auto r = static_cast<std::ptrdiff_t>(r0); r < static_cast<std::ptrdiff_t>(r1); ++r) {
          const std::ptrdiff_t rr = r + kr - P;
          if (rr < 0 || rr >= H) continue;
          const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, P - kc);
          const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(W, W + P - kc);
          T* out = plane + rr * W;
          const T* in = row + (r - static_cast<std::ptrdiff_t>(r0)) * W;
          for (std::ptrdiff_t c = lo; c < hi; ++c) out[c + kc - P] += in[c];
        }
      }
    }
  }
}

// Work decomposition for one convolution. Small feature maps are grouped so
// each GEMM has enough columns; large ones are cut into row bands so the
// column matrix stays cache resident. Both depend only on the shape, never on
// the thread count.
struct Tiling {
  std::size_t group = 1;      // images per work unit
  std::size_t band_rows = 1;  // rows per band (== height when grouping)
};

Tiling tiling_for(const ConvShape& s) {
  constexpr std::size_t kTileColumns = 256;
  const std::size_t pixels = s.height * s.width;
  Tiling t;
  if (pixels < kTileColumns) {
    t.group = std::clamp<std::size_t>((kTileColumns + pixels - 1) / pixels, 1,
                                      std::max<std::size_t>(s.batch, 1));
    t.band_rows = s.height;
  } else {
    t.band_rows = std::clamp<std::size_t>(kTileColumns / s.width, 1, s.height);
  }
  return t;
}

// Column matrix for rows [r0, r1) of images [first, first + count):
// K·K·Cin × count·(r1 - r0)·W.
template <typename T>
void gather_columns(const ConvShape& s, const T* x, std::size_t first, std::size_t count,
                    std::size_t r0, std::size_t r1, AlignedVector<T>& buffer) {
  const std::size_t pixels = s.height * s.width;
  const std::size_t band = (r1 - r0) * s.width;
  const std::size_t image = s.in_channels * pixels;
  const std::size_t rows = s.in_channels * s.kernel * s.kernel;
  const std::size_t ld = count * band;
  buffer.resize(rows * ld);
  for (std::size_t g = 0; g < count; ++g) {
    const T* xn = x + (first + g) * image;
    if (s.kernel == 1) {
      for (std::size_t i = 0; i < s.in_channels; ++i) {
        std::copy_n(xn + i * pixels + r0 * s.width, band, buffer.data() + i * ld + g * band);
      }
    } else {
      im2col(s, xn, buffer.data() + g * band, ld, r0, r1);
    }
  }
}

template <typename T>
using StridedMap = Eigen::Map<RowMatrix<T>, 0, Eigen::OuterStride<>>;
template <typename T>
using ConstStridedMap = Eigen::Map<const RowMatrix<T>, 0, Eigen::OuterStride<>>;

}  // namespace

template <typename T>
void conv2d_forward(const ConvShape& s, std::span<const T> x, std::span<const T> weight,
                    std::span<const T> bias, std::span<T> y) {
  const Tiling tiling = tiling_for(s);
  const auto chunks = static_cast<std::ptrdiff_t>((s.batch + tiling.group - 1) / tiling.group);
  const std::size_t pixels = s.height * s.width;
  const auto rows = static_cast<Eigen::Index>(s.in_channels * s.kernel * s.kernel);
  const auto outs = static_cast<Eigen::Index>(s.out_channels);
  ConstMatrixMap<T> wmat(weight.data(), outs, rows);
  Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> bvec(bias.data(), outs);

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t chunk = 0; chunk < chunks; ++chunk) {
    const std::size_t first = static_cast<std::size_t>(chunk) * tiling.group;
    const std::size_t count = std::min(tiling.group, s.batch - first);
    T* yfirst = y.data() + first * s.out_channels * pixels;
    auto& cols_buf = scratch<T>(0);
    for (std::size_t r0 = 0; r0 < s.height; r0 += tiling.band_rows) {
      const std::size_t r1 = std::min(s.height, r0 + tiling.band_rows);
      const std::size_t band = (r1 - r0) * s.width;
      const auto ncols = static_cast<Eigen::Index>(count * band);
      gather_columns(s, x.data(), first, count, r0, r1, cols_buf);
      ConstMatrixMap<T> cols(cols_buf.data(), rows, ncols);
      if (count == 1) {
        StridedMap<T> yb(yfirst + r0 * s.width, outs, ncols, Eigen::OuterStride<>(pixels));
        yb.noalias() = wmat * cols;
        yb.colwise() += bvec;
      } else {
        auto& out = scratch<T>(1);
        out.resize(static_cast<std::size_t>(outs * ncols));
        MatrixMap<T> ym(out.data(), outs, ncols);
        ym.noalias() = wmat * cols;
        ym.colwise() += bvec;
        for (std::size_t g = 0; g < count; ++g) {
          for (std::size_t o = 0; o < s.out_channels; ++o) {
            std::copy_n(out.data() + o * count * pixels + g * pixels, pixels,
                        yfirst + (g * s.out_channels + o) * pixels);
          }
        }
      }
    }
  }
}

template <typename T>
void conv2d_backward(const ConvShape& s, std::span<const T> x, std::span<const T> weight,
                     std::span<const T> dy, std::span<T> dx, std::span<T> dweight,
                     std::span<T> dbias) {
  const Tiling tiling = tiling_for(s);
  const std::size_t nchunks = (s.batch + tiling.group - 1) / tiling.group;
  const auto chunks = static_cast<std::ptrdiff_t>(nchunks);
  const std::size_t pixels = s.height * s.width;
  const std::size_t rows_u = s.in_channels * s.kernel * s.kernel;
  const auto rows = static_cast<Eigen::Index>(rows_u);
  const auto outs = static_cast<Eigen::Index>(s.out_channels);
  const std::size_t wsize = s.weight_size();
  ConstMatrixMap<T> wmat(weight.data(), outs, rows);

  // Per-chunk partials, reduced below in chunk order.
  AlignedVector<T> dw_parts(nchunks * wsize);
  AlignedVector<T> db_parts(nchunks * s.out_channels);
  if (!dx.empty()) std::fill(dx.begin(), dx.end(), T{0});

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t chunk = 0; chunk < chunks; ++chunk) {
    const std::size_t first = static_cast<std::size_t>(chunk) * tiling.group;
    const std::size_t count = std::min(tiling.group, s.batch - first);
    const T* dy_first = dy.data() + first * s.out_channels * pixels;
    MatrixMap<T> dwc(dw_parts.data() + chunk * wsize, outs, rows);
    Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>> dbc(db_parts.data() + chunk * s.out_channels, outs);
    auto& cols_buf = scratch<T>(0);
    thread_local AlignedVector<T> dcols;

    for (std::size_t r0 = 0; r0 < s.height; r0 += tiling.band_rows) {
      const std::size_t r1 = std::min(s.height, r0 + tiling.band_rows);
      const std::size_t band = (r1 - r0) * s.width;
      const std::size_t ld = count * band;
      const auto ncols = static_cast<Eigen::Index>(ld);
      gather_columns(s, x.data(), first, count, r0, r1, cols_buf);
      ConstMatrixMap<T> cols(cols_buf.data(), rows, ncols);

      const T* dy_ptr = dy_first + r0 * s.width;
      Eigen::Index dy_stride = static_cast<Eigen::Index>(pixels);
      if (count > 1) {
        auto& buf = scratch<T>(1);
        buf.resize(s.out_channels * ld);
        for (std::size_t g = 0; g < count; ++g) {
          for (std::size_t o = 0; o < s.out_channels; ++o) {
            std::copy_n(dy_first + (g * s.out_channels + o) * pixels, pixels,
                        buf.data() + o * ld + g * pixels);
          }
        }
        dy_ptr = buf.data();
        dy_stride = ncols;
      }
      ConstStridedMap<T> dym(dy_ptr, outs, ncols, Eigen::OuterStride<>(dy_stride));

      if (r0 == 0) {
        dwc.noalias() = dym * cols.transpose();
        dbc = dym.rowwise().sum();
      } else {
        dwc.noalias() += dym * cols.transpose();
        dbc += dym.rowwise().sum();
      }

      if (!dx.empty()) {
        dcols.resize(rows_u * ld);
        MatrixMap<T>(dcols.data(), rows, ncols).noalias() = wmat.transpose() * dym;
        for (std::size_t g = 0; g < count; ++g) {
          T* dxn = dx.data() + (first + g) * s.in_channels * pixels;
          if (s.kernel == 1) {
            for (std::size_t i = 0; i < s.in_channels; ++i) {
              std::copy_n(dcols.data() + i * ld + g * band, band, dxn + i * pixels + r0 * s.width);
            }
          } else {
            col2im(s, dcols.data() + g * band, ld, r0, r1, dxn);
          }
        }
      }
    }
  }

  std::copy_n(dw_parts.begin(), wsize, dweight.begin());
  std::copy_n(db_parts.begin(), s.out_channels, dbias.begin());
  for (std::size_t c = 1; c < nchunks; ++c) {
    const T* dwc = dw_parts.data() + c * wsize;
    for (std::size_t k = 0; k < wsize; ++k) dweight[k] += dwc[k];
    const T* dbc = db_parts.data() + c * s.out_channels;
    for (std::size_t k = 0; k < s.out_channels; ++k) dbias[k] += dbc[k];
  }
}

template <typename T>
void maxpool2x2_forward(const PlaneShape& in, std::span<const T> x, std::span<T> y,
                        std::span<std::uint32_t> argmax) {
  const std::size_t oh = in.height / 2;
  const std::size_t ow = in.width / 2;
  const auto planes = static_cast<std::ptrdiff_t>(in.batch * in.channels);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < planes; ++p) {
    const std::size_t ibase = static_cast<std::size_t>(p) * in.height * in.width;
    for (std::size_t r = 0; r < oh; ++r) {
      const std::size_t top = ibase + 2 * r * in.width;
      for (std::size_t c = 0; c < ow; ++c) {
        const std::size_t cand[4] = {top + 2 * c, top + 2 * c + 1, top + in.width + 2 * c,
                                     top + in.width + 2 * c + 1};
        std::size_t best = cand[0];
        for (int k = 1; k < 4; ++k) {
          if (x[cand[k]] > x[best]) best = cand[k];
        }
        const std::size_t o = (static_cast<std::size_t>(p) * oh + r) * ow + c;
        y[o] = x[best];
        argmax[o] = static_cast<std::uint32_t>(best);
      }
    }
  }
}

template <typename T>
void maxpool2x2_backward(const PlaneShape& in, std::span<const T> dy,
                         std::span<const std::uint32_t> argmax, std::span<T> dx) {
  const std::size_t plane_out = (in.height / 2) * (in.width / 2);
  const std::size_t plane_in = in.height * in.width;
  const auto planes = static_cast<std::ptrdiff_t>(in.batch * in.channels);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < planes; ++p) {
    std::fill_n(dx.begin() + p * plane_in, plane_in, T{0});
    // Windows do not overlap, so each input receives at most one write.
    for (std::size_t o = p * plane_out; o < (p + 1) * plane_out; ++o) dx[argmax[o]] += dy[o];
  }
}

template <typename T>
void upsample2x_forward(const PlaneShape& in, std::span<const T> x, std::span<T> y) {
  const std::size_t ow = in.width * 2;
  const auto planes = static_cast<std::ptrdiff_t>(in.batch * in.channels);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < planes; ++p) {
    for (std::size_t r = 0; r < in.height; ++r) {
      const T* src = x.data() + (p * in.height + r) * in.width;
      T* top = y.data() + (p * in.height * 2 + 2 * r) * ow;
      for (std::size_t c = 0; c < in.width; ++c) top[2 * c] = top[2 * c + 1] = src[c];
      std::copy_n(top, ow, top + ow);
    }
  }
}

template <typename T>
void upsample2x_backward(const PlaneShape& in, std::span<const T> dy, std::span<T> dx) {
  const std::size_t ow = in.width * 2;
  const auto planes = static_cast<std::ptrdiff_t>(in.batch * in.channels);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < planes; ++p) {
    for (std::size_t r = 0; r < in.height; ++r) {
      const T* top = dy.data() + (p * in.height * 2 + 2 * r) * ow;
      const T* bottom = top + ow;
      T* out = dx.data() + (p * in.height + r) * in.width;
      for (std::size_t c = 0; c < in.width; ++c) {
        out[c] = (top[2 * c] + top[2 * c + 1]) + (bottom[2 * c] + bottom[2 * c + 1]);
      }
    }
  }
}

#define MTSEG_INSTANTIATE(T)                                                                    \
  template void conv2d_forward<T>(const ConvShape&, std::span<const T>, std::span<const T>,     \
                                  std::span<const T>, std::span<T>);                           \
  template void conv2d_backward<T>(const ConvShape&, std::span<const T>, std::span<const T>,    \
                                   std::span<const T>, std::span<T>, std::span<T>,              \
                                   std::span<T>);                                               \
  template void maxpool2x2_forward<T>(const PlaneShape&, std::span<const T>, std::span<T>,      \
                                      std::span<std::uint32_t>);                                \
  template void maxpool2x2_backward<T>(const PlaneShape&, std::span<const T>,                   \
                                       std::span<const std::uint32_t>, std::span<T>);           \
  template void upsample2x_forward<T>(const PlaneShape&, std::span<const T>, std::span<T>);     \
  template void upsample2x_backward<T>(const PlaneShape&, std::span<const T>, std::span<T>);

MTSEG_INSTANTIATE(float)
MTSEG_INSTANTIATE(double)
#undef MTSEG_INSTANTIATE

}  // namespace mtseg::kernels::parallel
