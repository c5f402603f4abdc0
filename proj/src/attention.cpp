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

#include "mtseg/attention.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mtseg {
namespace {

template <typename T>
T sigmoid(T a) {
  return T{1} / (T{1} + std::exp(-a));
}

void require_size(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw std::invalid_argument(std::string("scSE: ") + what + " has " + std::to_string(got) +
                                " elements, expected " + std::to_string(want));
  }
}

template <typename T>
std::size_t check_channel(const kernels::PlaneShape& s, std::size_t xsize,
                          const ChannelGateWeights<T>& w) {
  require_size(xsize, s.size(), "input");
  const std::size_t hidden = w.fc1_bias.size();
  if (hidden == 0) throw std::invalid_argument("scSE: channel gate hidden width is zero");
  require_size(w.fc1_weight.size(), hidden * s.channels, "fc1 weight");
  require_size(w.fc2_weight.size(), s.channels * hidden, "fc2 weight");
  require_size(w.fc2_bias.size(), s.channels, "fc2 bias");
  return hidden;
}

template <typename T>
void check_spatial(const kernels::PlaneShape& s, std::size_t xsize, const SpatialGateWeights<T>& w) {
  require_size(xsize, s.size(), "input");
  require_size(w.weight.size(), s.channels, "sSE weight");
  require_size(w.bias.size(), 1, "sSE bias");
}

// Channel gate for one sample; fills pooled, hidden and gate.
template <typename T>
void channel_gate(std::size_t C, std::size_t HW, std::size_t hidden, const T* x,
                  const ChannelGateWeights<T>& w, T* pooled, T* hid, T* gate) {
  for (std::size_t c = 0; c < C; ++c) {
    T sum{0};
    for (std::size_t p = 0; p < HW; ++p) sum += x[c * HW + p];
    pooled[c] = sum / static_cast<T>(HW);
  }
  for (std::size_t j = 0; j < hidden; ++j) {
    T a = w.fc1_bias[j];
    for (std::size_t c = 0; c < C; ++c) a += w.fc1_weight[j * C + c] * pooled[c];
    hid[j] = a > T{0} ? a : T{0};
  }
  for (std::size_t c = 0; c < C; ++c) {
    T a = w.fc2_bias[c];
    for (std::size_t j = 0; j < hidden; ++j) a += w.fc2_weight[c * hidden + j] * hid[j];
    gate[c] = sigmoid(a);
  }
}

template <typename T>
void spatial_gate(std::size_t C, std::size_t HW, const T* x, const SpatialGateWeights<T>& w,
                  T* gate) {
  for (std::size_t p = 0; p < HW; ++p) gate[p] = w.bias[0];
  for (std::size_t c = 0; c < C; ++c) {
    const T wc = w.weight[c];
    for (std::size_t p = 0; p < HW; ++p) gate[p] += wc * x[c * HW + p];
  }
  for (std::size_t p = 0; p < HW; ++p) gate[p] = sigmoid(gate[p]);
}

}  // namespace

template <typename T>
void cse_forward(const kernels::PlaneShape& s, std::span<const T> x, const ChannelGateWeights<T>& w,
                 std::span<T> y) {
  const std::size_t hidden = check_channel(s, x.size(), w);
  require_size(y.size(), s.size(), "output");
  const std::size_t C = s.channels;
  const std::size_t HW = s.height * s.width;
  const auto N = static_cast<std::ptrdiff_t>(s.batch);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t n = 0; n < N; ++n) {
    std::vector<T> pooled(C), hid(hidden), gate(C);
    const T* xn = x.data() + n * C * HW;
    T* yn = y.data() + n * C * HW;
    channel_gate(C, HW, hidden, xn, w, pooled.data(), hid.data(), gate.data());
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t p = 0; p < HW; ++p) yn[c * HW + p] = gate[c] * xn[c * HW + p];
    }
  }
}

template <typename T>
void sse_forward(const kernels::PlaneShape& s, std::span<const T> x, const SpatialGateWeights<T>& w,
                 std::span<T> y) {
  check_spatial(s, x.size(), w);
  require_size(y.size(), s.size(), "output");
  const std::size_t C = s.channels;
  const std::size_t HW = s.height * s.width;
  const auto N = static_cast<std::ptrdiff_t>(s.batch);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t n = 0; n < N; ++n) {
    std::vector<T> gate(HW);
    const T* xn = x.data() + n * C * HW;
    T* yn = y.data() + n * C * HW;
    spatial_gate(C, HW, xn, w, gate.data());
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t p = 0; p < HW; ++p) yn[c * HW + p] = gate[p] * xn[c * HW + p];
    }
  }
}

template <typename T>
void scse_forward(const kernels::PlaneShape& s, std::span<const T> x, const ScseWeights<T>& w,
                  std::span<T> y, ScseCache<T>* cache) {
  const std::size_t hidden = check_channel(s, x.size(), w.channel);
  check_spatial(s, x.size(), w.spatial);
  require_size(y.size(), s.size(), "output");
  const std::size_t C = s.channels;
  const std::size_t HW = s.height * s.width;
  const auto N = static_cast<std::ptrdiff_t>(s.batch);

  ScseCache<T> local;
  ScseCache<T>& c = cache ? *cache : local;
  c.pooled.assign(s.batch * C, T{0});
  c.hidden.assign(s.batch * hidden, T{0});
  c.channel_gate.assign(s.batch * C, T{0});
  c.spatial_gate.assign(s.batch * HW, T{0});

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t n = 0; n < N; ++n) {
    const T* xn = x.data() + n * C * HW;
    T* yn = y.data() + n * C * HW;
    T* cg = c.channel_gate.data() + n * C;
    T* sg = c.spatial_gate.data() + n * HW;
    channel_gate(C, HW, hidden, xn, w.channel, c.pooled.data() + n * C,
                 c.hidden.data() + n * hidden, cg);
    spatial_gate(C, HW, xn, w.spatial, sg);
    for (std::size_t ch = 0; ch < C; ++ch) {
      for (std::size_t p = 0; p < HW; ++p) {
        const T v = xn[ch * HW + p];
        yn[ch * HW + p] = cg[ch] * v + sg[p] * v;
      }
    }
  }
}

template <typename T>
void scse_backward(const kernels::PlaneShape& s, std::span<const T> x, const ScseWeights<T>& w,
                   const ScseCache<T>& cache, std::span<const T> dy, std::span<T> dx,
                   const ScseGrads<T>& grads) {
  const std::size_t hidden = check_channel(s, x.size(), w.channel);
  check_spatial(s, x.size(), w.spatial);
  require_size(dy.size(), s.size(), "output gradient");
  require_size(dx.size(), s.size(), "input gradient");
  const std::size_t C = s.channels;
  const std::size_t HW = s.height * s.width;
  const auto N = static_cast<std::ptrdiff_t>(s.batch);

  // Per-sample parameter gradient partials, laid out back to back.
  const std::size_t n_fc1w = hidden * C, n_fc1b = hidden, n_fc2w = C * hidden, n_fc2b = C;
  const std::size_t n_sw = C, n_sb = 1;
  const std::size_t stride = n_fc1w + n_fc1b + n_fc2w + n_fc2b + n_sw + n_sb;
  std::vector<T> parts(s.batch * stride, T{0});

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t n = 0; n < N; ++n) {
    const T* xn = x.data() + n * C * HW;
    const T* dyn = dy.data() + n * C * HW;
    T* dxn = dx.data() + n * C * HW;
    const T* z = cache.pooled.data() + n * C;
    const T* h = cache.hidden.data() + n * hidden;
    const T* sc = cache.channel_gate.data() + n * C;
    const T* q = cache.spatial_gate.data() + n * HW;

    T* g_fc1w = parts.data() + n * stride;
    T* g_fc1b = g_fc1w + n_fc1w;
    T* g_fc2w = g_fc1b + n_fc1b;
    T* g_fc2b = g_fc2w + n_fc2w;
    T* g_sw = g_fc2b + n_fc2b;
    T* g_sb = g_sw + n_sw;

    std::vector<T> dchan(C, T{0}), dspat(HW, T{0});
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t p = 0; p < HW; ++p) {
        const T g = dyn[c * HW + p];
        const T v = xn[c * HW + p];
        dxn[c * HW + p] = (sc[c] + q[p]) * g;
        dchan[c] += g * v;
        dspat[p] += g * v;
      }
    }

    // Channel branch.
    std::vector<T> dpre2(C), dpre1(hidden, T{0});
    for (std::size_t c = 0; c < C; ++c) {
      dpre2[c] = dchan[c] * sc[c] * (T{1} - sc[c]);
      g_fc2b[c] = dpre2[c];
      for (std::size_t j = 0; j < hidden; ++j) {
        g_fc2w[c * hidden + j] = dpre2[c] * h[j];
        dpre1[j] += w.channel.fc2_weight[c * hidden + j] * dpre2[c];
      }
    }
    for (std::size_t j = 0; j < hidden; ++j) {
      if (!(h[j] > T{0})) dpre1[j] = T{0};
      g_fc1b[j] = dpre1[j];
      for (std::size_t c = 0; c < C; ++c) g_fc1w[j * C + c] = dpre1[j] * z[c];
    }
    for (std::size_t c = 0; c < C; ++c) {
      T dz{0};
      for (std::size_t j = 0; j < hidden; ++j) dz += w.channel.fc1_weight[j * C + c] * dpre1[j];
      const T share = dz / static_cast<T>(HW);
      for (std::size_t p = 0; p < HW; ++p) dxn[c * HW + p] += share;
    }

    // Spatial branch.
    for (std::size_t p = 0; p < HW; ++p) dspat[p] *= q[p] * (T{1} - q[p]);
    T db{0};
    for (std::size_t p = 0; p < HW; ++p) db += dspat[p];
    g_sb[0] = db;
    for (std::size_t c = 0; c < C; ++c) {
      const T wc = w.spatial.weight[c];
      T acc{0};
      for (std::size_t p = 0; p < HW; ++p) {
        acc += dspat[p] * xn[c * HW + p];
        dxn[c * HW + p] += wc * dspat[p];
      }
      g_sw[c] = acc;
    }
  }

  std::vector<T> total(stride, T{0});
  for (std::size_t n = 0; n < s.batch; ++n) {
    const T* part = parts.data() + n * stride;
    for (std::size_t k = 0; k < stride; ++k) total[k] += part[k];
  }
  auto emit = [&](std::span<T> dst, std::size_t offset, std::size_t count, const char* what) {
    require_size(dst.size(), count, what);
    std::copy_n(total.begin() + offset, count, dst.begin());
  };
  std::size_t off = 0;
  emit(grads.fc1_weight, off, n_fc1w, "fc1 weight gradient");
  emit(grads.fc1_bias, off += n_fc1w, n_fc1b, "fc1 bias gradient");
  emit(grads.fc2_weight, off += n_fc1b, n_fc2w, "fc2 weight gradient");
  emit(grads.fc2_bias, off += n_fc2w, n_fc2b, "fc2 bias gradient");
  emit(grads.sse_weight, off += n_fc2b, n_sw, "sSE weight gradient");
  emit(grads.sse_bias, off += n_sw, n_sb, "sSE bias gradient");
}

#define MTSEG_INSTANTIATE(T)                                                                   \
  template void cse_forward<T>(const kernels::PlaneShape&, std::span<const T>,                 \
                               const ChannelGateWeights<T>&, std::span<T>);                    \
  template void sse_forward<T>(const kernels::PlaneShape&, std::span<const T>,                 \
                               const SpatialGateWeights<T>&, std::span<T>);                    \
  template void scse_forward<T>(const kernels::PlaneShape&, std::span<const T>,                \
                                const ScseWeights<T>&, std::span<T>, ScseCache<T>*);           \
  template void scse_backward<T>(const kernels::PlaneShape&, std::span<const T>,               \
                                 const ScseWeights<T>&, const ScseCache<T>&,                   \
                                 std::span<const T>, std::span<T>, const ScseGrads<T>&);

MTSEG_INSTANTIATE(float)
MTSEG_INSTANTIATE(double)
#undef MTSEG_INSTANTIATE

}  // namespace mtseg
