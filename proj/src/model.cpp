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

#include "mtseg/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mtseg {

void ModelConfig::validate() const {
  if (in_channels < 1) throw std::invalid_argument("model.in_channels must be >= 1");
  if (num_classes < 2) throw std::invalid_argument("model.num_classes must be >= 2");
  if (depth < 2) throw std::invalid_argument("model.depth must be >= 2");
  if (depth > 8) throw std::invalid_argument("model.depth must be <= 8");
  if (base_channels < 1) throw std::invalid_argument("model.base_channels must be >= 1");
  if (cse_reduction < 1) throw std::invalid_argument("model.cse_reduction must be >= 1");
}

namespace {

using kernels::Backend;
using kernels::ConvShape;
using kernels::PlaneShape;

std::string level_name(const char* prefix, int level) { return prefix + std::to_string(level); }


template <typename T>
void add_conv(ParamSet<T>& p, const std::string& name, std::size_t out, std::size_t in, std::size_t k) {
  p.add(name + ".weight", {out, in, k, k});
  p.add(name + ".bias", {out});
}

template <typename T>
void add_scse(ParamSet<T>& p, const std::string& name, std::size_t channels, std::size_t hidden) {
  p.add(name + ".cse.fc1.weight", {hidden, channels});
  p.add(name + ".cse.fc1.bias", {hidden});
  p.add(name + ".cse.fc2.weight", {channels, hidden});
  p.add(name + ".cse.fc2.bias", {channels});
  p.add(name + ".sse.weight", {1, channels, 1, 1});
  p.add(name + ".sse.bias", {1});
}

template <typename T>
ScseWeights<T> scse_view(const ParamSet<T>& p, const std::string& name) {
  ScseWeights<T> w;
  w.channel.fc1_weight = p.get(name + ".cse.fc1.weight").span();
  w.channel.fc1_bias = p.get(name + ".cse.fc1.bias").span();
  w.channel.fc2_weight = p.get(name + ".cse.fc2.weight").span();
  w.channel.fc2_bias = p.get(name + ".cse.fc2.bias").span();
  w.spatial.weight = p.get(name + ".sse.weight").span();
  w.spatial.bias = p.get(name + ".sse.bias").span();
  return w;
}

template <typename T>
ScseGrads<T> scse_grad_view(ParamSet<T>& g, const std::string& name) {
  ScseGrads<T> v;
  v.fc1_weight = g.get(name + ".cse.fc1.weight").span();
  v.fc1_bias = g.get(name + ".cse.fc1.bias").span();
  v.fc2_weight = g.get(name + ".cse.fc2.weight").span();
  v.fc2_bias = g.get(name + ".cse.fc2.bias").span();
  v.sse_weight = g.get(name + ".sse.weight").span();
  v.sse_bias = g.get(name + ".sse.bias").span();
  return v;
}

PlaneShape plane_of(const Shape& s) { return PlaneShape{s[0], s[1], s[2], s[3]}; }

template <typename T>
void conv_layer(Backend backend, const ParamSet<T>& p, const std::string& name, const Tensor<T>& x,
                std::size_t out, std::size_t k, bool relu, Tensor<T>& y) {
  const auto& w = p.get(name + ".weight");
  const auto& b = p.get(name + ".bias");
  const ConvShape s{x.dim(0), x.dim(1), out, x.dim(2), x.dim(3), k};
  require_same_shape(w.shape(), Shape{out, x.dim(1), k, k}, (name + ".weight").c_str());
  y = Tensor<T>({s.batch, out, s.height, s.width});
  kernels::conv2d_forward<T>(backend, s, x.span(), w.span(), b.span(), y.span());
  if (relu) {
    for (auto& v : y.span()) v = v > T{0} ? v : T{0};
  }
}

// dy is taken by value: the ReLU mask is applied in place.
template <typename T>
void conv_layer_backward(Backend backend, const ParamSet<T>& p, const std::string& name,
                         const Tensor<T>& x, const Tensor<T>& y, Tensor<T> dy, bool relu,
                         Tensor<T>* dx, ParamSet<T>& grads) {
  const auto& w = p.get(name + ".weight");
  const ConvShape s{x.dim(0), x.dim(1), y.dim(1), x.dim(2), x.dim(3), w.dim(2)};
  if (relu) {
    for (std::size_t i = 0; i < dy.size(); ++i) {
      if (!(y[i] > T{0})) dy[i] = T{0};
    }
  }
  std::span<T> dx_span;
  if (dx != nullptr) {
    *dx = Tensor<T>(x.shape());
    dx_span = dx->span();
  }
  kernels::conv2d_backward<T>(backend, s, x.span(), w.span(), dy.span(), dx_span,
                              grads.get(name + ".weight").span(), grads.get(name + ".bias").span());
}

template <typename T>
void concat_channels(const Tensor<T>& a, const Tensor<T>& b, Tensor<T>& out) {
  const std::size_t N = a.dim(0), HW = a.dim(2) * a.dim(3);
  const std::size_t ca = a.dim(1) * HW, cb = b.dim(1) * HW;
  out = Tensor<T>({N, a.dim(1) + b.dim(1), a.dim(2), a.dim(3)});
  for (std::size_t n = 0; n < N; ++n) {
    std::copy_n(a.data() + n * ca, ca, out.data() + n * (ca + cb));
    std::copy_n(b.data() + n * cb, cb, out.data() + n * (ca + cb) + ca);
  }
}

template <typename T>
void split_channels(const Tensor<T>& in, std::size_t first, Tensor<T>& a, Tensor<T>& b) {
  const std::size_t N = in.dim(0), HW = in.dim(2) * in.dim(3);
  const std::size_t second = in.dim(1) - first;
  a = Tensor<T>({N, first, in.dim(2), in.dim(3)});
  b = Tensor<T>({N, second, in.dim(2), in.dim(3)});
  const std::size_t ca = first * HW, cb = second * HW;
  for (std::size_t n = 0; n < N; ++n) {
    std::copy_n(in.data() + n * (ca + cb), ca, a.data() + n * ca);
    std::copy_n(in.data() + n * (ca + cb) + ca, cb, b.data() + n * cb);
  }
}

}  // namespace

template <typename T>
UNet<T>::UNet(ModelConfig config, kernels::Backend backend) : config_(config), backend_(backend) {
  config_.validate();
}

template <typename T>
ParamSet<T> UNet<T>::layout() const {
  ParamSet<T> p(ParamRole::student);
  const int D = config_.depth;
  const auto r = static_cast<std::size_t>(config_.cse_reduction);
  for (int i = 0; i <= D; ++i) {
    const std::size_t in = i == 0 ? static_cast<std::size_t>(config_.in_channels) : config_.channels_at(i - 1);
    const std::size_t c = config_.channels_at(i);
    const std::string name = level_name("enc", i);
    add_conv(p, name + ".conv1", c, in, 3);
    add_conv(p, name + ".conv2", c, c, 3);
    if (config_.attention_enabled) add_scse(p, name + ".scse", c, cse_hidden_width(c, r));
  }
  for (int i = D - 1; i >= 0; --i) {
    const std::size_t c = config_.channels_at(i);
    const std::string name = level_name("dec", i);
    add_conv(p, name + ".up", c, config_.channels_at(i + 1), 3);
    add_conv(p, name + ".conv1", c, 2 * c, 3);
    add_conv(p, name + ".conv2", c, c, 3);
    if (config_.attention_enabled) add_scse(p, name + ".scse", c, cse_hidden_width(c, r));
  }
  add_conv(p, "head", static_cast<std::size_t>(config_.num_classes), config_.channels_at(0), 1);
  return p;
}

template <typename T>
Tensor<T> UNet<T>::forward(const ParamSet<T>& params, const Tensor<T>& images) const {
  ForwardCache<T> cache;
  return forward(params, images, cache);
}

template <typename T>
Tensor<T> UNet<T>::forward(const ParamSet<T>& params, const Tensor<T>& images,
                           ForwardCache<T>& cache) const {
  if (images.rank() != 4 || images.dim(1) != static_cast<std::size_t>(config_.in_channels)) {
    throw std::invalid_argument("unet_forward: expected N x " + std::to_string(config_.in_channels) +
                                " x H x W input, got " + shape_string(images.shape()));
  }
  const std::size_t div = config_.spatial_divisor();
  if (images.dim(2) == 0 || images.dim(3) == 0 || images.dim(2) % div != 0 || images.dim(3) % div != 0) {
    throw std::invalid_argument("unet_forward: spatial size " + std::to_string(images.dim(2)) + "x" +
                                std::to_string(images.dim(3)) + " is not divisible by " +
                                std::to_string(div) + " (2^depth)");
  }
  const int D = config_.depth;
  cache.input = images;
  cache.encoder.assign(static_cast<std::size_t>(D) + 1, {});
  cache.decoder.assign(static_cast<std::size_t>(D), {});

  const Tensor<T>* x = &cache.input;
  for (int i = 0; i <= D; ++i) {
    auto& E = cache.encoder[static_cast<std::size_t>(i)];
    const std::string name = level_name("enc", i);
    const std::size_t c = config_.channels_at(i);
    conv_layer(backend_, params, name + ".conv1", *x, c, 3, true, E.conv1);
    conv_layer(backend_, params, name + ".conv2", E.conv1, c, 3, true, E.conv2);
    if (config_.attention_enabled) {
      E.out = Tensor<T>(E.conv2.shape());
      scse_forward<T>(plane_of(E.conv2.shape()), E.conv2.span(), scse_view(params, name + ".scse"),
                      E.out.span(), &E.scse);
    } else {
      E.out = E.conv2;
    }
    if (i < D) {
      const PlaneShape ps = plane_of(E.out.shape());
      E.pooled = Tensor<T>({ps.batch, ps.channels, ps.height / 2, ps.width / 2});
      E.argmax.assign(E.pooled.size(), 0);
      kernels::maxpool2x2_forward<T>(backend_, ps, E.out.span(), E.pooled.span(), E.argmax);
      x = &E.pooled;
    }
  }

  const Tensor<T>* prev = &cache.encoder.back().out;
  for (int i = D - 1; i >= 0; --i) {
    auto& Dd = cache.decoder[static_cast<std::size_t>(i)];
    const auto& skip = cache.encoder[static_cast<std::size_t>(i)].out;
    const std::string name = level_name("dec", i);
    const std::size_t c = config_.channels_at(i);
    const PlaneShape ps = plane_of(prev->shape());
    Dd.upsampled = Tensor<T>({ps.batch, ps.channels, ps.height * 2, ps.width * 2});
    kernels::upsample2x_forward<T>(backend_, ps, prev->span(), Dd.upsampled.span());
    conv_layer(backend_, params, name + ".up", Dd.upsampled, c, 3, true, Dd.up);
    concat_channels(skip, Dd.up, Dd.concat);
    conv_layer(backend_, params, name + ".conv1", Dd.concat, c, 3, true, Dd.conv1);
    conv_layer(backend_, params, name + ".conv2", Dd.conv1, c, 3, true, Dd.conv2);
    if (config_.attention_enabled) {
      Dd.out = Tensor<T>(Dd.conv2.shape());
      scse_forward<T>(plane_of(Dd.conv2.shape()), Dd.conv2.span(), scse_view(params, name + ".scse"),
                      Dd.out.span(), &Dd.scse);
    } else {
      Dd.out = Dd.conv2;
    }
    prev = &Dd.out;
  }

  Tensor<T> logits;
  conv_layer(backend_, params, "head", *prev, static_cast<std::size_t>(config_.num_classes), 1, false,
             logits);
  return logits;
}

template <typename T>
ParamSet<T> UNet<T>::backward(const ParamSet<T>& params, const ForwardCache<T>& cache,
                              const Tensor<T>& dlogits) const {
  const int D = config_.depth;
  if (cache.encoder.size() != static_cast<std::size_t>(D) + 1) {
    throw std::invalid_argument("unet_backward: cache does not come from this network");
  }
  ParamSet<T> grads = params.zeros_like();

  const auto& top = cache.decoder[0].out;
  Tensor<T> head_out(dlogits.shape());  // unused by a linear head; shape carrier only
  Tensor<T> dprev;
  conv_layer_backward(backend_, params, "head", top, head_out, dlogits, false, &dprev, grads);

  std::vector<Tensor<T>> dskip(static_cast<std::size_t>(D));
  for (int i = 0; i < D; ++i) {
    const auto& Dd = cache.decoder[static_cast<std::size_t>(i)];
    const std::string name = level_name("dec", i);
    Tensor<T> dconv2;
    if (config_.attention_enabled) {
      dconv2 = Tensor<T>(Dd.conv2.shape());
      scse_backward<T>(plane_of(Dd.conv2.shape()), Dd.conv2.span(), scse_view(params, name + ".scse"),
                       Dd.scse, dprev.span(), dconv2.span(), scse_grad_view(grads, name + ".scse"));
    } else {
      dconv2 = std::move(dprev);
    }
    Tensor<T> dconv1, dconcat, dupsampled;
    conv_layer_backward(backend_, params, name + ".conv2", Dd.conv1, Dd.conv2, std::move(dconv2), true,
                        &dconv1, grads);
    conv_layer_backward(backend_, params, name + ".conv1", Dd.concat, Dd.conv1, std::move(dconv1), true,
                        &dconcat, grads);
    Tensor<T> dup;
    split_channels(dconcat, config_.channels_at(i), dskip[static_cast<std::size_t>(i)], dup);
    conv_layer_backward(backend_, params, name + ".up", Dd.upsampled, Dd.up, std::move(dup), true,
                        &dupsampled, grads);
    const auto& below = i + 1 < D ? cache.decoder[static_cast<std::size_t>(i) + 1].out
                                  : cache.encoder[static_cast<std::size_t>(D)].out;
    dprev = Tensor<T>(below.shape());
    kernels::upsample2x_backward<T>(backend_, plane_of(below.shape()), dupsampled.span(), dprev.span());
  }

  Tensor<T> dout = std::move(dprev);
  for (int i = D; i >= 0; --i) {
    const auto& E = cache.encoder[static_cast<std::size_t>(i)];
    const std::string name = level_name("enc", i);
    if (i < D) {
      // dout holds the gradient arriving through the pool; add the skip path.
      const auto& skip = dskip[static_cast<std::size_t>(i)];
      for (std::size_t k = 0; k < dout.size(); ++k) dout[k] = skip[k] + dout[k];
    }
    Tensor<T> dconv2;
    if (config_.attention_enabled) {
      dconv2 = Tensor<T>(E.conv2.shape());
      scse_backward<T>(plane_of(E.conv2.shape()), E.conv2.span(), scse_view(params, name + ".scse"),
                       E.scse, dout.span(), dconv2.span(), scse_grad_view(grads, name + ".scse"));
    } else {
      dconv2 = std::move(dout);
    }
    Tensor<T> dconv1;
    conv_layer_backward(backend_, params, name + ".conv2", E.conv1, E.conv2, std::move(dconv2), true,
                        &dconv1, grads);
    const Tensor<T>& input = i == 0 ? cache.input : cache.encoder[static_cast<std::size_t>(i) - 1].pooled;
    if (i == 0) {
      conv_layer_backward(backend_, params, name + ".conv1", input, E.conv1, std::move(dconv1), true,
                          static_cast<Tensor<T>*>(nullptr), grads);
    } else {
      Tensor<T> dinput;
      conv_layer_backward(backend_, params, name + ".conv1", input, E.conv1, std::move(dconv1), true,
                          &dinput, grads);
      const auto& below = cache.encoder[static_cast<std::size_t>(i) - 1];
      dout = Tensor<T>(below.out.shape());
      kernels::maxpool2x2_backward<T>(backend_, plane_of(below.out.shape()), dinput.span(),
                                      below.argmax, dout.span());
    }
  }
  return grads;
}

template <typename T>
ParamSet<T> init_params(const ModelConfig& config, std::uint64_t seed) {
  ParamSet<T> p = UNet<T>(config).layout();
  std::uint64_t index = 0;
  for (auto& e : p.entries()) {
    auto& v = e.value;
    if (v.rank() >= 2) {
      std::size_t fan_in = 1;
      for (std::size_t d = 1; d < v.rank(); ++d) fan_in *= v.dim(d);
      const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
      Rng rng = make_stream({seed, kTagInit, index});
      std::uniform_real_distribution<double> dist(-bound, bound);
      for (auto& x : v.span()) x = static_cast<T>(dist(rng));
    }
    ++index;
  }
  return p;
}

template <typename T>
Tensor<T> softmax_probs(const Tensor<T>& logits) {
  if (logits.rank() != 4) throw std::invalid_argument("softmax_probs: expected N x K x H x W logits");
  Tensor<T> probs(logits.shape());
  const std::size_t N = logits.dim(0), K = logits.dim(1), P = logits.dim(2) * logits.dim(3);
  for (std::size_t n = 0; n < N; ++n) {
    const T* in = logits.data() + n * K * P;
    T* out = probs.data() + n * K * P;
    for (std::size_t p = 0; p < P; ++p) {
      T mx = in[p];
      for (std::size_t k = 1; k < K; ++k) mx = std::max(mx, in[k * P + p]);
      T sum{0};
      for (std::size_t k = 0; k < K; ++k) {
        out[k * P + p] = std::exp(in[k * P + p] - mx);
        sum += out[k * P + p];
      }
      for (std::size_t k = 0; k < K; ++k) out[k * P + p] /= sum;
    }
  }
  return probs;
}

template <typename T>
void softmax_backward(std::span<const T> probs, std::span<const T> dprobs, std::size_t K,
                      std::span<T> dlogits) {
  const std::size_t P = probs.size() / K;
  for (std::size_t p = 0; p < P; ++p) {
    T dot{0};
    for (std::size_t k = 0; k < K; ++k) dot += probs[k * P + p] * dprobs[k * P + p];
    for (std::size_t k = 0; k < K; ++k) dlogits[k * P + p] += probs[k * P + p] * (dprobs[k * P + p] - dot);
  }
}

template <typename T>
Tensor<T> inject_noise(const Tensor<T>& images, const NoiseConfig& noise, Rng& rng) {
  if (noise.sigma < 0) throw std::invalid_argument("noise sigma must be >= 0");
  Tensor<T> out = images;
  if (!noise.enabled || noise.sigma == 0.0) return out;
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (auto& v : out.span()) {
    const double x = static_cast<double>(v) + noise.sigma * gauss(rng);
    v = static_cast<T>(std::clamp(x, 0.0, 1.0));
  }
  return out;
}

template <typename T>
Tensor<T> to_tensor(std::span<const RgbImage> images) {
  if (images.empty()) return Tensor<T>();
  const std::size_t H = images[0].height, W = images[0].width;
  Tensor<T> out({images.size(), 3, H, W});
  for (std::size_t n = 0; n < images.size(); ++n) {
    const auto& img = images[n];
    if (img.height != H || img.width != W) throw std::invalid_argument("to_tensor: images differ in size");
    for (std::size_t r = 0; r < H; ++r) {
      for (std::size_t c = 0; c < W; ++c) {
        for (std::size_t ch = 0; ch < 3; ++ch) out.at(n, ch, r, c) = static_cast<T>(img.at(r, c, ch));
      }
    }
  }
  return out;
}

template <typename T>
Tensor<T> to_tensor(const RgbImage& image) {
  return to_tensor<T>(std::span<const RgbImage>(&image, 1));
}

namespace {

template <typename T>
void check_inputs(const UNet<T>& net, const LossInputs<T>& in) {
  const std::size_t nl = in.masks.size();
  if (nl > 0) {
    if (in.labeled_images.rank() != 4 || in.labeled_images.dim(0) != nl) {
      throw std::invalid_argument("total loss: labeled images and masks disagree in count");
    }
    for (const auto& m : in.masks) {
      if (m.height != in.labeled_images.dim(2) || m.width != in.labeled_images.dim(3)) {
        throw std::invalid_argument("total loss: mask shape differs from image shape");
      }
    }
  }
  if (!in.consistency_images.empty()) {
    const auto& ci = in.consistency_images;
    const Shape want{ci.dim(0), static_cast<std::size_t>(net.config().num_classes), ci.dim(2), ci.dim(3)};
    require_same_shape(in.teacher_probs.shape(), want, "total loss: teacher probabilities");
  }
}

template <typename T>
struct Supervised {
  double ce = 0.0, dice = 0.0;
  Tensor<T> dlogits;
};

template <typename T>
Supervised<T> supervised_terms(const Tensor<T>& logits, const std::vector<BinaryMask>& masks, T w1,
                               bool want_grad) {
  Supervised<T> s;
  const Tensor<T> probs = softmax_probs(logits);
  const std::size_t N = masks.size(), K = logits.dim(1);
  if (want_grad) s.dlogits = Tensor<T>(logits.shape());
  const T scale = w1 / static_cast<T>(N);
  for (std::size_t n = 0; n < N; ++n) {
    const auto pn = probs.sample(n);
    const std::span<const std::uint8_t> mn(masks[n].values);
    s.ce += ce_loss<T>(pn, mn, K);
    s.dice += dice_loss<T>(pn, mn, K);
    if (want_grad) {
      auto dn = s.dlogits.sample(n);
      ce_grad_logits<T>(pn, mn, K, scale, dn);
      std::vector<T> dprobs(pn.size(), T{0});
      dice_grad_probs<T>(pn, mn, K, scale, dprobs);
      softmax_backward<T>(pn, dprobs, K, dn);
    }
  }
  s.ce /= static_cast<double>(N);
  s.dice /= static_cast<double>(N);
  return s;
}

template <typename T>
struct Consistency {
  double value = 0.0;
  Tensor<T> dlogits;
};

template <typename T>
Consistency<T> consistency_terms(const Tensor<T>& logits, const Tensor<T>& teacher, T w2, bool want_grad) {
  Consistency<T> c;
  const Tensor<T> probs = softmax_probs(logits);
  c.value = consistency_loss<T>(probs.span(), teacher.span());
  if (want_grad) {
    Tensor<T> dprobs(probs.shape());
    consistency_grad_probs<T>(probs.span(), teacher.span(), w2, dprobs.span());
    c.dlogits = Tensor<T>(logits.shape());
    const std::size_t K = logits.dim(1);
    for (std::size_t n = 0; n < logits.dim(0); ++n) {
      softmax_backward<T>(probs.sample(n), dprobs.sample(n), K, c.dlogits.sample(n));
    }
  }
  return c;
}

}  // namespace

template <typename T>
LossAndGrad<T> grad_total_loss(const UNet<T>& net, const ParamSet<T>& params, const LossInputs<T>& inputs) {
  check_inputs(net, inputs);
  LossAndGrad<T> out;
  out.grads = params.zeros_like();
  double ce = 0.0, dice = 0.0, cons = 0.0;
  if (!inputs.masks.empty()) {
    ForwardCache<T> cache;
    const Tensor<T> logits = net.forward(params, inputs.labeled_images, cache);
    auto sup = supervised_terms(logits, inputs.masks, static_cast<T>(inputs.weights.w1), true);
    ce = sup.ce;
    dice = sup.dice;
    out.grads = net.backward(params, cache, sup.dlogits);
  }
  if (!inputs.consistency_images.empty()) {
    ForwardCache<T> cache;
    const Tensor<T> logits = net.forward(params, inputs.consistency_images, cache);
    auto c = consistency_terms(logits, inputs.teacher_probs, static_cast<T>(inputs.weights.w2), true);
    cons = c.value;
    accumulate(out.grads, net.backward(params, cache, c.dlogits));
  }
  out.loss = total_loss(ce, dice, cons, inputs.weights);
  return out;
}

template <typename T>
LossBreakdown evaluate_total_loss(const UNet<T>& net, const ParamSet<T>& params, const LossInputs<T>& inputs) {
  check_inputs(net, inputs);
  double ce = 0.0, dice = 0.0, cons = 0.0;
  if (!inputs.masks.empty()) {
    const auto sup = supervised_terms(net.forward(params, inputs.labeled_images), inputs.masks,
                                      static_cast<T>(inputs.weights.w1), false);
    ce = sup.ce;
    dice = sup.dice;
  }
  if (!inputs.consistency_images.empty()) {
    cons = consistency_terms(net.forward(params, inputs.consistency_images), inputs.teacher_probs,
                             static_cast<T>(inputs.weights.w2), false)
               .value;
  }
  return total_loss(ce, dice, cons, inputs.weights);
}

#define MTSEG_INSTANTIATE(T)                                                                       \
  template class UNet<T>;                                                                          \
  template ParamSet<T> init_params<T>(const ModelConfig&, std::uint64_t);                          \
  template Tensor<T> softmax_probs<T>(const Tensor<T>&);                                           \
  template void softmax_backward<T>(std::span<const T>, std::span<const T>, std::size_t,           \
                                    std::span<T>);                                                 \
  template Tensor<T> inject_noise<T>(const Tensor<T>&, const NoiseConfig&, Rng&);                  \
  template Tensor<T> to_tensor<T>(std::span<const RgbImage>);                                      \
  template Tensor<T> to_tensor<T>(const RgbImage&);                                                \
  template LossAndGrad<T> grad_total_loss<T>(const UNet<T>&, const ParamSet<T>&,                   \
                                             const LossInputs<T>&);                                \
  template LossBreakdown evaluate_total_loss<T>(const UNet<T>&, const ParamSet<T>&,                \
                                                const LossInputs<T>&);

MTSEG_INSTANTIATE(float)
MTSEG_INSTANTIATE(double)
#undef MTSEG_INSTANTIATE

}  // namespace mtseg
