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

#include <omp.h>

#include <cmath>
#include <vector>

#include "doctest.h"
#include "mtseg/kernels.hpp"
#include "mtseg/rng.hpp"

using namespace mtseg;
using namespace mtseg::kernels;

namespace {

template <typename T>
std::vector<T> random_values(std::size_t n, Rng& rng) {
  std::vector<T> v(n);
  for (auto& x : v) x = static_cast<T>(uniform(rng, -1.0, 1.0));
  return v;
}

template <typename T>
double max_rel_diff(const std::vector<T>& a, const std::vector<T>& b) {
  double scale = 1e-30, diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    scale = std::max(scale, std::abs(static_cast<double>(a[i])));
    diff = std::max(diff, std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i])));
  }
  return diff / scale;
}

// Shapes covering image grouping (small maps), row bands (large maps),
// 1×1 kernels and odd sizes.
const ConvShape kShapes[] = {
    {1, 1, 1, 1, 1, 3},   {2, 3, 4, 5, 7, 3},  {16, 8, 16, 4, 4, 3}, {5, 16, 8, 2, 2, 3},
    {3, 4, 6, 32, 40, 3}, {2, 5, 3, 17, 9, 3}, {4, 6, 2, 16, 16, 1}, {1, 2, 3, 64, 64, 3},
    {9, 3, 5, 8, 8, 3},   {2, 3, 2, 6, 6, 5},
};

template <typename T>
void check_conv(const ConvShape& s, double tol) {
  Rng rng = make_stream({s.batch, s.in_channels, s.out_channels, s.height, s.width, s.kernel});
  const auto x = random_values<T>(s.input_size(), rng);
  const auto w = random_values<T>(s.weight_size(), rng);
  const auto b = random_values<T>(s.out_channels, rng);
  const auto dy = random_values<T>(s.output_size(), rng);

  std::vector<T> y_ref(s.output_size()), y_par(s.output_size());
  reference::conv2d_forward<T>(s, x, w, b, y_ref);
  parallel::conv2d_forward<T>(s, x, w, b, y_par);
  CHECK(max_rel_diff(y_ref, y_par) < tol);

  std::vector<T> dx_ref(s.input_size()), dx_par(s.input_size(), T(7));
  std::vector<T> dw_ref(s.weight_size()), dw_par(s.weight_size(), T(7));
  std::vector<T> db_ref(s.out_channels), db_par(s.out_channels, T(7));
  reference::conv2d_backward<T>(s, x, w, dy, dx_ref, dw_ref, db_ref);
  parallel::conv2d_backward<T>(s, x, w, dy, dx_par, dw_par, db_par);
  CHECK(max_rel_diff(dx_ref, dx_par) < tol);
  CHECK(max_rel_diff(dw_ref, dw_par) < tol);
  CHECK(max_rel_diff(db_ref, db_par) < tol);
}

}  // namespace

TEST_SUITE("reference kernels") {
  TEST_CASE("centered unit kernel copies its input") {
    ConvShape s{2, 1, 1, 5, 6, 3};
    Rng rng = make_stream({1});
    const auto x = random_values<double>(s.input_size(), rng);
    std::vector<double> w(9, 0.0), b(1, 0.0), y(s.output_size());
    w[4] = 1.0;
    reference::conv2d_forward<double>(s, x, w, b, y);
    CHECK(y == x);
  }

  TEST_CASE("zero padding at the border") {
    // All-ones 3×3 kernel over an all-ones 3×3 image counts in-frame neighbors.
    ConvShape s{1, 1, 1, 3, 3, 3};
    std::vector<double> x(9, 1.0), w(9, 1.0), b(1, 0.5), y(9);
    reference::conv2d_forward<double>(s, x, w, b, y);
    const double expected[9] = {4.5, 6.5, 4.5, 6.5, 9.5, 6.5, 4.5, 6.5, 4.5};
    for (int i = 0; i < 9; ++i) CHECK(y[i] == expected[i]);
  }

  TEST_CASE("backward matches finite differences") {
    ConvShape s{2, 2, 3, 4, 5, 3};
    Rng rng = make_stream({2});
    auto x = random_values<double>(s.input_size(), rng);
    auto w = random_values<double>(s.weight_size(), rng);
    auto b = random_values<double>(s.out_channels, rng);
    const auto dy = random_values<double>(s.output_size(), rng);
    auto objective = [&] {
      std::vector<double> y(s.output_size());
      reference::conv2d_forward<double>(s, x, w, b, y);
      double sum = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) sum += y[i] * dy[i];
      return sum;
    };
    std::vector<double> dx(s.input_size()), dw(s.weight_size()), db(s.out_channels);
    reference::conv2d_backward<double>(s, x, w, dy, dx, dw, db);
    const double h = 1e-6;
    auto check = [&](std::vector<double>& p, const std::vector<double>& g) {
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double keep = p[i];
        p[i] = keep + h;
        const double up = objective();
        p[i] = keep - h;
        const double down = objective();
        p[i] = keep;
        CHECK((up - down) / (2 * h) == doctest::Approx(g[i]).epsilon(1e-7));
      }
    };
    check(x, dx);
    check(w, dw);
    check(b, db);
  }

  TEST_CASE("max pool routes the gradient to the first maximum") {
    PlaneShape in{1, 1, 2, 4};
    const std::vector<float> x = {1, 3, 5, 5, 3, 2, 5, 4};
    std::vector<float> y(2);
    std::vector<std::uint32_t> arg(2);
    reference::maxpool2x2_forward<float>(in, x, y, arg);
    CHECK(y[0] == 3);
    CHECK(y[1] == 5);
    CHECK(arg[0] == 1);
    CHECK(arg[1] == 2);
    std::vector<float> dx(8, 9.0f);
    reference::maxpool2x2_backward<float>(in, std::vector<float>{1, 2}, arg, dx);
    const std::vector<float> expected = {0, 1, 2, 0, 0, 0, 0, 0};
    CHECK(dx == expected);
  }

  TEST_CASE("nearest upsampling and its adjoint") {
    PlaneShape in{1, 1, 1, 2};
    std::vector<float> y(8);
    reference::upsample2x_forward<float>(in, std::vector<float>{1, 2}, y);
    const std::vector<float> expected = {1, 1, 2, 2, 1, 1, 2, 2};
    CHECK(y == expected);
    std::vector<float> dx(2);
    reference::upsample2x_backward<float>(in, std::vector<float>{1, 2, 3, 4, 5, 6, 7, 8}, dx);
    CHECK(dx[0] == 1 + 2 + 5 + 6);
    CHECK(dx[1] == 3 + 4 + 7 + 8);
  }
}

TEST_SUITE("parallel kernels") {
  TEST_CASE("convolution agrees with the reference in double precision") {
    for (const auto& s : kShapes) check_conv<double>(s, 1e-12);
  }

  TEST_CASE("convolution agrees with the reference in single precision") {
    for (const auto& s : kShapes) check_conv<float>(s, 2e-5);
  }

  TEST_CASE("pooling and upsampling are bit-identical to the reference") {
    Rng rng = make_stream({9});
    for (const PlaneShape in : {PlaneShape{3, 4, 8, 6}, PlaneShape{1, 1, 2, 2}, PlaneShape{16, 32, 16, 16}}) {
      auto x = random_values<float>(in.size(), rng);
      // Force ties inside some windows.
      for (std::size_t i = 0; i + 1 < x.size(); i += 7) x[i + 1] = x[i];
      const PlaneShape out{in.batch, in.channels, in.height / 2, in.width / 2};
      std::vector<float> y1(out.size()), y2(out.size());
      std::vector<std::uint32_t> a1(out.size()), a2(out.size());
      reference::maxpool2x2_forward<float>(in, x, y1, a1);
      parallel::maxpool2x2_forward<float>(in, x, y2, a2);
      CHECK(y1 == y2);
      CHECK(a1 == a2);
      const auto dy = random_values<float>(out.size(), rng);
      std::vector<float> d1(in.size()), d2(in.size());
      reference::maxpool2x2_backward<float>(in, dy, a1, d1);
      parallel::maxpool2x2_backward<float>(in, dy, a2, d2);
      CHECK(d1 == d2);

      const PlaneShape big{in.batch, in.channels, in.height * 2, in.width * 2};
      std::vector<float> u1(big.size()), u2(big.size());
      reference::upsample2x_forward<float>(in, x, u1);
      parallel::upsample2x_forward<float>(in, x, u2);
      CHECK(u1 == u2);
      const auto du = random_values<float>(big.size(), rng);
      std::vector<float> g1(in.size()), g2(in.size());
      reference::upsample2x_backward<float>(in, du, g1);
      parallel::upsample2x_backward<float>(in, du, g2);
      CHECK(g1 == g2);
    }
  }

  TEST_CASE("results do not depend on the thread count") {
    const ConvShape s{16, 8, 16, 16, 16, 3};
    Rng rng = make_stream({10});
    const auto x = random_values<float>(s.input_size(), rng);
    const auto w = random_values<float>(s.weight_size(), rng);
    const auto b = random_values<float>(s.out_channels, rng);
    const auto dy = random_values<float>(s.output_size(), rng);
    auto run = [&](int threads) {
      const int saved = omp_get_max_threads();
      omp_set_num_threads(threads);
      std::vector<float> y(s.output_size()), dx(s.input_size()), dw(s.weight_size()), db(s.out_channels);
      parallel::conv2d_forward<float>(s, x, w, b, y);
      parallel::conv2d_backward<float>(s, x, w, dy, dx, dw, db);
      omp_set_num_threads(saved);
      y.insert(y.end(), dx.begin(), dx.end());
      y.insert(y.end(), dw.begin(), dw.end());
      y.insert(y.end(), db.begin(), db.end());
      return y;
    };
    const auto one = run(1);
    CHECK(one == run(3));
    CHECK(one == run(8));
  }

  TEST_CASE("backend dispatch") {
    CHECK(backend_name(Backend::reference) == "reference");
    CHECK(backend_name(Backend::parallel) == "parallel");
  }
}
