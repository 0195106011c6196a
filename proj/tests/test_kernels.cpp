// Copyright 2026 The eqdisc Authors.
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

#include <cmath>
#include <vector>

#include "doctest.h"
#include "eqdisc/kernels.hpp"
#include "eqdisc/rng.hpp"

using namespace eqdisc;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(-1.0, 1.0);
    return v;
}

}  // namespace

TEST_SUITE_BEGIN("kernels");

TEST_CASE("scalar kernels match hand-computed values") {
    kernels::select_backend(kernels::Backend::Scalar);
    const double a[] = {1.0, 2.0, 3.0};
    const double b[] = {4.0, -5.0, 6.0};
    CHECK(kernels::dot(a, b, 3) == doctest::Approx(12.0));
    CHECK(kernels::sum(a, 3) == doctest::Approx(6.0));
    CHECK(kernels::sum_min(a, b, 3) == doctest::Approx(1.0 - 5.0 + 3.0));
    double y[] = {1.0, 1.0, 1.0};
    kernels::axpy(2.0, a, y, 3);
    CHECK(y[0] == doctest::Approx(3.0));
    CHECK(y[2] == doctest::Approx(7.0));
    kernels::axpby(0.5, a, 2.0, y, 3);
    CHECK(y[0] == doctest::Approx(6.5));
    kernels::select_auto();
}

TEST_CASE("simd backend agrees with the scalar reference") {
    if (!kernels::backend_supported(kernels::Backend::Avx2)) {
        MESSAGE("avx2 not available; skipping equivalence check");
        return;
    }
    Rng rng(42);
    // Lengths straddle every vector-width boundary and tail case.
    for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 15u, 16u, 31u, 64u, 255u, 1000u}) {
        const auto a = random_vec(rng, n);
        const auto b = random_vec(rng, n);
        auto y0 = random_vec(rng, n);
        auto y1 = y0;

        kernels::select_backend(kernels::Backend::Scalar);
        const double dot_s = kernels::dot(a.data(), b.data(), n);
        const double sum_s = kernels::sum(a.data(), n);
        const double min_s = kernels::sum_min(a.data(), b.data(), n);
        kernels::axpy(0.7, a.data(), y0.data(), n);
        kernels::axpby(1.3, b.data(), -0.4, y0.data(), n);

        kernels::select_backend(kernels::Backend::Avx2);
        const double dot_v = kernels::dot(a.data(), b.data(), n);
        const double sum_v = kernels::sum(a.data(), n);
        const double min_v = kernels::sum_min(a.data(), b.data(), n);
        kernels::axpy(0.7, a.data(), y1.data(), n);
        kernels::axpby(1.3, b.data(), -0.4, y1.data(), n);

        const double tol = 1e-12 * (double(n) + 1.0);
        CHECK(std::abs(dot_s - dot_v) <= tol);
        CHECK(std::abs(sum_s - sum_v) <= tol);
        CHECK(std::abs(min_s - min_v) <= tol);
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y0[i] - y1[i]) <= 1e-12);
    }
    kernels::select_auto();
}

TEST_CASE("matvec helpers compose dot and axpy correctly") {
    Rng rng(7);
    const std::size_t rows = 5, cols = 3;
    const auto a = random_vec(rng, rows * cols);
    const auto x = random_vec(rng, cols);
    const auto xr = random_vec(rng, rows);

    std::vector<double> y(rows, 0.0);
    kernels::matvec(a.data(), x.data(), y.data(), rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        double expect = 0.0;
        for (std::size_t c = 0; c < cols; ++c) expect += a[r * cols + c] * x[c];
        CHECK(y[r] == doctest::Approx(expect));
    }

    std::vector<double> yt(cols, 0.0);
    kernels::matvec_t_acc(a.data(), xr.data(), yt.data(), rows, cols);
    for (std::size_t c = 0; c < cols; ++c) {
        double expect = 0.0;
        for (std::size_t r = 0; r < rows; ++r) expect += a[r * cols + c] * xr[r];
        CHECK(yt[c] == doctest::Approx(expect));
    }

    std::vector<double> g(rows * cols, 0.0);
    kernels::ger_acc(g.data(), xr.data(), x.data(), rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) CHECK(g[r * cols + c] == doctest::Approx(xr[r] * x[c]));
}

TEST_SUITE_END();
