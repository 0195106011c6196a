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

#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Arithmetic inner-loop kernels used by the recurrent network, the histogram
// model and the evolution strategy. Every kernel has a scalar reference
// implementation and (on x86-64) an AVX2+FMA variant; the backend is picked
// once at startup from CPU features and can be overridden for testing. The
// two backends are equivalence-tested against each other; results may differ
// by summation order at the level of floating-point rounding.
namespace eqdisc::kernels {

enum class Backend { Scalar, Avx2 };

Backend active_backend();
std::string_view backend_name();
bool backend_supported(Backend b);

/// Force a specific backend (used by the equivalence tests). Throws
/// std::invalid_argument if the host CPU does not support it.
void select_backend(Backend b);

/// Re-select the best supported backend.
void select_auto();

// sum_i a[i]*b[i]
double dot(const double* a, const double* b, std::size_t n);
// sum_i a[i]
double sum(const double* a, std::size_t n);
// sum_i min(a[i], b[i])  (histogram intersection inner loop)
double sum_min(const double* a, const double* b, std::size_t n);
// y[i] += alpha * x[i]
void axpy(double alpha, const double* x, double* y, std::size_t n);
// y[i] = alpha * x[i] + beta * y[i]
void axpby(double alpha, const double* x, double beta, double* y, std::size_t n);
// x[i] *= s
void scale(double* x, double s, std::size_t n);

inline double dot(std::span<const double> a, std::span<const double> b) {
    return dot(a.data(), b.data(), a.size());
}
inline double sum(std::span<const double> a) { return sum(a.data(), a.size()); }
inline double sum_min(std::span<const double> a, std::span<const double> b) {
    return sum_min(a.data(), b.data(), a.size());
}

// Dense helpers built on the dispatched kernels. A is row-major rows x cols.

// y = A x
inline void matvec(const double* a, const double* x, double* y, std::size_t rows,
                   std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) y[r] = dot(a + r * cols, x, cols);
}

// y += A^T x   (y has cols entries, x has rows entries)
inline void matvec_t_acc(const double* a, const double* x, double* y, std::size_t rows,
                         std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) axpy(x[r], a + r * cols, y, cols);
}

// A += u v^T   (rank-one accumulate for weight gradients)
inline void ger_acc(double* a, const double* u, const double* v, std::size_t rows,
                    std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) axpy(u[r], v, a + r * cols, cols);
}

}  // namespace eqdisc::kernels
