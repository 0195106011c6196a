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

#include "eqdisc/kernels.hpp"

#include <algorithm>
#include <stdexcept>

#include "kernels_impl.hpp"

namespace eqdisc::kernels {

namespace detail {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double sum_scalar(const double* a, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i];
    return acc;
}

double sum_min_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += std::min(a[i], b[i]);
    return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void axpby_scalar(double alpha, const double* x, double beta, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = alpha * x[i] + beta * y[i];
}

void scale_scalar(double* x, double s, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= s;
}

}  // namespace detail

namespace {

struct Table {
    double (*dot)(const double*, const double*, std::size_t);
    double (*sum)(const double*, std::size_t);
    double (*sum_min)(const double*, const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
    void (*axpby)(double, const double*, double, double*, std::size_t);
    void (*scale)(double*, double, std::size_t);
};

constexpr Table kScalarTable{detail::dot_scalar,  detail::sum_scalar,
                             detail::sum_min_scalar, detail::axpy_scalar,
                             detail::axpby_scalar, detail::scale_scalar};

#if EQDISC_HAVE_X86
constexpr Table kAvx2Table{detail::dot_avx2,  detail::sum_avx2,  detail::sum_min_avx2,
                           detail::axpy_avx2, detail::axpby_avx2, detail::scale_avx2};
#endif

Backend pick_auto() {
#if EQDISC_HAVE_X86
    if (detail::avx2_available()) return Backend::Avx2;
#endif
    return Backend::Scalar;
}

const Table* table_for(Backend b) {
#if EQDISC_HAVE_X86
    if (b == Backend::Avx2) return &kAvx2Table;
#endif
    (void)b;
    return &kScalarTable;
}

Backend g_backend = pick_auto();
const Table* g_table = table_for(g_backend);

}  // namespace

Backend active_backend() { return g_backend; }

std::string_view backend_name() {
    return g_backend == Backend::Avx2 ? "avx2" : "scalar";
}

bool backend_supported(Backend b) {
    if (b == Backend::Scalar) return true;
#if EQDISC_HAVE_X86
    return detail::avx2_available();
#else
    return false;
#endif
}

void select_backend(Backend b) {
    if (!backend_supported(b)) throw std::invalid_argument("kernel backend not supported on this CPU");
    g_backend = b;
    g_table = table_for(b);
}

void select_auto() { select_backend(pick_auto()); }

double dot(const double* a, const double* b, std::size_t n) { return g_table->dot(a, b, n); }
double sum(const double* a, std::size_t n) { return g_table->sum(a, n); }
double sum_min(const double* a, const double* b, std::size_t n) { return g_table->sum_min(a, b, n); }
void axpy(double alpha, const double* x, double* y, std::size_t n) { g_table->axpy(alpha, x, y, n); }
void axpby(double alpha, const double* x, double beta, double* y, std::size_t n) {
    g_table->axpby(alpha, x, beta, y, n);
}
void scale(double* x, double s, std::size_t n) { g_table->scale(x, s, n); }

}  // namespace eqdisc::kernels
