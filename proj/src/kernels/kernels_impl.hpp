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

#if defined(__x86_64__) || defined(__i386__)
#define EQDISC_HAVE_X86 1
#else
#define EQDISC_HAVE_X86 0
#endif

namespace eqdisc::kernels::detail {

double dot_scalar(const double* a, const double* b, std::size_t n);
double sum_scalar(const double* a, std::size_t n);
double sum_min_scalar(const double* a, const double* b, std::size_t n);
void axpy_scalar(double alpha, const double* x, double* y, std::size_t n);
void axpby_scalar(double alpha, const double* x, double beta, double* y, std::size_t n);
void scale_scalar(double* x, double s, std::size_t n);

#if EQDISC_HAVE_X86
bool avx2_available();
double dot_avx2(const double* a, const double* b, std::size_t n);
double sum_avx2(const double* a, std::size_t n);
double sum_min_avx2(const double* a, const double* b, std::size_t n);
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n);
void axpby_avx2(double alpha, const double* x, double beta, double* y, std::size_t n);
void scale_avx2(double* x, double s, std::size_t n);
#endif

}  // namespace eqdisc::kernels::detail
