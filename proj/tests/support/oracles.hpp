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

// Independent reference implementations ("oracles") used by the unit and
// acceptance suites. Everything here is deliberately written from first
// principles, without reusing library internals, so agreement between the
// two routes is meaningful.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "eqdisc/image.hpp"

namespace oracles {

/// Precedence-climbing arithmetic interpreter working directly on the
/// equation string (variables Z, C, a; operators + - * /; parentheses;
/// unary sign inside parentheses).
double eval_equation_text(std::string_view text, double z, double c, double a);

/// Exhaustive pairwise-dominance Pareto ranking (minimization).
std::vector<int> pareto_rank_bruteforce(const std::vector<std::vector<double>>& points);

/// Union-of-boxes area by inclusion-exclusion (2-D, up to ~20 points).
double hypervolume_2d_inclusion_exclusion(const std::vector<std::vector<double>>& points,
                                          const std::vector<double>& f_ref);

/// KL(N(mu, diag sigma^2) || N(0, I)) by composite-Simpson quadrature over
/// each latent dimension.
double kl_quadrature(const std::vector<double>& mu, const std::vector<double>& sigma);

/// Standalone LBP code computation with its own angle and interpolation
/// code; the threshold equation is evaluated by eval_equation_text.
std::uint32_t lbp_code_reference(const eqdisc::GrayImage& img, int x, int y,
                                 std::string_view equation, int neighbors, double radius,
                                 double offset);

/// Plain per-pixel confusion recount. Returns {tp, tn, fp, fn, ignored}.
std::vector<std::uint64_t> confusion_reference(const eqdisc::ByteImage& mask,
                                               const eqdisc::ByteImage& gt);

}  // namespace oracles
