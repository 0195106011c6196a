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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "eqdisc/errors.hpp"
#include "eqdisc/rng.hpp"

// Multi-objective covariance matrix adaptation evolution strategy
// (generational mu x (1+1) scheme, minimization). Selection ranks the pooled
// parents and offspring by non-domination level first and contributing
// hypervolume second; the success of each mutation drives per-individual
// step-size adaptation and a rank-one covariance update.
namespace eqdisc::mocmaes {

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class SizeMismatch : public Error {
public:
    using Error::Error;
};

class PointNotInFront : public Error {
public:
    using Error::Error;
};

using Point = std::vector<double>;

/// Non-domination levels, rank 1 = non-dominated, aligned to the input
/// order. a dominates b iff a <= b componentwise and a != b.
std::vector<int> pareto_rank(const std::vector<Point>& points);

bool dominates(const Point& a, const Point& b);

struct Hv2dResult {
    double volume = 0.0;
    std::size_t excluded = 0;  // points not componentwise <= reference
};

/// Exact sort-and-sweep hypervolume for two objectives. Points that violate
/// the reference are excluded and counted. Empty input yields 0.
Hv2dResult hypervolume_2d_ex(const std::vector<Point>& points, const Point& f_ref);
double hypervolume_2d(const std::vector<Point>& points, const Point& f_ref);

/// Monte Carlo hypervolume for three or more objectives (approximate).
double hypervolume_mc(const std::vector<Point>& points, const Point& f_ref, Rng& rng,
                      std::size_t samples = 100000);

/// S(front) - S(front minus the point at index), exact for two objectives.
double contributing_hypervolume(const std::vector<Point>& front, std::size_t index,
                                const Point& f_ref);
/// Overload locating a by value; throws PointNotInFront when absent.
double contributing_hypervolume(const Point& a, const std::vector<Point>& front,
                                const Point& f_ref);

/// Rank 1 = lowest contribution (discarded first). The extreme points of a
/// 2-D front get infinite contribution so they are never discarded first;
/// ties break by position in the front (insertion order).
std::vector<int> contribution_ranks(const std::vector<Point>& front, const Point& f_ref);

struct StrategyParams {
    double p_target;   // target success probability
    double c_p;        // success smoothing rate
    double d;          // step-size damping
    double c_c;        // evolution-path learning rate
    double c_cov;      // covariance learning rate
    double p_thresh;   // path-freeze threshold

    static StrategyParams defaults(std::size_t n) {
        StrategyParams sp;
        sp.p_target = 2.0 / 11.0;
        sp.c_p = 1.0 / 12.0;
        sp.d = 1.0 + n / 2.0;
        sp.c_c = 2.0 / (n + 2.0);
        sp.c_cov = 2.0 / (double(n) * n + 6.0);
        sp.p_thresh = 0.44;
        return sp;
    }
};

struct Individual {
    Point x;
    double sigma = 0.3;
    double p_succ = 2.0 / 11.0;       // smoothed success probability
    std::vector<double> path;          // evolution path p_c
    std::vector<double> cov;           // n x n covariance, row-major
    Point f;                           // objective vector (minimization)

    // ask() bookkeeping
    std::vector<double> step;          // y = (x' - x_parent) / sigma_parent
    std::size_t parent_index = 0;

    std::size_t dim() const { return x.size(); }
    static Individual make(Point x0, double sigma0, const StrategyParams& sp);
};

struct TraceRecord {
    std::size_t generation = 0;
    std::vector<Point> parent_objectives;
    double front_hypervolume = 0.0;
    double sigma_min = 0.0, sigma_mean = 0.0, sigma_max = 0.0;

    std::string to_json() const;
};

class Population {
public:
    /// Parents must carry evaluated objective vectors of a common dimension.
    Population(std::vector<Individual> parents, StrategyParams sp, double f_ref_margin = 1.0);

    std::size_t size() const { return parents_.size(); }
    std::size_t generation() const { return generation_; }
    const std::vector<Individual>& parents() const { return parents_; }
    const Point& f_ref() const { return f_ref_; }
    const StrategyParams& strategy() const { return sp_; }
    std::size_t discarded_non_finite() const { return discarded_non_finite_; }

    /// One offspring per parent: x' = x + sigma * y, y ~ N(0, C).
    std::vector<Individual> ask(Rng& rng) const;

    /// Ranks parents + offspring, keeps the best mu, updates success
    /// statistics, step sizes and covariances. Offspring with non-finite
    /// objectives are discarded and counted.
    void tell(std::vector<Individual> offspring, const std::vector<Point>& f_values);

    void enable_trace() { trace_.emplace(); }
    const std::vector<TraceRecord>& trace() const;

private:
    void update_f_ref(const Point& f);

    std::vector<Individual> parents_;
    StrategyParams sp_;
    std::size_t generation_ = 0;
    Point running_max_;
    Point f_ref_;
    double f_ref_margin_;
    std::size_t discarded_non_finite_ = 0;
    std::optional<std::vector<TraceRecord>> trace_;
};

/// Maps one coordinate of [0,1) onto k categorical bins.
std::size_t categorical_bin(double x, std::size_t k);

/// Maps a point in [0,1]^n onto per-coordinate choice-list indices.
std::vector<std::size_t> encode_categorical(const std::vector<std::size_t>& choice_sizes,
                                            const Point& x);

/// Cholesky L with C = L L^T; adds diagonal jitter on failure and reports
/// how many retries were needed (0 for a clean factorization).
int cholesky(std::vector<double>& lower, const std::vector<double>& cov, std::size_t n);

}  // namespace eqdisc::mocmaes
