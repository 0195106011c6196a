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

#include "eqdisc/mocmaes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "json.hpp"

namespace eqdisc::mocmaes {

namespace {

void check_same_dim(const std::vector<Point>& points) {
    if (points.empty()) return;
    const std::size_t m = points[0].size();
    if (m == 0) throw DimensionMismatch("objective vectors must be non-empty");
    for (const auto& p : points)
        if (p.size() != m) throw DimensionMismatch("objective vectors have mixed dimensions");
}

bool leq_ref(const Point& p, const Point& ref) {
    for (std::size_t j = 0; j < p.size(); ++j)
        if (p[j] > ref[j]) return false;
    return true;
}

bool finite(const Point& p) {
    for (double v : p)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace

bool dominates(const Point& a, const Point& b) {
    bool strictly = false;
    for (std::size_t j = 0; j < a.size(); ++j) {
        if (a[j] > b[j]) return false;
        if (a[j] < b[j]) strictly = true;
    }
    return strictly;
}

std::vector<int> pareto_rank(const std::vector<Point>& points) {
    check_same_dim(points);
    const std::size_t n = points.size();
    std::vector<int> rank(n, 0);
    std::vector<bool> assigned(n, false);
    std::size_t remaining = n;
    int level = 0;
    while (remaining > 0) {
        ++level;
        std::vector<std::size_t> front;
        for (std::size_t i = 0; i < n; ++i) {
            if (assigned[i]) continue;
            bool dominated = false;
            for (std::size_t k = 0; k < n && !dominated; ++k)
                if (k != i && !assigned[k] && dominates(points[k], points[i])) dominated = true;
            if (!dominated) front.push_back(i);
        }
        for (std::size_t i : front) {
            rank[i] = level;
            assigned[i] = true;
        }
        remaining -= front.size();
    }
    return rank;
}

Hv2dResult hypervolume_2d_ex(const std::vector<Point>& points, const Point& f_ref) {
    if (f_ref.size() != 2) throw DimensionMismatch("reference point must be 2-D");
    Hv2dResult result;
    std::vector<Point> kept;
    for (const auto& p : points) {
        if (p.size() != 2) throw DimensionMismatch("points must be 2-D");
        if (leq_ref(p, f_ref))
            kept.push_back(p);
        else
            ++result.excluded;
    }
    if (kept.empty()) return result;

    std::sort(kept.begin(), kept.end(), [](const Point& a, const Point& b) {
        return a[0] != b[0] ? a[0] < b[0] : a[1] < b[1];
    });
    // Sweep left to right; each non-dominated point contributes the slab
    // between its own f2 and the best f2 so far.
    double best_f2 = f_ref[1];
    double volume = 0.0;
    for (const auto& p : kept) {
        if (p[1] >= best_f2) continue;  // dominated (or duplicate)
        volume += (f_ref[0] - p[0]) * (best_f2 - p[1]);
        best_f2 = p[1];
    }
    result.volume = volume;
    return result;
}

double hypervolume_2d(const std::vector<Point>& points, const Point& f_ref) {
    return hypervolume_2d_ex(points, f_ref).volume;
}

double hypervolume_mc(const std::vector<Point>& points, const Point& f_ref, Rng& rng,
                      std::size_t samples) {
    check_same_dim(points);
    if (points.empty()) return 0.0;
    const std::size_t m = f_ref.size();
    Point lo(m, std::numeric_limits<double>::infinity());
    std::vector<Point> kept;
    for (const auto& p : points) {
        if (!leq_ref(p, f_ref)) continue;
        kept.push_back(p);
        for (std::size_t j = 0; j < m; ++j) lo[j] = std::min(lo[j], p[j]);
    }
    if (kept.empty()) return 0.0;
    double box = 1.0;
    for (std::size_t j = 0; j < m; ++j) box *= f_ref[j] - lo[j];
    if (box <= 0) return 0.0;
    std::size_t hits = 0;
    Point u(m);
    for (std::size_t s = 0; s < samples; ++s) {
        for (std::size_t j = 0; j < m; ++j) u[j] = rng.uniform(lo[j], f_ref[j]);
        for (const auto& p : kept) {
            if (leq_ref(p, u)) {
                ++hits;
                break;
            }
        }
    }
    return box * double(hits) / double(samples);
}

double contributing_hypervolume(const std::vector<Point>& front, std::size_t index,
                                const Point& f_ref) {
    if (index >= front.size()) throw PointNotInFront("index outside the front");
    std::vector<Point> without;
    without.reserve(front.size() - 1);
    for (std::size_t i = 0; i < front.size(); ++i)
        if (i != index) without.push_back(front[i]);
    if (f_ref.size() == 2)
        return hypervolume_2d(front, f_ref) - hypervolume_2d(without, f_ref);
    Rng rng(0x5eedULL);
    Rng rng2 = rng;
    return hypervolume_mc(front, f_ref, rng) - hypervolume_mc(without, f_ref, rng2);
}

double contributing_hypervolume(const Point& a, const std::vector<Point>& front,
                                const Point& f_ref) {
    for (std::size_t i = 0; i < front.size(); ++i)
        if (front[i] == a) return contributing_hypervolume(front, i, f_ref);
    throw PointNotInFront("point not found in the front");
}

std::vector<int> contribution_ranks(const std::vector<Point>& front, const Point& f_ref) {
    check_same_dim(front);
    const std::size_t n = front.size();
    const bool two_d = !front.empty() && front[0].size() == 2;

    // Recursive ranking: the member with the lowest exclusive contribution
    // gets rank 1 and is removed; contributions of the remainder are
    // recomputed for rank 2, and so on. Ties break by insertion order; the
    // extreme points of a 2-D front count as infinite contributors so they
    // are never discarded first.
    std::vector<bool> active(n, true);
    std::vector<int> ranks(n, 0);
    for (std::size_t round = 0; round < n; ++round) {
        std::vector<std::size_t> members;
        std::vector<Point> sub;
        for (std::size_t i = 0; i < n; ++i) {
            if (active[i]) {
                members.push_back(i);
                sub.push_back(front[i]);
            }
        }
        double min_f1 = std::numeric_limits<double>::infinity();
        double min_f2 = std::numeric_limits<double>::infinity();
        if (two_d) {
            for (const auto& p : sub) {
                min_f1 = std::min(min_f1, p[0]);
                min_f2 = std::min(min_f2, p[1]);
            }
        }
        std::size_t worst = 0;
        double worst_contrib = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < sub.size(); ++k) {
            double c;
            if (two_d && (sub[k][0] == min_f1 || sub[k][1] == min_f2) && sub.size() > 1)
                c = std::numeric_limits<double>::infinity();
            else
                c = contributing_hypervolume(sub, k, f_ref);
            if (c < worst_contrib) {
                worst_contrib = c;
                worst = k;
            }
        }
        ranks[members[worst]] = static_cast<int>(round) + 1;
        active[members[worst]] = false;
    }
    return ranks;
}

Individual Individual::make(Point x0, double sigma0, const StrategyParams& sp) {
    Individual ind;
    const std::size_t n = x0.size();
    ind.x = std::move(x0);
    ind.sigma = sigma0;
    ind.p_succ = sp.p_target;
    ind.path.assign(n, 0.0);
    ind.cov.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) ind.cov[i * n + i] = 1.0;
    return ind;
}

int cholesky(std::vector<double>& lower, const std::vector<double>& cov, std::size_t n) {
    double jitter = 0.0;
    double mean_diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean_diag += cov[i * n + i];
    mean_diag = n > 0 ? mean_diag / n : 1.0;
    for (int attempt = 0; attempt < 8; ++attempt) {
        lower.assign(n * n, 0.0);
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                double s = cov[i * n + j] + (i == j ? jitter : 0.0);
                for (std::size_t k = 0; k < j; ++k) s -= lower[i * n + k] * lower[j * n + k];
                if (i == j) {
                    if (s <= 0.0) {
                        ok = false;
                        break;
                    }
                    lower[i * n + i] = std::sqrt(s);
                } else {
                    lower[i * n + j] = s / lower[j * n + j];
                }
            }
        }
        if (ok) return attempt;
        jitter = jitter == 0.0 ? 1e-14 * std::max(mean_diag, 1e-300) : jitter * 16.0;
    }
    throw Error("covariance is not positive definite");
}

Population::Population(std::vector<Individual> parents, StrategyParams sp, double f_ref_margin)
    : parents_(std::move(parents)), sp_(sp), f_ref_margin_(f_ref_margin) {
    if (parents_.empty()) throw SizeMismatch("population needs at least one parent");
    std::vector<Point> fs;
    for (const auto& p : parents_) {
        if (p.f.empty()) throw SizeMismatch("initial parents must be evaluated");
        if (!finite(p.f)) throw Error("initial parent objectives must be finite");
        fs.push_back(p.f);
    }
    check_same_dim(fs);
    running_max_ = fs[0];
    for (const auto& f : fs)
        for (std::size_t j = 0; j < f.size(); ++j) running_max_[j] = std::max(running_max_[j], f[j]);
    f_ref_ = running_max_;
    for (double& v : f_ref_) v += f_ref_margin_;
}

void Population::update_f_ref(const Point& f) {
    for (std::size_t j = 0; j < f.size(); ++j) {
        running_max_[j] = std::max(running_max_[j], f[j]);
        f_ref_[j] = running_max_[j] + f_ref_margin_;
    }
}

std::vector<Individual> Population::ask(Rng& rng) const {
    std::vector<Individual> offspring;
    offspring.reserve(parents_.size());
    std::vector<double> lower, u, y;
    for (std::size_t i = 0; i < parents_.size(); ++i) {
        const Individual& parent = parents_[i];
        const std::size_t n = parent.dim();
        cholesky(lower, parent.cov, n);
        u.resize(n);
        y.assign(n, 0.0);
        for (auto& v : u) v = rng.normal();
        for (std::size_t r = 0; r < n; ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c <= r; ++c) s += lower[r * n + c] * u[c];
            y[r] = s;
        }
        Individual child = parent;
        child.f.clear();
        child.step = y;
        child.parent_index = i;
        for (std::size_t j = 0; j < n; ++j) child.x[j] = parent.x[j] + parent.sigma * y[j];
        offspring.push_back(std::move(child));
    }
    return offspring;
}

void Population::tell(std::vector<Individual> offspring, const std::vector<Point>& f_values) {
    const std::size_t mu = parents_.size();
    if (offspring.size() != mu || f_values.size() != mu)
        throw SizeMismatch("tell expects one offspring and objective vector per parent");

    struct Entry {
        Individual ind;
        bool is_offspring;
        std::size_t offspring_slot;  // valid when is_offspring
    };
    std::vector<Entry> pool;
    pool.reserve(2 * mu);
    for (std::size_t i = 0; i < mu; ++i) pool.push_back({parents_[i], false, 0});

    for (std::size_t i = 0; i < mu; ++i) {
        if (offspring[i].parent_index != i)
            throw SizeMismatch("offspring must be given in ask() order");
        if (!finite(f_values[i])) {
            ++discarded_non_finite_;
            continue;
        }
        Entry e{std::move(offspring[i]), true, i};
        e.ind.f = f_values[i];
        update_f_ref(f_values[i]);
        pool.push_back(std::move(e));
    }

    // Rank the pool: non-domination level first, then contributing
    // hypervolume within each level (higher contribution preferred; ties by
    // pool insertion order).
    std::vector<Point> pool_f;
    pool_f.reserve(pool.size());
    for (const auto& e : pool) pool_f.push_back(e.ind.f);
    const std::vector<int> levels = pareto_rank(pool_f);
    const int max_level = *std::max_element(levels.begin(), levels.end());

    std::vector<int> contrib_rank(pool.size(), 0);
    std::vector<int> front_size(pool.size(), 0);
    for (int level = 1; level <= max_level; ++level) {
        std::vector<std::size_t> members;
        std::vector<Point> front;
        for (std::size_t i = 0; i < pool.size(); ++i) {
            if (levels[i] == level) {
                members.push_back(i);
                front.push_back(pool_f[i]);
            }
        }
        const std::vector<int> ranks = contribution_ranks(front, f_ref_);
        for (std::size_t k = 0; k < members.size(); ++k) {
            contrib_rank[members[k]] = ranks[k];
            front_size[members[k]] = static_cast<int>(members.size());
        }
    }

    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (levels[a] != levels[b]) return levels[a] < levels[b];
        // Contribution rank 1 = lowest contribution = discarded first, so a
        // higher rank sorts earlier within the level.
        return contrib_rank[a] > contrib_rank[b];
    });
    order.resize(mu);

    std::vector<bool> selected(pool.size(), false);
    for (std::size_t i : order) selected[i] = true;

    // Success indicator per pair: the mutation succeeded iff the offspring
    // entered the new parent set.
    std::vector<bool> succ(mu, false);
    for (std::size_t i = 0; i < pool.size(); ++i)
        if (pool[i].is_offspring && selected[i]) succ[pool[i].offspring_slot] = true;

    auto update_step_size = [&](Individual& ind, bool success) {
        ind.p_succ = (1.0 - sp_.c_p) * ind.p_succ + sp_.c_p * (success ? 1.0 : 0.0);
        ind.sigma *= std::exp((ind.p_succ - sp_.p_target) / (sp_.d * (1.0 - sp_.p_target)));
    };

    for (std::size_t i = 0; i < mu; ++i) update_step_size(pool[i].ind, succ[i]);
    for (std::size_t i = mu; i < pool.size(); ++i) {
        Entry& e = pool[i];
        const bool success = succ[e.offspring_slot];
        update_step_size(e.ind, success);
        if (!success) continue;
        // Rank-one covariance update; the step input to the evolution path
        // freezes once the smoothed success rate is high.
        Individual& ind = e.ind;
        const std::size_t n = ind.dim();
        if (ind.p_succ <= sp_.p_thresh) {
            const double k = std::sqrt(sp_.c_c * (2.0 - sp_.c_c));
            for (std::size_t j = 0; j < n; ++j)
                ind.path[j] = (1.0 - sp_.c_c) * ind.path[j] + k * ind.step[j];
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t c = 0; c < n; ++c)
                    ind.cov[r * n + c] = (1.0 - sp_.c_cov) * ind.cov[r * n + c] +
                                         sp_.c_cov * ind.path[r] * ind.path[c];
        } else {
            const double cc = sp_.c_c * (2.0 - sp_.c_c);
            for (std::size_t j = 0; j < n; ++j) ind.path[j] *= 1.0 - sp_.c_c;
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t c = 0; c < n; ++c)
                    ind.cov[r * n + c] =
                        (1.0 - sp_.c_cov) * ind.cov[r * n + c] +
                        sp_.c_cov * (ind.path[r] * ind.path[c] + cc * ind.cov[r * n + c]);
        }
    }
    std::vector<Individual> next;
    next.reserve(mu);
    for (std::size_t i : order) next.push_back(std::move(pool[i].ind));
    parents_ = std::move(next);
    ++generation_;

    if (trace_) {
        TraceRecord rec;
        rec.generation = generation_;
        std::vector<Point> front;
        for (const auto& p : parents_) rec.parent_objectives.push_back(p.f);
        const std::vector<int> pr = pareto_rank(rec.parent_objectives);
        for (std::size_t i = 0; i < parents_.size(); ++i)
            if (pr[i] == 1) front.push_back(parents_[i].f);
        if (!front.empty() && front[0].size() == 2)
            rec.front_hypervolume = hypervolume_2d(front, f_ref_);
        double smin = parents_[0].sigma, smax = parents_[0].sigma, ssum = 0.0;
        for (const auto& p : parents_) {
            smin = std::min(smin, p.sigma);
            smax = std::max(smax, p.sigma);
            ssum += p.sigma;
        }
        rec.sigma_min = smin;
        rec.sigma_max = smax;
        rec.sigma_mean = ssum / double(parents_.size());
        trace_->push_back(std::move(rec));
    }
}

const std::vector<TraceRecord>& Population::trace() const {
    static const std::vector<TraceRecord> empty;
    return trace_ ? *trace_ : empty;
}

std::string TraceRecord::to_json() const {
    nlohmann::json j;
    j["generation"] = generation;
    j["parent_objectives"] = parent_objectives;
    j["hypervolume"] = front_hypervolume;
    j["sigma"] = {{"min", sigma_min}, {"mean", sigma_mean}, {"max", sigma_max}};
    return j.dump();
}

std::size_t categorical_bin(double x, std::size_t k) {
    if (k == 0) throw DimensionMismatch("empty choice list");
    if (x < 0.0) x = 0.0;
    if (x >= 1.0) x = std::nextafter(1.0, 0.0);
    auto bin = static_cast<std::size_t>(x * double(k));
    return bin >= k ? k - 1 : bin;
}

std::vector<std::size_t> encode_categorical(const std::vector<std::size_t>& choice_sizes,
                                            const Point& x) {
    if (choice_sizes.size() != x.size())
        throw DimensionMismatch("search point dimension does not match the space");
    std::vector<std::size_t> out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = categorical_bin(x[j], choice_sizes[j]);
    return out;
}

}  // namespace eqdisc::mocmaes
