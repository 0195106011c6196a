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

#include "doctest.h"
#include "eqdisc/lbp.hpp"
#include "eqdisc/rng.hpp"
#include "support/oracles.hpp"

using namespace eqdisc;
using expr::Equation;

namespace {

GrayImage random_patch(Rng& rng, int w, int h) {
    GrayImage img(w, h);
    for (auto& p : img.pix) p = rng.uniform();
    return img;
}

// Values on a dyadic grid keep the +c shift exact in binary floating point.
GrayImage dyadic_patch(Rng& rng, int w, int h) {
    GrayImage img(w, h);
    for (auto& p : img.pix) p = double(rng.uniform_int(48)) / 64.0;
    return img;
}

}  // namespace

TEST_SUITE_BEGIN("lbp");

TEST_CASE("flat patch with the offset threshold sets every bit") {
    GrayImage img(8, 8, 0.5);
    const auto eq = Equation::parse("Z - C + a");
    const lbp::LbpConfig cfg;
    CHECK(lbp::lbp_code(img, 4, 4, eq, cfg) == 255);
}

TEST_CASE("the offset stabilizes near-equal neighbor comparisons") {
    // Neighbor slightly darker than the center: the raw comparison drops the
    // bit, the offset comparison keeps it.
    GrayImage img(8, 8, 0.5);
    img.at(5, 4) = 0.495;  // neighbor p=0 of (4,4) at radius 1
    const lbp::LbpConfig cfg;
    const auto raw = Equation::parse("Z - C");
    const auto offset = Equation::parse("Z - C + a");
    CHECK((lbp::lbp_code(img, 4, 4, raw, cfg) & 1u) == 0);
    CHECK((lbp::lbp_code(img, 4, 4, offset, cfg) & 1u) == 1);
}

TEST_CASE("codes stay in range and match the independent recomputation") {
    Rng rng(31);
    const lbp::LbpConfig cfg;
    const auto eq = Equation::parse("Z - C + a");
    const auto eq2 = Equation::parse("(Z - C) / (a - C) * (Z / C) / (Z + C) + a");
    for (int round = 0; round < 50; ++round) {
        const GrayImage img = random_patch(rng, 9, 9);
        for (const auto* e : {&eq, &eq2}) {
            const auto code = lbp::lbp_code(img, 4, 4, *e, cfg);
            CHECK(code < (1u << cfg.neighbors));
            const auto ref = oracles::lbp_code_reference(img, 4, 4, e->text(), cfg.neighbors,
                                                         cfg.radius, cfg.offset);
            CHECK(code == ref);
        }
    }
}

TEST_CASE("non-unit radius with bilinear sampling matches the oracle") {
    Rng rng(77);
    lbp::LbpConfig cfg;
    cfg.neighbors = 12;
    cfg.radius = 2.5;
    const auto eq = Equation::parse("Z - C + a");
    for (int round = 0; round < 20; ++round) {
        const GrayImage img = random_patch(rng, 11, 11);
        const auto code = lbp::lbp_code(img, 5, 5, eq, cfg);
        const auto ref =
            oracles::lbp_code_reference(img, 5, 5, eq.text(), cfg.neighbors, cfg.radius, cfg.offset);
        CHECK(code == ref);
    }
}

TEST_CASE("out-of-interior pixels are rejected") {
    GrayImage img(8, 8, 0.5);
    const auto eq = Equation::parse("Z - C + a");
    const lbp::LbpConfig cfg;
    CHECK_THROWS_AS(lbp::lbp_code(img, 0, 4, eq, cfg), lbp::OutOfInterior);
    CHECK_THROWS_AS(lbp::lbp_code(img, 7, 4, eq, cfg), lbp::OutOfInterior);
    const auto codes = lbp::compute_codes(img, expr::CompiledEquation(eq), cfg);
    CHECK_THROWS_AS(lbp::region_histogram(codes, 4, 4, cfg), lbp::OutOfInterior);
}

TEST_CASE("monotonic illumination shifts leave offset-threshold codes unchanged") {
    Rng rng(13);
    lbp::LbpConfig cfg;
    const auto eq = Equation::parse("Z - C + a");
    for (int round = 0; round < 20; ++round) {
        GrayImage img = dyadic_patch(rng, 9, 9);
        GrayImage shifted = img;
        for (auto& p : shifted.pix) p += 0.25;  // exact in binary
        CHECK(lbp::lbp_code(img, 4, 4, eq, cfg) == lbp::lbp_code(shifted, 4, 4, eq, cfg));
    }
}

TEST_CASE("region histograms tally the window and normalize to one") {
    GrayImage img(16, 16, 0.5);
    const auto eq = Equation::parse("Z - C + a");
    lbp::LbpConfig cfg;
    cfg.region_radius = 3;

    const auto h = lbp::region_histogram(img, 8, 8, eq, cfg);
    CHECK(h.normalized);
    CHECK(h.bins.size() == 256);
    CHECK(h.bins[255] == doctest::Approx(1.0));

    const auto codes = lbp::compute_codes(img, expr::CompiledEquation(eq), cfg);
    const auto counts = lbp::region_histogram(codes, 8, 8, cfg, /*normalize=*/false);
    double total = 0.0;
    for (double b : counts.bins) total += b;
    CHECK(total == doctest::Approx(49.0));  // 7x7 window
}

TEST_CASE("step-edge histogram equals a brute-force tally") {
    Rng rng(3);
    GrayImage img = random_patch(rng, 20, 20);
    for (int y = 0; y < 20; ++y)
        for (int x = 10; x < 20; ++x) img.at(x, y) = std::min(1.0, img.at(x, y) + 0.4);
    const auto eq = Equation::parse("Z - C + a");
    lbp::LbpConfig cfg;

    const auto h = lbp::region_histogram(img, 10, 10, eq, cfg);
    std::vector<double> ref(256, 0.0);
    for (int y = 10 - cfg.region_radius; y <= 10 + cfg.region_radius; ++y)
        for (int x = 10 - cfg.region_radius; x <= 10 + cfg.region_radius; ++x)
            ref[oracles::lbp_code_reference(img, x, y, eq.text(), cfg.neighbors, cfg.radius,
                                            cfg.offset)] += 1.0;
    const double w = (2.0 * cfg.region_radius + 1) * (2.0 * cfg.region_radius + 1);
    for (int b = 0; b < 256; ++b) CHECK(h.bins[b] == doctest::Approx(ref[b] / w));
}

TEST_CASE("intersection is a symmetric overlap measure on the simplex") {
    GrayImage img(16, 16, 0.5);
    const auto eq = Equation::parse("Z - C + a");
    lbp::LbpConfig cfg;
    const auto h = lbp::region_histogram(img, 8, 8, eq, cfg);
    CHECK(lbp::intersection(h, h) == doctest::Approx(1.0));

    lbp::Histogram a, b;
    a.bins.assign(256, 0.0);
    b.bins.assign(256, 0.0);
    a.bins[0] = 1.0;
    b.bins[1] = 1.0;
    a.normalized = b.normalized = true;
    CHECK(lbp::intersection(a, b) == doctest::Approx(0.0));

    Rng rng(8);
    lbp::Histogram c, d;
    c.bins.assign(256, 0.0);
    d.bins.assign(256, 0.0);
    double cs = 0, ds = 0;
    for (int i = 0; i < 256; ++i) {
        c.bins[i] = rng.uniform();
        d.bins[i] = rng.uniform();
        cs += c.bins[i];
        ds += d.bins[i];
    }
    for (int i = 0; i < 256; ++i) {
        c.bins[i] /= cs;
        d.bins[i] /= ds;
    }
    c.normalized = d.normalized = true;
    double ref = 0.0;
    for (int i = 0; i < 256; ++i) ref += std::min(c.bins[i], d.bins[i]);
    CHECK(lbp::intersection(c, d) == doctest::Approx(ref));
    CHECK(lbp::intersection(c, d) == doctest::Approx(lbp::intersection(d, c)));
    CHECK(lbp::intersection(c, d) >= 0.0);
    CHECK(lbp::intersection(c, d) <= 1.0);

    lbp::Histogram unnorm;
    unnorm.bins.assign(256, 1.0);
    CHECK_THROWS_AS(lbp::intersection(c, unnorm), lbp::Unnormalized);
    lbp::Histogram small;
    small.bins.assign(16, 0.0);
    small.normalized = true;
    CHECK_THROWS_AS(lbp::intersection(c, small), lbp::BinCountMismatch);
}

TEST_CASE("circular windows tally only in-radius pixels") {
    Rng rng(55);
    GrayImage img = random_patch(rng, 20, 20);
    const auto eq = Equation::parse("Z - C + a");
    lbp::LbpConfig cfg;
    cfg.region_radius = 3;
    cfg.window = lbp::WindowShape::Circle;

    const auto codes = lbp::compute_codes(img, expr::CompiledEquation(eq), cfg);
    const auto counts = lbp::region_histogram(codes, 10, 10, cfg, /*normalize=*/false);
    double total = 0.0;
    for (double b : counts.bins) total += b;
    int expect = 0;
    for (int dy = -3; dy <= 3; ++dy)
        for (int dx = -3; dx <= 3; ++dx)
            if (dx * dx + dy * dy <= 9) ++expect;
    CHECK(total == doctest::Approx(double(expect)));

    const auto norm = lbp::region_histogram(codes, 10, 10, cfg);
    double sum = 0.0;
    for (double b : norm.bins) sum += b;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("non-finite threshold values map to bit zero") {
    GrayImage img(8, 8, 0.0);  // all zeros: Z/C = 0/0
    const auto eq = Equation::parse("Z / C");
    const lbp::LbpConfig cfg;
    CHECK(lbp::lbp_code(img, 4, 4, eq, cfg) == 0);
}

TEST_SUITE_END();
