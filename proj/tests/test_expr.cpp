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
#include <set>

#include "doctest.h"
#include "eqdisc/expr.hpp"
#include "eqdisc/rng.hpp"
#include "support/oracles.hpp"

using namespace eqdisc;
using expr::Equation;
using expr::EquationStructure;
using expr::OperatorVector;

namespace {

// The six reference structure/equation pairs the regression tests pin.
struct TableRow {
    const char* scene;
    const char* structure;
    const char* equation;
};

const TableRow kTableRows[] = {
    {"peopleInShade", "(Z o C) o (a o C) o (Z o C) o (Z o C) o a",
     "(Z - C) / (a - C) * (Z / C) / (Z + C) + a"},
    {"snowFall", "(Z o (Z o C) o (Z o C) o (Z o C) o (Z o C) o (Z o C)) o a",
     "(Z +( Z / C) * (Z + C) + (Z / C) - (Z - C) * (Z - C)) + a"},
    {"canoe", "(Z o C) o (Z o C) o (Z o C) o (Z o C) o  (Z o C) o (Z o C o C) o a",
     "(Z - C) + (Z + C) * (Z + C) + (Z + C) / (Z / C) - (Z + C + C) / a"},
    {"busStation", "(Z o C) o (Z o C) o (Z o C) o (Z o C) o (Z o C) o a",
     "(Z - C) + (Z + C) + (Z - C) - (Z / C) - (Z * C) * a"},
    {"skating", "Z o C o ((Z o C) o (Z o C) o (Z o C)) o a",
     "Z / C/ ((Z / C) - (Z + C) +(Z / C)) + a"},
    {"fall", "((Z o C) o (Z o C) o (Z o C)) o ((o C) o (Z o C)) o a",
     "((Z / C) * (Z / C) / (Z + C)) / ((-C) / (Z + C)) +  a"},
};

// Extracts the operator assignment of a concrete equation relative to its
// structure (token-level diff through the parsed operator list).
OperatorVector operators_of(const std::string& equation_text) {
    return Equation::parse(equation_text).operators();
}

}  // namespace

TEST_SUITE_BEGIN("expr");

TEST_CASE("parse_structure canonicalizes and counts placeholders") {
    const auto s = expr::parse_structure("(Z o C) o a");
    CHECK(s.text() == "(Z o C) o a");
    CHECK(s.placeholder_count() == 2);
    CHECK(s.binary_count() == 2);

    const auto messy = expr::parse_structure("( Z o C )o a");
    CHECK(messy.text() == "(Z o C) o a");

    // Placeholder count equals the number of 'o' tokens.
    const auto people = expr::parse_structure(kTableRows[0].structure);
    CHECK(people.placeholder_count() == 8);
    const auto fall = expr::parse_structure(kTableRows[5].structure);
    CHECK(fall.placeholder_count() == 10);
    CHECK(fall.unary_count() == 1);
}

TEST_CASE("grammar errors carry the byte offset of the first violation") {
    try {
        expr::parse_structure("(Z o C");
        FAIL("expected GrammarError");
    } catch (const expr::GrammarError& e) {
        CHECK(e.offset() == 6);
    }
    try {
        expr::parse_structure("o o Z");
        FAIL("expected GrammarError");
    } catch (const expr::GrammarError& e) {
        CHECK(e.offset() == 0);
    }
    try {
        expr::parse_structure("Z o q");
        FAIL("expected GrammarError");
    } catch (const expr::GrammarError& e) {
        CHECK(e.offset() == 4);
    }
}

TEST_CASE("validate accepts the reference rows and rejects junk") {
    CHECK(expr::validate("Z o C o ((Z o C) o (Z o C) o (Z o C)) o a"));
    for (const auto& row : kTableRows) CHECK(expr::validate(row.structure));
    CHECK_FALSE(expr::validate(""));
    CHECK_FALSE(expr::validate("o o Z"));
    CHECK_FALSE(expr::validate("(Z o C"));
    CHECK_FALSE(expr::validate("Z + C"));  // concrete operators are not a structure
    CHECK_FALSE(expr::validate("(o (Z o C))"));  // unary applies to variables only
}

TEST_CASE("structure round-trip is the identity on canonical text") {
    for (const auto& row : kTableRows) {
        const auto s = expr::parse_structure(row.structure);
        const auto again = expr::parse_structure(s.text());
        CHECK(again.text() == s.text());
        CHECK(again.placeholder_count() == s.placeholder_count());
    }
}

TEST_CASE("equation parse/render reaches a fixed point and preserves the tree") {
    for (const auto& row : kTableRows) {
        const auto e = Equation::parse(row.equation);
        const auto e2 = Equation::parse(e.text());
        CHECK(e2.text() == e.text());
        CHECK(expr::tree_equal(*e.ast(), *e2.ast()));
    }
}

TEST_CASE("apply_operators substitutes placeholders left to right") {
    const auto s = expr::parse_structure("(Z o C) o a");
    const auto e = expr::apply_operators(s, OperatorVector{{1, 0}});
    CHECK(e.text() == "(Z - C) + a");
    CHECK(e.structure_text() == s.text());

    CHECK_THROWS_AS(expr::apply_operators(s, OperatorVector{{1}}), expr::LengthMismatch);

    const auto fall = expr::parse_structure(kTableRows[5].structure);
    OperatorVector bad;
    bad.ops.assign(fall.placeholder_count(), 0);
    for (std::size_t i = 0; i < fall.placeholder_count(); ++i)
        if (fall.slot_is_unary(i)) bad.ops[i] = 2;  // '*' in a unary slot
    CHECK_THROWS_AS(expr::apply_operators(fall, bad), expr::InvalidUnaryOperator);
}

TEST_CASE("reference substitutions reproduce every table row verbatim") {
    for (const auto& row : kTableRows) {
        const auto s = expr::parse_structure(row.structure);
        const auto expected = Equation::parse(row.equation);  // canonicalizes spacing
        const auto v = operators_of(row.equation);
        REQUIRE(v.ops.size() == s.placeholder_count());
        const auto rebuilt = expr::apply_operators(s, v);
        CHECK(rebuilt.text() == expected.text());
        // Substitution locality: blanking the operators back out recovers
        // the structure exactly.
        CHECK(rebuilt.structure_text() == s.text());
    }
}

TEST_CASE("unary sign renders glued to its operand") {
    const auto fall = expr::parse_structure(kTableRows[5].structure);
    std::vector<std::uint8_t> ops;
    const auto want = Equation::parse(kTableRows[5].equation);
    CHECK(want.text() == "((Z / C) * (Z / C) / (Z + C)) / ((-C) / (Z + C)) + a");
    CHECK(want.text().find("(-C)") != std::string::npos);
    CHECK(fall.text().find("(o C)") != std::string::npos);
}

TEST_CASE("enumerate_mutations is a deterministic base-4 ascent") {
    const auto s = expr::parse_structure("(Z o C) o a");
    const auto all = expr::enumerate_mutations(s, 1024);
    REQUIRE(all.size() == 16);
    CHECK(all.front().text() == "(Z + C) + a");
    CHECK(all[1].text() == "(Z + C) - a");  // least-significant slot is rightmost
    CHECK(all.back().text() == "(Z / C) / a");

    const auto capped = expr::enumerate_mutations(s, 5);
    REQUIRE(capped.size() == 5);
    for (std::size_t i = 0; i < capped.size(); ++i) CHECK(capped[i].text() == all[i].text());

    std::set<std::string> unique;
    for (const auto& e : all) unique.insert(e.text());
    CHECK(unique.size() == all.size());
}

TEST_CASE("mutation space size honors the unary restriction and the cap") {
    // Six binary placeholders: 4^6 = 4096, capped at 1024.
    const auto s6 = expr::parse_structure("Z o C o Z o C o Z o C o a");
    CHECK(s6.placeholder_count() == 6);
    CHECK(s6.mutation_space_size() == 4096);
    CHECK(expr::enumerate_mutations(s6, 1024).size() == 1024);

    // A unary slot contributes a factor 2.
    const auto su = expr::parse_structure("(o C) o a");
    CHECK(su.placeholder_count() == 2);
    CHECK(su.unary_count() == 1);
    CHECK(su.mutation_space_size() == 8);
    const auto eqs = expr::enumerate_mutations(su, 1024);
    CHECK(eqs.size() == 8);
    CHECK(eqs.front().text() == "(+C) + a");
    CHECK(eqs.back().text() == "(-C) / a");

    // No placeholders: the single operator-free equation.
    const auto s0 = expr::parse_structure("Z");
    CHECK(expr::enumerate_mutations(s0, 16).size() == 1);
}

TEST_CASE("evaluate follows standard precedence and propagates non-finite values") {
    const auto e = Equation::parse("Z - C + a");
    CHECK(e.evaluate(0.5, 0.5, 0.01) == doctest::Approx(0.01));

    const auto chain = Equation::parse("Z + C * Z");  // * binds tighter
    CHECK(chain.evaluate(1.0, 2.0, 0.0) == doctest::Approx(3.0));

    const auto div = Equation::parse("(Z - C) / (a - C) * (Z / C) / (Z + C) + a");
    CHECK_FALSE(std::isfinite(div.evaluate(0.0, 0.0, 0.01)));  // 0/0 propagates
}

TEST_CASE("evaluate matches the independent text interpreter on random inputs") {
    Rng rng(1234);
    std::vector<Equation> pool;
    for (const auto& row : kTableRows)
        for (const auto& e : expr::enumerate_mutations(expr::parse_structure(row.structure), 8))
            pool.push_back(e);
    pool.push_back(Equation::parse("(Z/C)/(Z/C)/(Z*(Z/C)-(Z+C))-a"));

    int checked = 0;
    for (int i = 0; i < 10000; ++i) {
        const auto& e = pool[rng.uniform_int(pool.size())];
        const double z = rng.uniform();
        const double c = rng.uniform();
        const double mine = e.evaluate(z, c, 0.01);
        const double ref = oracles::eval_equation_text(e.text(), z, c, 0.01);
        if (std::isfinite(mine) || std::isfinite(ref)) {
            REQUIRE(std::isfinite(mine) == std::isfinite(ref));
            if (std::isfinite(mine)) {
                const double tol = 1e-12 * std::max(1.0, std::abs(ref));
                REQUIRE(std::abs(mine - ref) <= tol);
                ++checked;
            }
        }
    }
    CHECK(checked > 9000);
}

TEST_CASE("compiled tape agrees with the recursive evaluator") {
    Rng rng(99);
    for (const auto& row : kTableRows) {
        const auto eqs = expr::enumerate_mutations(expr::parse_structure(row.structure), 32);
        for (const auto& e : eqs) {
            const expr::CompiledEquation tape(e);
            for (int i = 0; i < 20; ++i) {
                const double z = rng.uniform(-1.0, 1.0);
                const double c = rng.uniform(-1.0, 1.0);
                const double lhs = tape.eval(z, c, 0.01);
                const double rhs = e.evaluate(z, c, 0.01);
                REQUIRE(std::isfinite(lhs) == std::isfinite(rhs));
                if (std::isfinite(lhs))
                    REQUIRE(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));
            }
        }
    }
}

TEST_CASE("refreshed equation text evaluates against the oracle") {
    const char* text = "(Z/C)/(Z/C)/(Z*(Z/C)-(Z+C))-a";
    const auto e = Equation::parse(text);
    const double mine = e.evaluate(0.6, 0.3, 0.01);
    const double ref = oracles::eval_equation_text(e.text(), 0.6, 0.3, 0.01);
    CHECK(mine == doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("corpus files round-trip") {
    const auto dir = std::filesystem::temp_directory_path() / "eqdisc_expr_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "corpus.txt";
    std::vector<std::string> corpus = {"Z o C", "Z o C o a", "(Z o C) o a"};
    expr::save_structure_corpus(corpus, path);
    CHECK(expr::load_structure_corpus(path) == corpus);
    std::filesystem::remove_all(dir);
}


TEST_CASE("the shipped corpus and its mutations all round-trip") {
    const auto corpus = expr::load_structure_corpus(EQDISC_DATA_DIR "/structures.txt");
    REQUIRE(corpus.size() == 305);
    Rng rng(2);
    for (const auto& line : corpus) {
        const auto s = expr::parse_structure(line);
        REQUIRE(s.text() == line);  // file is canonical
        // A handful of mutations per structure round-trip as equations.
        for (const auto& e : expr::enumerate_mutations(s, 4)) {
            const auto again = expr::Equation::parse(e.text());
            REQUIRE(again.text() == e.text());
            REQUIRE(expr::tree_equal(*again.ast(), *e.ast()));
        }
    }
}

TEST_SUITE_END();
