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
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "eqdisc/errors.hpp"

// Threshold-equation grammar over the variables {Z, C, a}:
//
//   E   := T (op T)*
//   T   := VAR | '(' E ')' | '(' op VAR ')'
//   VAR := 'Z' | 'C' | 'a'
//   op  := 'o' in structures, one of + - * / in concrete equations
//
// Chains evaluate with standard precedence: * and / bind tighter than + and -,
// all operators left-associative. Unary operators are restricted to + and -.
//
// Canonical text places one space between tokens, no space after '(' or
// before ')', and glues a concrete unary sign to its operand ("(-C)"); the
// placeholder keeps its space ("(o C)").
namespace eqdisc::expr {

class GrammarError : public DataError {
public:
    GrammarError(std::size_t offset, const std::string& what)
        : DataError(what + " at offset " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

class LengthMismatch : public Error {
public:
    using Error::Error;
};

class InvalidUnaryOperator : public Error {
public:
    using Error::Error;
};

/// Operator codes in enumeration order.
enum class Op : std::uint8_t { Add = 0, Sub = 1, Mul = 2, Div = 3 };

char op_char(Op op);

/// Concrete operator assignment for a structure's placeholders, in textual
/// order. Unary slots admit only Add and Sub.
struct OperatorVector {
    std::vector<std::uint8_t> ops;
};

namespace detail {

struct Token {
    enum class Kind : std::uint8_t { Var, Op, LParen, RParen };
    Kind kind;
    char ch;
    bool unary = false;  // set on Op tokens during parsing
};

std::string render_tokens(const std::vector<Token>& tokens);

}  // namespace detail

class Equation;
class EquationStructure;

/// Substitutes concrete operators into the placeholders, left to right.
Equation apply_operators(const EquationStructure& s, const OperatorVector& v);

/// A validated equation template whose operators are the placeholder 'o'.
class EquationStructure {
public:
    /// Parses and canonicalizes a structure string. Throws GrammarError with
    /// the byte offset of the first violation.
    static EquationStructure parse(std::string_view text);

    const std::string& text() const { return text_; }
    std::size_t placeholder_count() const { return unary_slots_.size(); }
    std::size_t binary_count() const { return binary_count_; }
    std::size_t unary_count() const { return placeholder_count() - binary_count_; }

    /// True if placeholder i (textual order) sits in a '(op VAR)' term.
    bool slot_is_unary(std::size_t i) const { return unary_slots_[i]; }

    /// 4^binary * 2^unary, saturating at 2^63.
    std::uint64_t mutation_space_size() const;

    bool operator==(const EquationStructure& other) const { return text_ == other.text_; }

private:
    friend class Equation;
    friend Equation apply_operators(const EquationStructure&, const OperatorVector&);
    EquationStructure() = default;

    std::string text_;
    std::vector<detail::Token> tokens_;
    std::vector<bool> unary_slots_;  // one entry per placeholder, textual order
    std::size_t binary_count_ = 0;
};

/// Expression tree node. Immutable once built; shared between copies.
struct Node {
    enum class Kind : std::uint8_t { Var, Binary, Unary };
    Kind kind;
    char var = 0;  // Kind::Var
    Op op = Op::Add;
    std::shared_ptr<const Node> lhs, rhs;  // Unary uses lhs only
};

bool tree_equal(const Node& a, const Node& b);

/// A concrete arithmetic equation together with the structure it came from.
class Equation {
public:
    /// Parses a concrete equation (operators in {+,-,*,/}).
    static Equation parse(std::string_view text);

    const std::string& text() const { return text_; }
    /// Canonical text of the source structure (operators replaced by 'o').
    const std::string& structure_text() const { return structure_text_; }
    const std::shared_ptr<const Node>& ast() const { return root_; }
    const OperatorVector& operators() const { return ops_; }

    /// Evaluates the tree by direct recursion. Division by zero and other
    /// degenerate arithmetic propagate as IEEE inf/nan; callers decide what a
    /// non-finite threshold means.
    double evaluate(double z, double c, double a) const;

    bool operator==(const Equation& other) const { return text_ == other.text_; }

private:
    friend Equation apply_operators(const EquationStructure&, const OperatorVector&);
    Equation() = default;

    std::string text_;
    std::string structure_text_;
    std::shared_ptr<const Node> root_;
    OperatorVector ops_;
};

/// parse_structure convenience alias.
inline EquationStructure parse_structure(std::string_view text) {
    return EquationStructure::parse(text);
}

/// True iff text is a grammatically valid structure. Never throws.
bool validate(std::string_view text) noexcept;

/// All operator assignments of s in ascending base-4 order (leftmost
/// placeholder most significant, operator order [+,-,*,/], unary slots
/// restricted to {+,-}), truncated to cap. A structure without placeholders
/// yields its single operator-free equation.
std::vector<Equation> enumerate_mutations(const EquationStructure& s, std::uint64_t cap);

double evaluate(const Equation& e, double z, double c, double a);

/// Flattened postfix program for the per-pixel inner loop; equivalent to
/// Equation::evaluate and equivalence-tested against it.
class CompiledEquation {
public:
    explicit CompiledEquation(const Equation& eq);

    double eval(double z, double c, double a) const;
    int max_stack_depth() const { return max_depth_; }

private:
    enum OpCode : std::uint8_t { PushZ, PushC, PushA, OpAdd, OpSub, OpMul, OpDiv, OpNeg };
    std::vector<std::uint8_t> tape_;
    int max_depth_ = 0;
};

/// Reads a structure corpus: one canonical structure per line, LF-terminated.
/// Throws DataError naming the offending line if any entry fails to validate.
std::vector<std::string> load_structure_corpus(const std::filesystem::path& path);

void save_structure_corpus(const std::vector<std::string>& corpus,
                           const std::filesystem::path& path);

}  // namespace eqdisc::expr
