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

#include "eqdisc/expr.hpp"

#include <fstream>
#include <limits>
#include <sstream>

namespace eqdisc::expr {

namespace {

using detail::Token;
using Kind = Token::Kind;

bool is_var(char c) { return c == 'Z' || c == 'C' || c == 'a'; }
bool is_concrete_op(char c) { return c == '+' || c == '-' || c == '*' || c == '/'; }

struct RawToken {
    Kind kind;
    char ch;
    std::size_t offset;
};

std::vector<RawToken> lex(std::string_view text) {
    std::vector<RawToken> out;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c == ' ' || c == '\t') continue;
        if (is_var(c)) {
            out.push_back({Kind::Var, c, i});
        } else if (c == 'o' || is_concrete_op(c)) {
            out.push_back({Kind::Op, c, i});
        } else if (c == '(') {
            out.push_back({Kind::LParen, c, i});
        } else if (c == ')') {
            out.push_back({Kind::RParen, c, i});
        } else {
            throw GrammarError(i, std::string("unknown token '") + c + "'");
        }
    }
    return out;
}

enum class Mode { Structure, Equation };

Op op_from_char(char c) {
    switch (c) {
        case '+': return Op::Add;
        case '-': return Op::Sub;
        case '*': return Op::Mul;
        default: return Op::Div;
    }
}

std::shared_ptr<const Node> make_var(char c) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Var;
    n->var = c;
    return n;
}

std::shared_ptr<const Node> make_binary(Op op, std::shared_ptr<const Node> l,
                                        std::shared_ptr<const Node> r) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Binary;
    n->op = op;
    n->lhs = std::move(l);
    n->rhs = std::move(r);
    return n;
}

std::shared_ptr<const Node> make_unary(Op op, std::shared_ptr<const Node> operand) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Unary;
    n->op = op;
    n->lhs = std::move(operand);
    return n;
}

// Recursive-descent parser for both modes. Emits the canonical token list
// (operators classified unary/binary) and, in Equation mode, the tree.
class Parser {
public:
    Parser(std::string_view text, Mode mode) : text_(text), mode_(mode), raw_(lex(text)) {}

    void run() {
        if (raw_.empty()) throw GrammarError(0, "empty expression");
        root_ = parse_expr();
        if (pos_ != raw_.size()) throw GrammarError(raw_[pos_].offset, "trailing input");
    }

    std::vector<Token> take_tokens() { return std::move(tokens_); }
    std::shared_ptr<const Node> take_root() { return std::move(root_); }
    const std::vector<bool>& unary_slots() const { return unary_slots_; }
    std::size_t binary_count() const { return binary_count_; }
    const std::vector<std::uint8_t>& ops() const { return ops_; }

private:
    bool at_end() const { return pos_ >= raw_.size(); }
    std::size_t err_offset() const { return at_end() ? text_.size() : raw_[pos_].offset; }

    const RawToken& peek() const { return raw_[pos_]; }

    void check_op_mode(const RawToken& t) const {
        if (mode_ == Mode::Structure && t.ch != 'o')
            throw GrammarError(t.offset, "expected placeholder 'o'");
        if (mode_ == Mode::Equation && t.ch == 'o')
            throw GrammarError(t.offset, "placeholder in concrete equation");
    }

    void emit(Kind kind, char ch, bool unary = false) {
        tokens_.push_back({kind, ch, unary});
        if (kind == Kind::Op) {
            if (ch == 'o') {
                unary_slots_.push_back(unary);
                if (!unary) ++binary_count_;
            } else {
                ops_.push_back(static_cast<std::uint8_t>(op_from_char(ch)));
                unary_slots_.push_back(unary);
                if (!unary) ++binary_count_;
            }
        }
    }

    // E := T (op T)*
    std::shared_ptr<const Node> parse_expr() {
        std::vector<std::shared_ptr<const Node>> terms;
        std::vector<Op> chain_ops;
        terms.push_back(parse_term());
        while (!at_end() && peek().kind == Kind::Op) {
            const RawToken t = raw_[pos_++];
            check_op_mode(t);
            emit(Kind::Op, t.ch, /*unary=*/false);
            chain_ops.push_back(t.ch == 'o' ? Op::Add : op_from_char(t.ch));
            terms.push_back(parse_term());
        }
        if (mode_ == Mode::Structure) return nullptr;
        return fold_chain(terms, chain_ops);
    }

    // T := VAR | '(' E ')' | '(' op VAR ')'
    std::shared_ptr<const Node> parse_term() {
        if (at_end()) throw GrammarError(err_offset(), "expected term");
        const RawToken t = peek();
        if (t.kind == Kind::Var) {
            ++pos_;
            emit(Kind::Var, t.ch);
            return mode_ == Mode::Equation ? make_var(t.ch) : nullptr;
        }
        if (t.kind != Kind::LParen) throw GrammarError(t.offset, "expected term");
        ++pos_;
        emit(Kind::LParen, '(');
        if (at_end()) throw GrammarError(err_offset(), "expected ')'");
        if (peek().kind == Kind::Op) {
            // '(' op VAR ')'
            const RawToken ot = raw_[pos_++];
            check_op_mode(ot);
            if (ot.ch == '*' || ot.ch == '/')
                throw GrammarError(ot.offset, "unary operator must be + or -");
            emit(Kind::Op, ot.ch, /*unary=*/true);
            if (at_end() || peek().kind != Kind::Var)
                throw GrammarError(err_offset(), "expected variable after unary operator");
            const RawToken vt = raw_[pos_++];
            emit(Kind::Var, vt.ch);
            expect_rparen();
            if (mode_ == Mode::Structure) return nullptr;
            return make_unary(op_from_char(ot.ch), make_var(vt.ch));
        }
        auto inner = parse_expr();
        expect_rparen();
        return inner;
    }

    void expect_rparen() {
        if (at_end() || peek().kind != Kind::RParen)
            throw GrammarError(err_offset(), "expected ')'");
        ++pos_;
        emit(Kind::RParen, ')');
    }

    // Standard precedence over a flat chain: one pass groups * and /, a
    // second folds + and -, both left-associative.
    static std::shared_ptr<const Node> fold_chain(
        const std::vector<std::shared_ptr<const Node>>& terms, const std::vector<Op>& ops) {
        std::vector<std::shared_ptr<const Node>> sum_terms;
        std::vector<Op> sum_ops;
        std::shared_ptr<const Node> cur = terms[0];
        for (std::size_t i = 0; i < ops.size(); ++i) {
            if (ops[i] == Op::Mul || ops[i] == Op::Div) {
                cur = make_binary(ops[i], cur, terms[i + 1]);
            } else {
                sum_terms.push_back(cur);
                sum_ops.push_back(ops[i]);
                cur = terms[i + 1];
            }
        }
        sum_terms.push_back(cur);
        std::shared_ptr<const Node> acc = sum_terms[0];
        for (std::size_t i = 0; i < sum_ops.size(); ++i)
            acc = make_binary(sum_ops[i], acc, sum_terms[i + 1]);
        return acc;
    }

    std::string_view text_;
    Mode mode_;
    std::vector<RawToken> raw_;
    std::size_t pos_ = 0;

    std::vector<Token> tokens_;
    std::vector<bool> unary_slots_;
    std::size_t binary_count_ = 0;
    std::vector<std::uint8_t> ops_;
    std::shared_ptr<const Node> root_;
};

}  // namespace

char op_char(Op op) {
    switch (op) {
        case Op::Add: return '+';
        case Op::Sub: return '-';
        case Op::Mul: return '*';
        default: return '/';
    }
}

namespace detail {

std::string render_tokens(const std::vector<Token>& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const Token& t = tokens[i];
        if (i > 0) {
            const Token& p = tokens[i - 1];
            bool space = true;
            if (p.kind == Kind::LParen) space = false;
            if (t.kind == Kind::RParen) space = false;
            // Concrete unary sign glues to its operand: "(-C)". The
            // placeholder keeps its space: "(o C)".
            if (p.kind == Kind::Op && p.unary && p.ch != 'o') space = false;
            if (space) out += ' ';
        }
        out += t.ch;
    }
    return out;
}

}  // namespace detail

EquationStructure EquationStructure::parse(std::string_view text) {
    Parser p(text, Mode::Structure);
    p.run();
    EquationStructure s;
    s.tokens_ = p.take_tokens();
    s.unary_slots_ = p.unary_slots();
    s.binary_count_ = p.binary_count();
    s.text_ = detail::render_tokens(s.tokens_);
    return s;
}

std::uint64_t EquationStructure::mutation_space_size() const {
    const std::uint64_t cap = std::uint64_t{1} << 63;
    std::uint64_t total = 1;
    for (bool unary : unary_slots_) {
        const std::uint64_t radix = unary ? 2 : 4;
        if (total > cap / radix) return cap;
        total *= radix;
    }
    return total;
}

bool validate(std::string_view text) noexcept {
    try {
        EquationStructure::parse(text);
        return true;
    } catch (...) {
        return false;
    }
}

Equation Equation::parse(std::string_view text) {
    Parser p(text, Mode::Equation);
    p.run();
    Equation e;
    auto tokens = p.take_tokens();
    e.root_ = p.take_root();
    e.ops_.ops = p.ops();
    e.text_ = detail::render_tokens(tokens);
    // The source structure is the same token string with operators blanked
    // back to placeholders.
    auto structure_tokens = tokens;
    for (auto& t : structure_tokens)
        if (t.kind == Kind::Op) t.ch = 'o';
    e.structure_text_ = detail::render_tokens(structure_tokens);
    return e;
}

Equation apply_operators(const EquationStructure& s, const OperatorVector& v) {
    if (v.ops.size() != s.placeholder_count())
        throw LengthMismatch("operator vector length " + std::to_string(v.ops.size()) +
                             " != placeholder count " + std::to_string(s.placeholder_count()));
    for (std::size_t i = 0; i < v.ops.size(); ++i) {
        if (v.ops[i] > 3)
            throw InvalidUnaryOperator("operator code out of range at slot " + std::to_string(i));
        if (s.slot_is_unary(i) && v.ops[i] > 1)
            throw InvalidUnaryOperator("unary slot " + std::to_string(i) +
                                       " only admits + or -");
    }
    auto tokens = s.tokens_;
    std::size_t slot = 0;
    for (auto& t : tokens) {
        if (t.kind == Kind::Op) t.ch = op_char(static_cast<Op>(v.ops[slot++]));
    }
    return Equation::parse(detail::render_tokens(tokens));
}

std::vector<Equation> enumerate_mutations(const EquationStructure& s, std::uint64_t cap) {
    std::vector<Equation> out;
    if (cap == 0) return out;
    const std::size_t n = s.placeholder_count();
    OperatorVector v;
    v.ops.assign(n, 0);
    for (;;) {
        out.push_back(apply_operators(s, v));
        if (out.size() == cap) break;
        // Mixed-radix increment, least-significant digit rightmost.
        std::size_t i = n;
        while (i > 0) {
            --i;
            const std::uint8_t radix = s.slot_is_unary(i) ? 2 : 4;
            if (++v.ops[i] < radix) break;
            v.ops[i] = 0;
            if (i == 0) return out;  // wrapped: exhausted
        }
        if (n == 0) break;
    }
    return out;
}

namespace {

double eval_node(const Node& n, double z, double c, double a) {
    switch (n.kind) {
        case Node::Kind::Var:
            return n.var == 'Z' ? z : (n.var == 'C' ? c : a);
        case Node::Kind::Unary: {
            const double v = eval_node(*n.lhs, z, c, a);
            return n.op == Op::Sub ? -v : v;
        }
        case Node::Kind::Binary: {
            const double l = eval_node(*n.lhs, z, c, a);
            const double r = eval_node(*n.rhs, z, c, a);
            switch (n.op) {
                case Op::Add: return l + r;
                case Op::Sub: return l - r;
                case Op::Mul: return l * r;
                default: return l / r;
            }
        }
    }
    return 0.0;  // unreachable
}

}  // namespace

double Equation::evaluate(double z, double c, double a) const {
    return eval_node(*root_, z, c, a);
}

double evaluate(const Equation& e, double z, double c, double a) {
    return e.evaluate(z, c, a);
}

bool tree_equal(const Node& a, const Node& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case Node::Kind::Var: return a.var == b.var;
        case Node::Kind::Unary: return a.op == b.op && tree_equal(*a.lhs, *b.lhs);
        case Node::Kind::Binary:
            return a.op == b.op && tree_equal(*a.lhs, *b.lhs) && tree_equal(*a.rhs, *b.rhs);
    }
    return false;
}

CompiledEquation::CompiledEquation(const Equation& eq) {
    int depth = 0;
    const auto compile = [&](const auto& self, const Node& n) -> void {
        switch (n.kind) {
            case Node::Kind::Var:
                tape_.push_back(n.var == 'Z' ? PushZ : (n.var == 'C' ? PushC : PushA));
                if (++depth > max_depth_) max_depth_ = depth;
                return;
            case Node::Kind::Unary:
                self(self, *n.lhs);
                if (n.op == Op::Sub) tape_.push_back(OpNeg);
                return;
            case Node::Kind::Binary:
                self(self, *n.lhs);
                self(self, *n.rhs);
                switch (n.op) {
                    case Op::Add: tape_.push_back(OpAdd); break;
                    case Op::Sub: tape_.push_back(OpSub); break;
                    case Op::Mul: tape_.push_back(OpMul); break;
                    default: tape_.push_back(OpDiv); break;
                }
                --depth;
                return;
        }
    };
    compile(compile, *eq.ast());
}

double CompiledEquation::eval(double z, double c, double a) const {
    double stack[64];
    int top = -1;
    for (std::uint8_t ins : tape_) {
        switch (ins) {
            case PushZ: stack[++top] = z; break;
            case PushC: stack[++top] = c; break;
            case PushA: stack[++top] = a; break;
            case OpNeg: stack[top] = -stack[top]; break;
            case OpAdd: stack[top - 1] += stack[top]; --top; break;
            case OpSub: stack[top - 1] -= stack[top]; --top; break;
            case OpMul: stack[top - 1] *= stack[top]; --top; break;
            default: stack[top - 1] /= stack[top]; --top; break;
        }
    }
    return stack[0];
}

std::vector<std::string> load_structure_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open corpus file " + path.string());
    std::vector<std::string> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!validate(line))
            throw DataError("invalid structure on line " + std::to_string(lineno) + " of " +
                            path.string() + ": " + line);
        out.push_back(EquationStructure::parse(line).text());
    }
    return out;
}

void save_structure_corpus(const std::vector<std::string>& corpus,
                           const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write corpus file " + path.string());
    for (const auto& s : corpus) out << s << '\n';
}

}  // namespace eqdisc::expr
