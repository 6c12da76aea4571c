#pragma once

// Scalar interest functions of the model parameters, written as
// arithmetic expressions over the parameter names:
//
//   m1 / (m1 + m2)        mean / sqrt(shape)        2 - m2/m1 - m1/m2
//
// Grammar: + - * / ^ (power binds tightest, then unary minus, then * /,
// then + -), parentheses, numeric literals, parameter names, and the
// functions sqrt, log, exp.  Parse and evaluation errors carry the
// offending source offset.

#include <cmath>
#include <cstdio>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "proflik/errors.hpp"
#include "proflik/model.hpp"

namespace proflik {

struct expr_parse_error : std::invalid_argument {
    std::size_t offset;
    expr_parse_error(const std::string& msg, std::size_t off)
        : std::invalid_argument(msg + " (offset " + std::to_string(off) + ")"), offset(off) {}
};

namespace detail {

struct ExprNode {
    enum class Kind { Number, Param, Unary, Binary, Call };
    Kind kind = Kind::Number;
    double number = 0.0;
    std::size_t param_index = 0;
    std::string name;   // parameter or function name
    char op = 0;        // one of + - * / ^ for Binary, '-' for Unary
    std::unique_ptr<ExprNode> a, b;
    std::size_t pos = 0, len = 0;  // source span
};

class ExprParser {
public:
    ExprParser(std::string_view text, const std::vector<std::string>& names)
        : text_(text), names_(names) {}

    std::unique_ptr<ExprNode> parse() {
        auto e = parse_sum();
        skip_ws();
        if (pos_ != text_.size())
            throw expr_parse_error("interest expression: unexpected trailing input", pos_);
        return e;
    }

private:
    std::string_view text_;
    const std::vector<std::string>& names_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    std::unique_ptr<ExprNode> parse_sum() {
        auto lhs = parse_product();
        for (;;) {
            skip_ws();
            if (pos_ >= text_.size() || (text_[pos_] != '+' && text_[pos_] != '-')) return lhs;
            char op = text_[pos_++];
            auto rhs = parse_product();
            lhs = make_binary(op, std::move(lhs), std::move(rhs));
        }
    }

    std::unique_ptr<ExprNode> parse_product() {
        auto lhs = parse_signed();
        for (;;) {
            skip_ws();
            if (pos_ >= text_.size() || (text_[pos_] != '*' && text_[pos_] != '/')) return lhs;
            char op = text_[pos_++];
            auto rhs = parse_signed();
            lhs = make_binary(op, std::move(lhs), std::move(rhs));
        }
    }

    std::unique_ptr<ExprNode> parse_signed() {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == '-') {
            std::size_t start = pos_++;
            auto inner = parse_signed();
            auto node = std::make_unique<ExprNode>();
            node->kind = ExprNode::Kind::Unary;
            node->op = '-';
            node->pos = start;
            node->len = inner->pos + inner->len - start;
            node->a = std::move(inner);
            return node;
        }
        return parse_power();
    }

    std::unique_ptr<ExprNode> parse_power() {
        auto base = parse_atom();
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == '^') {
            ++pos_;
            auto exponent = parse_signed();  // right associative, sign allowed
            return make_binary('^', std::move(base), std::move(exponent));
        }
        return base;
    }

    std::unique_ptr<ExprNode> parse_atom() {
        skip_ws();
        if (pos_ >= text_.size())
            throw expr_parse_error("interest expression: unexpected end of input", pos_);
        char c = text_[pos_];
        if (c == '(') {
            std::size_t start = pos_++;
            auto e = parse_sum();
            if (!eat(')'))
                throw expr_parse_error("interest expression: missing ')'", pos_);
            e->pos = start;
            e->len = pos_ - start;
            return e;
        }
        if ((c >= '0' && c <= '9') || c == '.') return parse_number();
        if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_') return parse_name();
        throw expr_parse_error(std::string("interest expression: unexpected character '") + c + "'", pos_);
    }

    std::unique_ptr<ExprNode> parse_number() {
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               ((text_[pos_] >= '0' && text_[pos_] <= '9') || text_[pos_] == '.'))
            ++pos_;
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t mark = pos_++;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
            if (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') {
                while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') ++pos_;
            } else {
                pos_ = mark;  // not an exponent after all
            }
        }
        std::string token(text_.substr(start, pos_ - start));
        char* end = nullptr;
        double v = std::strtod(token.c_str(), &end);
        if (end != token.c_str() + token.size())
            throw expr_parse_error("interest expression: bad numeric literal '" + token + "'", start);
        auto node = std::make_unique<ExprNode>();
        node->kind = ExprNode::Kind::Number;
        node->number = v;
        node->pos = start;
        node->len = pos_ - start;
        return node;
    }

    std::unique_ptr<ExprNode> parse_name() {
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               ((text_[pos_] >= 'a' && text_[pos_] <= 'z') ||
                (text_[pos_] >= 'A' && text_[pos_] <= 'Z') ||
                (text_[pos_] >= '0' && text_[pos_] <= '9') || text_[pos_] == '_'))
            ++pos_;
        std::string name(text_.substr(start, pos_ - start));
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == '(') {
            if (name != "sqrt" && name != "log" && name != "exp")
                throw expr_parse_error("interest expression: unknown function '" + name + "'", start);
            ++pos_;
            auto arg = parse_sum();
            if (!eat(')'))
                throw expr_parse_error("interest expression: missing ')' after " + name, pos_);
            auto node = std::make_unique<ExprNode>();
            node->kind = ExprNode::Kind::Call;
            node->name = name;
            node->pos = start;
            node->len = pos_ - start;
            node->a = std::move(arg);
            return node;
        }
        std::size_t idx = names_.size();
        for (std::size_t i = 0; i < names_.size(); ++i)
            if (names_[i] == name) { idx = i; break; }
        if (idx == names_.size()) {
            std::string known;
            for (const auto& n : names_) known += (known.empty() ? "" : ", ") + n;
            throw expr_parse_error("interest expression: unknown parameter '" + name +
                                       "' (model has: " + known + ")",
                                   start);
        }
        auto node = std::make_unique<ExprNode>();
        node->kind = ExprNode::Kind::Param;
        node->name = name;
        node->param_index = idx;
        node->pos = start;
        node->len = pos_ - start;
        return node;
    }

    std::unique_ptr<ExprNode> make_binary(char op, std::unique_ptr<ExprNode> a,
                                          std::unique_ptr<ExprNode> b) {
        auto node = std::make_unique<ExprNode>();
        node->kind = ExprNode::Kind::Binary;
        node->op = op;
        node->pos = a->pos;
        node->len = b->pos + b->len - a->pos;
        node->a = std::move(a);
        node->b = std::move(b);
        return node;
    }
};

inline double expr_eval(const ExprNode& n, std::span<const double> w) {
    auto fail = [&](const std::string& what) -> double {
        throw eval_error("interest expression: " + what + " (offset " + std::to_string(n.pos) + ")");
    };
    double v = 0.0;
    switch (n.kind) {
        case ExprNode::Kind::Number: v = n.number; break;
        case ExprNode::Kind::Param:  v = w[n.param_index]; break;
        case ExprNode::Kind::Unary:  v = -expr_eval(*n.a, w); break;
        case ExprNode::Kind::Binary: {
            double a = expr_eval(*n.a, w);
            double b = expr_eval(*n.b, w);
            switch (n.op) {
                case '+': v = a + b; break;
                case '-': v = a - b; break;
                case '*': v = a * b; break;
                case '/':
                    if (b == 0.0) return fail("division by zero");
                    v = a / b;
                    break;
                case '^': v = std::pow(a, b); break;
            }
            break;
        }
        case ExprNode::Kind::Call: {
            double a = expr_eval(*n.a, w);
            if (n.name == "sqrt") {
                if (a < 0.0) return fail("sqrt of a negative value");
                v = std::sqrt(a);
            } else if (n.name == "log") {
                if (a <= 0.0) return fail("log of a non-positive value");
                v = std::log(a);
            } else {
                v = std::exp(a);
            }
            break;
        }
    }
    if (!std::isfinite(v)) return fail("non-finite value");
    return v;
}

inline void expr_collect_params(const ExprNode& n, std::vector<bool>& used) {
    if (n.kind == ExprNode::Kind::Param) used[n.param_index] = true;
    if (n.a) expr_collect_params(*n.a, used);
    if (n.b) expr_collect_params(*n.b, used);
}

inline int expr_precedence(const ExprNode& n) {
    switch (n.kind) {
        case ExprNode::Kind::Binary:
            if (n.op == '+' || n.op == '-') return 1;
            if (n.op == '*' || n.op == '/') return 2;
            return 4;  // '^'
        case ExprNode::Kind::Unary: return 3;
        default: return 5;
    }
}

inline void expr_print(const ExprNode& n, std::string& out) {
    auto child = [&](const ExprNode& c, bool needs_paren) {
        if (needs_paren) out += '(';
        expr_print(c, out);
        if (needs_paren) out += ')';
    };
    switch (n.kind) {
        case ExprNode::Kind::Number: {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", n.number);
            out += buf;
            break;
        }
        case ExprNode::Kind::Param:
            out += n.name;
            break;
        case ExprNode::Kind::Unary:
            out += '-';
            child(*n.a, expr_precedence(*n.a) < expr_precedence(n));
            break;
        case ExprNode::Kind::Binary: {
            int p = expr_precedence(n);
            // Left child needs parens below our level; right child also at
            // equal level for the non-associative cases (-, /), and '^' is
            // right associative so the asymmetry flips.
            bool lp, rp;
            if (n.op == '^') {
                lp = expr_precedence(*n.a) <= p;
                rp = expr_precedence(*n.b) < p;
            } else {
                lp = expr_precedence(*n.a) < p;
                rp = expr_precedence(*n.b) < p ||
                     (expr_precedence(*n.b) == p && (n.op == '-' || n.op == '/'));
            }
            child(*n.a, lp);
            out += ' ';
            out += n.op;
            out += ' ';
            child(*n.b, rp);
            break;
        }
        case ExprNode::Kind::Call:
            out += n.name;
            out += '(';
            expr_print(*n.a, out);
            out += ')';
            break;
    }
}

} // namespace detail

class InterestFunction {
public:
    InterestFunction() = default;

    double operator()(std::span<const double> w) const {
        if (!root_) throw std::logic_error("InterestFunction: empty");
        if (w.size() != dim_)
            throw std::invalid_argument("InterestFunction: parameter dimension mismatch");
        return detail::expr_eval(*root_, w);
    }

    // Central-difference gradient; coordinates the expression never
    // references get an exact zero without probing.
    std::vector<double> gradient(std::span<const double> w, double rel_step = 1e-6) const {
        if (!root_) throw std::logic_error("InterestFunction: empty");
        if (w.size() != dim_)
            throw std::invalid_argument("InterestFunction: parameter dimension mismatch");
        std::vector<double> g(dim_, 0.0);
        std::vector<double> p(w.begin(), w.end());
        for (std::size_t i = 0; i < dim_; ++i) {
            if (!referenced_[i]) continue;
            double h = rel_step * std::max(1.0, std::fabs(w[i]));
            double xi = p[i];
            p[i] = xi + h;
            double fp = detail::expr_eval(*root_, p);
            p[i] = xi - h;
            double fm = detail::expr_eval(*root_, p);
            p[i] = xi;
            g[i] = (fp - fm) / (2.0 * h);
        }
        return g;
    }

    const std::string& source() const { return source_; }

    // Canonical re-print with minimal parentheses; parsing it back gives
    // an expression that evaluates identically.
    std::string pretty() const {
        if (!root_) return {};
        std::string out;
        detail::expr_print(*root_, out);
        return out;
    }

    bool is_parameter() const { return root_ && root_->kind == detail::ExprNode::Kind::Param; }
    std::size_t parameter_index() const {
        if (!is_parameter()) throw std::logic_error("InterestFunction: not a bare parameter");
        return root_->param_index;
    }

    std::size_t dimension() const { return dim_; }
    const std::vector<bool>& referenced() const { return referenced_; }

private:
    std::shared_ptr<const detail::ExprNode> root_;
    std::string source_;
    std::size_t dim_ = 0;
    std::vector<bool> referenced_;

    friend InterestFunction parse_interest(std::string_view, const std::vector<std::string>&);
};

inline InterestFunction parse_interest(std::string_view text,
                                       const std::vector<std::string>& names) {
    detail::ExprParser parser(text, names);
    InterestFunction f;
    f.root_ = parser.parse();
    f.source_ = std::string(text);
    f.dim_ = names.size();
    f.referenced_.assign(f.dim_, false);
    detail::expr_collect_params(*f.root_, f.referenced_);
    return f;
}

inline InterestFunction parse_interest(std::string_view text, const ParameterSpace& space) {
    return parse_interest(text, space.names);
}

// Named shorthands for the interest functions that come up repeatedly in
// two-group and gamma analyses.  Each expands to an expression over the
// given space's parameter names.
inline const std::vector<std::pair<std::string, std::string>>& builtin_interest_table() {
    static const std::vector<std::pair<std::string, std::string>> table = {
        {"diff", "m1 - m2"},
        {"ratio", "m1 / m2"},
        {"auc", "m1 / (m1 + m2)"},
        {"kl", "2 - m2/m1 - m1/m2"},
        {"gamma_sd", "mean / sqrt(shape)"},
    };
    return table;
}

inline InterestFunction builtin_interest(std::string_view name,
                                         const std::vector<std::string>& names) {
    for (const auto& [key, text] : builtin_interest_table())
        if (key == name) return parse_interest(text, names);
    std::string known;
    for (const auto& [key, text] : builtin_interest_table())
        known += (known.empty() ? "" : ", ") + key;
    throw std::invalid_argument("unknown builtin interest '" + std::string(name) +
                                "' (available: " + known + ")");
}

// Parse either a builtin name or an expression.
inline InterestFunction interest_from_text(std::string_view text,
                                           const std::vector<std::string>& names) {
    for (const auto& [key, expansion] : builtin_interest_table())
        if (key == text) return parse_interest(expansion, names);
    return parse_interest(text, names);
}

inline InterestFunction interest_from_text(std::string_view text, const ParameterSpace& space) {
    return interest_from_text(text, space.names);
}

} // namespace proflik
