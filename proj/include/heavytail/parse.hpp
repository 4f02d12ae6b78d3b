#pragma once

#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "heavytail/combinators.hpp"
#include "heavytail/dependence.hpp"
#include "heavytail/distribution.hpp"

namespace heavytail {

/// Parse failure naming the offending token and its position.
struct ParseError : std::invalid_argument {
    ParseError(const std::string& msg, std::string token_, std::size_t pos_)
        : std::invalid_argument(msg + " (token '" + token_ + "' at position " +
                                std::to_string(pos_) + ")"),
          token(std::move(token_)), pos(pos_) {}
    std::string token;
    std::size_t pos;
};

namespace detail {

struct Token {
    enum Kind { ident, number, sym, end } kind = end;
    std::string text;
    double num = 0.0;
    std::size_t pos = 0;
};

class Lexer {
  public:
    explicit Lexer(std::string_view s) : s_(s) {}

    const Token& peek() {
        if (!look_) look_ = lex();
        return *look_;
    }
    Token next() {
        if (look_) {
            Token t = *look_;
            look_.reset();
            return t;
        }
        return lex();
    }

  private:
    static bool ident_start(char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
    }
    static bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }

    Token lex() {
        while (i_ < s_.size() && (s_[i_] == ' ' || s_[i_] == '\t')) ++i_;
        if (i_ >= s_.size()) return {Token::end, "<end>", 0.0, i_};
        const std::size_t start = i_;
        const char c = s_[i_];
        if (ident_start(c)) {
            while (i_ < s_.size() && ident_char(s_[i_])) ++i_;
            return {Token::ident, std::string(s_.substr(start, i_ - start)), 0.0, start};
        }
        if ((c >= '0' && c <= '9') || c == '.' || c == '-' || c == '+') {
            double v = 0.0;
            const char* b = s_.data() + start;
            const char* e = s_.data() + s_.size();
            if (*b == '+') ++b;  // from_chars rejects a leading plus
            auto res = std::from_chars(b, e, v);
            if (res.ec != std::errc{})
                throw ParseError("malformed number", std::string(1, c), start);
            i_ = static_cast<std::size_t>(res.ptr - s_.data());
            return {Token::number, std::string(s_.substr(start, i_ - start)), v, start};
        }
        ++i_;
        return {Token::sym, std::string(1, c), 0.0, start};
    }

    std::string_view s_;
    std::size_t i_ = 0;
    std::optional<Token> look_;
};

class DistParser {
  public:
    explicit DistParser(std::string_view s) : lex_(s) {}

    Distribution parse() {
        Distribution d = node();
        const Token t = lex_.next();
        if (t.kind != Token::end)
            throw ParseError("unexpected trailing input", t.text, t.pos);
        return d;
    }

  private:
    Distribution node() {
        const Token name = expect(Token::ident, "distribution name");
        expect_sym('(');
        if (name.text == "power") {
            Distribution child = node();
            expect_sym(',');
            expect_key("beta", name.text);
            const double beta = expect(Token::number, "value of beta").num;
            expect_sym(')');
            return power(child, beta);
        }
        if (name.text == "affine") {
            Distribution child = node();
            expect_sym(',');
            expect_key("a", name.text);
            const double a = expect(Token::number, "value of a").num;
            expect_sym(',');
            expect_key("b", name.text);
            const double b = expect(Token::number, "value of b").num;
            expect_sym(')');
            return scale_shift(child, a, b);
        }
        if (name.text == "max") {
            Distribution left = node();
            expect_sym(',');
            Distribution right = node();
            expect_sym(')');
            return max_of(left, right);
        }
        if (name.text == "mix") {
            auto [children, weights] = weighted_list();
            return mixture(children, WeightVector(weights));
        }
        if (name.text == "gmean") {
            expect_key("r", name.text);
            const double r = expect(Token::number, "value of r").num;
            expect_sym(',');
            auto [children, weights] = weighted_list();
            return generalized_r_mean(children, WeightVector(weights), r);
        }
        return family(name);
    }

    std::pair<std::vector<Distribution>, std::vector<double>> weighted_list() {
        std::vector<Distribution> children;
        std::vector<double> weights;
        while (true) {
            weights.push_back(expect(Token::number, "weight").num);
            expect_sym(':');
            children.push_back(node());
            const Token t = lex_.next();
            if (t.kind == Token::sym && t.text == ",") continue;
            if (t.kind == Token::sym && t.text == ")") break;
            throw ParseError("expected ',' or ')'", t.text, t.pos);
        }
        return {std::move(children), std::move(weights)};
    }

    Distribution family(const Token& name) {
        std::vector<std::pair<Token, double>> params;
        if (!(lex_.peek().kind == Token::sym && lex_.peek().text == ")")) {
            while (true) {
                const Token key = expect(Token::ident, "parameter name");
                expect_sym('=');
                const double v = expect(Token::number, "parameter value").num;
                params.emplace_back(key, v);
                const Token t = lex_.next();
                if (t.kind == Token::sym && t.text == ",") continue;
                if (t.kind == Token::sym && t.text == ")") break;
                throw ParseError("expected ',' or ')'", t.text, t.pos);
            }
        } else {
            lex_.next();
        }

        auto take = [&](const char* k) {
            for (auto it = params.begin(); it != params.end(); ++it) {
                if (it->first.text == k) {
                    const double v = it->second;
                    params.erase(it);
                    return v;
                }
            }
            throw ParseError("missing parameter '" + std::string(k) + "' for '" +
                                 name.text + "'",
                             name.text, name.pos);
        };
        auto done = [&](Distribution d) {
            if (!params.empty())
                throw ParseError("unknown parameter '" + params.front().first.text +
                                     "' for '" + name.text + "'",
                                 params.front().first.text, params.front().first.pos);
            return d;
        };

        const std::string& f = name.text;
        if (f == "frechet") return done(frechet(take("alpha")));
        if (f == "pareto") return done(pareto(take("alpha")));
        if (f == "gpd") {
            const double xi = take("xi");
            return done(generalized_pareto(xi, take("beta")));
        }
        if (f == "burr") {
            const double a = take("alpha");
            return done(burr(a, take("tau")));
        }
        if (f == "paralogistic") return done(paralogistic(take("alpha")));
        if (f == "loglogistic") return done(loglogistic(take("tau")));
        if (f == "invburr") {
            const double a = take("alpha");
            return done(inverse_burr(a, take("tau")));
        }
        if (f == "logpareto") return done(log_pareto(take("alpha")));
        if (f == "stoppa") {
            const double a = take("alpha");
            return done(stoppa(a, take("beta")));
        }
        if (f == "invgeo") return done(inverse_geometric(take("c")));
        if (f == "deadly") return done(deadly(take("p")));
        throw ParseError("unknown distribution '" + f + "'", f, name.pos);
    }

    Token expect(Token::Kind k, const char* what) {
        const Token t = lex_.next();
        if (t.kind != k)
            throw ParseError("expected " + std::string(what), t.text, t.pos);
        return t;
    }
    void expect_sym(char c) {
        const Token t = lex_.next();
        if (t.kind != Token::sym || t.text[0] != c)
            throw ParseError("expected '" + std::string(1, c) + "'", t.text, t.pos);
    }
    void expect_key(const char* k, const std::string& ctx) {
        const Token t = lex_.next();
        if (t.kind != Token::ident || t.text != k)
            throw ParseError("expected parameter '" + std::string(k) + "' in '" + ctx + "'",
                             t.text, t.pos);
        expect_sym('=');
    }

    Lexer lex_;
};

}  // namespace detail

inline Distribution parse_distribution(std::string_view expr) {
    return detail::DistParser(expr).parse();
}

/// ';'-separated list of distribution expressions.
inline std::vector<Distribution> parse_distribution_list(std::string_view exprs) {
    std::vector<Distribution> out;
    std::size_t start = 0;
    while (start <= exprs.size()) {
        std::size_t end = exprs.find(';', start);
        if (end == std::string_view::npos) end = exprs.size();
        const std::string_view piece = exprs.substr(start, end - start);
        if (!piece.empty()) out.push_back(parse_distribution(piece));
        start = end + 1;
    }
    if (out.empty()) throw ParseError("empty distribution list", std::string(exprs), 0);
    return out;
}

/// Comma-separated doubles, e.g. "0.5,0.5".
inline std::vector<double> parse_number_list(std::string_view s) {
    std::vector<double> out;
    detail::Lexer lex(s);
    while (true) {
        const detail::Token t = lex.next();
        if (t.kind != detail::Token::number)
            throw ParseError("expected number in list", t.text, t.pos);
        out.push_back(t.num);
        const detail::Token sep = lex.next();
        if (sep.kind == detail::Token::end) break;
        if (!(sep.kind == detail::Token::sym && sep.text == ","))
            throw ParseError("expected ','", sep.text, sep.pos);
    }
    return out;
}

/// Dependence grammar: indep | countermono | comono | gauss(rho=..) |
/// clayton(theta=..). The dimension comes from the caller (weights/marginals).
inline DependenceModel parse_dependence(std::string_view s, std::size_t n) {
    detail::Lexer lex(s);
    const detail::Token name = lex.next();
    if (name.kind != detail::Token::ident)
        throw ParseError("expected dependence model name", name.text, name.pos);
    auto expect_end = [&] {
        const detail::Token t = lex.next();
        if (t.kind != detail::Token::end)
            throw ParseError("unexpected trailing input", t.text, t.pos);
    };
    auto one_param = [&](const char* key) {
        detail::Token t = lex.next();
        if (!(t.kind == detail::Token::sym && t.text == "("))
            throw ParseError("expected '('", t.text, t.pos);
        t = lex.next();
        if (!(t.kind == detail::Token::ident && t.text == key))
            throw ParseError("expected parameter '" + std::string(key) + "'", t.text, t.pos);
        t = lex.next();
        if (!(t.kind == detail::Token::sym && t.text == "="))
            throw ParseError("expected '='", t.text, t.pos);
        const detail::Token v = lex.next();
        if (v.kind != detail::Token::number)
            throw ParseError("expected number", v.text, v.pos);
        t = lex.next();
        if (!(t.kind == detail::Token::sym && t.text == ")"))
            throw ParseError("expected ')'", t.text, t.pos);
        return v.num;
    };

    if (name.text == "indep") {
        expect_end();
        return DependenceModel::independent(n);
    }
    if (name.text == "countermono") {
        expect_end();
        if (n != 2)
            throw std::invalid_argument("countermono: requires exactly 2 marginals");
        return DependenceModel::counter_monotone();
    }
    if (name.text == "comono") {
        expect_end();
        return DependenceModel::comonotone(n);
    }
    if (name.text == "gauss") {
        const double rho = one_param("rho");
        expect_end();
        return DependenceModel::gaussian_equicorrelated(n, rho);
    }
    if (name.text == "clayton") {
        const double theta = one_param("theta");
        expect_end();
        if (n != 2) throw std::invalid_argument("clayton: requires exactly 2 marginals");
        return DependenceModel::clayton_negative(theta);
    }
    throw ParseError("unknown dependence model '" + name.text + "'", name.text, name.pos);
}

}  // namespace heavytail
