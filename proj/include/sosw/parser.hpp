#pragma once

#include <cctype>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tss.hpp"

namespace sosw {

class ParseError : public Error {
public:
    ParseError(std::size_t line, std::size_t column, const std::string& message)
        : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
          line(line),
          column(column) {}

    std::size_t line;
    std::size_t column;
};

namespace detail {

struct Token {
    enum class Kind { ident, punct, end };
    Kind kind = Kind::end;
    std::string text;
    std::size_t line = 0;
    std::size_t column = 0;

    [[nodiscard]] bool is(std::string_view p) const { return kind == Kind::punct && text == p; }
};

inline bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

inline std::vector<Token> lex(std::string_view text, std::size_t line, std::size_t column0) {
    static constexpr std::string_view multi[] = {"/->", "->", "=>"};
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        Token tok;
        tok.line = line;
        tok.column = column0 + i;
        if (ident_char(c)) {
            auto j = i;
            while (j < text.size() && ident_char(text[j])) ++j;
            tok.kind = Token::Kind::ident;
            tok.text = std::string(text.substr(i, j - i));
            i = j;
        } else {
            tok.kind = Token::Kind::punct;
            for (auto m : multi)
                if (text.substr(i, m.size()) == m) {
                    tok.text = std::string(m);
                    break;
                }
            if (tok.text.empty()) {
                if (std::string_view("(),.<>|=-:").find(c) == std::string_view::npos)
                    throw ParseError(line, tok.column, std::string("unexpected character '") + c + "'");
                tok.text = std::string(1, c);
            }
            i += tok.text.size();
        }
        out.push_back(std::move(tok));
    }
    Token end;
    end.line = line;
    end.column = column0 + text.size();
    out.push_back(end);
    return out;
}

class TermParser {
public:
    TermParser(const Signature& sig, std::vector<Token> tokens) : sig_(sig), toks_(std::move(tokens)) {}

    Term term() {
        const auto& tok = peek();
        if (tok.is("<")) return rec();
        if (tok.kind != Token::Kind::ident) fail(tok, "expected a term");
        auto name = next().text;
        if (peek().is(".")) {
            next();
            auto symbol = sig_.prefix_symbol(name);
            if (!symbol) fail(tok, sig_.has_action(name) ? "no prefix family declared for " + name
                                                         : "unknown action " + name);
            return Term::apply(*symbol, {term()});
        }
        if (peek().is("(")) {
            const auto* decl = sig_.find(name);
            if (!decl) fail(tok, "undeclared symbol " + name);
            next();
            std::vector<Term> args;
            if (!peek().is(")")) {
                args.push_back(term());
                while (peek().is(",")) {
                    next();
                    args.push_back(term());
                }
            }
            expect(")");
            if (args.size() != decl->arity)
                fail(tok, "arity mismatch for " + name + ": declared " + std::to_string(decl->arity) + ", got " +
                              std::to_string(args.size()));
            return Term::apply(name, std::move(args));
        }
        if (const auto* decl = sig_.find(name)) {
            if (decl->arity != 0)
                fail(tok, "arity mismatch for " + name + ": declared " + std::to_string(decl->arity) + ", got 0");
            return Term::apply(name);
        }
        if (name == "0" && sig_.find("nil")) return Term::apply("nil");
        if (sig_.has_action(name)) fail(tok, "action " + name + " used as a term");
        if (!std::isalpha(static_cast<unsigned char>(name[0]))) fail(tok, "undeclared symbol " + name);
        return Term::variable(name);
    }

    Term rec() {
        expect("<");
        auto bound = variable_name();
        expect("|");
        RecSpec spec;
        do {
            const auto& at = peek();
            auto v = variable_name();
            expect("=");
            if (!spec.emplace(v, term()).second) fail(at, "duplicate binding for " + v);
        } while (peek().is(",") && (next(), true));
        expect(">");
        if (!spec.contains(bound)) fail(peek(), "unbound recursion variable " + bound);
        return Term::rec(bound, std::move(spec));
    }

    const Token& peek() const { return toks_[pos_]; }
    const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
    [[nodiscard]] bool at_end() const { return toks_[pos_].kind == Token::Kind::end; }

    void expect(std::string_view p) {
        if (!peek().is(p)) fail(peek(), "expected '" + std::string(p) + "'");
        next();
    }

    [[noreturn]] static void fail(const Token& at, const std::string& message) {
        throw ParseError(at.line, at.column, message);
    }

    std::string variable_name() {
        const auto& tok = peek();
        if (tok.kind != Token::Kind::ident || !std::isalpha(static_cast<unsigned char>(tok.text[0])))
            fail(tok, "expected a variable");
        if (sig_.find(tok.text) || sig_.has_action(tok.text))
            fail(tok, tok.text + " is not a variable name");
        return next().text;
    }

    std::string action() {
        const auto& tok = peek();
        if (tok.kind != Token::Kind::ident) fail(tok, "expected an action");
        if (!sig_.has_action(tok.text)) fail(tok, "unknown action " + tok.text);
        return next().text;
    }

    // `term -a-> term` or `term -a/->`.
    Literal literal() {
        auto source = term();
        expect("-");
        auto a = action();
        if (peek().is("/->")) {
            next();
            return Literal::refusal(std::move(source), a);
        }
        expect("->");
        return Literal::transition(std::move(source), a, term());
    }

private:
    const Signature& sig_;
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

inline std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace detail

/// Parses a closed or open term over `sig`.
inline Term parse_term(std::string_view text, const Signature& sig) {
    detail::TermParser p(sig, detail::lex(text, 1, 1));
    auto t = p.term();
    if (!p.at_end()) detail::TermParser::fail(p.peek(), "trailing input");
    return t;
}

inline Term parse_closed_term(std::string_view text, const Signature& sig) {
    auto t = parse_term(text, sig);
    if (!t.closed()) throw ParseError(1, 1, "term is not closed: free variable " + *t.free_vars().begin());
    return t;
}

/// Parses the TSS definition language:
///
///   lang NAME
///   actions a b ...
///   op SYMBOL ARITY
///   prefixfamily BASE          # unary BASE_a for every action a, written a.t
///   meta M                     # action metavariable, expanded over all actions
///   option recursion on|off
///   option max-terms N | option max-stages N
///   rule NAME: [PREMISE, ... =>] TERM -ACT-> TERM
///
/// Premises are `TERM -ACT-> VAR` or `TERM -ACT/->`. Declarations may appear
/// in any order; rules are parsed after all declarations.
inline Tss parse_lang(std::string_view text) {
    Tss tss;
    struct PendingRule {
        std::string name;
        std::string body;
        std::size_t line;
        std::size_t column;
    };
    std::vector<PendingRule> pending;
    std::vector<std::string> metas;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    std::vector<std::pair<std::string, std::size_t>> ops;
    std::vector<std::string> actions;
    std::optional<std::string> family;

    auto words = [](const std::string& s) {
        std::vector<std::string> w;
        std::istringstream ws(s);
        for (std::string x; ws >> x;) w.push_back(x);
        return w;
    };
    auto parse_count = [&](const std::string& s) {
        try {
            std::size_t used = 0;
            auto v = std::stoull(s, &used);
            if (used != s.size() || v == 0) throw std::invalid_argument(s);
            return static_cast<std::size_t>(v);
        } catch (const std::exception&) {
            throw ParseError(line_no, 1, "expected a positive number, got " + s);
        }
    };

    while (std::getline(in, raw)) {
        ++line_no;
        auto hash = raw.find('#');
        std::string line = detail::trim(raw.substr(0, hash));
        if (line.empty()) continue;
        auto w = words(line);
        const auto& kw = w[0];
        if (kw == "rule") {
            auto colon = line.find(':');
            if (colon == std::string::npos) throw ParseError(line_no, 1, "rule needs a name followed by ':'");
            auto name = detail::trim(std::string_view(line).substr(4, colon - 4));
            if (name.empty()) throw ParseError(line_no, 1, "rule needs a name");
            auto offset = raw.find(':') + 2;
            pending.push_back({name, line.substr(colon + 1), line_no, offset});
        } else if (kw == "lang") {
            if (w.size() != 2) throw ParseError(line_no, 1, "expected `lang NAME`");
            tss.name = w[1];
        } else if (kw == "actions") {
            if (w.size() < 2) throw ParseError(line_no, 1, "expected at least one action");
            actions.insert(actions.end(), w.begin() + 1, w.end());
        } else if (kw == "op") {
            if (w.size() != 3) throw ParseError(line_no, 1, "expected `op SYMBOL ARITY`");
            std::size_t arity = 0;
            try {
                std::size_t used = 0;
                arity = std::stoull(w[2], &used);
                if (used != w[2].size()) throw std::invalid_argument(w[2]);
            } catch (const std::exception&) {
                throw ParseError(line_no, 1, "arity must be a natural number");
            }
            for (const auto& [s, a] : ops)
                if (s == w[1]) throw ParseError(line_no, 1, "duplicate operator " + w[1]);
            ops.emplace_back(w[1], arity);
        } else if (kw == "prefixfamily") {
            if (w.size() != 2) throw ParseError(line_no, 1, "expected `prefixfamily BASE`");
            if (family) throw ParseError(line_no, 1, "only one prefix family may be declared");
            family = w[1];
        } else if (kw == "meta") {
            if (w.size() < 2) throw ParseError(line_no, 1, "expected `meta NAME`");
            metas.insert(metas.end(), w.begin() + 1, w.end());
        } else if (kw == "option") {
            if (w.size() != 3) throw ParseError(line_no, 1, "expected `option NAME VALUE`");
            if (w[1] == "recursion") {
                if (w[2] != "on" && w[2] != "off") throw ParseError(line_no, 1, "recursion must be on or off");
                tss.recursion = w[2] == "on";
            } else if (w[1] == "max-terms") {
                tss.budget.max_terms = parse_count(w[2]);
            } else if (w[1] == "max-stages") {
                tss.budget.max_stages = parse_count(w[2]);
            } else {
                throw ParseError(line_no, 1, "unknown option " + w[1]);
            }
        } else {
            throw ParseError(line_no, 1, "unknown statement " + kw);
        }
    }

    if (actions.empty()) throw ParseError(line_no, 1, "no actions declared");
    try {
        for (const auto& a : actions) tss.signature.add_action(a);
        if (family) tss.signature.add_prefix_family(*family);
        for (const auto& [s, a] : ops) tss.signature.add_op(s, a);
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        throw ParseError(1, 1, e.what());
    }
    for (const auto& m : metas)
        if (tss.signature.has_action(m) || tss.signature.find(m))
            throw ParseError(1, 1, "metavariable " + m + " clashes with a declared name");

    for (const auto& pr : pending) {
        auto tokens = detail::lex(pr.body, pr.line, pr.column);
        std::vector<std::string> used;
        for (const auto& m : metas)
            if (std::ranges::any_of(tokens, [&](const detail::Token& t) {
                    return t.kind == detail::Token::Kind::ident && t.text == m;
                }))
                used.push_back(m);

        std::string name = pr.name, variant;
        if (auto open = name.find('['); open != std::string::npos && name.back() == ']') {
            variant = name.substr(open + 1, name.size() - open - 2);
            name = name.substr(0, open);
        }

        // Odometer over assignments of the used metavariables.
        std::vector<std::size_t> choice(used.size(), 0);
        const auto& acts = tss.signature.actions();
        while (true) {
            auto expanded = tokens;
            std::string label;
            for (auto& t : expanded) {
                if (t.kind != detail::Token::Kind::ident) continue;
                for (std::size_t k = 0; k < used.size(); ++k)
                    if (t.text == used[k]) t.text = acts[choice[k]];
            }
            for (std::size_t k = 0; k < used.size(); ++k) label += (k ? "," : "") + acts[choice[k]];

            detail::TermParser p(tss.signature, std::move(expanded));
            std::vector<Literal> items{p.literal()};
            bool has_premises = false;
            while (p.peek().is(",")) {
                p.next();
                items.push_back(p.literal());
            }
            if (p.peek().is("=>")) {
                p.next();
                has_premises = true;
            }
            Rule rule{name, used.empty() ? variant : label, {}, items.back()};
            if (has_premises) {
                rule.premises = std::move(items);
                rule.conclusion = p.literal();
            } else if (items.size() > 1) {
                detail::TermParser::fail(p.peek(), "expected '=>' after premises");
            }
            if (!p.at_end()) detail::TermParser::fail(p.peek(), "trailing input in rule");
            if (!rule.conclusion.positive())
                throw ParseError(pr.line, pr.column, "rule " + pr.name + ": conclusion must be positive");
            try {
                tss.signature.validate(rule.conclusion.source);
                tss.signature.validate(*rule.conclusion.target);
                for (const auto& l : rule.premises) {
                    tss.signature.validate(l.source);
                    if (l.target) tss.signature.validate(*l.target);
                }
            } catch (const ParseError&) {
                throw;
            } catch (const Error& e) {
                throw ParseError(pr.line, pr.column, e.what());
            }
            tss.rules.push_back(std::move(rule));

            std::size_t k = 0;
            for (; k < choice.size(); ++k) {
                if (++choice[k] < acts.size()) break;
                choice[k] = 0;
            }
            if (k == choice.size()) break;
        }
    }
    return tss;
}

inline Tss load_lang(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_lang(buf.str());
}

inline std::string print_literal(const Signature& sig, const Literal& l) {
    std::string out = sig.print(l.source) + " -" + l.action;
    return l.target ? out + "-> " + sig.print(*l.target) : out + "/->";
}

/// Prints a TSS in the definition language with metavariables expanded.
inline std::string print_lang(const Tss& tss) {
    std::ostringstream os;
    const auto& sig = tss.signature;
    if (!tss.name.empty()) os << "lang " << tss.name << '\n';
    os << "actions";
    for (const auto& a : sig.actions()) os << ' ' << a;
    os << '\n';
    for (const auto& [s, d] : sig.ops())
        if (!d.prefix_action) os << "op " << s << ' ' << d.arity << '\n';
    if (sig.prefix_family()) os << "prefixfamily " << *sig.prefix_family() << '\n';
    os << "option recursion " << (tss.recursion ? "on" : "off") << '\n';
    Budget defaults;
    if (tss.budget.max_terms != defaults.max_terms) os << "option max-terms " << tss.budget.max_terms << '\n';
    if (tss.budget.max_stages != defaults.max_stages) os << "option max-stages " << tss.budget.max_stages << '\n';
    for (const auto& r : tss.rules) {
        os << "rule " << r.label() << ": ";
        for (std::size_t i = 0; i < r.premises.size(); ++i)
            os << (i ? ", " : "") << print_literal(sig, r.premises[i]);
        if (!r.premises.empty()) os << " => ";
        os << print_literal(sig, r.conclusion) << '\n';
    }
    return os.str();
}

}  // namespace sosw
