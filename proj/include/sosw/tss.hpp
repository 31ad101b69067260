#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "signature.hpp"
#include "term.hpp"

namespace sosw {

/// `source -action-> target` when positive, `source -action/->` otherwise.
struct Literal {
    Term source;
    std::string action;
    std::optional<Term> target;

    static Literal transition(Term source, std::string action, Term target) {
        return Literal{std::move(source), std::move(action), std::move(target)};
    }
    static Literal refusal(Term source, std::string action) {
        return Literal{std::move(source), std::move(action), std::nullopt};
    }

    [[nodiscard]] bool positive() const { return target.has_value(); }
    [[nodiscard]] bool closed() const { return source.closed() && (!target || target->closed()); }

    friend bool operator==(const Literal&, const Literal&) = default;
};

struct Rule {
    std::string name;
    // Metavariable assignment this rule was expanded from, e.g. "a".
    std::string variant;
    std::vector<Literal> premises;
    Literal conclusion;

    [[nodiscard]] std::string label() const { return variant.empty() ? name : name + "[" + variant + "]"; }
    [[nodiscard]] bool positive() const {
        return std::ranges::all_of(premises, [](const Literal& l) { return l.positive(); });
    }
};

struct Budget {
    std::size_t max_terms = 10000;
    std::size_t max_stages = 10000;
};

/// Signature, rules, and whether the recursion rule scheme is in force.
struct Tss {
    std::string name;
    Signature signature;
    std::vector<Rule> rules;
    bool recursion = false;
    Budget budget;

    [[nodiscard]] bool positive() const {
        return std::ranges::all_of(rules, [](const Rule& r) { return r.positive(); });
    }

    void validate() const {
        for (const auto& r : rules) {
            if (!r.conclusion.positive()) throw Error("rule " + r.label() + ": conclusion must be positive");
            auto check = [&](const Literal& l) {
                if (!signature.has_action(l.action))
                    throw Error("rule " + r.label() + ": undeclared action " + l.action);
                signature.validate(l.source);
                if (l.target) signature.validate(*l.target);
            };
            for (const auto& p : r.premises) check(p);
            check(r.conclusion);
        }
    }
};

inline bool denies(const Literal& l1, const Literal& l2) {
    if (l1.positive() == l2.positive()) return false;
    return l1.action == l2.action && l1.source == l2.source;
}

inline Literal instantiate(const Literal& l, const Substitution& sigma) {
    return Literal{substitute(l.source, sigma), l.action,
                   l.target ? std::optional<Term>(substitute(*l.target, sigma)) : std::nullopt};
}

inline Rule instantiate_rule(const Rule& r, const Substitution& sigma) {
    Rule out{r.name, r.variant, {}, instantiate(r.conclusion, sigma)};
    out.premises.reserve(r.premises.size());
    for (const auto& p : r.premises) out.premises.push_back(instantiate(p, sigma));
    return out;
}

/// Instance of the recursion scheme: <S_X|S> -a-> z over <X|S> -a-> z.
inline Rule recursion_rule(const RecSpec& spec, const std::string& x, const std::string& action, const std::string& z) {
    auto source = Term::rec(x, spec);
    if (source.free_vars().contains(z)) throw Error("recursion rule: " + z + " occurs free in the specification");
    auto target = Term::variable(z);
    return Rule{"recursion", "",
                {Literal::transition(rec_component_unfold(x, spec), action, target)},
                Literal::transition(source, action, target)};
}

/// First-order matching of `pattern` against a closed term, extending
/// `sigma`. Bound instances are compared up to alpha-equivalence. Recursion
/// patterns match only once all their free variables are bound.
inline bool match(const Term& pattern, const Term& term, Substitution& sigma) {
    switch (pattern.kind()) {
    case Term::Kind::variable: {
        auto [it, inserted] = sigma.emplace(pattern.name(), term);
        return inserted || alpha_eq(it->second, term);
    }
    case Term::Kind::apply:
        if (!term.is_apply() || term.name() != pattern.name() || term.args().size() != pattern.args().size())
            return false;
        for (std::size_t i = 0; i < pattern.args().size(); ++i)
            if (!match(pattern.args()[i], term.args()[i], sigma)) return false;
        return true;
    case Term::Kind::recursion:
        for (const auto& v : pattern.free_vars())
            if (!sigma.contains(v)) return false;
        return alpha_eq(substitute(pattern, sigma), term);
    }
    return false;
}

inline bool match(const Literal& pattern, const Literal& literal, Substitution& sigma) {
    if (pattern.action != literal.action || pattern.positive() != literal.positive()) return false;
    if (!match(pattern.source, literal.source, sigma)) return false;
    return !pattern.target || match(*pattern.target, *literal.target, sigma);
}

}  // namespace sosw
