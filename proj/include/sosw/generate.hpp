#pragma once

#include <cstddef>
#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "tss.hpp"

namespace sosw {

/// Random term generation over a TSS signature.
///
/// Bound recursion variables are placed only where every operator between
/// them and their binder keeps the state space finite: prefix-family members
/// and operators whose rules all have a variable target (choice-like
/// operators). With `guarded_only`, each bound variable additionally sits
/// under a prefix-family operator below its binder.
class TermGenerator {
public:
    TermGenerator(const Tss& tss, std::uint64_t seed, bool guarded_only)
        : tss_(tss), rng_(seed), guarded_only_(guarded_only) {
        for (const auto& [symbol, decl] : tss.signature.ops()) {
            if (decl.prefix_action) {
                prefixes_.push_back(symbol);
                continue;
            }
            (decl.arity == 0 ? constants_ : operators_).push_back(symbol);
        }
        for (const auto& r : tss.rules) {
            const auto& src = r.conclusion.source;
            if (src.is_apply() && !r.conclusion.target->is_variable()) accumulating_.insert(src.name());
        }
        if (constants_.empty() && (guarded_only_ || !tss.recursion))
            throw Error("cannot generate closed terms: no constants declared");
    }

    [[nodiscard]] Term closed(std::size_t depth) {
        Scope scope;
        return gen(depth, scope);
    }

    /// Open term whose free variables are drawn from `free`.
    [[nodiscard]] Term open(std::size_t depth, const std::vector<std::string>& free) {
        Scope scope;
        scope.free = free;
        return gen(depth, scope);
    }

    /// Recursive specification with 1-2 bindings, closed apart from `free`.
    [[nodiscard]] Term rec(std::size_t depth, const std::vector<std::string>& free = {}) {
        Scope scope;
        scope.free = free;
        return gen_rec(std::max<std::size_t>(depth, 1), scope);
    }

    std::mt19937_64& rng() { return rng_; }

    std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
    bool coin(double p) { return std::bernoulli_distribution(p)(rng_); }

private:
    struct Bound {
        std::string name;
        bool guarded = false;
        bool clean = true;
    };
    struct Scope {
        std::vector<Bound> bound;
        std::vector<std::string> free;
    };

    const Tss& tss_;
    std::mt19937_64 rng_;
    bool guarded_only_;
    std::vector<std::string> constants_, operators_, prefixes_;
    VarSet accumulating_;
    std::size_t fresh_ = 0;

    Term leaf(const Scope& scope) {
        std::vector<Term> bound;
        for (const auto& b : scope.bound)
            if (b.clean && (b.guarded || !guarded_only_)) bound.push_back(Term::variable(b.name));
        // Favor back-references so samples actually recurse.
        if (!bound.empty() && coin(0.6)) return bound[pick(bound.size())];
        std::vector<Term> options = bound;
        for (const auto& c : constants_) options.push_back(Term::apply(c));
        for (const auto& v : scope.free) options.push_back(Term::variable(v));
        if (options.empty()) {
            // Only reachable without constants and with unguarded recursion.
            RecSpec spec;
            spec.emplace("Z", Term::variable("Z"));
            return Term::rec("Z", std::move(spec));
        }
        return options[pick(options.size())];
    }

    Term gen(std::size_t depth, const Scope& scope) {
        if (depth == 0 || coin(0.25)) return leaf(scope);
        auto roll = pick(10);
        if (tss_.recursion && roll < 2 && depth > 1) return gen_rec(depth, scope);
        if (!prefixes_.empty() && (roll < 6 || operators_.empty())) {
            Scope inner = scope;
            for (auto& b : inner.bound) b.guarded = true;
            return Term::apply(prefixes_[pick(prefixes_.size())], {gen(depth - 1, inner)});
        }
        if (operators_.empty()) return leaf(scope);
        const auto& symbol = operators_[pick(operators_.size())];
        Scope inner = scope;
        if (accumulating_.contains(symbol))
            for (auto& b : inner.bound) b.clean = false;
        std::vector<Term> args;
        for (std::size_t i = 0; i < tss_.signature.find(symbol)->arity; ++i) args.push_back(gen(depth - 1, inner));
        return Term::apply(symbol, std::move(args));
    }

    Term gen_rec(std::size_t depth, const Scope& scope) {
        std::size_t n = 1 + pick(2);
        Scope inner = scope;
        std::vector<std::string> names;
        for (std::size_t i = 0; i < n; ++i) {
            names.push_back("X" + std::to_string(fresh_++));
            inner.bound.push_back(Bound{names.back(), false, true});
        }
        RecSpec spec;
        for (const auto& v : names) spec.emplace(v, gen(depth - 1, inner));
        return Term::rec(names.front(), std::move(spec));
    }
};

inline std::vector<Term> gen_closed_terms(const Tss& tss, std::size_t depth, std::size_t count, std::uint64_t seed,
                                          bool guarded_only) {
    TermGenerator gen(tss, seed, guarded_only);
    std::vector<Term> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(gen.closed(depth));
    return out;
}

/// Renames every binder to a fresh name; the result is alpha-equivalent.
inline Term rename_binders(const Term& t, const std::string& suffix = "r") {
    switch (t.kind()) {
    case Term::Kind::variable:
        return t;
    case Term::Kind::apply: {
        std::vector<Term> args;
        for (const auto& a : t.args()) args.push_back(rename_binders(a, suffix));
        return Term::apply(t.name(), std::move(args));
    }
    case Term::Kind::recursion: {
        VarSet avoid = t.free_vars();
        for (const auto& [v, body] : t.spec()) {
            avoid.insert(v);
            avoid.insert(body.free_vars().begin(), body.free_vars().end());
        }
        Substitution renaming;
        std::map<std::string, std::string, std::less<>> names;
        for (const auto& [v, body] : t.spec()) {
            auto nv = fresh_name(v + suffix, avoid);
            avoid.insert(nv);
            names.emplace(v, nv);
            renaming.emplace(v, Term::variable(nv));
        }
        RecSpec spec;
        for (const auto& [v, body] : t.spec()) spec.emplace(names.at(v), substitute(rename_binders(body, suffix), renaming));
        return Term::rec(names.at(t.name()), std::move(spec));
    }
    }
    return t;
}

}  // namespace sosw
