#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "equivalence.hpp"
#include "format.hpp"
#include "generate.hpp"
#include "parser.hpp"

namespace sosw {

struct HarnessConfig {
    std::size_t samples = 100;
    std::size_t depth = 3;
    bool guarded_only = true;
    std::uint64_t seed = 0;
    Budget budget{2000, 10000};
    // Binary choice operator used for idempotence/commutativity rewrites;
    // defaults to `plus` when declared.
    std::optional<std::string> choice_op;
};

enum class Relation { refines, equivalent };

/// Self-contained failing instance: checking `relation` between `lhs` and
/// `rhs` under the same TSS reproduces the failure.
struct Counterexample {
    std::size_t sample = 0;
    Relation relation = Relation::equivalent;
    std::string lhs;
    std::string rhs;
    std::string context;
};

struct HarnessReport {
    std::string property;
    std::size_t attempted = 0;
    std::size_t passed = 0;
    std::size_t failed = 0;
    std::size_t skipped = 0;
    std::vector<Counterexample> failures;
    std::vector<std::string> skip_reasons;

    [[nodiscard]] std::string render() const {
        std::ostringstream os;
        os << "property: " << property << '\n'
           << "attempted: " << attempted << '\n'
           << "passed: " << passed << '\n'
           << "failed: " << failed << '\n'
           << "skipped: " << skipped << '\n';
        for (const auto& f : failures) {
            os << "counterexample " << f.sample << ": "
               << (f.relation == Relation::refines ? "expected refinement" : "expected equivalence") << '\n'
               << "  lhs: " << f.lhs << '\n'
               << "  rhs: " << f.rhs << '\n';
            if (!f.context.empty()) os << "  context: " << f.context << '\n';
        }
        for (const auto& s : skip_reasons) os << "skip: " << s << '\n';
        return os.str();
    }
};

enum class Outcome { pass, fail, skip };

namespace detail {

inline std::uint64_t sample_seed(std::uint64_t seed, std::size_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index)};
    std::uint64_t out[1];
    std::uint32_t words[2];
    seq.generate(words, words + 2);
    out[0] = (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
    return out[0];
}

inline std::optional<std::string> choice_op(const Tss& tss, const HarnessConfig& cfg) {
    if (cfg.choice_op) return cfg.choice_op;
    if (const auto* d = tss.signature.find("plus"); d && d->arity == 2) return std::string("plus");
    return std::nullopt;
}

inline void require_format(const Tss& tss) {
    auto report = check_tss_format(tss);
    if (!report.in_format()) throw UnsupportedTss("TSS is not in the ntyft/ntyxt format");
    if (!tss.recursion) throw UnsupportedTss("TSS does not enable the recursion rule");
}

}  // namespace detail

/// Checks one relation between two closed terms in a shared fragment.
inline Outcome check_relation(const Tss& tss, const Term& lhs, const Term& rhs, Relation relation,
                              const Budget& budget, TermIdentity identity = TermIdentity::alpha) {
    auto c = compare_terms(tss, lhs, rhs, budget, identity);
    if (c.forward == Answer::unknown_budget) return Outcome::skip;
    bool ok = c.forward == Answer::yes && (relation == Relation::refines || c.backward == Answer::yes);
    return ok ? Outcome::pass : Outcome::fail;
}

inline Outcome replay(const Tss& tss, const Counterexample& cx, const Budget& budget) {
    return check_relation(tss, parse_closed_term(cx.lhs, tss.signature), parse_closed_term(cx.rhs, tss.signature),
                          cx.relation, budget);
}

class HarnessRun {
public:
    HarnessRun(const Tss& tss, std::string property) : tss_(tss) { report_.property = std::move(property); }

    void record(std::size_t sample, Outcome outcome, const Term& lhs, const Term& rhs, Relation relation,
                std::string context = {}) {
        ++report_.attempted;
        switch (outcome) {
        case Outcome::pass:
            ++report_.passed;
            break;
        case Outcome::skip:
            ++report_.skipped;
            report_.skip_reasons.push_back("sample " + std::to_string(sample) + ": budget exceeded");
            break;
        case Outcome::fail:
            ++report_.failed;
            report_.failures.push_back(Counterexample{sample, relation, tss_.signature.print(lhs),
                                                      tss_.signature.print(rhs), std::move(context)});
            break;
        }
    }

    void skip(std::size_t sample, std::string reason) {
        ++report_.attempted;
        ++report_.skipped;
        report_.skip_reasons.push_back("sample " + std::to_string(sample) + ": " + std::move(reason));
    }

    HarnessReport finish() { return std::move(report_); }

private:
    const Tss& tss_;
    HarnessReport report_;
};

/// <X|S> against its unfolding <S_X|S>.
inline HarnessReport harness_unfolding(const Tss& tss, const HarnessConfig& cfg) {
    detail::require_format(tss);
    HarnessRun run(tss, "unfold");
    for (std::size_t i = 0; i < cfg.samples; ++i) {
        TermGenerator gen(tss, detail::sample_seed(cfg.seed, i), cfg.guarded_only);
        auto p = gen.rec(cfg.depth);
        auto q = unfold(p);
        run.record(i, check_relation(tss, p, q, Relation::equivalent, cfg.budget), p, q, Relation::equivalent);
    }
    return run.finish();
}

/// A closed term against a copy with every binder renamed. States are kept
/// syntactically distinct so the comparison is not decided by identification.
inline HarnessReport harness_alpha(const Tss& tss, const HarnessConfig& cfg) {
    detail::require_format(tss);
    HarnessRun run(tss, "alpha");
    for (std::size_t i = 0; i < cfg.samples; ++i) {
        TermGenerator gen(tss, detail::sample_seed(cfg.seed, i), cfg.guarded_only);
        auto p = gen.coin(0.8) ? gen.rec(cfg.depth) : gen.closed(cfg.depth);
        auto q = rename_binders(p);
        if (!alpha_eq(p, q)) {
            run.record(i, Outcome::fail, p, q, Relation::equivalent, "renaming broke alpha-equivalence");
            continue;
        }
        run.record(i, check_relation(tss, p, q, Relation::equivalent, cfg.budget, TermIdentity::syntactic), p, q,
                   Relation::equivalent);
    }
    return run.finish();
}

/// Pool of closed-term pairs (p, q) with p ⊑ q, each verified.
inline std::vector<std::pair<Term, Term>> refinement_pool(const Tss& tss, const HarnessConfig& cfg) {
    TermGenerator gen(tss, detail::sample_seed(cfg.seed, static_cast<std::size_t>(-1)), cfg.guarded_only);
    auto choice = detail::choice_op(tss, cfg);
    std::vector<Term> seeds;
    auto seed_depth = std::max<std::size_t>(1, cfg.depth > 1 ? cfg.depth - 1 : 1);
    for (std::size_t i = 0; i < 12; ++i) seeds.push_back(gen.closed(seed_depth));
    for (std::size_t i = 0; i < 4 && tss.recursion; ++i) seeds.push_back(gen.rec(seed_depth));

    std::vector<std::pair<Term, Term>> candidates;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        const auto& p = seeds[i];
        const auto& q = seeds[(i + 1) % seeds.size()];
        if (choice) {
            candidates.emplace_back(p, Term::apply(*choice, {p, p}));
            candidates.emplace_back(Term::apply(*choice, {p, q}), Term::apply(*choice, {q, p}));
        }
        if (p.is_rec()) candidates.emplace_back(p, unfold(p));
        candidates.emplace_back(p, rename_binders(p));
        for (std::size_t j = 0; j < seeds.size(); ++j)
            if (j != i) candidates.emplace_back(p, seeds[j]);
    }
    std::vector<std::pair<Term, Term>> pool;
    for (auto& [p, q] : candidates)
        if (check_relation(tss, p, q, Relation::refines, cfg.budget) == Outcome::pass) pool.emplace_back(p, q);
    return pool;
}

/// t[rho] ⊑ t[nu] for one open term and one pair of closed substitutions.
inline Outcome check_lean_instance(const Tss& tss, const Term& t, const Substitution& rho, const Substitution& nu,
                                   const Budget& budget) {
    return check_relation(tss, substitute(t, rho), substitute(t, nu), Relation::refines, budget);
}

/// Samples t[rho] ⊑ t[nu] with rho(x), nu(x) drawn pairwise from `pool`.
/// The pool is trusted as given.
inline HarnessReport harness_lean_with_pool(const Tss& tss, const HarnessConfig& cfg,
                                            const std::vector<std::pair<Term, Term>>& pool) {
    detail::require_format(tss);
    HarnessRun run(tss, "lean");
    if (pool.empty()) throw Error("lean harness: no verified refinement pairs");
    const std::vector<std::string> vars{"x", "y"};
    for (std::size_t i = 0; i < cfg.samples; ++i) {
        TermGenerator gen(tss, detail::sample_seed(cfg.seed, i), cfg.guarded_only);
        auto t = gen.open(cfg.depth, vars);
        Substitution rho, nu;
        std::string context = "t = " + tss.signature.print(t);
        for (const auto& v : vars) {
            const auto& [p, q] = pool[gen.pick(pool.size())];
            rho.emplace(v, p);
            nu.emplace(v, q);
            context += "; " + v + ": " + tss.signature.print(p) + " <= " + tss.signature.print(q);
        }
        auto lhs = substitute(t, rho), rhs = substitute(t, nu);
        run.record(i, check_relation(tss, lhs, rhs, Relation::refines, cfg.budget), lhs, rhs, Relation::refines,
                   std::move(context));
    }
    return run.finish();
}

inline HarnessReport harness_lean_precongruence(const Tss& tss, const HarnessConfig& cfg) {
    detail::require_format(tss);
    return harness_lean_with_pool(tss, cfg, refinement_pool(tss, cfg));
}

namespace detail {

// Applies one bisimilarity-preserving rewrite at a random position:
// t ~> c(t,t), c(t,u) ~> c(u,t), or c(t,t) ~> t.
inline Term rewrite_once(const Term& t, const std::string& choice, TermGenerator& gen) {
    std::size_t target = gen.pick(t.size());
    std::size_t counter = 0;
    auto go = [&](auto&& self, const Term& u) -> Term {
        if (counter++ == target) {
            if (u.is_apply() && u.name() == choice && u.args().size() == 2) {
                if (u.args()[0] == u.args()[1] && gen.coin(0.5)) return u.args()[0];
                return Term::apply(choice, {u.args()[1], u.args()[0]});
            }
            return Term::apply(choice, {u, u});
        }
        switch (u.kind()) {
        case Term::Kind::variable:
            return u;
        case Term::Kind::apply: {
            std::vector<Term> args;
            for (const auto& a : u.args()) args.push_back(self(self, a));
            return Term::apply(u.name(), std::move(args));
        }
        case Term::Kind::recursion: {
            RecSpec spec;
            for (const auto& [v, body] : u.spec()) spec.emplace(v, self(self, body));
            return Term::rec(u.name(), std::move(spec));
        }
        }
        return u;
    };
    return go(go, t);
}

}  // namespace detail

/// <X|S> against <X|S'> where S' rewrites bodies of S. The antecedent is
/// checked for the two substitutions Y -> <Y|S'> and Y -> <Y|S>.
inline HarnessReport harness_full_congruence(const Tss& tss, const HarnessConfig& cfg) {
    detail::require_format(tss);
    if (!tss.positive()) throw UnsupportedTss("full congruence harness requires a positive TSS");
    auto choice = detail::choice_op(tss, cfg);
    HarnessRun run(tss, "full");
    for (std::size_t i = 0; i < cfg.samples; ++i) {
        TermGenerator gen(tss, detail::sample_seed(cfg.seed, i), cfg.guarded_only);
        auto p = gen.rec(cfg.depth);
        const auto& spec = p.spec();
        RecSpec rewritten = spec;
        if (choice && i % 10 != 0) {
            auto rounds = 1 + gen.pick(3);
            for (std::size_t k = 0; k < rounds; ++k) {
                auto it = rewritten.begin();
                std::advance(it, static_cast<std::ptrdiff_t>(gen.pick(rewritten.size())));
                it->second = detail::rewrite_once(it->second, *choice, gen);
            }
        }
        auto q = Term::rec(p.name(), rewritten);

        bool antecedent = true, budget_hit = false;
        for (const RecSpec* closing : {static_cast<const RecSpec*>(&rewritten), &spec}) {
            Substitution sigma;
            for (const auto& [y, body] : *closing) sigma.emplace(y, Term::rec(y, *closing));
            for (const auto& [y, body] : spec) {
                auto o = check_relation(tss, substitute(body, sigma), substitute(rewritten.at(y), sigma),
                                        Relation::equivalent, cfg.budget);
                budget_hit = budget_hit || o == Outcome::skip;
                antecedent = antecedent && o == Outcome::pass;
            }
        }
        if (!antecedent) {
            run.skip(i, budget_hit ? "budget exceeded" : "antecedent does not hold");
            continue;
        }
        run.record(i, check_relation(tss, p, q, Relation::equivalent, cfg.budget), p, q, Relation::equivalent);
    }
    return run.finish();
}

}  // namespace sosw
