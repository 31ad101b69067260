#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "format.hpp"
#include "tss.hpp"

namespace sosw {

using StateId = std::uint32_t;

struct Transition {
    StateId source = 0;
    ActionId action = 0;
    StateId target = 0;

    friend auto operator<=>(const Transition&, const Transition&) = default;
};

enum class Mode { certain, possible };

/// How closed terms are identified in the fragment. `alpha` collapses terms
/// that differ only in bound variable names; `syntactic` keeps them apart.
enum class TermIdentity { alpha, syntactic };

class BudgetExceeded : public Error {
public:
    BudgetExceeded(const std::string& what, std::vector<std::string> partial)
        : Error(what), partial_fragment(std::move(partial)) {}

    // Leading part of the fragment built before the limit was hit.
    std::vector<std::string> partial_fragment;
};

class UnsupportedTss : public Error {
public:
    using Error::Error;
};

/// Set of closed positive literals with a per-state successor index.
class TransitionSet {
public:
    bool insert(const Transition& t) {
        if (!edges_.insert(t).second) return false;
        if (out_.size() <= t.source) out_.resize(t.source + 1);
        out_[t.source][t.action].push_back(t.target);
        return true;
    }

    [[nodiscard]] bool contains(const Transition& t) const { return edges_.contains(t); }

    [[nodiscard]] bool enables(StateId s, ActionId a) const {
        return s < out_.size() && out_[s].contains(a);
    }

    [[nodiscard]] std::vector<StateId> successors(StateId s, ActionId a) const {
        if (s >= out_.size()) return {};
        auto it = out_[s].find(a);
        return it == out_[s].end() ? std::vector<StateId>{} : it->second;
    }

    [[nodiscard]] const std::set<Transition>& edges() const { return edges_; }
    [[nodiscard]] std::size_t size() const { return edges_.size(); }

private:
    std::set<Transition> edges_;
    std::vector<std::map<ActionId, std::vector<StateId>>> out_;
};

struct Stage {
    std::set<Transition> certain;
    std::set<Transition> possible;

    friend bool operator==(const Stage&, const Stage&) = default;
};

/// Certain/possible approximations per stage. Negative literal sets are
/// implicit: the possible negatives of stage n are those not denying any
/// certain transition of an earlier stage; the certain negatives of stage n
/// are those not denying a possible transition of stage n.
struct StageTable {
    std::vector<Stage> stages;
    std::optional<std::size_t> converged_at;

    [[nodiscard]] const Stage& final() const {
        if (!converged_at) throw Error("stage table not converged");
        return stages.at(*converged_at);
    }
};

/// Proof of a closed positive literal. Leaves are either premise-free rule
/// instances or negative hypotheses (rule == "hypothesis").
struct ProofTree {
    Literal literal;
    std::string rule;
    std::vector<ProofTree> premises;

    [[nodiscard]] std::size_t depth() const {
        std::size_t d = 0;
        for (const auto& p : premises) d = std::max(d, p.depth());
        return d + 1;
    }
};

struct TransitionAnswer {
    std::vector<std::pair<std::string, Term>> certain;
    std::vector<std::pair<std::string, Term>> possible;
};

struct Fragment {
    std::vector<Term> terms;
    bool saturated = false;
    Budget budget;
};

struct SessionOptions {
    std::optional<Budget> budget;
    TermIdentity identity = TermIdentity::alpha;
};

/// Demand-driven well-founded semantics over a finite fragment of closed
/// terms. The fragment grows while the first (over-approximating) stage is
/// derived; afterwards it is saturated and later stages run over it
/// unchanged.
class Session {
public:
    // Which negative literals count as hypotheses in a derivation.
    using Hypothesis = std::function<bool(StateId, ActionId)>;

    struct Derivation {
        // Index into tss().rules, or -1 for the recursion rule.
        int rule = -1;
        std::vector<Transition> positives;
        std::vector<std::pair<StateId, ActionId>> negatives;
    };
    using Provenance = std::map<Transition, Derivation>;

    explicit Session(Tss tss, SessionOptions options = {})
        : tss_(std::move(tss)), budget_(options.budget.value_or(tss_.budget)), identity_(options.identity) {
        compile();
    }

    [[nodiscard]] const Tss& tss() const { return tss_; }
    [[nodiscard]] const Budget& budget() const { return budget_; }
    [[nodiscard]] std::size_t size() const { return states_.size(); }
    [[nodiscard]] const Term& term(StateId s) const { return states_.at(s); }
    [[nodiscard]] std::string show(StateId s) const { return tss_.signature.print(term(s)); }

    [[nodiscard]] std::string key(const Term& t) const {
        return identity_ == TermIdentity::alpha ? alpha_key(t) : to_string(t);
    }

    [[nodiscard]] std::optional<StateId> find(const Term& t) const {
        auto it = index_.find(key(t));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    /// Adds a closed term to the fragment (no-op if an identical state exists).
    StateId add_term(const Term& t) {
        if (!t.closed()) throw Error("term is not closed: " + tss_.signature.print(t));
        tss_.signature.validate(t);
        auto before = states_.size();
        auto id = intern(t);
        if (states_.size() != before) solved_ = false;
        return id;
    }

    /// Least set of closed positive literals closed under the rules, where
    /// negative premises are discharged by `hypothesis`.
    TransitionSet closure(const Hypothesis& hypothesis, Provenance* provenance = nullptr) {
        Closure run{*this, hypothesis, provenance};
        return run.execute();
    }

    /// Grows the fragment to closure under the most permissive stage.
    Fragment saturate() {
        if (!saturation_ || saturated_size_ != states_.size()) {
            saturation_ = closure([](StateId, ActionId) { return true; });
            saturated_size_ = states_.size();
        }
        return Fragment{states_, true, budget_};
    }

    /// Alternating certain/possible approximation until both stabilize.
    const StageTable& solve() {
        if (solved_) return table_;
        saturate();
        StageTable table;
        std::set<std::pair<StateId, ActionId>> ever_certain;
        for (std::size_t n = 0;; ++n) {
            if (n >= budget_.max_stages) throw BudgetExceeded("stage budget exceeded", preview());
            TransitionSet possible = n == 0 ? *saturation_
                                            : closure([&](StateId s, ActionId a) { return !ever_certain.contains({s, a}); });
            TransitionSet certain = closure([&](StateId s, ActionId a) { return !possible.enables(s, a); });
            for (const auto& t : certain.edges()) ever_certain.emplace(t.source, t.action);
            table.stages.push_back(Stage{certain.edges(), possible.edges()});
            if (n > 0 && table.stages[n] == table.stages[n - 1]) {
                table.converged_at = n - 1;
                break;
            }
        }
        table_ = std::move(table);
        build_final_index();
        solved_ = true;
        return table_;
    }

    [[nodiscard]] bool solved() const { return solved_; }
    [[nodiscard]] const StageTable& table() const {
        if (!solved_) throw Error("session not solved");
        return table_;
    }
    [[nodiscard]] const TransitionSet& certain() const {
        (void)table();
        return final_certain_;
    }
    [[nodiscard]] const TransitionSet& possible() const {
        (void)table();
        return final_possible_;
    }

    [[nodiscard]] TransitionAnswer transitions(StateId s) const {
        TransitionAnswer answer;
        for (const auto& t : table().final().certain)
            if (t.source == s) answer.certain.emplace_back(tss_.signature.action_name(t.action), term(t.target));
        for (const auto& t : table().final().possible)
            if (t.source == s) answer.possible.emplace_back(tss_.signature.action_name(t.action), term(t.target));
        return answer;
    }

    /// Certain and possible transitions coincide on the explored fragment.
    [[nodiscard]] bool complete_on_fragment() const {
        const auto& f = table().final();
        return f.certain == f.possible;
    }

    [[nodiscard]] Literal literal(const Transition& t) const {
        return Literal::transition(term(t.source), tss_.signature.action_name(t.action), term(t.target));
    }

    ProofTree extract_proof(const Transition& goal, Mode mode) {
        solve();
        Provenance provenance;
        TransitionSet derived = mode == Mode::certain
                                    ? closure([&](StateId s, ActionId a) { return !final_possible_.enables(s, a); },
                                              &provenance)
                                    : closure([&](StateId s, ActionId a) { return !final_certain_.enables(s, a); },
                                              &provenance);
        if (!derived.contains(goal))
            throw Error("literal not derived: " + show(goal.source) + " -" +
                        tss_.signature.action_name(goal.action) + "-> " + show(goal.target));
        return build_proof(goal, provenance);
    }

    [[nodiscard]] std::string render(const ProofTree& tree) const {
        std::ostringstream os;
        render_into(os, tree, 0);
        return os.str();
    }

private:
    struct CompiledRule {
        std::size_t index = 0;
        bool variable_source = false;
        std::string head;
        std::vector<std::string> source_vars;
        // Positive premises in order of increasing target distance.
        std::vector<std::pair<const Literal*, ActionId>> positives;
        std::vector<std::pair<const Literal*, ActionId>> negatives;
        ActionId action = 0;
    };

    Tss tss_;
    Budget budget_;
    TermIdentity identity_;
    std::vector<CompiledRule> rules_;
    std::multimap<std::string, std::size_t, std::less<>> by_head_;
    std::vector<std::size_t> variable_source_rules_;

    std::vector<Term> states_;
    std::unordered_map<std::string, StateId> index_;

    std::optional<TransitionSet> saturation_;
    std::size_t saturated_size_ = 0;
    StageTable table_;
    TransitionSet final_certain_;
    TransitionSet final_possible_;
    bool solved_ = false;

    void compile() {
        tss_.validate();
        auto report = check_tss_format(tss_);
        for (const auto& v : report.violations)
            throw UnsupportedTss("rule " + v.rule + " is not ntyft/ntyxt: " + v.clause);
        for (const auto& v : report.impurities)
            throw UnsupportedTss("rule " + v.rule + " is not pure: " + v.clause);
        for (std::size_t i = 0; i < tss_.rules.size(); ++i) {
            const auto& r = tss_.rules[i];
            CompiledRule c;
            c.index = i;
            c.action = tss_.signature.action_id(r.conclusion.action);
            const auto& src = r.conclusion.source;
            if (src.is_variable()) {
                c.variable_source = true;
                c.source_vars.push_back(src.name());
                variable_source_rules_.push_back(i);
            } else {
                c.head = src.name();
                for (const auto& a : src.args()) c.source_vars.push_back(a.name());
                by_head_.emplace(c.head, i);
            }
            auto dist = distances(r);
            for (const auto& p : r.premises) {
                auto id = tss_.signature.action_id(p.action);
                (p.positive() ? c.positives : c.negatives).emplace_back(&p, id);
            }
            std::ranges::stable_sort(c.positives, {}, [&](const auto& p) { return dist.at(p.first->target->name()); });
            rules_.push_back(std::move(c));
        }
    }

    StateId intern(const Term& t) {
        auto k = key(t);
        if (auto it = index_.find(k); it != index_.end()) return it->second;
        if (states_.size() >= budget_.max_terms)
            throw BudgetExceeded("fragment bound exceeded (max-terms " + std::to_string(budget_.max_terms) + ")",
                                 preview());
        auto id = static_cast<StateId>(states_.size());
        states_.push_back(t);
        index_.emplace(std::move(k), id);
        return id;
    }

    [[nodiscard]] std::vector<std::string> preview() const {
        std::vector<std::string> out;
        for (std::size_t i = 0; i < states_.size() && i < 20; ++i) out.push_back(show(static_cast<StateId>(i)));
        return out;
    }

    void build_final_index() {
        final_certain_ = {};
        final_possible_ = {};
        for (const auto& t : table_.final().certain) final_certain_.insert(t);
        for (const auto& t : table_.final().possible) final_possible_.insert(t);
    }

    // One bottom-up worklist derivation.
    class Closure {
    public:
        Closure(Session& session, const Hypothesis& hypothesis, Provenance* provenance)
            : s_(session), hypothesis_(hypothesis), provenance_(provenance) {}

        TransitionSet execute() {
            for (StateId p = 0; p < s_.states_.size(); ++p) enqueue(p);
            while (!work_.empty()) {
                auto p = work_.front();
                work_.pop_front();
                queued_[p] = 0;
                auto before = s_.states_.size();
                evaluate(p);
                for (auto q = before; q < s_.states_.size(); ++q) enqueue(static_cast<StateId>(q));
            }
            return std::move(facts_);
        }

    private:
        Session& s_;
        const Hypothesis& hypothesis_;
        Provenance* provenance_;
        TransitionSet facts_;
        std::deque<StateId> work_;
        std::vector<char> queued_;
        std::vector<std::set<StateId>> dependents_;

        void enqueue(StateId p) {
            if (queued_.size() <= p) queued_.resize(p + 1, 0);
            if (queued_[p]) return;
            queued_[p] = 1;
            work_.push_back(p);
        }

        void depends(StateId on, StateId who) {
            if (dependents_.size() <= on) dependents_.resize(on + 1);
            dependents_[on].insert(who);
        }

        void fire(const Transition& t, Derivation derivation) {
            if (!facts_.insert(t)) return;
            if (provenance_) provenance_->emplace(t, std::move(derivation));
            if (t.source < dependents_.size())
                for (auto d : dependents_[t.source]) enqueue(d);
        }

        void evaluate(StateId p) {
            // Copy: interning below may reallocate the state vector.
            const Term term = s_.states_[p];
            if (term.is_apply()) {
                auto [lo, hi] = s_.by_head_.equal_range(term.name());
                for (auto it = lo; it != hi; ++it) {
                    const auto& rule = s_.rules_[it->second];
                    if (rule.source_vars.size() != term.args().size()) continue;
                    Substitution sigma;
                    for (std::size_t i = 0; i < rule.source_vars.size(); ++i)
                        sigma.emplace(rule.source_vars[i], term.args()[i]);
                    Derivation d{static_cast<int>(rule.index), {}, {}};
                    extend(p, rule, 0, sigma, d);
                }
            }
            for (auto idx : s_.variable_source_rules_) {
                const auto& rule = s_.rules_[idx];
                Substitution sigma;
                sigma.emplace(rule.source_vars[0], term);
                Derivation d{static_cast<int>(rule.index), {}, {}};
                extend(p, rule, 0, sigma, d);
            }
            if (term.is_rec() && s_.tss_.recursion) {
                auto u = s_.intern(unfold(term));
                depends(u, p);
                for (const auto& a : actions_of(u))
                    for (auto q : facts_.successors(u, a))
                        fire(Transition{p, a, q}, Derivation{-1, {Transition{u, a, q}}, {}});
            }
        }

        std::vector<ActionId> actions_of(StateId u) const {
            std::vector<ActionId> out;
            for (ActionId a = 0; a < s_.tss_.signature.actions().size(); ++a)
                if (facts_.enables(u, a)) out.push_back(a);
            return out;
        }

        void extend(StateId p, const CompiledRule& rule, std::size_t i, const Substitution& sigma, Derivation& d) {
            if (i < rule.positives.size()) {
                const auto& [premise, action] = rule.positives[i];
                auto src = s_.intern(substitute(premise->source, sigma));
                depends(src, p);
                for (auto q : facts_.successors(src, action)) {
                    Substitution next = sigma;
                    next.insert_or_assign(premise->target->name(), s_.states_[q]);
                    d.positives.push_back(Transition{src, action, q});
                    extend(p, rule, i + 1, next, d);
                    d.positives.pop_back();
                }
                return;
            }
            const auto& r = s_.tss_.rules[rule.index];
            auto saved = d.negatives.size();
            for (const auto& [premise, action] : rule.negatives) {
                auto u = s_.intern(substitute(premise->source, sigma));
                if (!hypothesis_(u, action)) {
                    d.negatives.resize(saved);
                    return;
                }
                d.negatives.emplace_back(u, action);
            }
            auto target = s_.intern(substitute(*r.conclusion.target, sigma));
            fire(Transition{p, rule.action, target}, d);
            d.negatives.resize(saved);
        }
    };

    ProofTree build_proof(const Transition& t, const Provenance& provenance) const {
        const auto& d = provenance.at(t);
        ProofTree node{literal(t), d.rule < 0 ? "recursion" : tss_.rules[d.rule].name, {}};
        for (const auto& p : d.positives) node.premises.push_back(build_proof(p, provenance));
        for (const auto& [u, a] : d.negatives)
            node.premises.push_back(
                ProofTree{Literal::refusal(term(u), tss_.signature.action_name(a)), "hypothesis", {}});
        return node;
    }

    void render_into(std::ostringstream& os, const ProofTree& tree, std::size_t indent) const {
        os << std::string(indent * 2, ' ') << tss_.signature.print(tree.literal.source) << " -"
           << tree.literal.action;
        if (tree.literal.target)
            os << "-> " << tss_.signature.print(*tree.literal.target);
        else
            os << "/->";
        os << "   [" << tree.rule << "]\n";
        for (const auto& p : tree.premises) render_into(os, p, indent + 1);
    }
};

/// Saturated fragment reachable from `roots`.
inline Fragment saturate(const Tss& tss, const std::vector<Term>& roots, const Budget& budget) {
    Session session(tss, SessionOptions{budget});
    for (const auto& r : roots) session.add_term(r);
    return session.saturate();
}

inline TransitionAnswer transitions(const Tss& tss, const Term& p, const Budget& budget) {
    Session session(tss, SessionOptions{budget});
    auto id = session.add_term(p);
    session.solve();
    return session.transitions(id);
}

inline bool is_complete_on(const StageTable& table) {
    const auto& f = table.final();
    return f.certain == f.possible;
}

inline std::string render_transition_records(const Session& session, StateId source, Mode mode) {
    std::ostringstream os;
    const auto& sig = session.tss().signature;
    for (const auto& t : session.table().final().possible) {
        if (t.source != source) continue;
        bool certain = session.certain().contains(t);
        if (mode == Mode::certain && !certain) continue;
        os << session.show(t.source) << " | " << sig.action_name(t.action) << " | " << session.show(t.target)
           << " | " << (certain ? "certain" : "possible") << '\n';
    }
    return os.str();
}

}  // namespace sosw
