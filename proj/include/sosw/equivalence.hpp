#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "semantics.hpp"

namespace sosw {

struct Edge {
    std::size_t source = 0;
    std::size_t action = 0;
    std::size_t target = 0;

    friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Finite 3-valued transition system: certain edges are required, possible
/// edges are allowed, and certain ⊆ possible.
struct ModalLTS {
    std::vector<std::string> actions;
    std::vector<std::string> states;
    std::vector<Edge> certain;
    std::vector<Edge> possible;
    std::vector<std::size_t> roots;

    [[nodiscard]] std::size_t size() const { return states.size(); }

    [[nodiscard]] bool two_valued() const {
        std::set<Edge> c(certain.begin(), certain.end()), p(possible.begin(), possible.end());
        return c == p;
    }

    void validate() const {
        std::set<Edge> p(possible.begin(), possible.end());
        auto check = [&](const Edge& e) {
            if (e.source >= size() || e.target >= size() || e.action >= actions.size())
                throw Error("modal LTS edge out of range");
        };
        for (const auto& e : possible) check(e);
        for (const auto& e : certain) {
            check(e);
            if (!p.contains(e)) throw Error("modal LTS certain edge is not possible");
        }
        for (auto r : roots)
            if (r >= size()) throw Error("modal LTS root out of range");
    }

    /// `states N` header, one `index TAB name` line per state, `actions` line,
    /// `roots` line, then `src TAB action TAB tgt TAB certain|possible`.
    [[nodiscard]] std::string serialize() const {
        std::ostringstream os;
        os << "states " << states.size() << '\n';
        for (std::size_t i = 0; i < states.size(); ++i) os << i << '\t' << states[i] << '\n';
        os << "actions";
        for (const auto& a : actions) os << ' ' << a;
        os << "\nroots";
        for (auto r : roots) os << ' ' << r;
        os << '\n';
        std::set<Edge> c(certain.begin(), certain.end());
        std::set<Edge> p(possible.begin(), possible.end());
        for (const auto& e : p)
            os << e.source << '\t' << actions[e.action] << '\t' << e.target << '\t'
               << (c.contains(e) ? "certain" : "possible") << '\n';
        return os.str();
    }

    static ModalLTS parse(std::string_view text) {
        ModalLTS lts;
        std::istringstream is{std::string(text)};
        std::string line, word;
        std::size_t n = 0;
        if (!std::getline(is, line)) throw Error("modal LTS: empty input");
        if (std::istringstream header(line); !(header >> word >> n) || word != "states")
            throw Error("modal LTS: expected `states N` header");
        for (std::size_t i = 0; i < n; ++i) {
            if (!std::getline(is, line)) throw Error("modal LTS: truncated state list");
            auto tab = line.find('\t');
            if (tab == std::string::npos) throw Error("modal LTS: malformed state line");
            lts.states.push_back(line.substr(tab + 1));
        }
        std::map<std::string, std::size_t, std::less<>> action_ids;
        if (std::getline(is, line)) {
            std::istringstream ls(line);
            ls >> word;
            if (word != "actions") throw Error("modal LTS: expected actions line");
            while (ls >> word) {
                action_ids.emplace(word, lts.actions.size());
                lts.actions.push_back(word);
            }
        }
        if (std::getline(is, line)) {
            std::istringstream ls(line);
            ls >> word;
            if (word != "roots") throw Error("modal LTS: expected roots line");
            std::size_t r = 0;
            while (ls >> r) lts.roots.push_back(r);
        }
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            std::istringstream ls(line);
            std::size_t src = 0, tgt = 0;
            std::string action, modality;
            if (!(ls >> src >> action >> tgt >> modality)) throw Error("modal LTS: malformed edge line");
            auto it = action_ids.find(action);
            if (it == action_ids.end()) throw Error("modal LTS: unknown action " + action);
            Edge e{src, it->second, tgt};
            lts.possible.push_back(e);
            if (modality == "certain")
                lts.certain.push_back(e);
            else if (modality != "possible")
                throw Error("modal LTS: unknown modality " + modality);
        }
        lts.validate();
        return lts;
    }
};

/// Modal LTS over the whole saturated fragment of `session`. Every state
/// keeps its fragment id, so unreachable helper states (unfoldings, negative
/// premise sources) are included; they cannot affect pairs of reachable
/// states.
inline ModalLTS extract_modal_lts(Session& session, const std::vector<StateId>& roots) {
    session.solve();
    ModalLTS lts;
    lts.actions = session.tss().signature.actions();
    for (StateId s = 0; s < session.size(); ++s) lts.states.push_back(session.show(s));
    lts.roots.assign(roots.begin(), roots.end());
    for (const auto& t : session.table().final().possible) {
        Edge e{t.source, t.action, t.target};
        lts.possible.push_back(e);
        if (session.certain().contains(t)) lts.certain.push_back(e);
    }
    return lts;
}

inline ModalLTS extract_modal_lts(const Tss& tss, const std::vector<Term>& roots, const Budget& budget,
                                  TermIdentity identity = TermIdentity::alpha) {
    Session session(tss, SessionOptions{budget, identity});
    std::vector<StateId> ids;
    for (const auto& r : roots) ids.push_back(session.add_term(r));
    return extract_modal_lts(session, ids);
}

/// Pairs (p, q) over the states of one ModalLTS.
class RefinementRelation {
public:
    explicit RefinementRelation(std::size_t n, bool full = false) : n_(n), bits_(n * n, full ? 1 : 0) {}

    [[nodiscard]] std::size_t size() const { return n_; }
    [[nodiscard]] bool contains(std::size_t p, std::size_t q) const { return bits_[p * n_ + q] != 0; }
    void set(std::size_t p, std::size_t q, bool v) { bits_[p * n_ + q] = v ? 1 : 0; }

    [[nodiscard]] std::vector<std::pair<std::size_t, std::size_t>> pairs() const {
        std::vector<std::pair<std::size_t, std::size_t>> out;
        for (std::size_t p = 0; p < n_; ++p)
            for (std::size_t q = 0; q < n_; ++q)
                if (contains(p, q)) out.emplace_back(p, q);
        return out;
    }

    friend bool operator==(const RefinementRelation&, const RefinementRelation&) = default;

private:
    std::size_t n_;
    std::vector<char> bits_;
};

enum class Schedule { forward, reverse };

/// Greatest relation R such that for p R q: every certain p -a-> p' is matched
/// by a certain q -a-> q' with p' R q', and every possible q -a-> q' is
/// matched by a possible p -a-> p' with p' R q'. Computed by eliminating
/// violating pairs from states x states; predecessors of a removed pair are
/// rechecked.
inline RefinementRelation greatest_refinement(const ModalLTS& lts, Schedule schedule = Schedule::forward) {
    const auto n = lts.size();
    using Succ = std::vector<std::vector<std::pair<std::size_t, std::size_t>>>;
    Succ certain(n), possible(n);
    std::vector<std::vector<std::size_t>> preds(n);
    for (const auto& e : lts.certain) certain[e.source].emplace_back(e.action, e.target);
    for (const auto& e : lts.possible) {
        possible[e.source].emplace_back(e.action, e.target);
        preds[e.target].push_back(e.source);
    }
    for (auto& p : preds) {
        std::ranges::sort(p);
        auto dup = std::ranges::unique(p);
        p.erase(dup.begin(), dup.end());
    }

    RefinementRelation rel(n, true);
    auto violates = [&](std::size_t p, std::size_t q) {
        for (const auto& [a, p1] : certain[p]) {
            bool matched = std::ranges::any_of(certain[q], [&](const auto& e) {
                return e.first == a && rel.contains(p1, e.second);
            });
            if (!matched) return true;
        }
        for (const auto& [a, q1] : possible[q]) {
            bool matched = std::ranges::any_of(possible[p], [&](const auto& e) {
                return e.first == a && rel.contains(e.second, q1);
            });
            if (!matched) return true;
        }
        return false;
    };

    std::deque<std::pair<std::size_t, std::size_t>> dirty;
    std::vector<char> queued(n * n, 1);
    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t q = 0; q < n; ++q) dirty.emplace_back(p, q);
    if (schedule == Schedule::reverse) std::ranges::reverse(dirty);

    while (!dirty.empty()) {
        std::pair<std::size_t, std::size_t> pq;
        if (schedule == Schedule::forward) {
            pq = dirty.front();
            dirty.pop_front();
        } else {
            pq = dirty.back();
            dirty.pop_back();
        }
        auto [p, q] = pq;
        queued[p * n + q] = 0;
        if (!rel.contains(p, q) || !violates(p, q)) continue;
        rel.set(p, q, false);
        for (auto pp : preds[p])
            for (auto qq : preds[q])
                if (rel.contains(pp, qq) && !queued[pp * n + qq]) {
                    queued[pp * n + qq] = 1;
                    dirty.emplace_back(pp, qq);
                }
    }
    return rel;
}

inline void check_state(const ModalLTS& lts, std::size_t s) {
    if (s >= lts.size()) throw Error("unknown state " + std::to_string(s));
}

inline bool modal_refinement(const ModalLTS& lts, std::size_t p, std::size_t q) {
    check_state(lts, p);
    check_state(lts, q);
    return greatest_refinement(lts).contains(p, q);
}

inline bool bisim_equiv(const ModalLTS& lts, std::size_t p, std::size_t q) {
    check_state(lts, p);
    check_state(lts, q);
    auto rel = greatest_refinement(lts);
    return rel.contains(p, q) && rel.contains(q, p);
}

/// True iff R is a bisimulation up to bisimulation equivalence on a
/// 2-valued system: every step of p for (p,q) in R is matched by q with the
/// derivatives in ≡·R·≡. A true answer certifies R ⊆ ≡.
inline bool check_bisimulation_upto(const ModalLTS& lts, const std::vector<std::pair<std::size_t, std::size_t>>& r) {
    if (!lts.two_valued()) throw Error("bisimulation up to is only defined on 2-valued systems");
    const auto n = lts.size();
    std::set<std::pair<std::size_t, std::size_t>> rel(r.begin(), r.end());
    for (const auto& [p, q] : rel) {
        check_state(lts, p);
        check_state(lts, q);
        if (!rel.contains({q, p})) throw Error("relation is not symmetric");
    }
    auto refinement = greatest_refinement(lts);
    auto equiv = [&](std::size_t a, std::size_t b) { return refinement.contains(a, b) && refinement.contains(b, a); };

    // closure[r][s] iff r ≡ r' R s' ≡ s for some r', s'.
    std::vector<char> left(n * n, 0), closure(n * n, 0);
    for (const auto& [r1, s1] : rel)
        for (std::size_t x = 0; x < n; ++x)
            if (equiv(x, r1)) left[x * n + s1] = 1;
    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t s1 = 0; s1 < n; ++s1)
            if (left[x * n + s1])
                for (std::size_t y = 0; y < n; ++y)
                    if (equiv(s1, y)) closure[x * n + y] = 1;

    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> succ(n);
    for (const auto& e : lts.possible) succ[e.source].emplace_back(e.action, e.target);
    for (const auto& [p, q] : rel)
        for (const auto& [a, p1] : succ[p]) {
            bool matched = std::ranges::any_of(succ[q], [&](const auto& e) {
                return e.first == a && closure[p1 * n + e.second];
            });
            if (!matched) return false;
        }
    return true;
}

enum class Answer { yes, no, unknown_budget };

/// Compares two closed terms in one shared fragment.
struct Comparison {
    Answer forward = Answer::unknown_budget;   // p ⊑ q
    Answer backward = Answer::unknown_budget;  // q ⊑ p
    ModalLTS lts;
    RefinementRelation relation{0};
    std::string diagnostic;
    std::vector<std::string> partial_fragment;  // set when a budget was hit
};

inline Comparison compare_terms(const Tss& tss, const Term& p, const Term& q, const Budget& budget,
                                TermIdentity identity = TermIdentity::alpha) {
    Comparison c;
    try {
        c.lts = extract_modal_lts(tss, {p, q}, budget, identity);
    } catch (const BudgetExceeded& e) {
        c.diagnostic = e.what();
        c.partial_fragment = e.partial_fragment;
        return c;
    }
    c.relation = greatest_refinement(c.lts);
    auto rp = c.lts.roots[0], rq = c.lts.roots[1];
    c.forward = c.relation.contains(rp, rq) ? Answer::yes : Answer::no;
    c.backward = c.relation.contains(rq, rp) ? Answer::yes : Answer::no;
    return c;
}

}  // namespace sosw
