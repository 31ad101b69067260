#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tss.hpp"

namespace sosw {

/// Rule-format flags. tyft/tyxt are the positive cases of ntyft/ntyxt.
struct RuleClass {
    bool ntytt = false;
    bool ntyft = false;
    bool ntyxt = false;
    bool nxytt = false;
    bool positive = false;

    [[nodiscard]] bool tyft() const { return ntyft && positive; }
    [[nodiscard]] bool tyxt() const { return ntyxt && positive; }

    friend bool operator==(const RuleClass&, const RuleClass&) = default;
};

namespace detail {

inline bool distinct_variables(std::span<const Term> terms) {
    VarSet seen;
    for (const auto& t : terms)
        if (!t.is_variable() || !seen.insert(t.name()).second) return false;
    return true;
}

// Why a rule is not ntytt, or nullopt if it is.
inline std::optional<std::string> ntytt_failure(const Rule& r) {
    VarSet targets;
    for (const auto& p : r.premises) {
        if (!p.positive()) continue;
        if (!p.target->is_variable()) return "premise target not a variable";
        if (!targets.insert(p.target->name()).second) return "repeated premise target variable " + p.target->name();
        if (r.conclusion.source.free_vars().contains(p.target->name()))
            return "premise target variable " + p.target->name() + " occurs in source";
    }
    return std::nullopt;
}

// Why a rule is neither ntyft nor ntyxt, or nullopt if it is one of them.
inline std::optional<std::string> source_failure(const Rule& r) {
    const auto& src = r.conclusion.source;
    if (src.is_variable()) return std::nullopt;
    if (src.is_rec()) return "source is a recursion construct";
    for (const auto& arg : src.args())
        if (!arg.is_variable()) return "source contains more than one function symbol";
    if (!distinct_variables(src.args())) return "repeated source variable";
    return std::nullopt;
}

}  // namespace detail

inline RuleClass classify_rule(const Rule& r) {
    RuleClass c;
    c.positive = r.positive();
    c.ntytt = !detail::ntytt_failure(r);
    if (!c.ntytt) return c;
    const auto& src = r.conclusion.source;
    c.ntyxt = src.is_variable();
    c.ntyft = src.is_apply() && detail::distinct_variables(src.args());
    c.nxytt = std::ranges::all_of(r.premises, [](const Literal& l) { return l.source.is_variable(); });
    return c;
}

/// Every variable occurring free in some literal of the rule.
inline VarSet rule_vars(const Rule& r) {
    VarSet vars;
    auto add = [&](const Literal& l) {
        vars.insert(l.source.free_vars().begin(), l.source.free_vars().end());
        if (l.target) vars.insert(l.target->free_vars().begin(), l.target->free_vars().end());
    };
    for (const auto& p : r.premises) add(p);
    add(r.conclusion);
    return vars;
}

struct DependencyGraph {
    std::vector<std::string> nodes;
    std::vector<std::pair<std::string, std::string>> edges;
};

inline DependencyGraph dependency_graph(const Rule& r) {
    if (!classify_rule(r).ntytt) throw Error("dependency graph undefined: rule " + r.label() + " is not ntytt");
    DependencyGraph g;
    auto vars = rule_vars(r);
    g.nodes.assign(vars.begin(), vars.end());
    for (const auto& p : r.premises) {
        if (!p.positive()) continue;
        for (const auto& x : p.source.free_vars()) g.edges.emplace_back(x, p.target->name());
    }
    std::ranges::sort(g.edges);
    auto dup = std::ranges::unique(g.edges);
    g.edges.erase(dup.begin(), dup.end());
    return g;
}

/// With finitely many premises, every backward chain is finite iff the
/// dependency graph is acyclic.
inline bool is_well_founded(const Rule& r) {
    auto g = dependency_graph(r);
    std::map<std::string, std::size_t, std::less<>> indegree;
    for (const auto& n : g.nodes) indegree[n] = 0;
    for (const auto& [from, to] : g.edges) ++indegree[to];
    std::vector<std::string> ready;
    for (const auto& [n, d] : indegree)
        if (d == 0) ready.push_back(n);
    std::size_t removed = 0;
    while (!ready.empty()) {
        auto n = std::move(ready.back());
        ready.pop_back();
        ++removed;
        for (const auto& [from, to] : g.edges)
            if (from == n && --indegree[to] == 0) ready.push_back(to);
    }
    return removed == g.nodes.size();
}

/// Variables occurring neither in the source nor as a positive premise target.
inline VarSet free_rule_vars(const Rule& r) {
    VarSet covered = r.conclusion.source.free_vars();
    for (const auto& p : r.premises)
        if (p.positive() && p.target->is_variable()) covered.insert(p.target->name());
    VarSet free;
    for (const auto& v : rule_vars(r))
        if (!covered.contains(v)) free.insert(v);
    return free;
}

inline bool is_pure(const Rule& r) { return is_well_founded(r) && free_rule_vars(r).empty(); }

/// Distance of every variable of a pure ntytt rule from its source.
inline std::map<std::string, std::size_t, std::less<>> distances(const Rule& r) {
    if (!is_pure(r)) throw Error("distance undefined: rule " + r.label() + " is not pure");
    std::map<std::string, std::size_t, std::less<>> dist;
    for (const auto& x : r.conclusion.source.free_vars()) dist[x] = 0;
    // Acyclic, so at most one pass per premise is needed.
    std::vector<const Literal*> pending;
    for (const auto& p : r.premises)
        if (p.positive()) pending.push_back(&p);
    while (!pending.empty()) {
        auto before = pending.size();
        std::erase_if(pending, [&](const Literal* p) {
            std::size_t d = 0;
            for (const auto& x : p->source.free_vars()) {
                auto it = dist.find(x);
                if (it == dist.end()) return false;
                d = std::max(d, it->second);
            }
            dist[p->target->name()] = d + 1;
            return true;
        });
        if (pending.size() == before) throw Error("distance undefined: unresolved premise in rule " + r.label());
    }
    return dist;
}

inline std::size_t distance(const Rule& r, const std::string& v) {
    if (!rule_vars(r).contains(v)) throw Error("distance undefined: " + v + " does not occur in rule " + r.label());
    return distances(r).at(v);
}

enum class Verdict { positive_tyft_tyxt, pure_ntyft_ntyxt, ntyft_ntyxt, out_of_format };

inline std::string to_string(Verdict v) {
    switch (v) {
    case Verdict::positive_tyft_tyxt: return "tyft/tyxt with recursion";
    case Verdict::pure_ntyft_ntyxt: return "pure ntyft/ntyxt with recursion";
    case Verdict::ntyft_ntyxt: return "ntyft/ntyxt with recursion";
    case Verdict::out_of_format: return "out of format";
    }
    return "?";
}

struct Violation {
    std::string rule;
    std::string clause;
};

struct RuleRecord {
    std::string rule;
    RuleClass cls;
    bool well_founded = false;
    bool pure = false;
    VarSet free;
    std::map<std::string, std::size_t, std::less<>> distances;
};

/// Whole-TSS classification.
///
/// `violations` lists rules that are neither ntyft nor ntyxt and is non-empty
/// exactly when the verdict is out of format. `impurities` lists in-format
/// rules that are not pure (dependency cycle or free variable); those keep
/// the TSS inside the ntyft/ntyxt format but exclude it from semantic
/// queries. Positive and pure TSSs get the tyft/tyxt verdict.
struct FormatReport {
    std::vector<RuleRecord> rules;
    Verdict verdict = Verdict::out_of_format;
    std::vector<Violation> violations;
    std::vector<Violation> impurities;
    bool recursion = false;

    [[nodiscard]] bool in_format() const { return violations.empty(); }
    [[nodiscard]] bool positive() const {
        return std::ranges::all_of(rules, [](const RuleRecord& r) { return r.cls.positive; });
    }
    [[nodiscard]] bool pure() const { return in_format() && impurities.empty(); }

    [[nodiscard]] std::string table() const {
        std::ostringstream os;
        os << "rule                  ntytt ntyft ntyxt nxytt pos   wf    pure  free\n";
        auto flag = [](bool b) { return b ? "yes   " : "no    "; };
        for (const auto& r : rules) {
            std::string name = r.rule;
            if (name.size() < 22) name.resize(22, ' ');
            os << name << flag(r.cls.ntytt) << flag(r.cls.ntyft) << flag(r.cls.ntyxt) << flag(r.cls.nxytt)
               << flag(r.cls.positive) << flag(r.well_founded) << flag(r.pure);
            bool first = true;
            for (const auto& v : r.free) {
                os << (first ? "" : ",") << v;
                first = false;
            }
            if (first) os << '-';
            os << '\n';
        }
        for (const auto& v : violations) os << "violation: " << v.rule << ": " << v.clause << '\n';
        for (const auto& v : impurities) os << "impure: " << v.rule << ": " << v.clause << '\n';
        os << "verdict: " << to_string(verdict) << '\n';
        return os.str();
    }

    /// key=value records, one per rule, separated by blank lines.
    [[nodiscard]] std::string records() const {
        std::ostringstream os;
        auto b = [](bool v) { return v ? "true" : "false"; };
        for (const auto& r : rules) {
            os << "rule=" << r.rule << '\n'
               << "ntytt=" << b(r.cls.ntytt) << '\n'
               << "ntyft=" << b(r.cls.ntyft) << '\n'
               << "ntyxt=" << b(r.cls.ntyxt) << '\n'
               << "nxytt=" << b(r.cls.nxytt) << '\n'
               << "positive=" << b(r.cls.positive) << '\n'
               << "well_founded=" << b(r.well_founded) << '\n'
               << "pure=" << b(r.pure) << '\n'
               << "free=";
            bool first = true;
            for (const auto& v : r.free) {
                os << (first ? "" : ",") << v;
                first = false;
            }
            os << "\ndistances=";
            first = true;
            for (const auto& [v, d] : r.distances) {
                os << (first ? "" : ",") << v << ':' << d;
                first = false;
            }
            os << "\n\n";
        }
        os << "verdict=" << to_string(verdict) << '\n';
        for (const auto& v : violations) os << "violation=" << v.rule << ": " << v.clause << '\n';
        for (const auto& v : impurities) os << "impure=" << v.rule << ": " << v.clause << '\n';
        return os.str();
    }
};

inline FormatReport check_tss_format(const Tss& tss) {
    FormatReport report;
    report.recursion = tss.recursion;
    for (const auto& r : tss.rules) {
        RuleRecord rec;
        rec.rule = r.label();
        rec.cls = classify_rule(r);
        if (auto why = detail::ntytt_failure(r)) {
            report.violations.push_back({rec.rule, *why});
        } else if (auto why = detail::source_failure(r)) {
            report.violations.push_back({rec.rule, *why});
        }
        if (rec.cls.ntytt) {
            rec.well_founded = is_well_founded(r);
            rec.free = free_rule_vars(r);
            rec.pure = rec.well_founded && rec.free.empty();
            if (rec.pure) rec.distances = distances(r);
            if (rec.cls.ntyft || rec.cls.ntyxt) {
                if (!rec.well_founded) report.impurities.push_back({rec.rule, "dependency cycle"});
                for (const auto& v : rec.free) report.impurities.push_back({rec.rule, "free variable " + v});
            }
        }
        report.rules.push_back(std::move(rec));
    }
    if (!report.violations.empty())
        report.verdict = Verdict::out_of_format;
    else if (!report.impurities.empty())
        report.verdict = Verdict::ntyft_ntyxt;
    else if (report.positive())
        report.verdict = Verdict::positive_tyft_tyxt;
    else
        report.verdict = Verdict::pure_ntyft_ntyxt;
    return report;
}

}  // namespace sosw
