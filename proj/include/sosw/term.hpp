#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sosw {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Term;

// Bound variable -> body. Kept as a map: two specs with the same bindings are
// the same spec regardless of the order they were written in.
using RecSpec = std::map<std::string, Term, std::less<>>;
using Substitution = std::map<std::string, Term, std::less<>>;
using VarSet = std::set<std::string, std::less<>>;

/// Immutable term with recursion: a variable, an application f(t1,...,tn),
/// or a recursion construct <X | S>. Copies share structure.
class Term {
public:
    enum class Kind : std::uint8_t { variable, apply, recursion };

    static Term variable(std::string name);
    static Term apply(std::string symbol, std::vector<Term> args = {});
    static Term rec(std::string bound, RecSpec spec);

    [[nodiscard]] Kind kind() const { return node_->kind; }
    [[nodiscard]] bool is_variable() const { return kind() == Kind::variable; }
    [[nodiscard]] bool is_apply() const { return kind() == Kind::apply; }
    [[nodiscard]] bool is_rec() const { return kind() == Kind::recursion; }

    /// Variable name, function symbol, or the selected bound variable of a
    /// recursion construct.
    [[nodiscard]] const std::string& name() const { return node_->name; }
    [[nodiscard]] std::span<const Term> args() const { return node_->args; }
    [[nodiscard]] const RecSpec& spec() const { return node_->spec; }

    [[nodiscard]] const VarSet& free_vars() const { return node_->free; }
    [[nodiscard]] bool closed() const { return node_->free.empty(); }
    [[nodiscard]] std::size_t size() const { return node_->size; }

    [[nodiscard]] bool same_node(const Term& other) const { return node_ == other.node_; }

    friend bool operator==(const Term& lhs, const Term& rhs);

private:
    struct Node {
        Kind kind;
        std::string name;
        std::vector<Term> args;
        RecSpec spec;
        VarSet free;
        std::size_t size = 1;
    };

    explicit Term(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

    std::shared_ptr<const Node> node_;
};

inline Term Term::variable(std::string name) {
    auto node = std::make_shared<Node>();
    node->kind = Kind::variable;
    node->free.insert(name);
    node->name = std::move(name);
    return Term(std::move(node));
}

inline Term Term::apply(std::string symbol, std::vector<Term> args) {
    auto node = std::make_shared<Node>();
    node->kind = Kind::apply;
    node->name = std::move(symbol);
    for (const auto& arg : args) {
        node->free.insert(arg.free_vars().begin(), arg.free_vars().end());
        node->size += arg.size();
    }
    node->args = std::move(args);
    return Term(std::move(node));
}

inline Term Term::rec(std::string bound, RecSpec spec) {
    if (spec.empty()) throw Error("empty recursive specification");
    if (!spec.contains(bound)) throw Error("unbound recursion variable " + bound);
    auto node = std::make_shared<Node>();
    node->kind = Kind::recursion;
    for (const auto& [var, body] : spec) {
        for (const auto& v : body.free_vars())
            if (!spec.contains(v)) node->free.insert(v);
        node->size += body.size();
    }
    node->name = std::move(bound);
    node->spec = std::move(spec);
    return Term(std::move(node));
}

inline bool operator==(const Term& lhs, const Term& rhs) {
    if (lhs.node_ == rhs.node_) return true;
    if (lhs.kind() != rhs.kind() || lhs.name() != rhs.name() || lhs.size() != rhs.size()) return false;
    switch (lhs.kind()) {
    case Term::Kind::variable:
        return true;
    case Term::Kind::apply:
        return std::ranges::equal(lhs.args(), rhs.args());
    case Term::Kind::recursion:
        return lhs.spec() == rhs.spec();
    }
    return false;
}

inline const VarSet& free_vars(const Term& t) { return t.free_vars(); }

/// Least `base<n>`, n >= 1, not in `avoid`.
inline std::string fresh_name(std::string_view base, const VarSet& avoid) {
    for (std::size_t n = 1;; ++n) {
        std::string candidate = std::string(base) + std::to_string(n);
        if (!avoid.contains(candidate)) return candidate;
    }
}

/// Capture-avoiding simultaneous substitution. Bound variables of a
/// recursive specification are renamed only when an image would be captured.
inline Term substitute(const Term& t, const Substitution& sigma) {
    if (sigma.empty() || t.closed()) return t;
    switch (t.kind()) {
    case Term::Kind::variable: {
        auto it = sigma.find(t.name());
        return it == sigma.end() ? t : it->second;
    }
    case Term::Kind::apply: {
        std::vector<Term> args;
        args.reserve(t.args().size());
        bool changed = false;
        for (const auto& arg : t.args()) {
            args.push_back(substitute(arg, sigma));
            changed = changed || !args.back().same_node(arg);
        }
        return changed ? Term::apply(t.name(), std::move(args)) : t;
    }
    case Term::Kind::recursion: {
        Substitution active;
        for (const auto& v : t.free_vars())
            if (auto it = sigma.find(v); it != sigma.end()) active.emplace(v, it->second);
        if (active.empty()) return t;

        VarSet image_free;
        for (const auto& [v, image] : active) image_free.insert(image.free_vars().begin(), image.free_vars().end());

        VarSet avoid = image_free;
        for (const auto& [v, body] : t.spec()) {
            avoid.insert(v);
            avoid.insert(body.free_vars().begin(), body.free_vars().end());
        }
        std::map<std::string, std::string, std::less<>> renamed;
        for (const auto& [v, body] : t.spec()) {
            if (!image_free.contains(v)) continue;
            auto nv = fresh_name(v, avoid);
            avoid.insert(nv);
            renamed.emplace(v, nv);
            active.emplace(v, Term::variable(nv));
        }
        auto rename = [&](const std::string& v) {
            auto it = renamed.find(v);
            return it == renamed.end() ? v : it->second;
        };
        RecSpec spec;
        for (const auto& [v, body] : t.spec()) spec.emplace(rename(v), substitute(body, active));
        return Term::rec(rename(t.name()), std::move(spec));
    }
    }
    return t;
}

/// <S_X | S>: the body of X with every bound variable Y replaced by <Y | S>.
inline Term rec_component_unfold(std::string_view x, const RecSpec& spec) {
    auto it = spec.find(x);
    if (it == spec.end()) throw Error("unbound recursion variable " + std::string(x));
    Substitution sigma;
    for (const auto& [y, body] : spec) sigma.emplace(y, Term::rec(y, spec));
    return substitute(it->second, sigma);
}

inline Term unfold(const Term& rec) {
    if (!rec.is_rec()) throw Error("unfold: not a recursion term");
    return rec_component_unfold(rec.name(), rec.spec());
}

namespace detail {

// Renders terms with bound variables replaced by (binder distance, index)
// pairs. Binder indices follow first occurrence starting from the selected
// variable; bindings unreachable from it are ordered by their provisional
// rendering.
class AlphaRenderer {
public:
    std::string render(const Term& t) {
        out_.clear();
        emit(t);
        return std::move(out_);
    }

private:
    using Frame = std::map<std::string, int, std::less<>>;

    std::vector<Frame> frames_;
    std::string out_;

    void emit(const Term& t) {
        switch (t.kind()) {
        case Term::Kind::variable:
            emit_variable(t.name());
            return;
        case Term::Kind::apply:
            out_ += t.name();
            if (!t.args().empty()) {
                out_ += '(';
                bool first = true;
                for (const auto& arg : t.args()) {
                    if (!first) out_ += ',';
                    first = false;
                    emit(arg);
                }
                out_ += ')';
            }
            return;
        case Term::Kind::recursion: {
            auto order = canonical_order(t);
            Frame frame;
            for (std::size_t i = 0; i < order.size(); ++i) frame.emplace(order[i], static_cast<int>(i));
            frames_.push_back(std::move(frame));
            out_ += '<';
            for (const auto& v : order) {
                emit(t.spec().find(v)->second);
                out_ += ';';
            }
            out_ += '>';
            frames_.pop_back();
            return;
        }
        }
    }

    void emit_variable(const std::string& name) {
        for (std::size_t depth = frames_.size(); depth-- > 0;) {
            auto it = frames_[depth].find(name);
            if (it == frames_[depth].end()) continue;
            if (it->second < 0) {
                out_ += '?';
            } else {
                out_ += '#';
                out_ += std::to_string(frames_.size() - 1 - depth);
                out_ += '.';
                out_ += std::to_string(it->second);
            }
            return;
        }
        out_ += name;
    }

    std::vector<std::string> canonical_order(const Term& rec) {
        const auto& spec = rec.spec();
        std::vector<std::string> order{rec.name()};
        VarSet seen{rec.name()};
        std::size_t next = 0;
        auto extend = [&] {
            for (; next < order.size(); ++next) {
                std::vector<std::string> found;
                VarSet shadow;
                first_occurrences(spec.find(order[next])->second, spec, shadow, found);
                for (auto& v : found)
                    if (seen.insert(v).second) order.push_back(v);
            }
        };
        extend();
        while (order.size() < spec.size()) {
            Frame provisional;
            for (const auto& [v, body] : spec) provisional.emplace(v, -1);
            for (std::size_t i = 0; i < order.size(); ++i) provisional[order[i]] = static_cast<int>(i);
            std::optional<std::pair<std::string, std::string>> best;
            std::string saved = std::move(out_);
            frames_.push_back(std::move(provisional));
            for (const auto& [v, body] : spec) {
                if (seen.contains(v)) continue;
                out_.clear();
                emit(body);
                if (!best || out_ < best->first) best.emplace(out_, v);
            }
            frames_.pop_back();
            out_ = std::move(saved);
            seen.insert(best->second);
            order.push_back(best->second);
            extend();
        }
        return order;
    }

    void first_occurrences(const Term& t, const RecSpec& names, VarSet& shadow, std::vector<std::string>& found) {
        switch (t.kind()) {
        case Term::Kind::variable:
            if (names.contains(t.name()) && !shadow.contains(t.name())) found.push_back(t.name());
            return;
        case Term::Kind::apply:
            for (const auto& arg : t.args()) first_occurrences(arg, names, shadow, found);
            return;
        case Term::Kind::recursion: {
            VarSet inner = shadow;
            for (const auto& [v, body] : t.spec()) inner.insert(v);
            for (const auto& v : canonical_order(t)) first_occurrences(t.spec().find(v)->second, names, inner, found);
            return;
        }
        }
    }
};

}  // namespace detail

/// Key identifying a term up to renaming of bound variables.
inline std::string alpha_key(const Term& t) { return detail::AlphaRenderer{}.render(t); }

inline bool alpha_eq(const Term& t, const Term& u) { return t == u || alpha_key(t) == alpha_key(u); }

/// Plain concrete syntax without signature-specific sugar.
inline void print_term(std::string& out, const Term& t) {
    switch (t.kind()) {
    case Term::Kind::variable:
        out += t.name();
        return;
    case Term::Kind::apply:
        out += t.name();
        if (!t.args().empty()) {
            out += '(';
            for (std::size_t i = 0; i < t.args().size(); ++i) {
                if (i) out += ',';
                print_term(out, t.args()[i]);
            }
            out += ')';
        }
        return;
    case Term::Kind::recursion: {
        out += '<';
        out += t.name();
        out += " | ";
        out += t.name();
        out += " = ";
        print_term(out, t.spec().find(t.name())->second);
        for (const auto& [v, body] : t.spec()) {
            if (v == t.name()) continue;
            out += ", ";
            out += v;
            out += " = ";
            print_term(out, body);
        }
        out += '>';
        return;
    }
    }
}

inline std::string to_string(const Term& t) {
    std::string out;
    print_term(out, t);
    return out;
}

}  // namespace sosw
