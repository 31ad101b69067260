#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "term.hpp"

namespace sosw {

using ActionId = std::size_t;

struct OpDecl {
    std::string symbol;
    std::size_t arity = 0;
    // Set for members of a prefix family: the action this operator prefixes.
    std::optional<std::string> prefix_action;
};

/// Function declarations plus the finite action alphabet. Function symbols,
/// actions and variables live in disjoint name spaces.
class Signature {
public:
    void add_action(const std::string& action) {
        if (ops_.contains(action)) throw Error("action " + action + " clashes with a function symbol");
        if (action_index_.contains(action)) throw Error("duplicate action " + action);
        action_index_.emplace(action, actions_.size());
        actions_.push_back(action);
        if (prefix_family_) declare(*prefix_family_ + "_" + action, 1, action);
    }

    void add_op(const std::string& symbol, std::size_t arity) { declare(symbol, arity, std::nullopt); }

    /// Declares `<base>_a` for every action a (present and future), written `a.t`.
    void add_prefix_family(const std::string& base) {
        if (prefix_family_) throw Error("only one prefix family may be declared");
        prefix_family_ = base;
        for (const auto& a : actions_) declare(base + "_" + a, 1, a);
    }

    [[nodiscard]] const OpDecl* find(std::string_view symbol) const {
        auto it = ops_.find(symbol);
        return it == ops_.end() ? nullptr : &it->second;
    }
    [[nodiscard]] const std::map<std::string, OpDecl, std::less<>>& ops() const { return ops_; }
    [[nodiscard]] const std::vector<std::string>& actions() const { return actions_; }
    [[nodiscard]] const std::optional<std::string>& prefix_family() const { return prefix_family_; }

    [[nodiscard]] bool has_action(std::string_view a) const { return action_index_.contains(a); }
    [[nodiscard]] ActionId action_id(std::string_view a) const {
        auto it = action_index_.find(a);
        if (it == action_index_.end()) throw Error("undeclared action " + std::string(a));
        return it->second;
    }
    [[nodiscard]] const std::string& action_name(ActionId id) const { return actions_.at(id); }

    [[nodiscard]] std::optional<std::string> prefix_symbol(std::string_view action) const {
        if (!prefix_family_ || !has_action(action)) return std::nullopt;
        return *prefix_family_ + "_" + std::string(action);
    }

    /// Throws unless every application uses a declared symbol at its arity
    /// and no variable name collides with a symbol or action.
    void validate(const Term& t) const {
        switch (t.kind()) {
        case Term::Kind::variable:
            check_variable_name(t.name());
            return;
        case Term::Kind::apply: {
            const auto* decl = find(t.name());
            if (!decl) throw Error("undeclared symbol " + t.name());
            if (decl->arity != t.args().size())
                throw Error("arity mismatch for " + t.name() + ": declared " + std::to_string(decl->arity) +
                            ", applied to " + std::to_string(t.args().size()));
            for (const auto& arg : t.args()) validate(arg);
            return;
        }
        case Term::Kind::recursion:
            for (const auto& [v, body] : t.spec()) {
                check_variable_name(v);
                validate(body);
            }
            return;
        }
    }

    void check_variable_name(std::string_view v) const {
        if (ops_.contains(v)) throw Error("variable " + std::string(v) + " clashes with a function symbol");
        if (action_index_.contains(v)) throw Error("variable " + std::string(v) + " clashes with an action");
    }

    /// Concrete syntax with `a.t` for prefix-family members and `0` for `nil`.
    [[nodiscard]] std::string print(const Term& t) const {
        std::string out;
        print_into(out, t);
        return out;
    }

private:
    std::map<std::string, OpDecl, std::less<>> ops_;
    std::vector<std::string> actions_;
    std::map<std::string, ActionId, std::less<>> action_index_;
    std::optional<std::string> prefix_family_;

    void declare(const std::string& symbol, std::size_t arity, std::optional<std::string> prefix_action) {
        if (ops_.contains(symbol)) throw Error("duplicate operator " + symbol);
        if (action_index_.contains(symbol)) throw Error("operator " + symbol + " clashes with an action");
        ops_.emplace(symbol, OpDecl{symbol, arity, std::move(prefix_action)});
    }

    void print_into(std::string& out, const Term& t) const {
        switch (t.kind()) {
        case Term::Kind::variable:
            out += t.name();
            return;
        case Term::Kind::apply: {
            const auto* decl = find(t.name());
            if (decl && decl->prefix_action && t.args().size() == 1) {
                out += *decl->prefix_action;
                out += '.';
                print_into(out, t.args()[0]);
                return;
            }
            if (t.args().empty() && t.name() == "nil" && !find("0")) {
                out += '0';
                return;
            }
            out += t.name();
            if (!t.args().empty()) {
                out += '(';
                for (std::size_t i = 0; i < t.args().size(); ++i) {
                    if (i) out += ',';
                    print_into(out, t.args()[i]);
                }
                out += ')';
            }
            return;
        }
        case Term::Kind::recursion: {
            out += '<';
            out += t.name();
            out += " | ";
            out += t.name();
            out += " = ";
            print_into(out, t.spec().find(t.name())->second);
            for (const auto& [v, body] : t.spec()) {
                if (v == t.name()) continue;
                out += ", ";
                out += v;
                out += " = ";
                print_into(out, body);
            }
            out += '>';
            return;
        }
        }
    }
};

}  // namespace sosw
