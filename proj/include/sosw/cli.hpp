#pragma once

#include <CLI11.hpp>

#include <functional>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "equivalence.hpp"
#include "format.hpp"
#include "harness.hpp"
#include "parser.hpp"
#include "semantics.hpp"

namespace sosw::cli {

enum Exit : int { ok = 0, negative = 1, usage = 2, budget = 3 };

namespace detail {

struct Common {
    std::string file;
    std::optional<std::size_t> max_terms, max_stages;

    Tss load() const {
        auto tss = load_lang(file);
        if (max_terms) tss.budget.max_terms = *max_terms;
        if (max_stages) tss.budget.max_stages = *max_stages;
        return tss;
    }

    void attach(CLI::App* app) {
        app->add_option("FILE", file, "language definition")->required();
        app->add_option("--max-terms", max_terms, "fragment size bound")->check(CLI::PositiveNumber);
        app->add_option("--max-stages", max_stages, "stage bound")->check(CLI::PositiveNumber);
    }
};

inline Mode parse_mode(const std::string& m) { return m == "certain" ? Mode::certain : Mode::possible; }

inline void print_relation(std::ostream& out, const Comparison& c) {
    out << "relation:\n";
    for (auto [p, q] : c.relation.pairs()) out << "  " << c.lts.states[p] << " <= " << c.lts.states[q] << '\n';
}

inline void print_fragment(std::ostream& err, const std::vector<std::string>& fragment) {
    if (fragment.empty()) return;
    err << "partial fragment:\n";
    for (const auto& s : fragment) err << "  " << s << '\n';
}

}  // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"SOS workbench", "sosw"};
    app.require_subcommand(1);
    std::function<int()> action;

    detail::Common common;
    std::string term_a, term_b, act, target, mode = "possible";
    bool records = false, witness = false, unguarded = false;
    std::vector<std::string> terms;
    std::string prop;
    std::size_t samples = 100, depth = 3;
    std::uint64_t seed = 0;

    auto* fmt = app.add_subcommand("check-format", "classify rules and report the format verdict");
    fmt->add_option("FILE", common.file)->required();
    fmt->add_flag("--records", records, "key=value output");
    fmt->callback([&] {
        action = [&] {
            auto report = check_tss_format(common.load());
            out << (records ? report.records() : report.table());
            return report.in_format() ? Exit::ok : Exit::negative;
        };
    });

    auto* trans = app.add_subcommand("trans", "list transitions of a closed term");
    common.attach(trans);
    trans->add_option("TERM", term_a)->required();
    trans->add_option("--mode", mode)->check(CLI::IsMember({"certain", "possible"}));
    trans->callback([&] {
        action = [&] {
            auto tss = common.load();
            Session session(tss);
            auto p = session.add_term(parse_closed_term(term_a, tss.signature));
            session.solve();
            out << render_transition_records(session, p, detail::parse_mode(mode));
            out << "complete-on-fragment: " << (session.complete_on_fragment() ? "true" : "false") << '\n';
            return Exit::ok;
        };
    });

    auto* proof = app.add_subcommand("proof", "show a proof of TERM -ACT-> TARGET");
    common.attach(proof);
    proof->add_option("TERM", term_a)->required();
    proof->add_option("ACT", act)->required();
    proof->add_option("TARGET", target)->required();
    proof->add_option("--mode", mode)->check(CLI::IsMember({"certain", "possible"}));
    proof->callback([&] {
        action = [&] {
            auto tss = common.load();
            Session session(tss);
            auto p = session.add_term(parse_closed_term(term_a, tss.signature));
            auto q = session.add_term(parse_closed_term(target, tss.signature));
            auto a = tss.signature.action_id(act);
            session.solve();
            // The target may have been identified with an existing state.
            q = session.find(parse_closed_term(target, tss.signature)).value_or(q);
            Transition goal{p, a, q};
            const auto& final = session.table().final();
            if (!(detail::parse_mode(mode) == Mode::certain ? final.certain : final.possible).contains(goal)) {
                err << "literal not derived: " << print_literal(tss.signature, session.literal(goal)) << '\n';
                return Exit::negative;
            }
            out << session.render(session.extract_proof(goal, detail::parse_mode(mode)));
            return Exit::ok;
        };
    });

    auto compare = [&](bool refine) {
        auto tss = common.load();
        auto p = parse_closed_term(term_a, tss.signature);
        auto q = parse_closed_term(term_b, tss.signature);
        auto c = compare_terms(tss, p, q, tss.budget);
        if (c.forward == Answer::unknown_budget) {
            out << "unknown (budget)\n";
            err << c.diagnostic << '\n';
            detail::print_fragment(err, c.partial_fragment);
            return Exit::budget;
        }
        bool holds = refine ? c.forward == Answer::yes : c.forward == Answer::yes && c.backward == Answer::yes;
        out << (refine ? (holds ? "refines" : "does not refine") : (holds ? "equivalent" : "not equivalent"))
            << '\n';
        if (witness) detail::print_relation(out, c);
        return holds ? Exit::ok : Exit::negative;
    };

    auto* bisim = app.add_subcommand("bisim", "decide TERM ≡ TERM");
    common.attach(bisim);
    bisim->add_option("P", term_a)->required();
    bisim->add_option("Q", term_b)->required();
    bisim->add_flag("--witness", witness, "print the greatest refinement relation");
    bisim->callback([&] { action = [&] { return compare(false); }; });

    auto* refine = app.add_subcommand("refine", "decide TERM ⊑ TERM");
    common.attach(refine);
    refine->add_option("P", term_a)->required();
    refine->add_option("Q", term_b)->required();
    refine->add_flag("--witness", witness, "print the greatest refinement relation");
    refine->callback([&] { action = [&] { return compare(true); }; });

    auto* lts = app.add_subcommand("lts", "serialize the modal LTS reachable from the given terms");
    common.attach(lts);
    lts->add_option("TERMS", terms)->required();
    lts->callback([&] {
        action = [&] {
            auto tss = common.load();
            std::vector<Term> roots;
            for (const auto& t : terms) roots.push_back(parse_closed_term(t, tss.signature));
            out << extract_modal_lts(tss, roots, tss.budget, TermIdentity::alpha).serialize();
            return Exit::ok;
        };
    });

    auto* props = app.add_subcommand("props", "sample a congruence/unfolding property");
    common.attach(props);
    props->add_option("--prop", prop)->required()->check(CLI::IsMember({"unfold", "alpha", "lean", "full"}));
    props->add_option("--samples", samples)->check(CLI::PositiveNumber);
    props->add_option("--seed", seed);
    props->add_option("--depth", depth)->check(CLI::PositiveNumber);
    props->add_flag("--unguarded", unguarded, "allow unguarded recursion variables");
    props->callback([&] {
        action = [&] {
            auto tss = common.load();
            HarnessConfig cfg;
            cfg.samples = samples;
            cfg.depth = depth;
            cfg.seed = seed;
            cfg.guarded_only = !unguarded;
            if (common.max_terms) cfg.budget.max_terms = *common.max_terms;
            if (common.max_stages) cfg.budget.max_stages = *common.max_stages;
            HarnessReport report;
            if (prop == "unfold") report = harness_unfolding(tss, cfg);
            else if (prop == "alpha") report = harness_alpha(tss, cfg);
            else if (prop == "lean") report = harness_lean_precongruence(tss, cfg);
            else report = harness_full_congruence(tss, cfg);
            out << report.render();
            return report.failed == 0 ? Exit::ok : Exit::negative;
        };
    });

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return Exit::ok;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return Exit::ok;
    } catch (const CLI::ParseError& e) {
        err << e.what() << '\n';
        return Exit::usage;
    }

    try {
        return action();
    } catch (const BudgetExceeded& e) {
        err << e.what() << '\n';
        detail::print_fragment(err, e.partial_fragment);
        return Exit::budget;
    } catch (const Error& e) {
        err << e.what() << '\n';
        return Exit::usage;
    }
}

inline int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace sosw::cli
