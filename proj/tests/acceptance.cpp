// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <sosw/cli.hpp>

#include <chrono>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "support.hpp"

using namespace sosw;

namespace {

using Clock = std::chrono::steady_clock;

struct Cli {
    int code;
    std::string out, err;
    double seconds;
};

Cli cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    auto start = Clock::now();
    int code = cli::run(args, out, err);
    return {code, out.str(), err.str(), std::chrono::duration<double>(Clock::now() - start).count()};
}

std::string lang(const char* file) { return test::lang_path(file); }

// Collects the reasons a criterion failed.
struct Check {
    std::vector<std::string> problems;
    void require(bool ok, const std::string& what) {
        if (!ok) problems.push_back(what);
    }
};

std::set<std::string> literals(const Session& s, const std::set<Transition>& set) {
    std::set<std::string> out;
    for (const auto& t : set) out.insert(print_literal(s.tss().signature, s.literal(t)));
    return out;
}

void ac1(Check& c) {
    struct Golden {
        const char* file;
        const char* p;
        const char* q;
        const char* expected;
    };
    const Golden cases[] = {
        {"ccs.tss", "b.0", "plus(b.0,b.0)", "equivalent\n"},
        {"ccs.tss", "<X | X = plus(a.X,a.X)>", "<X | X = a.X>", "equivalent\n"},
        {"tau.tss", "0", "<X | X = X>", "equivalent\n"},
        {"tau.tss", "<X | X = X>", "<X | X = tau.X>", "not equivalent\n"},
    };
    for (const auto& g : cases) {
        auto r = cli({"bisim", lang(g.file), g.p, g.q});
        auto name = std::string(g.p) + " vs " + g.q;
        c.require(r.out == g.expected, name + ": got " + r.out);
        c.require(r.seconds < 1.0, name + ": took " + std::to_string(r.seconds) + " s");
    }
}

void ac2(Check& c) {
    const auto& s = test::syntax();
    auto ex = test::term(s, "<X | X = par(a.X, b.Y), Y = par(d.Y, par(X, z))>");
    c.require(substitute(ex, {{"z", test::term(s, "b.c")}}) ==
                  test::term(s, "<X | X = par(a.X, b.Y), Y = par(d.Y, par(X, b.c))>"),
              "image substitution");
    auto captured = substitute(ex, {{"z", Term::variable("X")}});
    c.require(alpha_eq(captured, test::term(s, "<Z | Z = par(a.Z, b.Y), Y = par(d.Y, par(Z, X))>")),
              "capture case: got " + to_string(captured));
    c.require(captured.free_vars() == VarSet{"X"}, "capture case leaves X free");
    c.require(substitute(ex, {{"Y", test::term(s, "b.c")}}) == ex, "bound variable in domain");
}

void ac3(Check& c) {
    {
        Session s(load_lang(lang("neg.tss")));
        s.add_term(Term::apply("c"));
        const auto& t = s.solve();
        c.require(t.converged_at.has_value(), "neg: no convergence");
        c.require(t.final().certain.empty(), "neg: certain set not empty");
        c.require(literals(s, t.final().possible) == std::set<std::string>{"c -a-> c"}, "neg: possible set");
        c.require(!s.complete_on_fragment(), "neg: reported complete");
    }
    {
        Session s(load_lang(lang("guard.tss")));
        s.add_term(Term::apply("c"));
        const auto& t = s.solve();
        std::set<std::string> want{"c -b-> c"};
        c.require(literals(s, t.final().certain) == want, "guard: certain set");
        c.require(literals(s, t.final().possible) == want, "guard: possible set");
        c.require(s.complete_on_fragment(), "guard: reported incomplete");
    }
}

constexpr std::uint64_t fragments = 60;

void ac4(Check& c) {
    std::size_t multi = 0;
    for (std::uint64_t seed = 0; seed < fragments; ++seed) {
        auto frag = oracle::random_fragment(seed);
        Session s(frag.tss);
        for (const auto& t : frag.universe) s.add_term(t);
        s.solve();
        c.require(s.size() <= 20, "fragment " + std::to_string(seed) + " too large");
        std::string why;
        c.require(oracle::stage_invariants_hold(s.table(), &why), "fragment " + std::to_string(seed) + ": " + why);
        multi += s.table().stages.size() > 2;
    }
    c.require(multi > 0, "no fragment needed more than one refinement stage");
}

void ac5(Check& c) {
    for (std::uint64_t seed = 0; seed < fragments; ++seed) {
        auto frag = oracle::random_fragment(seed);
        Session s(frag.tss);
        for (const auto& t : frag.universe) s.add_term(t);
        auto engine = oracle::engine_stages(s);
        auto brute = oracle::BruteForce(frag.tss, frag.universe).run();
        c.require(engine.certain == brute.certain && engine.possible == brute.possible,
                  "stage tables differ on fragment " + std::to_string(seed));
    }
    std::mt19937_64 rng(5);
    auto start = Clock::now();
    for (int i = 0; i < 100; ++i) {
        auto lts = oracle::random_lts(rng, 200);
        auto rel = greatest_refinement(lts);
        auto classes = oracle::bisimulation_classes(lts);
        bool agree = true;
        for (std::size_t p = 0; p < lts.size(); ++p)
            for (std::size_t q = 0; q < lts.size(); ++q) agree = agree && rel.contains(p, q) == (classes[p] == classes[q]);
        c.require(agree, "refinement disagrees with partition refinement on LTS " + std::to_string(i));
    }
    auto seconds = std::chrono::duration<double>(Clock::now() - start).count();
    c.require(seconds < 60.0, "LTS comparison took " + std::to_string(seconds) + " s");
}

void ac6(Check& c) {
    const std::pair<const char*, const char*> runs[] = {
        {"unfold", "100"}, {"alpha", "100"}, {"lean", "500"}, {"full", "200"}};
    for (const auto& [prop, samples] : runs) {
        auto r = cli({"props", lang("ccs.tss"), "--prop", prop, "--samples", samples, "--seed", "0"});
        auto field = [&](const std::string& key) {
            auto at = r.out.find("\n" + key + ": ");
            return at == std::string::npos ? -1L : std::stol(r.out.substr(at + key.size() + 3));
        };
        auto n = std::stol(samples);
        c.require(r.code == 0 && field("failed") == 0, std::string(prop) + ": " + r.out + r.err);
        c.require(field("attempted") == n, std::string(prop) + ": attempted count");
        c.require(field("skipped") >= 0 && field("skipped") * 10 <= n, std::string(prop) + ": too many skips");
    }
}

void ac7(Check& c) {
    const auto& ccs = test::ccs();
    c.require(to_string(check_tss_format(ccs).verdict) == "tyft/tyxt with recursion", "ccs verdict");
    auto inject = [&](const std::string& rule) {
        return check_tss_format(parse_lang(print_lang(ccs) + "op f 2\nop g 1\nrule extra: " + rule + "\n"));
    };
    auto repeated = inject("f(x,x) -a-> 0");
    c.require(repeated.verdict == Verdict::out_of_format && !repeated.violations.empty() &&
                  repeated.violations[0].clause == "repeated source variable",
              "repeated source variable injection");
    auto free = inject("g(x) -a-> w");
    c.require(free.verdict != Verdict::positive_tyft_tyxt && !free.impurities.empty() &&
                  free.impurities[0].clause == "free variable w",
              "free target variable injection");
    auto cycle = inject("y -a-> y => g(x) -a-> x");
    c.require(cycle.verdict != Verdict::positive_tyft_tyxt && !cycle.impurities.empty() &&
                  cycle.impurities[0].clause == "dependency cycle",
              "dependency cycle injection");

    auto decls = std::string("lang d\nactions a b c\nop nil 0\nop f 2\nop g 1\nprefixfamily pre\n");
    auto rule = [&](const std::string& text) { return parse_lang(decls + "rule r: " + text + "\n").rules.at(0); };
    c.require(distance(rule("a.x -a-> x"), "x") == 0, "distance 0");
    c.require(distance(rule("x -a-> y => g(x) -a-> y"), "y") == 1, "distance 1");
    c.require(distance(rule("x -a-> y, f(y,y) -b-> z => g(x) -c-> z"), "z") == 2, "distance 2");
}

void ac8(Check& c) {
    for (const auto& cmd : {"trans", "bisim"}) {
        std::vector<std::string> args{cmd, lang("ccs.tss"), "<X | X = a.par(X,X)>"};
        if (std::string(cmd) == "bisim") args.push_back("a.0");
        args.insert(args.end(), {"--max-terms", "50"});
        auto r = cli(args);
        c.require(r.code == 3, std::string(cmd) + ": exit " + std::to_string(r.code));
        c.require(r.err.find("partial fragment:") != std::string::npos, std::string(cmd) + ": no partial fragment");
        c.require(r.out.find("equivalent") == std::string::npos, std::string(cmd) + ": printed an answer");
    }
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<void(Check&)>> criteria[] = {
        {"AC1: golden bisimulation examples", ac1},
        {"AC2: substitution examples", ac2},
        {"AC3: well-founded semantics examples", ac3},
        {"AC4: stage monotonicity on random fragments", ac4},
        {"AC5: agreement with brute-force and partition oracles", ac5},
        {"AC6: property harnesses at seed 0", ac6},
        {"AC7: format checker verdicts and distances", ac7},
        {"AC8: fragment budget exit", ac8},
    };
    int failed = 0;
    for (const auto& [name, body] : criteria) {
        Check c;
        try {
            body(c);
        } catch (const std::exception& e) {
            c.problems.push_back(std::string("exception: ") + e.what());
        }
        std::cout << (c.problems.empty() ? "PASS " : "FAIL ") << name << '\n';
        for (const auto& p : c.problems) std::cout << "    " << p << '\n';
        failed += !c.problems.empty();
    }
    return failed == 0 ? 0 : 1;
}
