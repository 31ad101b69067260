#include <catch_amalgamated.hpp>

#include <functional>
#include <set>

#include "support.hpp"

using namespace sosw;
using Catch::Matchers::ContainsSubstring;

namespace {

const char* header = R"(
lang t
actions a b
op nil 0
op plus 2
prefixfamily pre
meta act
option recursion on
)";

std::string with(const std::string& rules) { return std::string(header) + rules; }

// Every bound variable occurrence sits under a prefix below its binder.
bool guarded(const Term& t, const Signature& sig, const std::map<std::string, bool>& scope = {}) {
    switch (t.kind()) {
    case Term::Kind::variable: {
        auto it = scope.find(t.name());
        return it == scope.end() || it->second;
    }
    case Term::Kind::apply: {
        bool prefix = sig.find(t.name())->prefix_action.has_value();
        auto inner = scope;
        if (prefix)
            for (auto& [v, g] : inner) g = true;
        for (const auto& a : t.args())
            if (!guarded(a, sig, inner)) return false;
        return true;
    }
    case Term::Kind::recursion: {
        auto inner = scope;
        for (const auto& [v, b] : t.spec()) inner[v] = false;
        for (const auto& [v, b] : t.spec())
            if (!guarded(b, sig, inner)) return false;
        return true;
    }
    }
    return false;
}

std::size_t height(const Term& t) {
    std::size_t h = 0;
    if (t.is_apply())
        for (const auto& a : t.args()) h = std::max(h, height(a) + 1);
    if (t.is_rec())
        for (const auto& [v, b] : t.spec()) h = std::max(h, height(b) + 1);
    return h;
}

}  // namespace

TEST_CASE("ccs fixture") {
    const auto& tss = test::ccs();
    const auto& sig = tss.signature;
    CHECK(tss.name == "ccs");
    CHECK(tss.recursion);
    CHECK(sig.prefix_family() == "pre");
    CHECK(sig.find("plus")->arity == 2);
    CHECK(sig.find("par")->arity == 2);
    CHECK(sig.find("nil")->arity == 0);
    CHECK(sig.find("pre_tau")->prefix_action == "tau");
    // five rule schemes, each expanded over five actions
    CHECK(tss.rules.size() == 25);
    CHECK(check_tss_format(tss).verdict == Verdict::positive_tyft_tyxt);
}

TEST_CASE("metavariables expand per action") {
    auto tss = parse_lang(with("rule prefix: act.x -act-> x\n"));
    REQUIRE(tss.rules.size() == 2);
    CHECK(tss.rules[0].label() == "prefix[a]");
    CHECK(tss.rules[1].label() == "prefix[b]");
    CHECK(tss.rules[1].conclusion.action == "b");
    CHECK(tss.rules[1].conclusion.source == Term::apply("pre_b", {Term::variable("x")}));

    auto two = parse_lang(with("meta other\nrule sync: x -act-> y, x -other-> z => plus(x,x) -act-> y\n"));
    CHECK(two.rules.size() == 4);
}

TEST_CASE("rule syntax") {
    auto tss = parse_lang(with("rule neg: x -a/->, x -b-> y => plus(x,nil) -b-> y\n"));
    REQUIRE(tss.rules.size() == 1);
    const auto& r = tss.rules[0];
    REQUIRE(r.premises.size() == 2);
    CHECK_FALSE(r.premises[0].positive());
    CHECK(r.premises[1].target == Term::variable("y"));
    CHECK(r.conclusion.source == Term::apply("plus", {Term::variable("x"), Term::apply("nil")}));
    CHECK_FALSE(tss.positive());
}

TEST_CASE("free target variable parses and is flagged later") {
    auto tss = parse_lang(with("rule loose: plus(x,y) -a-> z\n"));
    auto report = check_tss_format(tss);
    CHECK(report.in_format());
    CHECK_FALSE(report.pure());
}

TEST_CASE("parse errors") {
    CHECK_THROWS_WITH(parse_lang(with("rule bad: q(x,y,z) -a-> x\n")), ContainsSubstring("q"));
    CHECK_THROWS_WITH(parse_lang(with("rule bad: plus(x) -a-> x\n")), ContainsSubstring("arity mismatch"));
    CHECK_THROWS_WITH(parse_lang(with("op plus 1\n")), ContainsSubstring("duplicate operator plus"));
    CHECK_THROWS_WITH(parse_lang(with("rule bad: x -e-> x\n")), ContainsSubstring("e"));
    CHECK_THROWS_WITH(parse_lang(with("rule bad: x -a-> \n")), ContainsSubstring("line 9"));
    CHECK_THROWS_AS(parse_lang(with("frobnicate\n")), ParseError);
    CHECK_THROWS_AS(parse_lang("lang x\nop nil 0\n"), ParseError);

    try {
        parse_lang(with("rule bad: plus(x, q) -a-> x\nrule worse: plus(x,y) -a-> ((\n"));
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line == 10);
        CHECK(e.column > 1);
    }
}

TEST_CASE("closed terms") {
    const auto& sig = test::ccs().signature;
    CHECK(parse_closed_term("b.0", sig) == Term::apply("pre_b", {Term::apply("nil")}));
    CHECK(parse_closed_term("plus(b.0, b.0)", sig).size() == 5);
    CHECK(parse_closed_term("<X | X = a.X>", sig).closed());
    CHECK_THROWS_WITH(parse_closed_term("a.x", sig), ContainsSubstring("not closed"));
    CHECK_THROWS_WITH(parse_closed_term("plus(0)", sig), ContainsSubstring("arity mismatch"));
    CHECK_THROWS_AS(parse_closed_term("a.", sig), ParseError);
    CHECK_THROWS_AS(parse_closed_term("<X | Y = a.Y>", sig), Error);
}

TEST_CASE("language round trip") {
    for (const auto* file : {"ccs.tss", "neg.tss", "guard.tss", "tau.tss", "par.tss"}) {
        INFO(file);
        auto tss = load_lang(test::lang_path(file));
        auto printed = print_lang(tss);
        auto again = parse_lang(printed);
        CHECK(print_lang(again) == printed);
        CHECK(again.rules.size() == tss.rules.size());
        for (std::size_t i = 0; i < tss.rules.size(); ++i) {
            CHECK(again.rules[i].label() == tss.rules[i].label());
            CHECK(again.rules[i].premises == tss.rules[i].premises);
            CHECK(again.rules[i].conclusion == tss.rules[i].conclusion);
        }
        CHECK(again.recursion == tss.recursion);
    }
}

TEST_CASE("term generation") {
    const auto& tss = test::ccs();
    SECTION("depth one") {
        std::set<std::string> seen;
        for (const auto& t : gen_closed_terms(tss, 1, 200, 5, true)) {
            CHECK(height(t) <= 1);
            seen.insert(tss.signature.print(t));
        }
        CHECK(seen.contains("0"));
        CHECK(seen.contains("a.0"));
    }
    SECTION("deterministic for a fixed seed") {
        auto a = gen_closed_terms(tss, 4, 100, 42, true);
        auto b = gen_closed_terms(tss, 4, 100, 42, true);
        CHECK(a == b);
        CHECK(a != gen_closed_terms(tss, 4, 100, 43, true));
    }
    SECTION("guarded samples are guarded") {
        TermGenerator gen(tss, 1, true);
        for (int i = 0; i < 500; ++i) {
            auto t = gen.rec(4);
            INFO(tss.signature.print(t));
            CHECK(t.closed());
            CHECK(guarded(t, tss.signature));
            tss.signature.validate(t);
        }
    }
    SECTION("unguarded generation may emit a bare loop") {
        TermGenerator gen(tss, 1, false);
        bool bare = false, unguarded = false;
        for (int i = 0; i < 2000 && !bare; ++i) {
            auto t = gen.rec(2);
            unguarded = unguarded || !guarded(t, tss.signature);
            bare = bare || alpha_eq(t, parse_closed_term("<X | X = X>", tss.signature));
        }
        CHECK(unguarded);
        CHECK(bare);
    }
    SECTION("no constants") {
        auto none = parse_lang("lang n\nactions a\nop f 1\nrule r: f(x) -a-> x\n");
        CHECK_THROWS_WITH(TermGenerator(none, 0, true), ContainsSubstring("no constants"));
    }
}
