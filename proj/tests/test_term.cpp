#include <catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "support.hpp"

using namespace sosw;
using test::term;

namespace {

const Tss& S() { return test::syntax(); }

// X = (a.X)‖(b.Y), Y = (d.Y)‖(X‖z)
Term ex_rec() { return term(S(), "<X | X = par(a.X, b.Y), Y = par(d.Y, par(X, z))>"); }

VarSet vars(std::initializer_list<const char*> names) {
    VarSet out;
    for (auto n : names) out.insert(n);
    return out;
}

// Independent alpha-equivalence: search for a binder bijection per
// recursive specification.
using Block = std::vector<std::pair<std::string, std::string>>;

bool alpha_oracle(const Term& t, const Term& u, std::vector<Block>& env) {
    if (t.kind() != u.kind()) return false;
    switch (t.kind()) {
    case Term::Kind::variable:
        for (auto it = env.rbegin(); it != env.rend(); ++it) {
            auto lt = std::find_if(it->begin(), it->end(), [&](const auto& p) { return p.first == t.name(); });
            auto lu = std::find_if(it->begin(), it->end(), [&](const auto& p) { return p.second == u.name(); });
            if (lt == it->end() && lu == it->end()) continue;
            return lt == lu;
        }
        return t.name() == u.name();
    case Term::Kind::apply:
        if (t.name() != u.name() || t.args().size() != u.args().size()) return false;
        for (std::size_t i = 0; i < t.args().size(); ++i)
            if (!alpha_oracle(t.args()[i], u.args()[i], env)) return false;
        return true;
    case Term::Kind::recursion: {
        if (t.spec().size() != u.spec().size()) return false;
        std::vector<std::string> left, right;
        for (const auto& [v, b] : t.spec()) left.push_back(v);
        for (const auto& [v, b] : u.spec()) right.push_back(v);
        std::sort(right.begin(), right.end());
        do {
            Block block;
            bool root = false;
            for (std::size_t i = 0; i < left.size(); ++i) {
                block.emplace_back(left[i], right[i]);
                root = root || (left[i] == t.name() && right[i] == u.name());
            }
            if (!root) continue;
            env.push_back(block);
            bool ok = true;
            for (const auto& [l, r] : block) ok = ok && alpha_oracle(t.spec().at(l), u.spec().at(r), env);
            env.pop_back();
            if (ok) return true;
        } while (std::next_permutation(right.begin(), right.end()));
        return false;
    }
    }
    return false;
}

bool alpha_oracle(const Term& t, const Term& u) {
    std::vector<Block> env;
    return alpha_oracle(t, u, env);
}

// Generated corpus: open terms over {x, y, X0, X1} so substitution images can
// collide with generated binder names.
std::vector<Term> corpus(std::uint64_t seed, std::size_t n, std::size_t depth = 3) {
    TermGenerator gen(test::ccs(), seed, false);
    std::vector<Term> out;
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(i % 3 == 0 ? gen.rec(depth, {"x", "y", "X0", "X1"}) : gen.open(depth, {"x", "y", "X0", "X1"}));
    return out;
}

Substitution random_sigma(std::uint64_t seed) {
    TermGenerator gen(test::ccs(), seed, false);
    Substitution sigma;
    for (const char* v : {"x", "y", "X0", "X1"})
        if (gen.coin(0.7)) sigma.emplace(v, gen.open(2, {"x", "X0", "X1", "z"}));
    return sigma;
}

}  // namespace

TEST_CASE("free variables") {
    CHECK(ex_rec().free_vars() == vars({"z"}));
    CHECK(term(S(), "x").free_vars() == vars({"x"}));
    CHECK(term(S(), "a.par(x, <Y | Y = b.Y>)").free_vars() == vars({"x"}));
    CHECK(term(S(), "<X | X = a.X>").closed());
}

TEST_CASE("substitution examples") {
    SECTION("image replaces the free variable") {
        auto got = substitute(ex_rec(), {{"z", term(S(), "b.c")}});
        CHECK(got == term(S(), "<X | X = par(a.X, b.Y), Y = par(d.Y, par(X, b.c))>"));
    }
    SECTION("captured image forces renaming of the binder") {
        auto got = substitute(ex_rec(), {{"z", Term::variable("X")}});
        auto expected = term(S(), "<Z | Z = par(a.Z, b.Y), Y = par(d.Y, par(Z, X))>");
        CHECK(got != expected);
        CHECK(alpha_eq(got, expected));
        CHECK(alpha_oracle(got, expected));
        CHECK(got.free_vars() == vars({"X"}));
        CHECK(got.name() == "X1");
    }
    SECTION("bound variable in the domain leaves the term unchanged") {
        auto t = ex_rec();
        CHECK(substitute(t, {{"Y", term(S(), "b.c")}}) == t);
    }
}

TEST_CASE("substitution basics") {
    auto t = term(S(), "par(x, a.y)");
    CHECK(substitute(t, {}) == t);
    CHECK(substitute(t, {{"x", term(S(), "c")}}) == term(S(), "par(c, a.y)"));
    CHECK(substitute(t, {{"x", Term::variable("y")}, {"y", Term::variable("x")}}) == term(S(), "par(y, a.x)"));
    auto closed = term(S(), "<X | X = a.X>");
    CHECK(substitute(closed, {{"X", term(S(), "c")}}) == closed);
}

TEST_CASE("fresh names take the least free suffix") {
    CHECK(fresh_name("X", vars({"X"})) == "X1");
    CHECK(fresh_name("X", vars({"X", "X1", "X2"})) == "X3");
    CHECK(fresh_name("X", vars({"X2"})) == "X1");
}

TEST_CASE("alpha equivalence examples") {
    CHECK(alpha_eq(term(S(), "<X | X = a.X>"), term(S(), "<Y | Y = a.Y>")));
    CHECK_FALSE(alpha_eq(term(S(), "<X | X = a.X>"), term(S(), "<X | X = b.X>")));
    CHECK(alpha_eq(term(S(), "<Z | Z = par(a.Z, b.Y), Y = par(d.Y, par(Z, X))>"),
                   term(S(), "<W | W = par(a.W, b.V), V = par(d.V, par(W, X))>")));
    // Free variables are not renamed.
    CHECK_FALSE(alpha_eq(term(S(), "<X | X = par(a.X, y)>"), term(S(), "<X | X = par(a.X, z)>")));
    // The selected component matters.
    CHECK_FALSE(alpha_eq(term(S(), "<X | X = a.Y, Y = b.X>"), term(S(), "<Y | X = a.Y, Y = b.X>")));
    CHECK(alpha_eq(term(S(), "<X | X = a.Y, Y = b.X>"), term(S(), "<Q | Q = a.P, P = b.Q>")));
    // Shadowing: the inner binder hides the outer one.
    CHECK(alpha_eq(term(S(), "<X | X = a.<X | X = b.X>>"), term(S(), "<Y | Y = a.<Z | Z = b.Z>>")));
    CHECK_FALSE(alpha_eq(term(S(), "<X | X = a.<Y | Y = b.X>>"), term(S(), "<X | X = a.<Y | Y = b.Y>>")));
}

TEST_CASE("component unfolding") {
    CHECK(rec_component_unfold("X", term(S(), "<X | X = a.X>").spec()) == term(S(), "a.<X | X = a.X>"));
    auto s = ex_rec().spec();
    CHECK(rec_component_unfold("X", s) == Term::apply("par", {Term::apply("pre_a", {Term::rec("X", s)}),
                                                            Term::apply("pre_b", {Term::rec("Y", s)})}));
    auto loop = term(S(), "<X | X = X>");
    CHECK(unfold(loop) == loop);
    CHECK_THROWS_WITH(rec_component_unfold("Q", s), Catch::Matchers::ContainsSubstring("unbound recursion variable"));
}

TEST_CASE("malformed recursion") {
    CHECK_THROWS_WITH(Term::rec("X", {}), Catch::Matchers::ContainsSubstring("empty"));
    RecSpec s;
    s.emplace("Y", Term::variable("Y"));
    CHECK_THROWS_WITH(Term::rec("X", s), Catch::Matchers::ContainsSubstring("unbound recursion variable"));
}

TEST_CASE("alpha_eq agrees with binder-bijection search") {
    auto terms = corpus(7, 300);
    TermGenerator gen(test::ccs(), 99, false);
    std::size_t positives = 0;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const auto& p = terms[i];
        std::vector<Term> others{rename_binders(p), terms[(i + 1) % terms.size()]};
        if (p.is_rec()) {
            // Same specification, another selected component.
            for (const auto& [v, b] : p.spec()) others.push_back(Term::rec(v, p.spec()));
            others.push_back(rename_binders(Term::rec(p.spec().rbegin()->first, p.spec()), "q"));
        }
        for (const auto& q : others) {
            INFO(to_string(p) << " vs " << to_string(q));
            bool expected = alpha_oracle(p, q);
            positives += expected;
            CHECK(alpha_eq(p, q) == expected);
        }
    }
    CHECK(positives > terms.size());
}

TEST_CASE("alpha_eq is an equivalence on generated terms") {
    auto base = corpus(11, 60, 2);
    std::vector<Term> terms;
    for (const auto& t : base) {
        terms.push_back(t);
        terms.push_back(rename_binders(t));
        terms.push_back(rename_binders(rename_binders(t), "s"));
    }
    for (const auto& t : terms) CHECK(alpha_eq(t, t));
    for (std::size_t i = 0; i < terms.size(); ++i)
        for (std::size_t j = 0; j < terms.size(); ++j) {
            bool ij = alpha_eq(terms[i], terms[j]);
            if (ij != alpha_eq(terms[j], terms[i])) FAIL("asymmetric");
            if (!ij) continue;
            for (std::size_t k = 0; k < terms.size(); ++k)
                if (alpha_eq(terms[j], terms[k]) && !alpha_eq(terms[i], terms[k])) FAIL("intransitive");
        }
}

TEST_CASE("substitution laws on generated terms") {
    auto terms = corpus(3, 400);
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const auto& t = terms[i];
        auto sigma = random_sigma(1000 + i);
        INFO(to_string(t));
        CHECK(substitute(t, {}) == t);

        // free_vars(t[sigma]) = (fv(t) \ dom sigma) ∪ fv(sigma(x)) for x in fv(t) ∩ dom sigma
        VarSet expected;
        for (const auto& v : t.free_vars()) {
            auto it = sigma.find(v);
            if (it == sigma.end()) expected.insert(v);
            else expected.insert(it->second.free_vars().begin(), it->second.free_vars().end());
        }
        auto result = substitute(t, sigma);
        CHECK(result.free_vars() == expected);

        auto u = rename_binders(t);
        CHECK(alpha_eq(t, u));
        CHECK(u.free_vars() == t.free_vars());
        CHECK(alpha_eq(result, substitute(u, sigma)));

        // Closing substitutions leave closed terms alone.
        if (t.closed()) CHECK(substitute(t, sigma) == t);
    }
}

TEST_CASE("substitution composes") {
    auto terms = corpus(5, 300);
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const auto& t = terms[i];
        auto sigma = random_sigma(2000 + i);
        auto tau = random_sigma(3000 + i);
        // (t sigma) tau = t (sigma ; tau)
        Substitution composed;
        for (const auto& [v, image] : sigma) composed.emplace(v, substitute(image, tau));
        for (const auto& [v, image] : tau) composed.emplace(v, image);
        INFO(to_string(t));
        CHECK(alpha_eq(substitute(substitute(t, sigma), tau), substitute(t, composed)));
    }
}

TEST_CASE("printing round-trips through the parser") {
    auto terms = corpus(13, 200);
    for (const auto& t : terms) {
        auto text = test::ccs().signature.print(t);
        INFO(text);
        CHECK(parse_term(text, test::ccs().signature) == t);
    }
}
