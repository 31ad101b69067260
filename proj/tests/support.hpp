#pragma once

#include <sosw/sosw.hpp>

#include <string>

namespace test {

inline std::string lang_path(const std::string& name) { return std::string(SOSW_LANGS) + "/" + name; }

inline const sosw::Tss& ccs() {
    static const sosw::Tss tss = sosw::load_lang(lang_path("ccs.tss"));
    return tss;
}

// Prefix and parallel composition with a constant `c`, for the
// free-variable and substitution examples.
inline const sosw::Tss& syntax() {
    static const sosw::Tss tss = sosw::parse_lang(R"(
lang syntax
actions a b d
op nil 0
op c 0
op par 2
prefixfamily pre
meta act
option recursion on
rule prefix: act.x -act-> x
rule par-l: x -act-> x' => par(x,y) -act-> par(x',y)
rule par-r: y -act-> y' => par(x,y) -act-> par(x,y')
)");
    return tss;
}

inline sosw::Term term(const sosw::Tss& tss, const std::string& text) { return sosw::parse_term(text, tss.signature); }

}  // namespace test
