#pragma once

#include "term.hpp"
#include "signature.hpp"
#include "tss.hpp"
#include "format.hpp"
#include "semantics.hpp"
#include "equivalence.hpp"
#include "parser.hpp"
#include "generate.hpp"
#include "harness.hpp"
