#pragma once

#include "kdsp/error.hpp"
#include "kdsp/rational.hpp"
#include "kdsp/lattice.hpp"
#include "kdsp/preprocess.hpp"
#include "kdsp/hamiltonian.hpp"
#include "kdsp/pauli.hpp"
#include "kdsp/rng.hpp"
#include "kdsp/solvers.hpp"
#include "kdsp/qaoa.hpp"
#include "kdsp/scramble.hpp"
#include "kdsp/io.hpp"

namespace kdsp {
inline constexpr const char *version = "0.1.0";
}
