#pragma once

// Umbrella header for the library. The command-line layer (cli.hpp) and the
// reference oracles (oracles.hpp) are included separately.

#include <arboreal/comonads.hpp>
#include <arboreal/document.hpp>
#include <arboreal/equivalences.hpp>
#include <arboreal/errors.hpp>
#include <arboreal/forest.hpp>
#include <arboreal/formula.hpp>
#include <arboreal/games.hpp>
#include <arboreal/structure.hpp>
