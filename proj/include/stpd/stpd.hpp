#pragma once

// Umbrella header for the spacetime probability density library.

#include "stpd/errors.hpp"
#include "stpd/lattice.hpp"
#include "stpd/fields.hpp"
#include "stpd/klein_gordon.hpp"
#include "stpd/density.hpp"
#include "stpd/momentum.hpp"
#include "stpd/lorentz.hpp"
#include "stpd/fock.hpp"
#include "stpd/sampling.hpp"
#include "stpd/uncertainty.hpp"
