#pragma once

//! xbeam: exact and paraxial beam propagation for free particles, photons and
//! charged particles in a uniform magnetic field.
#include "xbeam/core.hpp"
#include "xbeam/dispersion.hpp"
#include "xbeam/fft.hpp"
#include "xbeam/io.hpp"
#include "xbeam/modes.hpp"
#include "xbeam/oracle.hpp"
#include "xbeam/propagation.hpp"
#include "xbeam/scenario.hpp"
