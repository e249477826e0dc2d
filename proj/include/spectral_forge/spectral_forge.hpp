#pragma once

#include "spectral_forge/error.hpp"
#include "spectral_forge/parallel.hpp"
#include "spectral_forge/tate_curve.hpp"
#include "spectral_forge/fiber_class.hpp"
#include "spectral_forge/rational_poly.hpp"
#include "spectral_forge/hyperelliptic.hpp"
#include "spectral_forge/integer_lattice.hpp"
#include "spectral_forge/surface_model.hpp"
#include "spectral_forge/family.hpp"
#include "spectral_forge/spectral_cover.hpp"
#include "spectral_forge/fourier_mukai.hpp"
#include "spectral_forge/modifications.hpp"
