#pragma once

#include "qbgeom/io.hpp"
#include "qbgeom/manifest.hpp"
#include "qbgeom/model.hpp"
#include "qbgeom/observables.hpp"
#include "qbgeom/solver_analytic.hpp"
#include "qbgeom/solver_numeric.hpp"
#include "qbgeom/sweep.hpp"
#include "qbgeom/validation.hpp"
#include "qbgeom/version.hpp"
