#pragma once

// Core library. oracles.hpp and property_suite.hpp additionally need Eigen.

#include "trackex/bounds.hpp"
#include "trackex/comparator.hpp"
#include "trackex/environment.hpp"
#include "trackex/harness.hpp"
#include "trackex/learners.hpp"
#include "trackex/matrix.hpp"
#include "trackex/pcsp.hpp"
#include "trackex/projection.hpp"
#include "trackex/simplex.hpp"
#include "trackex/verification.hpp"
