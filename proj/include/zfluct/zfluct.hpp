#pragma once

// Umbrella header: zero-count statistics of Gaussian Taylor series.

#include "zfluct/admissibility.hpp"
#include "zfluct/coeff_model.hpp"
#include "zfluct/mc.hpp"
#include "zfluct/quadrature.hpp"
#include "zfluct/report.hpp"
#include "zfluct/restriction.hpp"
#include "zfluct/rng.hpp"
#include "zfluct/tilted_window.hpp"
#include "zfluct/variance.hpp"
#include "zfluct/zero_count.hpp"
