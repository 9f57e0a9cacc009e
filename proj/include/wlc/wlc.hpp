#pragma once

// Umbrella header: the full library surface.

#include "wlc/activation.hpp"
#include "wlc/certify.hpp"
#include "wlc/config.hpp"
#include "wlc/errors.hpp"
#include "wlc/gaussian.hpp"
#include "wlc/hermite.hpp"
#include "wlc/interpolation.hpp"
#include "wlc/isserlis.hpp"
#include "wlc/kernel.hpp"
#include "wlc/matrix.hpp"
#include "wlc/mixture.hpp"
#include "wlc/multiindex.hpp"
#include "wlc/network.hpp"
#include "wlc/posterior.hpp"
#include "wlc/quadrature.hpp"
#include "wlc/rng.hpp"
#include "wlc/run.hpp"
#include "wlc/stats.hpp"
#include "wlc/tv.hpp"
#include "wlc/wasserstein.hpp"
