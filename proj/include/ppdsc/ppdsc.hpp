#pragma once

// Umbrella header for the ppdsc toolkit.

#include "ppdsc/clustering.hpp"
#include "ppdsc/core.hpp"
#include "ppdsc/debias.hpp"
#include "ppdsc/experiments.hpp"
#include "ppdsc/federation.hpp"
#include "ppdsc/io.hpp"
#include "ppdsc/model.hpp"
#include "ppdsc/privacy.hpp"
#include "ppdsc/spectral.hpp"
