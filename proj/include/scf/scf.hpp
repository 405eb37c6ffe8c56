// SPDX-License-Identifier: MIT
#pragma once

// Umbrella header: the whole library.

#include "scf/completion.hpp"
#include "scf/grid.hpp"
#include "scf/image.hpp"
#include "scf/io.hpp"
#include "scf/keypoints.hpp"
#include "scf/metrics.hpp"
#include "scf/montecarlo.hpp"
#include "scf/parallel.hpp"
#include "scf/pipeline.hpp"
#include "scf/propagate.hpp"
#include "scf/rng.hpp"
#include "scf/trace.hpp"
