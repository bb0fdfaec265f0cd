#pragma once

#include "landau/analytic_solutions.hpp"
#include "landau/collision_kernel.hpp"
#include "landau/config.hpp"
#include "landau/density_tracker.hpp"
#include "landau/diagnostics.hpp"
#include "landau/error.hpp"
#include "landau/experiment.hpp"
#include "landau/io.hpp"
#include "landau/linalg.hpp"
#include "landau/mesh.hpp"
#include "landau/optimizer.hpp"
#include "landau/particle_system.hpp"
#include "landau/rng.hpp"
#include "landau/sampling.hpp"
#include "landau/score_model.hpp"
#include "landau/score_provider.hpp"
#include "landau/training.hpp"
