#pragma once

#include "dgame/config.hpp"
#include "dgame/engine.hpp"
#include "dgame/ensemble.hpp"
#include "dgame/errors.hpp"
#include "dgame/glmodel.hpp"
#include "dgame/phase.hpp"
#include "dgame/realization.hpp"
#include "dgame/rng.hpp"
