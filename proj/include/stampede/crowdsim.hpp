#pragma once

#include "stampede/crowdsim/density.hpp"
#include "stampede/crowdsim/forces.hpp"
#include "stampede/crowdsim/geometry.hpp"
#include "stampede/crowdsim/model.hpp"
#include "stampede/crowdsim/scenario.hpp"
#include "stampede/crowdsim/simulation.hpp"
