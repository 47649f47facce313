#pragma once

#include "hjmm/arbitrage.hpp"
#include "hjmm/brody_hughston.hpp"
#include "hjmm/curve_space.hpp"
#include "hjmm/errors.hpp"
#include "hjmm/model_json.hpp"
#include "hjmm/model_spec.hpp"
#include "hjmm/positivity.hpp"
#include "hjmm/simulator.hpp"
