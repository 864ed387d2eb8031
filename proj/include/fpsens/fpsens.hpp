#pragma once

#include "fpsens/etdm.hpp"
#include "fpsens/excitation.hpp"
#include "fpsens/fdmis.hpp"
#include "fpsens/model.hpp"
#include "fpsens/normal.hpp"
#include "fpsens/parallel.hpp"
#include "fpsens/random.hpp"
#include "fpsens/reliability.hpp"
#include "fpsens/response_map.hpp"
#include "fpsens/sdm.hpp"
#include "fpsens/stats.hpp"
