#pragma once

#include "lsmix/numeric.hpp"
#include "lsmix/model.hpp"
#include "lsmix/em.hpp"
#include "lsmix/select.hpp"
#include "lsmix/classify.hpp"
#include "lsmix/breakdown.hpp"
#include "lsmix/calibrate.hpp"
