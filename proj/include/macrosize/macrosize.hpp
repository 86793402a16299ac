#pragma once

#include "coarse.hpp"
#include "errors.hpp"
#include "family.hpp"
#include "oracle.hpp"
#include "phase.hpp"
#include "sizing.hpp"
#include "special.hpp"
#include "statekit.hpp"
