// Umbrella header.

#pragma once

#include "hktop/bls.hpp"
#include "hktop/core.hpp"
#include "hktop/elliptic.hpp"
#include "hktop/euler.hpp"
#include "hktop/hk.hpp"
#include "hktop/poisson.hpp"
#include "hktop/report.hpp"
#include "hktop/solution.hpp"
