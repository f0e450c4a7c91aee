#pragma once

#include "polysparse/analysis.hpp"
#include "polysparse/basis.hpp"
#include "polysparse/bench.hpp"
#include "polysparse/bp.hpp"
#include "polysparse/conic.hpp"
#include "polysparse/extract.hpp"
#include "polysparse/greedy.hpp"
#include "polysparse/grouping.hpp"
#include "polysparse/multi_index.hpp"
#include "polysparse/rng.hpp"
#include "polysparse/system.hpp"
