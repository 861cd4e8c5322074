#pragma once

#include "delib/bounds.hpp"
#include "delib/deliberation.hpp"
#include "delib/errors.hpp"
#include "delib/expr.hpp"
#include "delib/instances.hpp"
#include "delib/interval.hpp"
#include "delib/metric.hpp"
#include "delib/optimizer.hpp"
#include "delib/parallel.hpp"
#include "delib/rng.hpp"
#include "delib/sampling.hpp"
#include "delib/solver_avg.hpp"
#include "delib/solver_random.hpp"
#include "delib/tournament.hpp"
#include "delib/version.hpp"
