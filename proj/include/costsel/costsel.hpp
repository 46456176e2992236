#pragma once

#include "costsel/cost.hpp"
#include "costsel/dataset.hpp"
#include "costsel/error.hpp"
#include "costsel/evaluator.hpp"
#include "costsel/experiment.hpp"
#include "costsel/forest.hpp"
#include "costsel/format.hpp"
#include "costsel/io.hpp"
#include "costsel/lasso_path.hpp"
#include "costsel/matrix.hpp"
#include "costsel/oracle.hpp"
#include "costsel/random.hpp"
#include "costsel/schedule.hpp"
#include "costsel/sequences.hpp"
#include "costsel/smoothing.hpp"
#include "costsel/synth.hpp"
