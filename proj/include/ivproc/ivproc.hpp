#pragma once

// Umbrella header for the instrumental-process estimation library.

#include "ivproc/bench.hpp"
#include "ivproc/config.hpp"
#include "ivproc/csv.hpp"
#include "ivproc/errors.hpp"
#include "ivproc/graph.hpp"
#include "ivproc/hawkes.hpp"
#include "ivproc/iv.hpp"
#include "ivproc/linalg.hpp"
#include "ivproc/lrcov.hpp"
#include "ivproc/parallel.hpp"
#include "ivproc/rng.hpp"
#include "ivproc/series.hpp"
#include "ivproc/var.hpp"
