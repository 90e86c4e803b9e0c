#pragma once

// Kernel two-sample and independence testing on set-valued data: weighted
// random-feature mean embeddings, permutation-calibrated tests, power-proxy
// bandwidth tuning, synthetic designs and interpolation baselines.

#include "settest/baselines.hpp"
#include "settest/benchmark.hpp"
#include "settest/data.hpp"
#include "settest/io.hpp"
#include "settest/kernel.hpp"
#include "settest/oracles.hpp"
#include "settest/permutation.hpp"
#include "settest/pipeline.hpp"
#include "settest/rff.hpp"
#include "settest/spline.hpp"
#include "settest/statistics.hpp"
#include "settest/synthetic.hpp"
#include "settest/tuning.hpp"
