#pragma once

// Convenience umbrella: the whole library.

#include "shadowbench/csv.hpp"
#include "shadowbench/dem.hpp"
#include "shadowbench/distance_transform.hpp"
#include "shadowbench/errors.hpp"
#include "shadowbench/eval.hpp"
#include "shadowbench/interp.hpp"
#include "shadowbench/manifest.hpp"
#include "shadowbench/mask.hpp"
#include "shadowbench/metrics.hpp"
#include "shadowbench/parallel.hpp"
#include "shadowbench/png_io.hpp"
#include "shadowbench/report.hpp"
#include "shadowbench/stats.hpp"
#include "shadowbench/tensor.hpp"
