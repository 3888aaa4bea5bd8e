#pragma once

#include "propmat/codec.hpp"
#include "propmat/color.hpp"
#include "propmat/constraints.hpp"
#include "propmat/errors.hpp"
#include "propmat/features.hpp"
#include "propmat/knn.hpp"
#include "propmat/laplacian.hpp"
#include "propmat/manifest.hpp"
#include "propmat/metrics.hpp"
#include "propmat/pipeline.hpp"
#include "propmat/preprocess.hpp"
#include "propmat/raster.hpp"
#include "propmat/solver.hpp"
