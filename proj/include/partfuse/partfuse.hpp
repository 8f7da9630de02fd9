#pragma once

// Part-based face verification toolkit: landmark-driven region cropping,
// per-region cosine scoring, linear-logistic score fusion, and the
// verification evaluation protocols built on them.

#include "partfuse/align.hpp"
#include "partfuse/common.hpp"
#include "partfuse/crops.hpp"
#include "partfuse/csv.hpp"
#include "partfuse/embeddings.hpp"
#include "partfuse/fusion.hpp"
#include "partfuse/landmarks.hpp"
#include "partfuse/manifest.hpp"
#include "partfuse/metrics.hpp"
#include "partfuse/parallel.hpp"
#include "partfuse/protocols.hpp"
#include "partfuse/provider.hpp"
#include "partfuse/raster.hpp"
#include "partfuse/rng.hpp"
#include "partfuse/synth.hpp"
#include "partfuse/trials.hpp"
