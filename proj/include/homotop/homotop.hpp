#pragma once

#include "homotop/common.hpp"
#include "homotop/complexes.hpp"
#include "homotop/csv.hpp"
#include "homotop/dimreduce.hpp"
#include "homotop/embedding.hpp"
#include "homotop/ingest.hpp"
#include "homotop/metrics.hpp"
#include "homotop/persistence.hpp"
#include "homotop/pipeline.hpp"
#include "homotop/render.hpp"
#include "homotop/rng.hpp"
#include "homotop/stats.hpp"
