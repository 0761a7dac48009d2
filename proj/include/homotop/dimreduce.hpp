#pragma once

#include "homotop/dimreduce/graph.hpp"
#include "homotop/dimreduce/ica.hpp"
#include "homotop/dimreduce/krr.hpp"
#include "homotop/dimreduce/mds.hpp"
#include "homotop/dimreduce/spectral.hpp"
#include "homotop/dimreduce/tsne.hpp"
#include "homotop/dimreduce/types.hpp"
