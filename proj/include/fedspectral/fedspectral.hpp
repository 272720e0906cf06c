#pragma once

#include "fedspectral/errors.hpp"
#include "fedspectral/matrix.hpp"
#include "fedspectral/random.hpp"
#include "fedspectral/graph.hpp"
#include "fedspectral/laplacian.hpp"
#include "fedspectral/qr.hpp"
#include "fedspectral/eigen.hpp"
#include "fedspectral/kmeans.hpp"
#include "fedspectral/spectral.hpp"
#include "fedspectral/partition.hpp"
#include "fedspectral/metrics.hpp"
#include "fedspectral/fed_baseline.hpp"
#include "fedspectral/fed_plus.hpp"
#include "fedspectral/label_io.hpp"
#include "fedspectral/experiment.hpp"
