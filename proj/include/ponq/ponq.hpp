#pragma once

#include "ponq/delaunay.hpp"
#include "ponq/error.hpp"
#include "ponq/extraction.hpp"
#include "ponq/fitting.hpp"
#include "ponq/maxflow.hpp"
#include "ponq/mesh.hpp"
#include "ponq/mesh_io.hpp"
#include "ponq/metrics.hpp"
#include "ponq/parallel.hpp"
#include "ponq/pipeline.hpp"
#include "ponq/ponq_io.hpp"
#include "ponq/predicates.hpp"
#include "ponq/quadric.hpp"
#include "ponq/random.hpp"
#include "ponq/sampling.hpp"
#include "ponq/shapes.hpp"
#include "ponq/simplify.hpp"
#include "ponq/spatial.hpp"
#include "ponq/vec.hpp"
