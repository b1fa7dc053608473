#pragma once

// Umbrella header.

#include "hspace/catalog.hpp"
#include "hspace/commands.hpp"
#include "hspace/coords.hpp"
#include "hspace/dual.hpp"
#include "hspace/error.hpp"
#include "hspace/expr.hpp"
#include "hspace/geodesic.hpp"
#include "hspace/geometry.hpp"
#include "hspace/pencil.hpp"
#include "hspace/sampling.hpp"
#include "hspace/spec_io.hpp"
#include "hspace/tensor.hpp"
