#pragma once

#include "fvqtl/genoprob.hpp"
#include "fvqtl/io.hpp"
#include "fvqtl/modelsel.hpp"
#include "fvqtl/parallel.hpp"
#include "fvqtl/power.hpp"
#include "fvqtl/regression.hpp"
#include "fvqtl/scan.hpp"
#include "fvqtl/sim.hpp"
#include "fvqtl/types.hpp"
