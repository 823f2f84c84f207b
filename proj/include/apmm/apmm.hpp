#pragma once

#include "apmm/errors.hpp"
#include "apmm/config.hpp"
#include "apmm/geometry.hpp"
#include "apmm/stencils.hpp"
#include "apmm/sparse.hpp"
#include "apmm/assembly.hpp"
#include "apmm/linsolve.hpp"
#include "apmm/timeloop.hpp"
#include "apmm/verification.hpp"
#include "apmm/io.hpp"
