#pragma once

#include "gkdv/conserved.hpp"
#include "gkdv/errors.hpp"
#include "gkdv/evans.hpp"
#include "gkdv/modulation.hpp"
#include "gkdv/nonlinearity.hpp"
#include "gkdv/quadrature.hpp"
#include "gkdv/scan.hpp"
#include "gkdv/wave.hpp"
#include "gkdv/whitham.hpp"
