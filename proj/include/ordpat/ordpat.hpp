#pragma once

#include "ordpat/errors.hpp"
#include "ordpat/fbm.hpp"
#include "ordpat/patterns.hpp"
#include "ordpat/quadrature.hpp"
#include "ordpat/orthant.hpp"
#include "ordpat/variance.hpp"
#include "ordpat/estimators.hpp"
#include "ordpat/harness.hpp"
