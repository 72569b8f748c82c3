#pragma once

#include "dynkde/analysis.hpp"
#include "dynkde/bandwidth.hpp"
#include "dynkde/dynsys.hpp"
#include "dynkde/error.hpp"
#include "dynkde/estimator.hpp"
#include "dynkde/gauss_transform.hpp"
#include "dynkde/harness.hpp"
#include "dynkde/io.hpp"
#include "dynkde/kernels.hpp"
#include "dynkde/metrics.hpp"
#include "dynkde/quadrature.hpp"
#include "dynkde/summation.hpp"
