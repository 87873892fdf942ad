#pragma once

#include "finslerlab/ab_metric.hpp"
#include "finslerlab/classify.hpp"
#include "finslerlab/deform.hpp"
#include "finslerlab/diffgeo.hpp"
#include "finslerlab/dual.hpp"
#include "finslerlab/errors.hpp"
#include "finslerlab/expr.hpp"
#include "finslerlab/field.hpp"
#include "finslerlab/flatness.hpp"
#include "finslerlab/linalg.hpp"
#include "finslerlab/models.hpp"
#include "finslerlab/parallel.hpp"
#include "finslerlab/phi.hpp"
#include "finslerlab/univariate.hpp"

namespace finslerlab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace finslerlab
