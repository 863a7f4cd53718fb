#pragma once
// convenience umbrella: the whole library in one include

#include "regulus/types.hpp"
#include "regulus/tensor.hpp"
#include "regulus/chart.hpp"
#include "regulus/gridmetric.hpp"
#include "regulus/geodesic.hpp"
#include "regulus/holder.hpp"
#include "regulus/isothermal.hpp"
#include "regulus/radius.hpp"
#include "regulus/harness.hpp"
