#pragma once

// Umbrella header.

#include "mmgw/types.hpp"
#include "mmgw/core.hpp"
#include "mmgw/metrics.hpp"
#include "mmgw/random.hpp"
#include "mmgw/fusion.hpp"
#include "mmgw/harness.hpp"
#include "mmgw/report_io.hpp"
