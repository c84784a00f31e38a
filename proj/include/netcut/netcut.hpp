#pragma once

#include "netcut/analytical.hpp"
#include "netcut/config.hpp"
#include "netcut/error.hpp"
#include "netcut/evaluator.hpp"
#include "netcut/explorer.hpp"
#include "netcut/metrics.hpp"
#include "netcut/netmodel.hpp"
#include "netcut/profile.hpp"
#include "netcut/report.hpp"
#include "netcut/svg.hpp"
#include "netcut/svr.hpp"
#include "netcut/truth.hpp"
