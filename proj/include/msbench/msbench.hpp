#pragma once

// Umbrella header: the full benchmark toolkit.

#include "msbench/analysis.hpp"
#include "msbench/backend.hpp"
#include "msbench/backend_factory.hpp"
#include "msbench/dataset.hpp"
#include "msbench/errors.hpp"
#include "msbench/external_backend.hpp"
#include "msbench/harness.hpp"
#include "msbench/image.hpp"
#include "msbench/reference_backend.hpp"
#include "msbench/report.hpp"
#include "msbench/rng.hpp"
#include "msbench/stats.hpp"
#include "msbench/synthetic_backend.hpp"
#include "msbench/windows.hpp"
