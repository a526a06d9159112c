#pragma once

// Everything except JSON spec I/O (specio.hpp), which needs nlohmann/json.

#include "bisect.hpp"
#include "diagderiv.hpp"
#include "equality.hpp"
#include "errors.hpp"
#include "exceptional.hpp"
#include "expr.hpp"
#include "geninv.hpp"
#include "interval.hpp"
#include "jets.hpp"
#include "mean.hpp"
#include "monotone.hpp"
#include "parser.hpp"
