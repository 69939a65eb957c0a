#pragma once

#include "dnl/diagnostics/energy.hpp"
#include "dnl/diagnostics/estimates.hpp"
#include "dnl/diagnostics/gronwall.hpp"
#include "dnl/diagnostics/ladder.hpp"
