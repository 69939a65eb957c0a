#pragma once

#include "dnl/cli/config.hpp"
#include "dnl/cli/experiments.hpp"
#include "dnl/cli/output.hpp"
#include "dnl/cli/sweep.hpp"
