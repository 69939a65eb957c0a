#pragma once

#include "dnl/longtime/contraction.hpp"
#include "dnl/longtime/ltrajectory.hpp"
#include "dnl/longtime/omega_limit.hpp"
#include "dnl/longtime/stationary.hpp"
