// Umbrella header.

#pragma once

#include "iqkd/fock.hpp"
#include "iqkd/linear_optics.hpp"
#include "iqkd/interferometer.hpp"
#include "iqkd/schemes.hpp"
#include "iqkd/attack.hpp"
#include "iqkd/analysis.hpp"
#include "iqkd/rng.hpp"
#include "iqkd/session.hpp"
#include "iqkd/report.hpp"
#include "iqkd/fixtures.hpp"
