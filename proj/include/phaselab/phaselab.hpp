#pragma once

// Everything: the numerics, the experiment runner and the verification battery.

#include "phaselab/analysis.hpp"
#include "phaselab/config.hpp"
#include "phaselab/core.hpp"
#include "phaselab/curve.hpp"
#include "phaselab/errors.hpp"
#include "phaselab/experiment.hpp"
#include "phaselab/fft.hpp"
#include "phaselab/interactions.hpp"
#include "phaselab/interferometer.hpp"
#include "phaselab/layout.hpp"
#include "phaselab/oracle.hpp"
#include "phaselab/propagator.hpp"
#include "phaselab/verification.hpp"
