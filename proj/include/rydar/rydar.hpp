#pragma once

// Umbrella header for the library.

#include "rydar/atomic.hpp"
#include "rydar/channel.hpp"
#include "rydar/comms.hpp"
#include "rydar/constants.hpp"
#include "rydar/csv.hpp"
#include "rydar/errors.hpp"
#include "rydar/fft.hpp"
#include "rydar/frontend.hpp"
#include "rydar/radar.hpp"
#include "rydar/rng.hpp"
#include "rydar/runner.hpp"
#include "rydar/scenario.hpp"
#include "rydar/version.hpp"
#include "rydar/waveform.hpp"
#include "rydar/waveform_io.hpp"
