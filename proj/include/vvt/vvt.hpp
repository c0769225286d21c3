#pragma once

#include "vvt/analysis.hpp"
#include "vvt/dynamics.hpp"
#include "vvt/errors.hpp"
#include "vvt/fitting.hpp"
#include "vvt/io.hpp"
#include "vvt/params.hpp"
#include "vvt/waveform.hpp"
