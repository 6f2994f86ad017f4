#pragma once
// Umbrella header.

#include "bsn/analysis.hpp"
#include "bsn/field.hpp"
#include "bsn/hull.hpp"
#include "bsn/io.hpp"
#include "bsn/observe.hpp"
#include "bsn/ppr.hpp"
#include "bsn/random.hpp"
#include "bsn/scenario.hpp"
#include "bsn/svm.hpp"
#include "bsn/track.hpp"
#include "bsn/trajectory.hpp"
#include "bsn/vec2.hpp"
