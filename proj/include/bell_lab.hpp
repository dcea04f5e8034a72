#pragma once

#include "bell_lab/bellgame.hpp"
#include "bell_lab/core.hpp"
#include "bell_lab/estimators.hpp"
#include "bell_lab/io.hpp"
#include "bell_lab/pairing.hpp"
#include "bell_lab/parallel.hpp"
#include "bell_lab/randi.hpp"
#include "bell_lab/sources.hpp"
#include "bell_lab/stats.hpp"
