#ifndef ETBO_ETBO_HPP
#define ETBO_ETBO_HPP
#pragma once

#include "algorithms.hpp"
#include "arms_replay.hpp"
#include "bound.hpp"
#include "config.hpp"
#include "csv_io.hpp"
#include "domain.hpp"
#include "errors.hpp"
#include "experiment.hpp"
#include "gp_posterior.hpp"
#include "kernels.hpp"
#include "presets.hpp"
#include "random.hpp"
#include "stopping_time.hpp"
#include "synthetic.hpp"
#include "trigger.hpp"

#endif // ETBO_ETBO_HPP
