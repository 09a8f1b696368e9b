#pragma once

#include "cablekit/error.hpp"
#include "cablekit/graph.hpp"
#include "cablekit/correspondence.hpp"
#include "cablekit/metrics.hpp"
#include "cablekit/operators.hpp"
#include "cablekit/stochastic.hpp"
#include "cablekit/io.hpp"
