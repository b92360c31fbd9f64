#pragma once

#include "polarix/error.hpp"
#include "polarix/graph.hpp"
#include "polarix/indices.hpp"
#include "polarix/bnb.hpp"
#include "polarix/disturbance.hpp"
#include "polarix/dynamics.hpp"
#include "polarix/filippov.hpp"
#include "polarix/io.hpp"
