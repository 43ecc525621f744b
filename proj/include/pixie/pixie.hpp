#pragma once

#include "pixie/bits.hpp"
#include "pixie/codec.hpp"
#include "pixie/error.hpp"
#include "pixie/grid.hpp"
#include "pixie/image.hpp"
#include "pixie/mapper.hpp"
#include "pixie/opcode.hpp"
#include "pixie/simulator.hpp"
#include "pixie/sobel.hpp"
#include "pixie/taskgraph.hpp"
