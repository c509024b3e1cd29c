#pragma once

#include "lel/analysis.hpp"
#include "lel/codebook_io.hpp"
#include "lel/codec.hpp"
#include "lel/config.hpp"
#include "lel/error.hpp"
#include "lel/experiments.hpp"
#include "lel/finite_prob.hpp"
#include "lel/parallel.hpp"
#include "lel/random.hpp"
#include "lel/rd_solver.hpp"
