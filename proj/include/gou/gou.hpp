#pragma once

#include "bayes.hpp"
#include "dependence.hpp"
#include "error.hpp"
#include "gof.hpp"
#include "io.hpp"
#include "kernels.hpp"
#include "levy.hpp"
#include "log.hpp"
#include "mle.hpp"
#include "optim.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"
#include "rng.hpp"
#include "simulate.hpp"
#include "stable.hpp"
#include "stats.hpp"
