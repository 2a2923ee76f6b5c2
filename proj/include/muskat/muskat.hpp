#pragma once

#include "muskat/error.hpp"
#include "muskat/parallel.hpp"
#include "muskat/fft.hpp"
#include "muskat/grid.hpp"
#include "muskat/norms.hpp"
#include "muskat/gauss.hpp"
#include "muskat/quadrature.hpp"
#include "muskat/tail.hpp"
#include "muskat/interface.hpp"
#include "muskat/velocity.hpp"
#include "muskat/darcy.hpp"
#include "muskat/linear_analysis.hpp"
#include "muskat/evolution.hpp"
#include "muskat/diagnostics.hpp"
#include "muskat/scenario.hpp"
#include "muskat/io.hpp"
#include "muskat/runner.hpp"
