#pragma once

#include "pwc/rational.hpp"
#include "pwc/geometry.hpp"
#include "pwc/dynamics.hpp"
#include "pwc/refinement.hpp"
#include "pwc/ifs.hpp"
#include "pwc/perturb.hpp"
#include "pwc/metrics.hpp"
