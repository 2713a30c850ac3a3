#pragma once

#include "swnmg/analysis.hpp"
#include "swnmg/assembly.hpp"
#include "swnmg/core.hpp"
#include "swnmg/driver.hpp"
#include "swnmg/expression.hpp"
#include "swnmg/mesh.hpp"
#include "swnmg/multigrid.hpp"
#include "swnmg/physics.hpp"
#include "swnmg/problems.hpp"
#include "swnmg/study.hpp"
