#pragma once

#include "fracpade/pade.hpp"
#include "fracpade/time_mesh.hpp"
#include "fracpade/scalar_stepper.hpp"
#include "fracpade/fem.hpp"
#include "fracpade/spd_solver.hpp"
#include "fracpade/projection.hpp"
#include "fracpade/spectral.hpp"
#include "fracpade/operator_stepper.hpp"
#include "fracpade/experiments.hpp"
