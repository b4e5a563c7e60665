#pragma once

#include "darkpath/action.hpp"
#include "darkpath/adiabatic_frame.hpp"
#include "darkpath/config.hpp"
#include "darkpath/control.hpp"
#include "darkpath/csv.hpp"
#include "darkpath/errors.hpp"
#include "darkpath/experiments.hpp"
#include "darkpath/interp.hpp"
#include "darkpath/lambda_system.hpp"
#include "darkpath/least_action.hpp"
#include "darkpath/master_equation.hpp"
#include "darkpath/nelder_mead.hpp"
#include "darkpath/ode.hpp"
#include "darkpath/operator_algebra.hpp"
#include "darkpath/optimizer.hpp"
#include "darkpath/quadrature.hpp"
#include "darkpath/version.hpp"
