#pragma once

#include "tailforce/commands.hpp"
#include "tailforce/datastore.hpp"
#include "tailforce/error.hpp"
#include "tailforce/field.hpp"
#include "tailforce/kinematics.hpp"
#include "tailforce/reactive_model.hpp"
#include "tailforce/sensor.hpp"
#include "tailforce/sigproc.hpp"
#include "tailforce/time_series.hpp"
