#pragma once

#include "vibrofc/closed_form.hpp"
#include "vibrofc/errors.hpp"
#include "vibrofc/linalg.hpp"
#include "vibrofc/log.hpp"
#include "vibrofc/multi_index.hpp"
#include "vibrofc/oracle.hpp"
#include "vibrofc/polynomials.hpp"
#include "vibrofc/quadratic_state.hpp"
#include "vibrofc/quadrature.hpp"
#include "vibrofc/spectrum.hpp"
#include "vibrofc/tomography.hpp"
