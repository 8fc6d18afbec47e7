#pragma once

#include "heunbeta/che.hpp"
#include "heunbeta/errors.hpp"
#include "heunbeta/expansions.hpp"
#include "heunbeta/io.hpp"
#include "heunbeta/poly.hpp"
#include "heunbeta/scalar.hpp"
#include "heunbeta/special_functions.hpp"
#include "heunbeta/termination.hpp"
