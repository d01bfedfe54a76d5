#pragma once

#include "rda/config.hpp"
#include "rda/csv.hpp"
#include "rda/dde_sim.hpp"
#include "rda/domain.hpp"
#include "rda/eigen.hpp"
#include "rda/errors.hpp"
#include "rda/hopf.hpp"
#include "rda/normalform.hpp"
#include "rda/pipeline.hpp"
#include "rda/steady.hpp"
#include "rda/svg.hpp"
#include "rda/tridiag.hpp"
