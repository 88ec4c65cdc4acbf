#pragma once

#include "qfint/apps.hpp"
#include "qfint/cluster.hpp"
#include "qfint/compensated.hpp"
#include "qfint/errors.hpp"
#include "qfint/interp.hpp"
#include "qfint/io.hpp"
#include "qfint/model.hpp"
#include "qfint/oracle.hpp"
#include "qfint/symmat.hpp"
