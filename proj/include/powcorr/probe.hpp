#pragma once

#include "powcorr/probe/blocks.hpp"
#include "powcorr/probe/bounds.hpp"
#include "powcorr/probe/filtration.hpp"
#include "powcorr/probe/integrals.hpp"
#include "powcorr/probe/moment.hpp"
#include "powcorr/probe/report.hpp"
