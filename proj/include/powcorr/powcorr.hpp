#pragma once

#include "powcorr/corr.hpp"
#include "powcorr/correlation_report.hpp"
#include "powcorr/dyadic.hpp"
#include "powcorr/errors.hpp"
#include "powcorr/fourier.hpp"
#include "powcorr/hpgen.hpp"
#include "powcorr/mollify.hpp"
#include "powcorr/phase.hpp"
#include "powcorr/probe.hpp"
#include "powcorr/quadrature.hpp"
#include "powcorr/summation.hpp"
