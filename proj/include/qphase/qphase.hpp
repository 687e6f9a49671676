#pragma once

#include "qphase/errors.hpp"
#include "qphase/hilbert.hpp"
#include "qphase/dynamics.hpp"
#include "qphase/gates.hpp"
#include "qphase/protocols.hpp"
#include "qphase/gauss.hpp"
#include "qphase/metrology.hpp"
