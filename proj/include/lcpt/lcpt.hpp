#pragma once

#include "errors.hpp"
#include "operator_index.hpp"
#include "model.hpp"
#include "regression.hpp"
#include "chd.hpp"
#include "spectra.hpp"
#include "oracle.hpp"
