#pragma once

#include "fato/bangbang.hpp"
#include "fato/dynamics.hpp"
#include "fato/error.hpp"
#include "fato/format.hpp"
#include "fato/fourier.hpp"
#include "fato/qmat.hpp"
#include "fato/sweeps.hpp"
#include "fato/twoqubit.hpp"
