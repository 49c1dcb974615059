#pragma once

#include "chlab/diagnostics.hpp"
#include "chlab/errors.hpp"
#include "chlab/field.hpp"
#include "chlab/field_io.hpp"
#include "chlab/field_ops.hpp"
#include "chlab/integrator.hpp"
#include "chlab/kernelcheck.hpp"
#include "chlab/kernels.hpp"
#include "chlab/model.hpp"
#include "chlab/peakons.hpp"
#include "chlab/spectral.hpp"
