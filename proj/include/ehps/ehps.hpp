#pragma once

// Umbrella header: pulls in the whole library.

#include "ehps/adapter.hpp"
#include "ehps/benchmark.hpp"
#include "ehps/body_model.hpp"
#include "ehps/coco.hpp"
#include "ehps/errors.hpp"
#include "ehps/humandata.hpp"
#include "ehps/kinematics.hpp"
#include "ehps/metrics.hpp"
#include "ehps/model_io.hpp"
#include "ehps/npy.hpp"
#include "ehps/npz.hpp"
#include "ehps/pipeline.hpp"
#include "ehps/random.hpp"
#include "ehps/report.hpp"
#include "ehps/rotation.hpp"
#include "ehps/sampling.hpp"
