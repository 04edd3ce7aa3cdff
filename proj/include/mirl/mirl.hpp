// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mirl/adam.hpp"
#include "mirl/checkpoint.hpp"
#include "mirl/config.hpp"
#include "mirl/data.hpp"
#include "mirl/experiment.hpp"
#include "mirl/gradcheck.hpp"
#include "mirl/graph.hpp"
#include "mirl/metrics.hpp"
#include "mirl/model.hpp"
#include "mirl/ops.hpp"
#include "mirl/png_io.hpp"
#include "mirl/pruning.hpp"
#include "mirl/rng.hpp"
#include "mirl/schedule.hpp"
#include "mirl/store.hpp"
#include "mirl/tensor.hpp"
#include "mirl/train.hpp"
