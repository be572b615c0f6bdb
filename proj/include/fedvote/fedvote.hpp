#pragma once

// Umbrella header for the fedvote library.

#include "fedvote/error.hpp"
#include "fedvote/numerics/ops.hpp"
#include "fedvote/numerics/rng.hpp"
#include "fedvote/numerics/tensor.hpp"
#include "fedvote/data/dataset.hpp"
#include "fedvote/data/io.hpp"
#include "fedvote/data/split.hpp"
#include "fedvote/data/synthetic.hpp"
#include "fedvote/models/architecture.hpp"
#include "fedvote/models/checkpoint.hpp"
#include "fedvote/models/learner.hpp"
#include "fedvote/models/train.hpp"
#include "fedvote/ensemble/ensemble.hpp"
#include "fedvote/ensemble/vote.hpp"
#include "fedvote/metrics/metrics.hpp"
#include "fedvote/metrics/table.hpp"
#include "fedvote/evaluate.hpp"
#include "fedvote/federation/config.hpp"
#include "fedvote/federation/federation.hpp"
#include "fedvote/federation/run.hpp"
