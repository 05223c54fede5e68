#pragma once

#include "topoalign/alignment.hpp"
#include "topoalign/assignment.hpp"
#include "topoalign/diagram_metrics.hpp"
#include "topoalign/error.hpp"
#include "topoalign/format.hpp"
#include "topoalign/persistence.hpp"
#include "topoalign/pointcloud.hpp"
#include "topoalign/sde.hpp"
#include "topoalign/train/arcface.hpp"
#include "topoalign/train/config.hpp"
#include "topoalign/train/dataset.hpp"
#include "topoalign/train/encoder.hpp"
#include "topoalign/train/perturb.hpp"
#include "topoalign/train/trainer.hpp"
