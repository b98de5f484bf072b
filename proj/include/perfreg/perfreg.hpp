#pragma once

#include "perfreg/data.hpp"
#include "perfreg/errors.hpp"
#include "perfreg/evaluation.hpp"
#include "perfreg/features/compute.hpp"
#include "perfreg/io/manifest.hpp"
#include "perfreg/io/report.hpp"
#include "perfreg/io/simulate.hpp"
#include "perfreg/io/tables.hpp"
#include "perfreg/models/classifier.hpp"
#include "perfreg/models/forest.hpp"
#include "perfreg/models/grid.hpp"
#include "perfreg/models/tree.hpp"
#include "perfreg/personalize.hpp"
#include "perfreg/problems.hpp"
