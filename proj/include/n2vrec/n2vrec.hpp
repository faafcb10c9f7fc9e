#pragma once

#include "n2vrec/clustering.hpp"
#include "n2vrec/dataset.hpp"
#include "n2vrec/embedding.hpp"
#include "n2vrec/error.hpp"
#include "n2vrec/eval.hpp"
#include "n2vrec/graph.hpp"
#include "n2vrec/ids.hpp"
#include "n2vrec/kmeans.hpp"
#include "n2vrec/pipeline.hpp"
#include "n2vrec/random.hpp"
#include "n2vrec/rating_matrix.hpp"
#include "n2vrec/recommend.hpp"
#include "n2vrec/recommenders.hpp"
#include "n2vrec/walk.hpp"
