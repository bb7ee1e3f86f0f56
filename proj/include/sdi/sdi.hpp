#pragma once

#include "sdi/analytics.hpp"
#include "sdi/crossval.hpp"
#include "sdi/dataset.hpp"
#include "sdi/error.hpp"
#include "sdi/experiments.hpp"
#include "sdi/heterogeneity.hpp"
#include "sdi/metrics.hpp"
#include "sdi/models.hpp"
#include "sdi/outliers.hpp"
#include "sdi/rng.hpp"
#include "sdi/scale.hpp"
#include "sdi/synth.hpp"
#include "sdi/text.hpp"
