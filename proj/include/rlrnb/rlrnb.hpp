#pragma once

#include "rlrnb/classifiers.hpp"
#include "rlrnb/corpus.hpp"
#include "rlrnb/counts.hpp"
#include "rlrnb/error.hpp"
#include "rlrnb/lr.hpp"
#include "rlrnb/metrics.hpp"
#include "rlrnb/tuner.hpp"
