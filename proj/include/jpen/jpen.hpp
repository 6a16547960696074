#pragma once

#include "jpen/classify.hpp"
#include "jpen/errors.hpp"
#include "jpen/estimators.hpp"
#include "jpen/io.hpp"
#include "jpen/matrix.hpp"
#include "jpen/metrics.hpp"
#include "jpen/penalty.hpp"
#include "jpen/rng.hpp"
#include "jpen/simgen.hpp"
#include "jpen/tuning.hpp"
