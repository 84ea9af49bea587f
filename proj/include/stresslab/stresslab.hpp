#pragma once

#include "stresslab/errors.hpp"
#include "stresslab/linalg.hpp"
#include "stresslab/chart.hpp"
#include "stresslab/warped.hpp"
#include "stresslab/forms.hpp"
#include "stresslab/exhaustion.hpp"
#include "stresslab/parallel.hpp"
#include "stresslab/quadrature.hpp"
#include "stresslab/monotonicity.hpp"
#include "stresslab/submanifold.hpp"
#include "stresslab/catalog.hpp"
#include "stresslab/report_io.hpp"
#include "stresslab/scenario.hpp"
