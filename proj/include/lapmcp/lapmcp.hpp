#pragma once

#include "lapmcp/admm.hpp"
#include "lapmcp/core.hpp"
#include "lapmcp/dca.hpp"
#include "lapmcp/experiment.hpp"
#include "lapmcp/graph.hpp"
#include "lapmcp/io.hpp"
#include "lapmcp/metrics.hpp"
#include "lapmcp/penalty.hpp"
#include "lapmcp/problem.hpp"
#include "lapmcp/report.hpp"
#include "lapmcp/ssn.hpp"
#include "lapmcp/symeig.hpp"
#include "lapmcp/symlinalg.hpp"
