#pragma once

#include "lsi/bench.hpp"
#include "lsi/geo.hpp"
#include "lsi/hilbert.hpp"
#include "lsi/index.hpp"
#include "lsi/interval_tree.hpp"
#include "lsi/oracle.hpp"
#include "lsi/polygon.hpp"
#include "lsi/query.hpp"
#include "lsi/search.hpp"
#include "lsi/serialize.hpp"
#include "lsi/spline.hpp"
#include "lsi/workload.hpp"
