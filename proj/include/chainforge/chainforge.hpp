#pragma once

// Everything except the command-line front end (cli.hpp).

#include "balance.hpp"
#include "chain.hpp"
#include "constructor.hpp"
#include "density.hpp"
#include "errors.hpp"
#include "experiments.hpp"
#include "framework.hpp"
#include "graph_io.hpp"
#include "hamilton.hpp"
#include "hypercore.hpp"
#include "hypergraph.hpp"
#include "link.hpp"
#include "lp.hpp"
#include "matching.hpp"
#include "property_graph.hpp"
#include "random.hpp"
#include "rational.hpp"
#include "samplers.hpp"
#include "search.hpp"
#include "spread.hpp"
