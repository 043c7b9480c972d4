#pragma once

#include "selmer_lab/bipartite.hpp"
#include "selmer_lab/campaign.hpp"
#include "selmer_lab/duality.hpp"
#include "selmer_lab/error.hpp"
#include "selmer_lab/generate.hpp"
#include "selmer_lab/gf.hpp"
#include "selmer_lab/oracle.hpp"
#include "selmer_lab/rng.hpp"
#include "selmer_lab/selmer.hpp"
#include "selmer_lab/serialize.hpp"
