#pragma once

#include "lurk/dip.hpp"
#include "lurk/echoreport.hpp"
#include "lurk/engagement.hpp"
#include "lurk/error.hpp"
#include "lurk/graph.hpp"
#include "lurk/ideology.hpp"
#include "lurk/ingest.hpp"
#include "lurk/mediabias.hpp"
#include "lurk/stats.hpp"
#include "lurk/synthgen.hpp"
#include "lurk/text.hpp"
