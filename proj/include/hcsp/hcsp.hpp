#pragma once

#include "hcsp/coloring.hpp"
#include "hcsp/constructions.hpp"
#include "hcsp/io.hpp"
#include "hcsp/lifting.hpp"
#include "hcsp/polymorphisms.hpp"
#include "hcsp/random.hpp"
#include "hcsp/rational.hpp"
#include "hcsp/reductions.hpp"
#include "hcsp/search.hpp"
#include "hcsp/structure.hpp"
#include "hcsp/vcsp.hpp"
