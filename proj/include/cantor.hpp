#pragma once

#include "cantor/numeric.hpp"
#include "cantor/magnitude.hpp"
#include "cantor/sequences.hpp"
#include "cantor/ladder.hpp"
#include "cantor/construction.hpp"
#include "cantor/discrepancy.hpp"
#include "cantor/dimension.hpp"
