#pragma once

#include "microgeo/error.hpp"
#include "microgeo/math.hpp"
#include "microgeo/grid.hpp"
#include "microgeo/corpus.hpp"
#include "microgeo/unicode.hpp"
#include "microgeo/tokenmatch.hpp"
#include "microgeo/stats.hpp"
#include "microgeo/render.hpp"
#include "microgeo/synth.hpp"
#include "microgeo/pipeline.hpp"
#include "microgeo/report.hpp"
