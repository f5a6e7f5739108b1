#pragma once

#include "hasimoto/vec3.hpp"
#include "hasimoto/errors.hpp"
#include "hasimoto/grid.hpp"
#include "hasimoto/calculus.hpp"
#include "hasimoto/surface.hpp"
#include "hasimoto/map_field.hpp"
#include "hasimoto/complex_field.hpp"
#include "hasimoto/flows.hpp"
#include "hasimoto/frame.hpp"
#include "hasimoto/reduced.hpp"
#include "hasimoto/presets.hpp"
#include "hasimoto/verify.hpp"
#include "hasimoto/config.hpp"
#include "hasimoto/io.hpp"
