#pragma once

#include "erimap/bn/enumeration.hpp"
#include "erimap/bn/factor.hpp"
#include "erimap/bn/inference.hpp"
#include "erimap/bn/network.hpp"
#include "erimap/bn/spec_json.hpp"
#include "erimap/bundle.hpp"
#include "erimap/error.hpp"
#include "erimap/evidence.hpp"
#include "erimap/export.hpp"
#include "erimap/geometry.hpp"
#include "erimap/hazard.hpp"
#include "erimap/observation.hpp"
#include "erimap/pipeline.hpp"
#include "erimap/replay_report.hpp"
#include "erimap/spatial.hpp"
