#pragma once

#include "ensfts/data_io.hpp"
#include "ensfts/embedding.hpp"
#include "ensfts/error.hpp"
#include "ensfts/evaluation.hpp"
#include "ensfts/linalg.hpp"
#include "ensfts/log.hpp"
#include "ensfts/matrix.hpp"
#include "ensfts/nsfts.hpp"
#include "ensfts/serialization.hpp"
