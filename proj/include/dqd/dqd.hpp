#ifndef DQD_DQD_HPP
#define DQD_DQD_HPP

#include "dqd/branchpoints.hpp"
#include "dqd/config.hpp"
#include "dqd/errors.hpp"
#include "dqd/export.hpp"
#include "dqd/linalg.hpp"
#include "dqd/model.hpp"
#include "dqd/presets.hpp"
#include "dqd/spectral.hpp"
#include "dqd/sweep.hpp"
#include "dqd/transmission.hpp"

#endif
