#pragma once

#include "mdpkit/instances.hpp"
#include "mdpkit/json_io.hpp"
#include "mdpkit/lambda.hpp"
#include "mdpkit/mdp.hpp"
#include "mdpkit/objectives.hpp"
#include "mdpkit/policy_opt.hpp"
#include "mdpkit/random.hpp"
#include "mdpkit/trajectory.hpp"
#include "mdpkit/transition.hpp"
#include "mdpkit/types.hpp"
#include "mdpkit/value.hpp"
#include "mdpkit/version.hpp"
