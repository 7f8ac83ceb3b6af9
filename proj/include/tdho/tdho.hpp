#pragma once

#include "tdho/errors.hpp"
#include "tdho/profile.hpp"
#include "tdho/classical.hpp"
#include "tdho/operator_matrix.hpp"
#include "tdho/fock.hpp"
#include "tdho/quantum.hpp"
#include "tdho/phase.hpp"
#include "tdho/manley_rowe.hpp"
