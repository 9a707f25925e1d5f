#pragma once

#include "bilinear/harness/chain_rule.hpp"
#include "bilinear/harness/embedding.hpp"
#include "bilinear/harness/field.hpp"
#include "bilinear/harness/ibp.hpp"
#include "bilinear/harness/offdiag.hpp"
#include "bilinear/harness/pointwise.hpp"
#include "bilinear/harness/scenario.hpp"
#include "bilinear/harness/square_function.hpp"
