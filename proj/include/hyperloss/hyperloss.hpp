#ifndef HYPERLOSS_HYPERLOSS_HPP_
#define HYPERLOSS_HYPERLOSS_HPP_

#include "hyperloss/analysis.hpp"
#include "hyperloss/closedform.hpp"
#include "hyperloss/components.hpp"
#include "hyperloss/errors.hpp"
#include "hyperloss/gaussian.hpp"
#include "hyperloss/io.hpp"
#include "hyperloss/network.hpp"
#include "hyperloss/optimizer.hpp"
#include "hyperloss/parallel.hpp"
#include "hyperloss/selftest.hpp"

#endif  // HYPERLOSS_HYPERLOSS_HPP_
