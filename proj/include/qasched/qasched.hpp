#pragma once

#include "qasched/error.hpp"
#include "qasched/format.hpp"
#include "qasched/generator.hpp"
#include "qasched/hamiltonian.hpp"
#include "qasched/minimise.hpp"
#include "qasched/qaoa.hpp"
#include "qasched/qubo.hpp"
#include "qasched/schedule.hpp"
#include "qasched/spectral.hpp"
#include "qasched/strategy.hpp"
