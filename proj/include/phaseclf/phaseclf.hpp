#pragma once

#include "phaseclf/artifacts.hpp"
#include "phaseclf/commands.hpp"
#include "phaseclf/config.hpp"
#include "phaseclf/error.hpp"
#include "phaseclf/eval.hpp"
#include "phaseclf/gradcheck.hpp"
#include "phaseclf/ingest.hpp"
#include "phaseclf/model.hpp"
#include "phaseclf/nncore.hpp"
#include "phaseclf/optim.hpp"
#include "phaseclf/rng.hpp"
#include "phaseclf/synth.hpp"
#include "phaseclf/tensor.hpp"
#include "phaseclf/textprep.hpp"
#include "phaseclf/train.hpp"
