#pragma once

#include "triage/error.hpp"
#include "triage/rng.hpp"
#include "triage/corpus.hpp"
#include "triage/textfeat.hpp"
#include "triage/svm.hpp"
#include "triage/cnn.hpp"
#include "triage/eval.hpp"
#include "triage/synth.hpp"
#include "triage/pipeline.hpp"
#include "triage/model_io.hpp"
#include "triage/report_io.hpp"
