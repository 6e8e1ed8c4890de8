#pragma once

#include "probelab/assignment.hpp"
#include "probelab/ccs.hpp"
#include "probelab/cluster.hpp"
#include "probelab/dataset.hpp"
#include "probelab/eval.hpp"
#include "probelab/experiment.hpp"
#include "probelab/hdbscan.hpp"
#include "probelab/kmeans.hpp"
#include "probelab/linalg.hpp"
#include "probelab/logreg.hpp"
#include "probelab/norm.hpp"
#include "probelab/parallel.hpp"
#include "probelab/pca.hpp"
#include "probelab/probe.hpp"
#include "probelab/rng.hpp"
#include "probelab/serialize.hpp"
#include "probelab/svg.hpp"
#include "probelab/synth.hpp"
