#pragma once

#include "depgraph/consistency.hpp"
#include "depgraph/detect_dup.hpp"
#include "depgraph/detect_ref.hpp"
#include "depgraph/dto.hpp"
#include "depgraph/engine.hpp"
#include "depgraph/errors.hpp"
#include "depgraph/evaluation.hpp"
#include "depgraph/fastdiag.hpp"
#include "depgraph/generator.hpp"
#include "depgraph/graph.hpp"
#include "depgraph/jsonl.hpp"
#include "depgraph/proposals.hpp"
#include "depgraph/store.hpp"
#include "depgraph/text.hpp"
#include "depgraph/tfidf.hpp"
#include "depgraph/topology.hpp"
#include "depgraph/types.hpp"
