/*
 * Copyright 2026 The IPR Toolkit Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Umbrella header.

#ifndef IPR_IPR_HPP_
#define IPR_IPR_HPP_

#include "ipr/annotation_matrix.hpp"
#include "ipr/corpus_io.hpp"
#include "ipr/error.hpp"
#include "ipr/heatmap.hpp"
#include "ipr/label_schema.hpp"
#include "ipr/metrics.hpp"
#include "ipr/report.hpp"
#include "ipr/rng.hpp"
#include "ipr/runner.hpp"
#include "ipr/synthetic.hpp"
#include "ipr/voting.hpp"

#endif  // IPR_IPR_HPP_
