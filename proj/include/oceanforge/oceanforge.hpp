// oceanforge.hpp
//
// Copyright 2026 The Oceanforge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef OCEANFORGE_OCEANFORGE_HPP
#define OCEANFORGE_OCEANFORGE_HPP

#include "oceanforge/ais.hpp"
#include "oceanforge/bitstream.hpp"
#include "oceanforge/bpe.hpp"
#include "oceanforge/configfile.hpp"
#include "oceanforge/corpus.hpp"
#include "oceanforge/dsp.hpp"
#include "oceanforge/errors.hpp"
#include "oceanforge/eval.hpp"
#include "oceanforge/hash.hpp"
#include "oceanforge/model.hpp"
#include "oceanforge/pipeline.hpp"
#include "oceanforge/selftest.hpp"
#include "oceanforge/taxonomy.hpp"
#include "oceanforge/tensor.hpp"
#include "oceanforge/train.hpp"
#include "oceanforge/wav.hpp"

#endif  // OCEANFORGE_OCEANFORGE_HPP
