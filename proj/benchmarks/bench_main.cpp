// Copyright 2026 The infolab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include "infolab/infomat.hpp"
#include "infolab/matrix.hpp"
#include "infolab/models.hpp"
#include "infolab/quadsim.hpp"
#include "infolab/rng.hpp"

namespace {

infolab::SymMatrix random_spd(std::size_t d, std::uint64_t seed) {
  infolab::Rng rng = infolab::make_rng(seed);
  infolab::SymMatrix m(d);
  for (std::size_t k = 0; k < d + 2; ++k) infolab::add_outer(m, infolab::standard_normal_vector(rng, d));
  return m;
}

void BM_Eigh(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const infolab::SymMatrix m = random_spd(d, 1);
  for (auto _ : state) benchmark::DoNotOptimize(infolab::eigh(m));
}
BENCHMARK(BM_Eigh)->Arg(8)->Arg(20)->Arg(64);

void BM_StepMomentsDense(benchmark::State& state) {
  const auto inst = infolab::make_problem(static_cast<int>(state.range(0)), 0);
  const auto m = infolab::MethodSpec::sg(1e-3);
  infolab::MomentState s = infolab::initial_state(inst.problem, m, inst.theta0);
  for (auto _ : state) {
    s = infolab::step_moments(inst.problem, m, s);
    benchmark::DoNotOptimize(s.Sigma);
  }
}
BENCHMARK(BM_StepMomentsDense)->Arg(20);

void BM_StepMomentsPolyak(benchmark::State& state) {
  const auto inst = infolab::make_problem(static_cast<int>(state.range(0)), 0);
  const auto m = infolab::MethodSpec::polyak(1e-3, 0.9);
  infolab::MomentState s = infolab::initial_state(inst.problem, m, inst.theta0);
  for (auto _ : state) {
    s = infolab::step_moments(inst.problem, m, s);
    benchmark::DoNotOptimize(s.Sigma);
  }
}
BENCHMARK(BM_StepMomentsPolyak)->Arg(20);

void BM_StepsToThreshold(benchmark::State& state) {
  const auto inst = infolab::make_problem(20, 0);
  const auto m = infolab::MethodSpec::sg(1e-3);
  for (auto _ : state)
    benchmark::DoNotOptimize(infolab::steps_to_threshold(inst.problem, m, inst.theta0, 0.01));
}
BENCHMARK(BM_StepsToThreshold);

void BM_ComputeFisherExact(benchmark::State& state) {
  infolab::Rng rng = infolab::make_rng(3);
  infolab::MixtureSpec spec;
  spec.n = static_cast<std::size_t>(state.range(0));
  spec.d_in = 10;
  spec.classes = 5;
  const infolab::Dataset data = infolab::make_gaussian_mixture(spec, 7, rng);
  const infolab::LossOracle model =
      infolab::randomized(infolab::LossOracle::softmax_linear(10, 5), 0.3, rng);
  for (auto _ : state) benchmark::DoNotOptimize(infolab::compute_F(model, data));
}
BENCHMARK(BM_ComputeFisherExact)->Arg(256)->Arg(1024);

}  // namespace

BENCHMARK_MAIN();
