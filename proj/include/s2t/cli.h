// s2t/cli.h

// Copyright 2026  The s2t Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef S2T_CLI_H_
#define S2T_CLI_H_

namespace s2t {

// Entry point of the command-line harness. Subcommands:
//   synth-data    generate the synthetic corpus and export it to disk
//   train         pretrain, finetune over the learning-rate sweep, evaluate
//   eval          score a checkpoint on a dataset split
//   count-params  print trainable-parameter budgets per finetuning strategy
//   ablate        run the finetuning-strategy or adaptor design grid
//   grad-check    verify layer gradients against finite differences
// Returns 0 on success; any failure prints one diagnostic line to stderr
// and returns a non-zero code.
int CliMain(int argc, char** argv);

}  // namespace s2t

#endif  // S2T_CLI_H_
