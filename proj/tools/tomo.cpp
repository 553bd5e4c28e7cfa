// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include "tomo/cli.hpp"

int main(int argc, char** argv) { return tomo::cli::run(argc, argv); }
