// Copyright (C) 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0
//
// Regenerates tests/data/game24_fixtures.json by running every ablation row
// against the synthetic backend and recording each reply.
//
//   tse_make_fixtures <tests/data dir>

#include <filesystem>
#include <iostream>

#include "ablation_matrix.hpp"
#include "synthetic_backend.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: tse_make_fixtures DATA_DIR\n";
    return 1;
  }
  namespace fs = std::filesystem;
  const fs::path data = argv[1];
  const auto instances = tse::load_instances(tse::TaskKind::Game24, (data / "game24_golden.txt").string());
  const fs::path scratch = fs::temp_directory_path() / "tse_make_fixtures";
  fs::remove_all(scratch);

  tse::testing::SyntheticBackend synthetic;
  tse::RecordingBackend recorder(synthetic);
  tse::testing::FakeScorer scorer;
  for (const auto& row : tse::testing::ablation_rows()) {
    auto config = tse::testing::ablation_config(row, "game24_fixtures.json", (scratch / row.name).string());
    const auto result = tse::run_experiment(config, instances, recorder, row.needs_scorer ? &scorer : nullptr);
    std::cout << row.name << ": " << result.report.row.calls << " calls, failed=" << result.any_failed() << '\n';
  }
  recorder.write((data / "game24_fixtures.json").string());
  std::cout << recorder.fixtures().size() << " fixtures\n";
  fs::remove_all(scratch);
  return 0;
}
