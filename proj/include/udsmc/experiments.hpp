#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace udsmc {

// Runs the experiment described by the JSON config (field "experiment"
// selects variance | converge | profile) and writes its output files plus a
// run.json sidecar into out_dir, which is created when absent. CSV bytes are
// a pure function of the effective config (including the seed); wall-clock
// readings go only into the sidecar. threads parallelizes repetitions
// (profile parallelizes candidate generation instead); results do not depend
// on the thread count. seed_override replaces the config seed when set.
//
// Errors are thrown: parse/invalid/bad-* codes mean a configuration problem;
// all_particles_dead means every run died and there is nothing to report.
void run_experiment_config(const std::string& config_text,
                           const std::string& out_dir, int threads,
                           std::optional<uint64_t> seed_override,
                           const std::string& base_dir = "");

// Writes a synthetic inputs bundle (potential.tbl, dihedrals.tbl,
// closure.tbl, host.pdb, gen.json) into out_dir. config_text tweaks the
// generator defaults; empty means all defaults.
void generate_tables_config(const std::string& config_text, uint64_t seed,
                            const std::string& out_dir);

}  // namespace udsmc
