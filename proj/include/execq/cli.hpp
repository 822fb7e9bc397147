#pragma once

#include <filesystem>
#include <string>

#include "execq/config.hpp"

namespace execq::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNumerical = 2;
inline constexpr int kExitVerificationFail = 3;

struct CommonFlags {
    std::optional<std::uint64_t> seed;
    std::optional<long> n_paths;
    int threads = 1;
};

// quotes.csv: one row per (signal level, q, t) with the unconstrained and
// projected quotes and the projection-inactive flag.
int run_quote(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
              const CommonFlags& flags);

// surface.csv: projected quote on the full t x q grid.
int run_surface(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                const CommonFlags& flags);

// verify.csv + verify.txt: closed form vs Monte Carlo with perturbation
// dominance table. Returns kExitVerificationFail when a verdict fails.
int run_verify(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
               const CommonFlags& flags);

// growth.csv: one row per q with theoretical and fitted long-horizon rates.
int run_asymptotics(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                    const CommonFlags& flags);

// Emits the preconfigured experiment family for one figure id, one CSV per
// panel plus a manifest with content hashes.
int run_reproduce(const std::string& figure_id, const std::filesystem::path& out_dir,
                  const CommonFlags& flags);

// All known figure ids, for --list and error messages.
std::vector<std::string> reproduce_figure_ids();

// Maps a thrown error to the documented exit code and prints it to stderr.
int exit_code_for_current_exception();

}  // namespace execq::cli
