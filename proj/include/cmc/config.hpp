#pragma once

#include "cmc/diagnostics.hpp"
#include "cmc/newton.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace cmc {

enum class SeedChoice { Auto, Radial, Quadratic, File };

/// Everything a solve run needs. Read from a flat "key = value" file; '#'
/// starts a comment. Keys:
///
///   model                      minkowski | euclidean
///   omega.kind                 ball | ellipse        (same for omega_tilde.*)
///   omega.center               x, y
///   omega.radius               r                      (ball)
///   omega.semi_axes            a, b                   (ellipse)
///   grid.n_rho, grid.n_phi
///   solve.tol_residual, solve.max_newton, solve.armijo_factor, solve.armijo_c,
///   solve.eps_convexity, solve.eps_space, solve.min_step
///   homotopy.enabled           true | false
///   homotopy.steps, homotopy.t_min, homotopy.max_bisections,
///   homotopy.max_step_newton
///   homotopy.schedule          t1, t2, ..., 1        (optional)
///   seed.strategy              auto | radial | quadratic | file
///   seed.file                  stem of a stored field (seed.strategy = file)
///   output.dir
///   diagnostics.mass_balance, diagnostics.flux_identity,
///   diagnostics.obliqueness_min, diagnostics.residual,
///   diagnostics.dual_consistency, diagnostics.slack_factor
///   dual.enabled               true | false
///   dual.refine                dual grid resolution factor
///
/// Every key is optional except the two domains; unknown or repeated keys are
/// errors.
struct RunConfig {
    ModelKind model = ModelKind::Minkowski;
    ConvexDomain omega = ConvexDomain::ball(Vec2::Zero(), 1.0);
    ConvexDomain omega_tilde = ConvexDomain::ball(Vec2::Zero(), 0.5);
    int n_rho = 32;
    int n_phi = 64;
    SolveOptions solve;
    bool homotopy = true;
    int steps = 12;
    double t_min = 0.0;
    std::vector<double> schedule;
    int max_bisections = 4;
    int max_step_newton = 15;
    SeedChoice seed = SeedChoice::Auto;
    std::string seed_file;
    std::filesystem::path output_dir = "cmc_out";
    DiagnosticsTolerances tolerances;
    bool dual = false;
    int dual_refine = 2;

    HomotopyOptions homotopy_options() const;
    /// Options of the exchanged problem: resolution times dual_refine.
    HomotopyOptions dual_options() const;
};

/// Throws ConfigError with the offending line or key.
RunConfig parse_config(std::istream& is);
RunConfig load_config(const std::filesystem::path& path);

/// Range checks plus the light-cone hypothesis for Minkowski targets.
/// Throws ConfigError.
void validate(const RunConfig& cfg);

/// Writes every key with 17 significant digits; parse_config reads it back
/// to an identical configuration.
std::string to_config_string(const RunConfig& cfg);

bool operator==(const RunConfig& a, const RunConfig& b);

} // namespace cmc
