//! Single-shot divergence evaluation from matrix files.

use std::path::Path;

use renyi_dpi_core::divergences::{alpha_z, AlphaZParams};
use renyi_dpi_core::states::{matrix_from_json_str, DensityOperator, PositiveOperator};

use crate::fmt::sig12;
use crate::{CliError, CliResult};

/// Reads `rho` and `sigma` from their JSON schema files and returns the
/// alpha-z divergence formatted to 12 significant digits, or `inf` when
/// the support condition fails (a singular `sigma` file opts into the
/// support-restricted permissive mode).
pub fn divergence_from_files(
    rho_path: &Path,
    sigma_path: &Path,
    alpha: f64,
    z: f64,
) -> CliResult<String> {
    let rho_text = std::fs::read_to_string(rho_path)?;
    let sigma_text = std::fs::read_to_string(sigma_path)?;
    let rho_mat = matrix_from_json_str::<f64>(&rho_text)?;
    let sigma_mat = matrix_from_json_str::<f64>(&sigma_text)?;
    let rho = DensityOperator::from_matrix(rho_mat)
        .map_err(|e| CliError::Parse(format!("{}: {e}", rho_path.display())))?;
    let sigma = PositiveOperator::from_matrix(sigma_mat)
        .map_err(|e| CliError::Parse(format!("{}: {e}", sigma_path.display())))?;
    let params = AlphaZParams::new(alpha, z)?;
    let value = alpha_z(&rho, &sigma, &params)?;
    Ok(sig12(value.value()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use renyi_dpi_core::linalg::ComplexMatrix;
    use renyi_dpi_core::states::matrix_to_json_string;

    fn write_diag(dir: &Path, name: &str, values: &[f64]) -> std::path::PathBuf {
        let path = dir.join(name);
        let m = ComplexMatrix::<f64>::diag(values);
        std::fs::write(&path, matrix_to_json_string(&m)).unwrap();
        path
    }

    #[test]
    fn commuting_example_and_support_violation() {
        let dir = std::env::temp_dir().join(format!("divergence_cmd_{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let rho = write_diag(&dir, "rho.json", &[0.75, 0.25]);
        let sigma = write_diag(&dir, "sigma.json", &[0.5, 0.5]);
        let line = divergence_from_files(&rho, &sigma, 2.0, 1.5).unwrap();
        assert_eq!(line, "0.223143551314");

        let same = divergence_from_files(&rho, &rho, 2.0, 1.5).unwrap();
        assert_eq!(same, "0.000000000000");

        // Support of rho exceeds the singular sigma: permissive mode, inf.
        let sing = write_diag(&dir, "sing.json", &[1.0, 0.0]);
        let line = divergence_from_files(&rho, &sing, 1.5, 1.2).unwrap();
        assert_eq!(line, "inf");

        // Malformed state file.
        let bad = write_diag(&dir, "bad.json", &[0.75, 0.35]);
        assert!(matches!(
            divergence_from_files(&bad, &sigma, 2.0, 1.5),
            Err(CliError::Parse(_))
        ));
        // Invalid parameters.
        assert!(matches!(
            divergence_from_files(&rho, &sigma, 1.0, 1.5),
            Err(CliError::InvalidParams(_))
        ));
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
