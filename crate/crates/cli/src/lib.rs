//! Experiment runner for the `topowave` models: configuration, studies and
//! output files.

pub mod config;
pub mod output;
pub mod studies;

use config::{ConfigError, ExperimentConfig};
use output::{Manifest, OutputDir, Summary};
use std::path::{Path, PathBuf};

/// Overrides the directory against which `output_dir` is resolved.
pub const OUTPUT_ROOT_ENV: &str = "TOPOWAVE_OUTPUT_ROOT";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerical(topowave::Error),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 for usage and input errors, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 3,
            _ => 2,
        }
    }
}

impl From<topowave::Error> for CliError {
    fn from(e: topowave::Error) -> Self {
        use topowave::Error::*;
        match e {
            InvalidInput(_) | NonpositiveDepth { .. } | WrongSolverPath(_) | DomainTooSmall { .. } | GridMismatch(_) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Numerical(e),
        }
    }
}

/// Where a run writes: `root/output_dir` when a root is given, with an
/// absolute `output_dir` reduced to its last component.
pub fn resolve_output(output_dir: &Path, root: Option<&Path>) -> PathBuf {
    match root {
        None => output_dir.to_path_buf(),
        Some(root) if output_dir.is_absolute() => {
            root.join(output_dir.file_name().unwrap_or(output_dir.as_os_str()))
        }
        Some(root) => root.join(output_dir),
    }
}

pub struct RunOutcome {
    pub dir: PathBuf,
    pub summary: Summary,
    pub manifest: Manifest,
}

/// Validates, runs the study and writes every output file.
pub fn execute(cfg: &ExperimentConfig, root: Option<&Path>) -> Result<RunOutcome, CliError> {
    cfg.validate()?;
    let study = studies::run_study(cfg)?;
    let dir = resolve_output(&cfg.output_dir, root);
    let mut out = OutputDir::create(&dir)?;
    out.write("members.csv", study.members.to_csv().as_bytes())?;
    out.write("series.csv", study.series.to_csv().as_bytes())?;
    if !study.fits.rows.is_empty() {
        out.write("fits.csv", study.fits.to_csv().as_bytes())?;
    }
    for (i, snap) in study.snapshots.iter().enumerate() {
        out.write_snapshot(&format!("snapshot_{i}"), snap)?;
    }
    let manifest = out.finish(cfg, &study.summary)?;
    Ok(RunOutcome { dir, summary: study.summary, manifest })
}

/// Exact coefficients, their derived combinations and the variable-depth
/// coefficients at each sampled speed `c`.
pub fn coeffs_table(family: config::CoeffFamily, value: &str, c_samples: &[f64]) -> Result<String, CliError> {
    use std::fmt::Write as _;
    use topowave::coeffs::{coeffs_from_p, coeffs_from_q, derived_aed, parse_rational, rat_to, tilde_coeffs, TildeForm};
    use topowave::params::WaveSpeedField;
    use topowave::Field64;

    let v = parse_rational(value).map_err(|e| CliError::Usage(format!("--value: {e}")))?;
    let (cc, form) = match family {
        config::CoeffFamily::P => (coeffs_from_p(v), TildeForm::Velocity),
        config::CoeffFamily::Q => (coeffs_from_q(v), TildeForm::Elevation),
        config::CoeffFamily::Custom => return Err(CliError::Usage("--family must be p or q".into())),
    };
    if c_samples.iter().any(|c| !(*c > 0.0 && c.is_finite())) {
        return Err(CliError::Usage("--c samples must be positive".into()));
    }
    let d = derived_aed(&cc);
    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, "coefficient,exact,value");
    for (name, r) in [("A", cc.a), ("B", cc.b), ("E", cc.e), ("F", cc.f), ("a", d.a), ("e", d.e), ("d", d.d)] {
        let _ = writeln!(w, "{name},{r},{:.16e}", rat_to::<f64>(r));
    }
    let zeros = Field64::zeros(c_samples.len());
    let speed = WaveSpeedField {
        c: Field64::new(c_samples.to_vec()),
        c_x: zeros.clone(),
        c_xx: zeros.clone(),
        c_xxx: zeros.clone(),
        c0_floor: c_samples.iter().cloned().fold(f64::INFINITY, f64::min),
        beta_b: zeros,
    };
    let t = tilde_coeffs(&cc, &speed, form);
    let _ = writeln!(w, "\nc,A_tilde,E_tilde,F_tilde");
    for j in 0..c_samples.len() {
        let _ = writeln!(w, "{:.16e},{:.16e},{:.16e},{:.16e}", c_samples[j], t.a_tilde[j], t.e_tilde[j], t.f_tilde[j]);
    }
    Ok(out)
}
