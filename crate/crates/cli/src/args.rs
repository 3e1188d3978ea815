//! Command-line grammar, the optional TOML config file, and their merge.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use polytrope::reduction::Form;

#[derive(Debug, Parser)]
#[command(name = "polytrope", version, about = "Lane-Emden solver, reduction and symmetry toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Integrate from the centre and write (r, psi, dpsi).
    Solve,
    /// Report the first zero and the slope there.
    FirstZero,
    /// Integrate the reduced first-order equation.
    Reduce,
    /// Check a numerical solution against the reduced equation.
    Roundtrip,
    /// Sample the scale-invariant singular solution.
    Singular,
    /// Apply the scaling group to a numerical solution.
    Scale,
    /// Verify the scaling generator exactly.
    SymmetryVerify,
    /// Solve the determining equations over a polynomial ansatz.
    SymmetryScan,
    /// Search for point symmetries of the Abel form.
    ReducedScan,
    /// First zeros for a list of indices.
    Table,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::FirstZero => "first-zero",
            Command::Reduce => "reduce",
            Command::Roundtrip => "roundtrip",
            Command::Singular => "singular",
            Command::Scale => "scale",
            Command::SymmetryVerify => "symmetry-verify",
            Command::SymmetryScan => "symmetry-scan",
            Command::ReducedScan => "reduced-scan",
            Command::Table => "table",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FormArg {
    U,
    Y,
}

impl From<FormArg> for Form {
    fn from(f: FormArg) -> Self {
        match f {
            FormArg::U => Form::U,
            FormArg::Y => Form::Y,
        }
    }
}

#[derive(Debug, Default, Args)]
pub struct Opts {
    /// Polytropic index (decimal or p/q).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub n: Option<String>,
    /// Comma-separated indices for `table`.
    #[arg(long = "n-list", global = true, allow_hyphen_values = true)]
    pub n_list: Option<String>,
    #[arg(long = "r-max", global = true, allow_hyphen_values = true)]
    pub r_max: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub rtol: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub atol: Option<f64>,
    #[arg(long = "r-switch", global = true, allow_hyphen_values = true)]
    pub r_switch: Option<f64>,
    /// Attempted-step budget of the integrator.
    #[arg(long = "max-steps", global = true)]
    pub max_steps: Option<usize>,
    /// Ansatz degree for the scans.
    #[arg(long, global = true)]
    pub degree: Option<u32>,
    /// Group parameter for `scale`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub form: Option<FormArg>,
    /// Output grid spacing in r.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub dr: Option<f64>,
    /// Start of the reduced integration.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub t0: Option<f64>,
    /// End of the reduced integration.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub t1: Option<f64>,
    /// Initial value (u or y) of the reduced integration.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub value0: Option<f64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Print a JSON run report on stdout.
    #[arg(long, global = true)]
    pub json: bool,
    /// TOML file with defaults for any of the options above.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

/// A number or string in the config file; indices may be written either way.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Scalar {
    fn render(&self) -> String {
        match self {
            Scalar::Int(i) => i.to_string(),
            Scalar::Float(x) => x.to_string(),
            Scalar::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ScalarList {
    List(Vec<Scalar>),
    Text(String),
}

/// Contents of `--config`. Unknown keys are rejected.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub n: Option<Scalar>,
    pub n_list: Option<ScalarList>,
    pub r_max: Option<f64>,
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub r_switch: Option<f64>,
    pub max_steps: Option<usize>,
    pub degree: Option<u32>,
    pub lambda: Option<f64>,
    pub form: Option<FormArg>,
    pub dr: Option<f64>,
    pub t0: Option<f64>,
    pub t1: Option<f64>,
    pub value0: Option<f64>,
    pub out: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
    }
}

/// Options after merging flags over the config file; still unvalidated.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Merged {
    pub n: Option<String>,
    pub n_list: Option<Vec<String>>,
    pub r_max: Option<f64>,
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub r_switch: Option<f64>,
    pub max_steps: Option<usize>,
    pub degree: Option<u32>,
    pub lambda: Option<f64>,
    pub form: Option<FormArg>,
    pub dr: Option<f64>,
    pub t0: Option<f64>,
    pub t1: Option<f64>,
    pub value0: Option<f64>,
    pub out: Option<PathBuf>,
}

fn split_list(s: &str) -> Vec<String> {
    s.split(',').map(|p| p.trim().to_string()).collect()
}

pub fn merge(opts: &Opts, file: FileConfig) -> Merged {
    let file_list = file.n_list.map(|l| match l {
        ScalarList::List(v) => v.iter().map(Scalar::render).collect(),
        ScalarList::Text(s) => split_list(&s),
    });
    Merged {
        n: opts.n.clone().or(file.n.map(|s| s.render())),
        n_list: opts.n_list.as_deref().map(split_list).or(file_list),
        r_max: opts.r_max.or(file.r_max),
        rtol: opts.rtol.or(file.rtol),
        atol: opts.atol.or(file.atol),
        r_switch: opts.r_switch.or(file.r_switch),
        max_steps: opts.max_steps.or(file.max_steps),
        degree: opts.degree.or(file.degree),
        lambda: opts.lambda.or(file.lambda),
        form: opts.form.or(file.form),
        dr: opts.dr.or(file.dr),
        t0: opts.t0.or(file.t0),
        t1: opts.t1.or(file.t1),
        value0: opts.value0.or(file.value0),
        out: opts.out.clone().or(file.out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file: FileConfig = toml::from_str("n = 3\nrtol = 1e-8\nn_list = [0, 1.5, \"3/2\"]\nform = \"u\"").unwrap();
        let opts = Opts { rtol: Some(1e-6), ..Opts::default() };
        let m = merge(&opts, file);
        assert_eq!(m.n.as_deref(), Some("3"));
        assert_eq!(m.rtol, Some(1e-6));
        assert_eq!(m.n_list, Some(vec!["0".into(), "1.5".into(), "3/2".into()]));
        assert_eq!(m.form, Some(FormArg::U));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<FileConfig>("bogus = 1").is_err());
        let list: FileConfig = toml::from_str("n_list = \"0, 1\"").unwrap();
        assert_eq!(merge(&Opts::default(), list).n_list, Some(vec!["0".into(), "1".into()]));
    }
}
