use std::fmt::Write as _;

use serde_json::{json, Value};

use polytrope::algebra::{
    determining_scan, parse_rational, rat_to_f64, reduced_scan, symmetry_residual, Expr, Rat, ScanResult,
    MAX_DETERMINING_DEGREE, MAX_REDUCED_DEGREE, PSI, R,
};
use polytrope::ode::{first_zero_state, integrate, residual_check};
use polytrope::reduction::{integrate_reduced, roundtrip_report, Form, ReducedTermination};
use polytrope::singular::{scale_solution, ScaleSource, SingularSolution};
use polytrope::sweep::{map_parallel, zero_row};
use polytrope::{Error, Index, SolverConfig};

use crate::args::{Command, FormArg, Merged};
use crate::output::{pairs_csv, phase_csv, sig, table_csv, TableLine};
use crate::{CliError, Outcome};

type Result<T> = std::result::Result<T, CliError>;

const DEFAULT_DR: f64 = 0.01;
/// Upper bound on output grid points, so a typo in `--dr` cannot exhaust memory.
const MAX_GRID_POINTS: f64 = 1e7;
const DEFAULT_DETERMINING_DEGREE: u32 = 3;
const DEFAULT_REDUCED_DEGREE: u32 = 2;

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(CliError::Usage(msg.into()))
}

fn rational(s: &str) -> Result<Rat> {
    parse_rational(s).map_err(|_| CliError::Usage(format!("not a number: {s:?}")))
}

/// Decimal or `p/q` index for the numerical commands.
fn numeric(s: &str) -> Result<f64> {
    if s.contains('/') {
        Ok(rat_to_f64(&rational(s)?))
    } else {
        s.trim().parse().map_err(|_| CliError::Usage(format!("not a number: {s:?}")))
    }
}

fn require_n(m: &Merged) -> Result<&str> {
    match m.n.as_deref() {
        Some(n) => Ok(n),
        None => usage("--n is required"),
    }
}

fn index(m: &Merged) -> Result<Index> {
    Ok(Index::new(numeric(require_n(m)?)?)?)
}

fn exact_index(m: &Merged) -> Result<Rat> {
    let n = rational(require_n(m)?)?;
    if n == Rat::from_integer(1.into()) {
        return Err(Error::Domain("n = 1 is excluded: the reduction divides by n - 1".into()).into());
    }
    Ok(n)
}

fn solver(m: &Merged, sample_step: Option<f64>) -> Result<SolverConfig> {
    let d = SolverConfig::default();
    let cfg = SolverConfig {
        rtol: m.rtol.unwrap_or(d.rtol),
        atol: m.atol.unwrap_or(d.atol),
        r_switch: m.r_switch.unwrap_or(d.r_switch),
        r_max: m.r_max.unwrap_or(d.r_max),
        max_steps: m.max_steps.unwrap_or(d.max_steps),
        sample_step,
        continue_past_zero: false,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn dr(m: &Merged) -> Result<f64> {
    let h = m.dr.unwrap_or(DEFAULT_DR);
    if !(h > 0.0 && h.is_finite()) {
        return usage(format!("--dr must be positive, got {h}"));
    }
    let r_max = m.r_max.unwrap_or(SolverConfig::default().r_max);
    if r_max / h > MAX_GRID_POINTS {
        return usage(format!("--dr {h} would produce more than {MAX_GRID_POINTS:e} grid points"));
    }
    Ok(h)
}

fn degree(m: &Merged, default: u32, max: u32) -> Result<u32> {
    let d = m.degree.unwrap_or(default);
    if d > max {
        return usage(format!("--degree must be at most {max}, got {d}"));
    }
    Ok(d)
}

/// Writes `body` to `--out` when given; otherwise it becomes the text output.
fn emit(m: &Merged, body: String, summary: String, results: &mut Value) -> Result<String> {
    match &m.out {
        Some(path) => {
            std::fs::write(path, body).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
            results["out"] = json!(path.display().to_string());
            Ok(format!("{summary}wrote {}\n", path.display()))
        }
        None => {
            results["data"] = json!(body);
            Ok(body)
        }
    }
}

pub(crate) fn execute(cmd: Command, m: &Merged, config: &mut Value) -> Result<Outcome> {
    let mut record_solver = |cfg: &SolverConfig| config["solver"] = json!(cfg);
    match cmd {
        Command::Solve => {
            let n = index(m)?;
            let cfg = solver(m, Some(dr(m)?))?;
            record_solver(&cfg);
            let traj = integrate(n, &cfg)?;
            let mut results = json!({ "termination": traj.termination, "samples": traj.samples.len() });
            let summary = format!("termination: {}\nsamples: {}\n", traj.termination.tag(), traj.samples.len());
            let text = emit(m, phase_csv(&traj.samples), summary, &mut results)?;
            Ok(Outcome { text, results })
        }
        Command::FirstZero => {
            let n = index(m)?;
            let cfg = solver(m, None)?;
            record_solver(&cfg);
            let text;
            let results = match first_zero_state(n, &cfg)? {
                Some(s) => {
                    text = format!("xi1: {:.12}\nminus_dpsi_at_xi1: {:.12}\ntermination: first_zero\n", s.r, -s.dpsi);
                    json!({ "xi1": s.r, "minus_dpsi_at_xi1": -s.dpsi, "termination": "first_zero" })
                }
                None => {
                    text = format!("xi1: none (psi > 0 up to r_max = {})\ntermination: reached_r_max\n", cfg.r_max);
                    json!({ "xi1": null, "minus_dpsi_at_xi1": null, "termination": "reached_r_max" })
                }
            };
            Ok(Outcome { text, results })
        }
        Command::Reduce => {
            let n = index(m)?.require_not_one()?;
            let cfg = solver(m, None)?;
            record_solver(&cfg);
            let form: Form = m.form.unwrap_or(FormArg::Y).into();
            let (t0, t1, v0) = (m.t0.unwrap_or(0.0), m.t1.unwrap_or(1.0), m.value0.unwrap_or(1.0));
            let traj = integrate_reduced(n, (t0, v0), t1, form, &cfg)?;
            let tag = match traj.termination {
                ReducedTermination::Completed => "completed",
                ReducedTermination::BlowUp => "blow_up",
                ReducedTermination::StepBudgetExhausted => "step_budget_exhausted",
            };
            let mut results = json!({ "form": form, "termination": tag, "samples": traj.samples.len() });
            let summary = format!("termination: {tag}\nsamples: {}\n", traj.samples.len());
            let text = emit(m, pairs_csv(&traj.samples), summary, &mut results)?;
            Ok(Outcome { text, results })
        }
        Command::Roundtrip => {
            let n = index(m)?.require_not_one()?;
            let cfg = solver(m, m.dr.map(|_| dr(m)).transpose()?)?;
            record_solver(&cfg);
            let rep = roundtrip_report(n, &cfg)?;
            let text = format!(
                "residual: {:e}\nwindow: [{}, {}]\nsamples: {}\n",
                rep.residual,
                sig(rep.r_lo),
                sig(rep.r_hi),
                rep.samples_used
            );
            Ok(Outcome { text, results: json!(rep) })
        }
        Command::Singular => {
            let n = index(m)?;
            let sol = SingularSolution::new(n)?;
            let h = dr(m)?;
            let r_max = m.r_max.unwrap_or(SolverConfig::default().r_max);
            if !(r_max >= h && r_max.is_finite()) {
                return usage(format!("--r-max ({r_max}) must be at least --dr ({h})"));
            }
            let count = (r_max / h + 1e-9).floor() as usize;
            let samples = (1..=count).map(|i| sol.state(i as f64 * h)).collect::<polytrope::Result<Vec<_>>>()?;
            let mut results =
                json!({ "amplitude": sol.amplitude(), "exponent": -2.0 / (n.value() - 1.0), "samples": samples.len() });
            let summary = format!("amplitude: {}\nsamples: {}\n", sol.amplitude(), samples.len());
            let text = emit(m, phase_csv(&samples), summary, &mut results)?;
            Ok(Outcome { text, results })
        }
        Command::Scale => {
            let n = index(m)?.require_not_one()?;
            let Some(lam) = m.lambda else { return usage("--lambda is required") };
            let cfg = solver(m, Some(dr(m)?))?;
            record_solver(&cfg);
            let source = integrate(n, &cfg)?;
            let image = scale_solution(n, lam, ScaleSource::Trajectory(&source))?;
            let residual = |s: &[_]| if s.len() >= 3 { residual_check(n, s).ok() } else { None };
            let (src_res, img_res) = (residual(&source.samples), residual(&image.samples));
            let mut results = json!({
                "lambda": lam,
                "termination": image.termination,
                "source_residual": src_res,
                "image_residual": img_res,
                "samples": image.samples.len(),
            });
            let show = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_else(|| "n/a".into());
            let summary = format!(
                "termination: {}\nsource residual: {}\nimage residual: {}\n",
                image.termination.tag(),
                show(src_res),
                show(img_res)
            );
            let text = emit(m, phase_csv(&image.samples), summary, &mut results)?;
            Ok(Outcome { text, results })
        }
        Command::SymmetryVerify => {
            let n = exact_index(m)?;
            let c = -Rat::from_integer(2.into()) / (&n - Rat::from_integer(1.into()));
            let xi = Expr::var(R);
            let eta = Expr::monomial(c, &[(PSI, Rat::from_integer(1.into()))]);
            let res = symmetry_residual(&n, &xi, &eta)?;
            let text = if res.is_zero() {
                format!("xi = {xi}\neta = {eta}\nresidual: 0 (exact)\n")
            } else {
                format!("xi = {xi}\neta = {eta}\nresidual: {res}\n")
            };
            let results = json!({ "xi": xi.to_string(), "eta": eta.to_string(), "residual": res.to_string(), "exact_zero": res.is_zero() });
            Ok(Outcome { text, results })
        }
        Command::SymmetryScan => {
            let n = exact_index(m)?;
            let d = degree(m, DEFAULT_DETERMINING_DEGREE, MAX_DETERMINING_DEGREE)?;
            scan_outcome(m, determining_scan(&n, d)?)
        }
        Command::ReducedScan => {
            let n = exact_index(m)?;
            let d = degree(m, DEFAULT_REDUCED_DEGREE, MAX_REDUCED_DEGREE)?;
            scan_outcome(m, reduced_scan(&n, d)?)
        }
        Command::Table => {
            let Some(list) = m.n_list.as_ref().filter(|l| !l.is_empty()) else {
                return usage("--n-list is required");
            };
            let ns: Vec<(String, f64)> = list.iter().map(|s| Ok((s.clone(), numeric(s)?))).collect::<Result<_>>()?;
            let cfg = solver(m, None)?;
            record_solver(&cfg);
            let lines = map_parallel(&ns, |(label, v)| match Index::new(*v).and_then(|n| zero_row(n, &cfg)) {
                Ok(row) => TableLine::Row(row),
                Err(e) => TableLine::Failed {
                    n: label.clone(),
                    tag: match e {
                        Error::Convergence(_) => "step_budget_exhausted",
                        _ => "domain_error",
                    },
                },
            });
            let rows: Vec<Value> = lines
                .iter()
                .map(|l| match l {
                    TableLine::Row(r) => json!({ "n": r.n, "xi1": r.xi1, "minus_dpsi_at_xi1": r.minus_dpsi, "termination": r.termination() }),
                    TableLine::Failed { n, tag } => json!({ "n": n, "xi1": null, "minus_dpsi_at_xi1": null, "termination": tag }),
                })
                .collect();
            let mut results = json!({ "rows": rows });
            let text = emit(m, table_csv(&lines), String::new(), &mut results)?;
            Ok(Outcome { text, results })
        }
    }
}

fn scan_outcome(m: &Merged, scan: ScanResult) -> Result<Outcome> {
    let body = serde_json::to_string_pretty(&scan).expect("scan serializes") + "\n";
    let mut results = json!(scan);
    let mut summary = format!("kernel_dim: {}\n", scan.kernel_dim);
    if !scan.collisions.is_empty() {
        let _ = writeln!(summary, "collisions: {}", scan.collisions.join(", "));
    }
    let text = match &m.out {
        Some(_) => emit(m, body, summary, &mut results)?,
        None => body,
    };
    Ok(Outcome { text, results })
}
