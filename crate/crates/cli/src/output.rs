//! CSV rendering.

use std::fmt::Write;

use polytrope::sweep::ZeroRow;
use polytrope::PhaseState;

pub const SIGNIFICANT_DIGITS: usize = 9;

/// `x` rounded to nine significant digits, printed in the shortest form that
/// reads back as the rounded value.
pub fn sig(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().expect("valid float");
    let a = rounded.abs();
    if rounded == 0.0 {
        "0".into()
    } else if (1e-5..1e15).contains(&a) {
        rounded.to_string()
    } else {
        format!("{rounded:e}")
    }
}

pub fn phase_csv(samples: &[PhaseState]) -> String {
    let mut s = String::from("r,psi,dpsi\n");
    for p in samples {
        let _ = writeln!(s, "{},{},{}", sig(p.r), sig(p.psi), sig(p.dpsi));
    }
    s
}

pub fn pairs_csv(samples: &[(f64, f64)]) -> String {
    let mut s = String::from("t,value\n");
    for (t, v) in samples {
        let _ = writeln!(s, "{},{}", sig(*t), sig(*v));
    }
    s
}

pub const TABLE_HEADER: &str = "n,xi1,minus_dpsi_at_xi1,termination";

/// A table row, or the failure for that index.
pub enum TableLine {
    Row(ZeroRow),
    Failed { n: String, tag: &'static str },
}

pub fn table_csv(lines: &[TableLine]) -> String {
    let mut s = format!("{TABLE_HEADER}\n");
    for line in lines {
        match line {
            TableLine::Row(row) => {
                let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
                let _ = writeln!(s, "{},{},{},{}", row.n, opt(row.xi1), opt(row.minus_dpsi), row.termination());
            }
            TableLine::Failed { n, tag } => {
                let _ = writeln!(s, "{n},,,{tag}");
            }
        }
    }
    s
}
