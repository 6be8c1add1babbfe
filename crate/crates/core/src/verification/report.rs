use crate::error::Result;
use crate::recovery::Num;
use std::fmt::Write as _;

/// Errors below this count as round-off; such a study is flagged exact.
pub const EXACT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub h: f64,
    pub n_dof: usize,
    pub error: f64,
    /// Observed rate against the previous (coarser) row.
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerificationReport {
    pub title: String,
    pub rows: Vec<ConvergenceRow>,
    /// Every error is at round-off level; rates are then meaningless and omitted.
    pub exact: bool,
    /// Error on the finest level.
    pub e_l2: f64,
    pub oracle_residuals: Vec<(String, f64)>,
}

impl VerificationReport {
    pub fn final_rate(&self) -> Option<f64> {
        self.rows.last().and_then(|r| r.rate)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("h,n_dof,error,rate\n");
        for r in &self.rows {
            let rate = if self.exact {
                "exact".to_string()
            } else {
                r.rate.map_or(String::new(), |v| Num(v).to_string())
            };
            let _ = writeln!(s, "{},{},{},{}", Num(r.h), r.n_dof, Num(r.error), rate);
        }
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.title);
        let _ = writeln!(s, "{:>10} {:>8} {:>14} {:>8}", "h", "dofs", "error", "rate");
        for r in &self.rows {
            let rate = match (self.exact, r.rate) {
                (true, _) => "exact".to_string(),
                (false, Some(v)) => format!("{v:.3}"),
                (false, None) => "-".to_string(),
            };
            let _ = writeln!(s, "{:>10.5} {:>8} {:>14.6e} {:>8}", r.h, r.n_dof, r.error, rate);
        }
        for (name, v) in &self.oracle_residuals {
            let _ = writeln!(s, "  {name}: {v:.3e}");
        }
        s
    }
}

/// Solves at each mesh size (coarse to fine) and tabulates errors and
/// observed rates `log(e_i/e_{i+1}) / log(h_i/h_{i+1})`.
pub fn convergence_study(
    title: &str,
    sizes: &[f64],
    mut solve: impl FnMut(f64) -> Result<(usize, f64)>,
) -> Result<VerificationReport> {
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(sizes.len());
    for &h in sizes {
        let (n_dof, error) = solve(h)?;
        let rate = rows.last().and_then(|prev| {
            (prev.error > 0.0 && error > 0.0).then(|| (prev.error / error).ln() / (prev.h / h).ln())
        });
        log::info!("{title}: h = {h}, {n_dof} dofs, error {error:.3e}");
        rows.push(ConvergenceRow { h, n_dof, error, rate });
    }
    let exact = !rows.is_empty() && rows.iter().all(|r| r.error < EXACT_TOL);
    if exact {
        for r in &mut rows {
            r.rate = None;
        }
    }
    Ok(VerificationReport {
        title: title.to_string(),
        e_l2: rows.last().map_or(0.0, |r| r.error),
        rows,
        exact,
        oracle_residuals: Vec::new(),
    })
}

/// One named pass/fail check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: String,
    pub passed: bool,
}

impl Check {
    pub fn below(name: &str, value: f64, limit: f64) -> Self {
        Check {
            name: name.to_string(),
            value,
            limit: format!("< {limit:e}"),
            passed: value < limit,
        }
    }

    pub fn at_least(name: &str, value: f64, limit: f64) -> Self {
        Check {
            name: name.to_string(),
            value,
            limit: format!(">= {limit}"),
            passed: value >= limit,
        }
    }

    pub fn within(name: &str, value: f64, lo: f64, hi: f64) -> Self {
        Check {
            name: name.to_string(),
            value,
            limit: format!("in [{lo}, {hi}]"),
            passed: value >= lo && value <= hi,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SuiteReport {
    pub name: String,
    pub checks: Vec<Check>,
    pub studies: Vec<VerificationReport>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("suite {}\n", self.name);
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{} {}: {:.6e} ({})",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.value,
                c.limit
            );
        }
        for st in &self.studies {
            s.push('\n');
            s.push_str(&st.to_text());
        }
        let _ = writeln!(s, "\n{}", if self.passed() { "suite passed" } else { "suite FAILED" });
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("check,value,limit,passed\n");
        for c in &self.checks {
            let _ = writeln!(s, "{},{},{},{}", c.name, Num(c.value), c.limit, c.passed);
        }
        s
    }
}
