//! Desk-scale reruns of the published benchmark experiments.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use super::cme::cme_transient_1d;
use super::ensemble::{run_ensemble_at, EnsembleOptions, EnsembleResult};
use super::pdf::{dda, EmpiricalPdf};
use crate::network::{builtin_model, BuiltinModel, Model, ModelParams};
use crate::steppers::{Method, MethodConfig, StageRule};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TableId {
    /// Michaelis-Menten means and standard deviations at t = 5 and t = 50.
    MmStat,
    /// Nonlinear reversible reaction at equilibrium.
    Nlrev,
    /// Genetic positive feedback loop.
    Genloop,
    /// Schlogl density distance area against the master equation.
    SchloglDda,
}

impl TableId {
    pub const ALL: [TableId; 4] = [
        TableId::MmStat,
        TableId::Nlrev,
        TableId::Genloop,
        TableId::SchloglDda,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TableId::MmStat => "mm_stat",
            TableId::Nlrev => "nlrev",
            TableId::Genloop => "genloop",
            TableId::SchloglDda => "schlogl_dda",
        }
    }

    /// Sample count of the full-size experiment.
    pub fn full_samples(self) -> usize {
        match self {
            TableId::Genloop => 100_000,
            _ => 1_000_000,
        }
    }
}

impl fmt::Display for TableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TableId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TableId::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = TableId::ALL.iter().map(|t| t.name()).collect();
                Error::InvalidArgument(format!(
                    "unknown table `{s}`; tables are: {}",
                    names.join(", ")
                ))
            })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub method: String,
    pub species: String,
    pub mean: f64,
    pub std: f64,
    pub se: f64,
    pub n: usize,
    /// Wall-clock seconds of the method's whole ensemble.
    pub cpu_seconds: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub table: String,
    pub rows: Vec<ReportRow>,
    /// Named scalars: stage and iteration averages, DDA values.
    pub metrics: Vec<(String, f64)>,
    pub checks: Vec<Check>,
    /// Methods whose ensemble failed, with the error.
    pub failures: Vec<(String, String)>,
}

impl Report {
    fn new(table: TableId) -> Self {
        Report {
            table: table.name().into(),
            rows: Vec::new(),
            metrics: Vec::new(),
            checks: Vec::new(),
            failures: Vec::new(),
        }
    }

    pub fn find(&self, method: &str, species: &str) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.species == species)
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// `method,species,mean,std,se,n,cpu_seconds`. Timing is machine dependent,
    /// so it is left blank unless requested.
    pub fn to_csv(&self, include_timing: bool) -> String {
        let mut out = String::from("method,species,mean,std,se,n,cpu_seconds\n");
        for r in &self.rows {
            let _ = write!(
                out,
                "{},{},{},{},{},{},",
                r.method, r.species, r.mean, r.std, r.se, r.n
            );
            if include_timing {
                let _ = write!(out, "{:.3}", r.cpu_seconds);
            }
            out.push('\n');
        }
        out
    }

    pub fn metrics_csv(&self) -> String {
        let mut out = String::from("metric,value\n");
        for (name, v) in &self.metrics {
            let _ = writeln!(out, "{name},{v}");
        }
        out
    }

    /// Human-readable table with checks and failures.
    pub fn summary(&self) -> String {
        let mut out = format!("table {}\n", self.table);
        let _ = writeln!(
            out,
            "{:<12} {:<10} {:>12} {:>10} {:>9} {:>8}",
            "method", "species", "mean", "std", "se", "n"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<12} {:<10} {:>12.4} {:>10.4} {:>9.4} {:>8}",
                r.method, r.species, r.mean, r.std, r.se, r.n
            );
        }
        for (name, v) in &self.metrics {
            let _ = writeln!(out, "  {name} = {v:.4}");
        }
        for (m, e) in &self.failures {
            let _ = writeln!(out, "  {m} failed: {e}");
        }
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{} {}: {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            );
        }
        out
    }

    fn check(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail,
        });
    }

    fn stat(&self, method: Method, species: &str, std: bool) -> Option<f64> {
        self.find(method.label(), species)
            .map(|r| if std { r.std } else { r.mean })
    }

    /// `|value / reference - 1| <= rel` on one row statistic.
    fn check_relative(
        &mut self,
        method: Method,
        species: &str,
        std: bool,
        reference: f64,
        rel: f64,
    ) {
        let what = if std { "std" } else { "mean" };
        let name = format!("{} {what} {species}", method.label());
        match self.stat(method, species, std) {
            Some(v) => {
                let err = (v / reference - 1.0).abs();
                self.check(
                    &name,
                    err <= rel,
                    format!("{v:.4} vs {reference} (rel err {err:.4}, tol {rel})"),
                );
            }
            None => self.check(&name, false, "no result".into()),
        }
    }

    fn check_less(&mut self, name: &str, lhs: Option<f64>, rhs: Option<f64>) {
        match (lhs, rhs) {
            (Some(a), Some(b)) => self.check(name, a < b, format!("{a:.4} < {b:.4}")),
            _ => self.check(name, false, "no result".into()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TableOptions {
    /// Divides the full sample count.
    pub scale: usize,
    pub seed: u64,
    pub workers: usize,
}

fn species_names(model: &Model) -> Vec<String> {
    model
        .network
        .species()
        .iter()
        .map(|s| s.name.clone())
        .collect()
}

fn time_label(t: f64) -> String {
    format!("{t}")
}

/// Runs one method and appends its rows and counters.
fn run_method(
    report: &mut Report,
    model: &Model,
    cfg: MethodConfig,
    label: &str,
    times: &[f64],
    n: usize,
    opts: &TableOptions,
    histogram: bool,
) -> Option<EnsembleResult> {
    let eopts = EnsembleOptions {
        workers: opts.workers,
        histogram,
    };
    let res = match run_ensemble_at(
        &model.network,
        &cfg,
        &model.initial,
        times,
        n,
        opts.seed,
        &eopts,
    ) {
        Ok(r) => r,
        Err(e) => {
            report.failures.push((label.into(), e.to_string()));
            return None;
        }
    };
    let names = species_names(model);
    for (t, st) in times.iter().zip(&res.stats) {
        for (i, name) in names.iter().enumerate() {
            if model.network.is_buffered(i) {
                continue;
            }
            let species = if times.len() > 1 {
                format!("{name}@{}", time_label(*t))
            } else {
                name.clone()
            };
            report.rows.push(ReportRow {
                method: label.into(),
                species,
                mean: st.mean[i],
                std: st.variance[i].sqrt(),
                se: st.std_error_mean[i],
                n: st.n_samples,
                cpu_seconds: res.seconds,
            });
        }
    }
    let c = &res.counters;
    if cfg.method.is_stabilized() {
        report
            .metrics
            .push((format!("{label}.mean_stages"), c.mean_stages()));
        if c.power_calls > 0 {
            report.metrics.push((
                format!("{label}.power_iterations"),
                c.mean_power_iterations(),
            ));
        }
    }
    if cfg.method.is_implicit() {
        report.metrics.push((
            format!("{label}.newton_iterations"),
            c.mean_newton_iterations(),
        ));
    }
    if res.failed > 0 {
        report
            .metrics
            .push((format!("{label}.failed_paths"), res.failed as f64));
    }
    Some(res)
}

fn samples(id: TableId, scale: usize) -> Result<usize> {
    if scale == 0 {
        return Err(Error::InvalidArgument("scale must be at least 1".into()));
    }
    Ok((id.full_samples() / scale).max(2))
}

/// Published SSA reference values.
pub mod reference {
    pub const MM_S1_MEAN_T5: f64 = 1111.6;
    pub const MM_S1_STD_T5: f64 = 26.4;
    pub const MM_S4_MEAN_T50: f64 = 2999.86;
    pub const NLREV_MEAN: f64 = 399.4;
    pub const NLREV_STD: f64 = 19.8;
    pub const NLREV_SK_STD: f64 = 8.6;
    pub const NLREV_PIMP_STD: f64 = 18.6;
    pub const GENLOOP_S1_STD: f64 = 9.87;
    pub const GENLOOP_S2_MEAN: f64 = 213.0;
}

fn mm_stat(opts: &TableOptions) -> Result<Report> {
    let id = TableId::MmStat;
    let mut report = Report::new(id);
    let model = builtin_model(BuiltinModel::MichaelisMenten, &ModelParams::default())?;
    let n = samples(id, opts.scale)?;
    let tau = 0.25;
    let methods = [
        Method::PskTauRock,
        Method::SkTauRock,
        Method::ImplicitTau,
        Method::PimpTau,
        Method::TrapezoidalTau,
    ];
    for m in methods {
        run_method(
            &mut report,
            &model,
            MethodConfig::new(m, tau),
            m.label(),
            &[5.0, 50.0],
            n,
            opts,
            false,
        );
    }
    use reference::*;
    let psk = Method::PskTauRock;
    report.check_relative(psk, "S1@5", false, MM_S1_MEAN_T5, 0.02);
    report.check_relative(psk, "S1@5", true, MM_S1_STD_T5, 0.10);
    report.check_relative(psk, "S4@50", false, MM_S4_MEAN_T50, 0.001);
    Ok(report)
}

fn nlrev(opts: &TableOptions) -> Result<Report> {
    let id = TableId::Nlrev;
    let mut report = Report::new(id);
    let model = builtin_model(BuiltinModel::NonlinearReversible, &ModelParams::default())?;
    let n = samples(id, opts.scale)?;
    let (tau, t_end) = (0.01, 0.2);
    let methods = [
        Method::PskTauRock,
        Method::SkTauRock,
        Method::ImplicitTau,
        Method::PimpTau,
        Method::TrapezoidalTau,
    ];
    for m in methods {
        run_method(
            &mut report,
            &model,
            MethodConfig::new(m, tau),
            m.label(),
            &[t_end],
            n,
            opts,
            false,
        );
    }
    use reference::*;
    report.check_relative(Method::PskTauRock, "X1", false, NLREV_MEAN, 0.01);
    report.check_relative(Method::PskTauRock, "X1", true, NLREV_STD, 0.15);
    report.check_relative(Method::SkTauRock, "X1", true, NLREV_SK_STD, 0.25);
    let imp = report.stat(Method::ImplicitTau, "X1", true);
    report.check_less("Imp std X1 below 3", imp, Some(3.0));
    report.check_relative(Method::PimpTau, "X1", true, NLREV_PIMP_STD, 0.20);
    let sd = |m| report.stat(m, "X1", true);
    let (psk, pimp, trap) = (
        sd(Method::PskTauRock),
        sd(Method::PimpTau),
        sd(Method::TrapezoidalTau),
    );
    report.check_less("std order PImp < PSK", pimp, psk);
    report.check_less("std order Trap < PImp", trap, pimp);
    report.check_less("std order Imp < Trap", imp, trap);
    Ok(report)
}

fn genloop(opts: &TableOptions) -> Result<Report> {
    let id = TableId::Genloop;
    let mut report = Report::new(id);
    let model = builtin_model(BuiltinModel::GeneticLoop, &ModelParams::default())?;
    let n = samples(id, opts.scale)?;
    let (tau, t_end) = (0.05, 100.0);
    let methods = [
        Method::PskTauRock,
        Method::SkTauRock,
        Method::ImplicitTau,
        Method::PimpTau,
    ];
    for m in methods {
        run_method(
            &mut report,
            &model,
            MethodConfig::new(m, tau),
            m.label(),
            &[t_end],
            n,
            opts,
            false,
        );
    }
    use reference::*;
    report.check_relative(Method::PskTauRock, "S1", true, GENLOOP_S1_STD, 0.20);
    let sd = |m| report.stat(m, "S1", true);
    let (psk, sk, imp) = (
        sd(Method::PskTauRock),
        sd(Method::SkTauRock),
        sd(Method::ImplicitTau),
    );
    report.check_less("SK std S1 < PSK std S1", sk, psk);
    report.check_less("Imp std S1 < 0.6 PSK std S1", imp, psk.map(|v| 0.6 * v));
    for m in methods {
        report.check_relative(m, "S2", false, GENLOOP_S2_MEAN, 0.03);
    }
    Ok(report)
}

/// Largest state of the truncated master equation for the Schlogl reference.
pub const SCHLOGL_MAX_STATE: usize = 900;
/// Allowance for sampling noise in the DDA monotonicity check.
pub const DDA_NOISE: f64 = 0.02;

/// Reference pdf of the Schlogl model at `t`, from the master equation.
pub fn schlogl_reference(t: f64) -> Result<EmpiricalPdf> {
    let model = builtin_model(BuiltinModel::Schlogl, &ModelParams::default())?;
    let (pdf, tail) = cme_transient_1d(&model.network, &model.initial, t, SCHLOGL_MAX_STATE)?;
    if tail > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "master-equation truncation too tight (tail mass {tail:e})"
        )));
    }
    Ok(pdf)
}

fn schlogl_dda(opts: &TableOptions) -> Result<Report> {
    let id = TableId::SchloglDda;
    let mut report = Report::new(id);
    let model = builtin_model(BuiltinModel::Schlogl, &ModelParams::default())?;
    let n = samples(id, opts.scale)?;
    let (tau, t_end) = (0.5, 50.0);
    let reference = schlogl_reference(t_end)?;
    let mut ddas = Vec::new();
    for m in [Method::PskTauRock, Method::SkTauRock] {
        for s in 1..=5 {
            let label = format!("{}(s={s})", m.label());
            let cfg = MethodConfig::new(m, tau).with_stages(StageRule::Fixed(s));
            let Some(res) = run_method(&mut report, &model, cfg, &label, &[t_end], n, opts, true)
            else {
                ddas.push((m, s, None));
                continue;
            };
            let hist = &res.stats[0]
                .histogram
                .as_ref()
                .expect("histogram requested")[0];
            let d = dda(&EmpiricalPdf::from_counts(hist)?, &reference)?;
            report.metrics.push((format!("dda.{label}"), d));
            ddas.push((m, s, Some(d)));
        }
    }
    let get = |m: Method, s: usize| {
        ddas.iter()
            .find(|(mm, ss, _)| *mm == m && *ss == s)
            .and_then(|(_, _, d)| *d)
    };
    report.check_less(
        "DDA PSK(s=1) < DDA SK(s=1)",
        get(Method::PskTauRock, 1),
        get(Method::SkTauRock, 1),
    );
    for s in 1..5 {
        let name = format!("DDA SK(s={}) <= DDA SK(s={s}) + {DDA_NOISE}", s + 1);
        report.check_less(
            &name,
            get(Method::SkTauRock, s + 1),
            get(Method::SkTauRock, s).map(|v| v + DDA_NOISE + 1e-15),
        );
    }
    Ok(report)
}

/// Reruns a benchmark experiment with `full_samples / scale` samples.
pub fn reproduce_table(id: TableId, opts: &TableOptions) -> Result<Report> {
    match id {
        TableId::MmStat => mm_stat(opts),
        TableId::Nlrev => nlrev(opts),
        TableId::Genloop => genloop(opts),
        TableId::SchloglDda => schlogl_dda(opts),
    }
}
