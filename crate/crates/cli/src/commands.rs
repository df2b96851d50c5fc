use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use tauleap_core::analysis::{
    self, reproduce_table, run_ensemble_at, EnsembleOptions, TableOptions,
};
use tauleap_core::steppers::Simulation;
use tauleap_core::{
    builtin_model, load_model, BuiltinModel, EmpiricalPdf, Error, Method, MethodConfig, Model,
    ModelParams, RngStream, StabilityCurve, StageRule,
};

use crate::{DdaArgs, McArgs, MethodArgs, ModelArgs, SimulateArgs, StabilityArgs, TableArgs};

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

/// A builtin name, otherwise a model file.
fn load(args: &ModelArgs) -> Result<Model> {
    if let Ok(b) = args.model.parse::<BuiltinModel>() {
        let params = ModelParams {
            rates: args.rates.clone(),
            initial: args.initial.clone(),
            total: args.total,
        };
        return Ok(builtin_model(b, &params)?);
    }
    let path = Path::new(&args.model);
    if !path.is_file() {
        return Err(Error::UnknownModel {
            name: args.model.clone(),
            available: BuiltinModel::names(),
        }
        .into());
    }
    if args.rates.is_some() || args.total.is_some() {
        bail!("--rates and --total apply to built-in models only; edit the model file instead");
    }
    let mut model = load_model(path)?;
    if let Some(x0) = &args.initial {
        model.network.check_state(x0)?;
        model.initial = x0.clone();
    }
    Ok(model)
}

struct Run {
    cfg: MethodConfig,
    t_end: f64,
}

fn configure(model: &Model, args: &MethodArgs) -> Result<Run> {
    let t_end = match args.t_end.or(model.default_t_end) {
        Some(t) => t,
        None => bail!(
            "model `{}` has no default final time; pass --t-end",
            model.name
        ),
    };
    if !(t_end.is_finite() && t_end >= 0.0) {
        bail!("--t-end must be finite and nonnegative, got {t_end}");
    }
    let tau = match (args.tau.or(model.default_tau), args.method) {
        (Some(t), _) => t,
        // the SSA never reads it
        (None, Method::Ssa) => 1.0,
        (None, _) => bail!(
            "model `{}` has no default step size; pass --tau",
            model.name
        ),
    };
    let mut cfg = MethodConfig::new(args.method, tau)
        .with_eps(args.eps)
        .with_rho_safety(args.rho_safety);
    if let Some(s) = args.stages {
        if !args.method.is_stabilized() {
            bail!("--stages applies to the stabilized methods only");
        }
        cfg = cfg.with_stages(StageRule::Fixed(s));
    }
    cfg.validate()?;
    Ok(Run { cfg, t_end })
}

fn fmt_row(t: f64, x: &[f64]) -> String {
    let mut line = t.to_string();
    for v in x {
        line.push(',');
        line.push_str(&v.to_string());
    }
    line.push('\n');
    line
}

pub fn simulate(args: SimulateArgs) -> Result<bool> {
    let model = load(&args.model)?;
    let run = configure(&model, &args.method)?;
    let names: Vec<&str> = model
        .network
        .species()
        .iter()
        .map(|s| s.name.as_str())
        .collect();
    let mut out = format!("t,{}\n", names.join(","));
    if run.t_end > 0.0 {
        let stride = match args.stride {
            Some(h) => h,
            None if run.cfg.method == Method::Ssa => run.t_end / 1000.0,
            None => run.cfg.tau,
        };
        if !(stride.is_finite() && stride > 0.0) {
            bail!("--stride must be positive, got {stride}");
        }
        let mut sim = Simulation::new(
            &model.network,
            run.cfg.clone(),
            &model.initial,
            RngStream::new(args.seed, 0),
        )?;
        out.push_str(&fmt_row(0.0, &model.initial));
        let n = (run.t_end / stride * (1.0 + 1e-12)).floor() as u64;
        let mut times: Vec<f64> = (1..=n).map(|k| k as f64 * stride).collect();
        if times
            .last()
            .map_or(true, |&t| run.t_end - t > 1e-9 * stride)
        {
            times.push(run.t_end);
        }
        for t in times {
            let t = t.min(run.t_end);
            sim.advance_to(t)?;
            out.push_str(&fmt_row(t, &sim.observe()?));
        }
    }
    write_output(args.output.as_deref(), &out)?;
    Ok(true)
}

pub fn mc(args: McArgs) -> Result<bool> {
    let model = load(&args.model)?;
    let run = configure(&model, &args.method)?;
    if run.t_end <= 0.0 {
        bail!("mc needs a positive final time");
    }
    let pdf_index = match &args.pdf_species {
        Some(name) => Some(
            model
                .network
                .species_index(name)
                .with_context(|| format!("unknown species `{name}`"))?,
        ),
        None => None,
    };
    let opts = EnsembleOptions {
        workers: args.workers,
        histogram: pdf_index.is_some(),
    };
    let result = run_ensemble_at(
        &model.network,
        &run.cfg,
        &model.initial,
        &[run.t_end],
        args.samples,
        args.seed,
        &opts,
    )?;
    let stats = &result.stats[0];
    let label = run.cfg.method.label();

    let mut csv = String::from("method,species,mean,std,se,n,cpu_seconds\n");
    let mut table = format!(
        "{:<8} {:<10} {:>14} {:>12} {:>10} {:>9}\n",
        "method", "species", "mean", "std", "se", "n"
    );
    for (i, sp) in model.network.species().iter().enumerate() {
        if model.network.is_buffered(i) {
            continue;
        }
        let (mean, std, se) = (
            stats.mean[i],
            stats.variance[i].sqrt(),
            stats.std_error_mean[i],
        );
        csv.push_str(&format!(
            "{label},{},{mean},{std},{se},{},",
            sp.name, stats.n_samples
        ));
        if args.timing {
            csv.push_str(&format!("{:.3}", result.seconds));
        }
        csv.push('\n');
        table.push_str(&format!(
            "{label:<8} {:<10} {mean:>14.4} {std:>12.4} {se:>10.4} {:>9}\n",
            sp.name, stats.n_samples
        ));
    }
    if result.failed > 0 {
        table.push_str(&format!(
            "{} of {} trajectories failed\n",
            result.failed, args.samples
        ));
    }

    if let (Some(i), Some(path)) = (pdf_index, &args.pdf_output) {
        let hist = stats
            .histogram
            .as_ref()
            .context("histogram was not collected")?;
        let pdf = EmpiricalPdf::from_counts(&hist[i])?;
        let mut text = String::from("state,probability\n");
        for (x, p) in pdf.support.iter().zip(&pdf.probabilities) {
            text.push_str(&format!("{x},{p}\n"));
        }
        write_output(Some(path), &text)?;
    }

    match &args.output {
        Some(p) => {
            write_output(Some(p), &csv)?;
            print!("{table}");
        }
        None => write_output(None, &csv)?,
    }
    Ok(true)
}

pub fn stability(args: StabilityArgs) -> Result<bool> {
    let curve = StabilityCurve::sample(args.s, args.eps, args.points)?;
    write_output(args.output.as_deref(), &curve.to_csv())?;
    Ok(true)
}

pub fn table(args: TableArgs) -> Result<bool> {
    let opts = TableOptions {
        scale: args.scale,
        seed: args.seed,
        workers: args.workers,
    };
    let report = reproduce_table(args.table, &opts)?;
    print!("{}", report.summary());
    if let Some(p) = &args.output {
        write_output(Some(p), &report.to_csv(args.timing))?;
    }
    if let Some(p) = &args.metrics {
        write_output(Some(p), &report.metrics_csv())?;
    }
    Ok(!args.check || report.passed())
}

/// A `state,probability` file, or samples in one column.
fn read_distribution(path: &Path, column: Option<&str>) -> Result<EmpiricalPdf> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut records = reader.records();
    let first = match records.next() {
        Some(r) => r?,
        None => bail!("{} is empty", path.display()),
    };
    let header: Vec<String> = first.iter().map(|f| f.trim().to_string()).collect();
    let has_header = header.iter().any(|f| f.parse::<f64>().is_err());
    let ctx = |line: usize| format!("{}: line {line}", path.display());

    if has_header && header.len() >= 2 && header[0] == "state" && header[1] == "probability" {
        let (mut support, mut probabilities) = (Vec::new(), Vec::new());
        for (k, rec) in records.enumerate() {
            let rec = rec?;
            let state: i64 = rec
                .get(0)
                .unwrap_or("")
                .trim()
                .parse()
                .with_context(|| ctx(k + 2))?;
            let p: f64 = rec
                .get(1)
                .unwrap_or("")
                .trim()
                .parse()
                .with_context(|| ctx(k + 2))?;
            support.push(state);
            probabilities.push(p);
        }
        return Ok(EmpiricalPdf::new(support, probabilities)?);
    }

    let col = match column {
        Some(name) if has_header => header
            .iter()
            .position(|h| h == name)
            .with_context(|| format!("{} has no column `{name}`", path.display()))?,
        Some(name) => bail!(
            "{} has no header, so column `{name}` cannot be found",
            path.display()
        ),
        None => 0,
    };
    let mut samples = Vec::new();
    let parse = |rec: &csv::StringRecord, line: usize| -> Result<f64> {
        let field = rec
            .get(col)
            .with_context(|| format!("{}: missing column", ctx(line)))?;
        field.trim().parse::<f64>().with_context(|| ctx(line))
    };
    if !has_header {
        samples.push(parse(&first, 1)?);
    }
    for (k, rec) in records.enumerate() {
        samples.push(parse(&rec?, k + 2)?);
    }
    if samples.is_empty() {
        bail!("{} contains no samples", path.display());
    }
    Ok(EmpiricalPdf::from_samples(&samples)?)
}

pub fn dda(args: DdaArgs) -> Result<bool> {
    let p = read_distribution(&args.first, args.column.as_deref())?;
    let q = read_distribution(&args.second, args.column.as_deref())?;
    println!("{}", analysis::dda(&p, &q)?);
    Ok(true)
}
