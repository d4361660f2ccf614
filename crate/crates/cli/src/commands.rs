use std::fs;

use kappa_ceiling::dataset::parse_delimiter;
use kappa_ceiling::report::ccc_points_csv;
use kappa_ceiling::{
    ceiling_report, evaluate_predictions, load_csv, run_ccc_check, run_noise_sweep, DatasetSpec,
    Error, ReportDocument, ScoreScale, SimulationConfig,
};

use crate::args::{DataArgs, Format, OutputArgs, SimArgs};

/// Why a command failed; decides the exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags or configuration (exit 2).
    Usage(String),
    /// Data could not be loaded or analyzed (exit 1).
    Data(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Data(_) => 1,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn data(e: Error) -> Failure {
    match e {
        Error::Config(_) => Failure::Usage(e.to_string()),
        other => Failure::Data(other.to_string()),
    }
}

pub fn dataset_spec(args: &DataArgs) -> Result<DatasetSpec, Failure> {
    let mut spec = match &args.config {
        Some(path) => DatasetSpec::from_config_file(path).map_err(|e| match e {
            Error::Io { .. } => Failure::Data(e.to_string()),
            other => usage(other),
        })?,
        None => {
            let missing =
                |flag: &str| usage(format!("--{flag} is required unless --config is given"));
            DatasetSpec::new(
                args.data.clone().ok_or_else(|| missing("data"))?,
                args.r1.as_deref().ok_or_else(|| missing("r1"))?,
                args.r2.as_deref().ok_or_else(|| missing("r2"))?,
                ScoreScale::new(
                    args.scale_min.ok_or_else(|| missing("scale-min"))?,
                    args.scale_max.ok_or_else(|| missing("scale-max"))?,
                )
                .map_err(usage)?,
            )
        }
    };
    if let Some(p) = &args.data {
        spec.path = p.clone();
    }
    if let Some(c) = &args.r1 {
        spec.column_r1 = c.clone();
    }
    if let Some(c) = &args.r2 {
        spec.column_r2 = c.clone();
    }
    if let Some(c) = &args.target_column {
        spec.column_target = Some(c.clone());
    }
    if args.scale_min.is_some() || args.scale_max.is_some() {
        spec.scale = ScoreScale::new(
            args.scale_min.unwrap_or(spec.scale.min_score),
            args.scale_max.unwrap_or(spec.scale.max_score),
        )
        .map_err(usage)?;
    }
    if let Some(r) = &args.target_rule {
        spec.target_rule = r.parse().map_err(usage)?;
    }
    if let Some(m) = &args.missing {
        spec.missing_policy = m.parse().map_err(usage)?;
    }
    if let Some(d) = &args.delimiter {
        spec.delimiter = parse_delimiter(d).map_err(usage)?;
    }
    spec.validate().map_err(usage)?;
    Ok(spec)
}

pub fn simulation_config(args: &SimArgs) -> Result<SimulationConfig, Failure> {
    let mut c = SimulationConfig::default();
    if let Some(v) = args.seed {
        c.seed = v;
    }
    if let Some(v) = args.trials {
        c.trials = v;
    }
    if let Some(v) = args.n {
        c.n = v;
    }
    if let Some(v) = &args.noise_levels {
        c.noise_levels = v.clone();
    }
    if args.scale_min.is_some() || args.scale_max.is_some() {
        c.scale = ScoreScale::new(
            args.scale_min.unwrap_or(c.scale.min_score),
            args.scale_max.unwrap_or(c.scale.max_score),
        )
        .map_err(usage)?;
    }
    if let Some(v) = args.true_mean {
        c.true_mean = v;
    }
    if let Some(v) = args.true_sd {
        c.true_sd = v;
    }
    if let Some(v) = args.noise_lower {
        c.ccc_noise_lower = v;
    }
    if let Some(v) = args.noise_upper {
        c.ccc_noise_upper = v;
    }
    c.simulate_human_like = args.human_like;
    c.validate().map_err(usage)?;
    Ok(c)
}

fn to_value<T: serde::Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("config is serializable")
}

pub fn analyze(command: String, args: &DataArgs) -> Result<ReportDocument, Failure> {
    let spec = dataset_spec(args)?;
    let ds = load_csv(&spec).map_err(data)?;
    let rep = ceiling_report(&ds.raters).map_err(data)?;
    Ok(ReportDocument::new(command, to_value(&spec))
        .with_dataset(ds)
        .with_ceilings(rep))
}

pub fn evaluate(
    command: String,
    args: &DataArgs,
    prediction: Option<&str>,
    no_round: bool,
) -> Result<ReportDocument, Failure> {
    let mut spec = dataset_spec(args)?;
    if let Some(p) = prediction {
        spec.column_prediction = Some(p.to_string());
    }
    if spec.column_prediction.is_none() {
        return Err(usage(
            "evaluate needs --prediction or column_prediction in the config",
        ));
    }
    spec.validate().map_err(usage)?;
    let ds = load_csv(&spec).map_err(data)?;
    let ev = evaluate_predictions(&ds, !no_round).map_err(data)?;
    let mut config = to_value(&spec);
    config["round_predictions"] = serde_json::Value::Bool(!no_round);
    Ok(ReportDocument::new(command, config)
        .with_dataset(ds)
        .with_evaluation(ev))
}

pub fn table1(command: String, args: &SimArgs) -> Result<ReportDocument, Failure> {
    let config = simulation_config(args)?;
    let agg = run_noise_sweep(&config).map_err(data)?;
    Ok(ReportDocument::new(command, to_value(&config)).with_aggregate(agg))
}

pub fn ccc_check(
    command: String,
    args: &SimArgs,
    points_out: Option<&std::path::Path>,
) -> Result<ReportDocument, Failure> {
    let config = simulation_config(args)?;
    let check = run_ccc_check(&config).map_err(data)?;
    if let Some(path) = points_out {
        fs::write(path, ccc_points_csv(&check))
            .map_err(|e| Failure::Data(format!("writing {}: {e}", path.display())))?;
    }
    Ok(ReportDocument::new(command, to_value(&config)).with_ccc_check(check))
}

pub fn emit(doc: &ReportDocument, output: &OutputArgs) -> Result<(), Failure> {
    let text = match output.format {
        Format::Table => doc.render_table(),
        Format::Json => doc.to_json(),
    };
    match &output.out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::Data(format!("writing {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
