use std::path::PathBuf;

use clap::{Subcommand, ValueEnum};
use renyi_core::divergence::{renyi_entropy, sandwiched_renyi};
use renyi_core::optimize::{
    conditional_renyi_entropy, holevo_alpha, holevo_information, mutual_info_dual, mutual_info_primal, Ensemble,
    OptimizerResult,
};
use renyi_core::{AlphaOrder, Channel, DensityMatrix};
use serde_json::{json, Value};

use crate::io::{cell, emit, num, pretty, read_json, CliResult};
use crate::{Format, Globals, OptimizerArgs};

#[derive(Subcommand, Debug)]
pub enum ComputeCommand {
    /// Sandwiched Renyi divergence D_alpha(rho||sigma).
    Divergence {
        #[arg(long)]
        rho: PathBuf,
        #[arg(long)]
        sigma: PathBuf,
        #[arg(long, value_parser = parse_alpha)]
        alpha: AlphaOrder,
    },
    /// Renyi entropy H_alpha(rho).
    Entropy {
        #[arg(long)]
        rho: PathBuf,
        #[arg(long, value_parser = parse_alpha)]
        alpha: AlphaOrder,
    },
    /// Conditional entropy H_alpha(A|B) of a bipartite state.
    ConditionalEntropy {
        #[arg(long)]
        rho: PathBuf,
        #[arg(long, value_parser = parse_alpha)]
        alpha: AlphaOrder,
        /// Subsystem dimensions `dA,dB`, overriding those in the file.
        #[arg(long)]
        dims: Option<String>,
        #[command(flatten)]
        opt: OptimizerArgs,
    },
    /// Mutual information I_alpha(A;B) of a bipartite state.
    MutualInfo {
        #[arg(long)]
        rho: PathBuf,
        #[arg(long, value_parser = parse_alpha)]
        alpha: AlphaOrder,
        #[arg(long)]
        dims: Option<String>,
        #[arg(long, value_enum, default_value_t = Form::Primal)]
        form: Form,
        #[command(flatten)]
        opt: OptimizerArgs,
    },
    /// Holevo quantity of a channel: optimized over k-state ensembles, or
    /// evaluated on a given ensemble.
    Holevo {
        #[arg(long)]
        channel: PathBuf,
        #[arg(long, value_parser = parse_alpha)]
        alpha: AlphaOrder,
        /// Ensemble size for the optimization.
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Evaluate I_alpha(X;B) for this ensemble instead of optimizing.
        #[arg(long)]
        ensemble: Option<PathBuf>,
        #[command(flatten)]
        opt: OptimizerArgs,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Form {
    Primal,
    Dual,
}

pub fn parse_alpha(s: &str) -> Result<AlphaOrder, String> {
    s.parse::<AlphaOrder>().map_err(|e| e.to_string())
}

fn load_state(path: &PathBuf, dims: Option<&str>) -> CliResult<DensityMatrix> {
    let rho: DensityMatrix = read_json(path)?;
    match dims {
        None => Ok(rho),
        Some(d) => {
            let dims = crate::io::parse_list(d, "dimension", |t| t.parse::<usize>().ok())?;
            Ok(rho.with_dims(dims)?)
        }
    }
}

/// JSON record and CSV row for one result.
struct Output {
    json: Value,
    header: &'static str,
    row: String,
}

fn optimizer_output(quantity: &str, alpha: AlphaOrder, r: &OptimizerResult, g: &Globals) -> Output {
    let value = r.value * g.unit_scale();
    Output {
        json: json!({
            "quantity": quantity,
            "alpha": alpha,
            "value": num(value),
            "units": g.units(),
            "converged": r.converged,
            "on_boundary": r.on_boundary,
            "iterations": r.iterations,
            "restart": r.restart,
            "aborted_restarts": r.aborted_restarts,
            "argopt": r.argopt,
        }),
        header: "alpha,value,converged,on_boundary",
        row: format!("{alpha},{},{},{}", cell(value), r.converged, r.on_boundary),
    }
}

pub fn run(cmd: ComputeCommand, g: &Globals) -> CliResult<()> {
    let s = g.unit_scale();
    let out = match cmd {
        ComputeCommand::Divergence { rho, sigma, alpha } => {
            let rho = load_state(&rho, None)?;
            let sigma = load_state(&sigma, None)?;
            let d = sandwiched_renyi(&rho, &sigma, alpha)?;
            let value = d.value * s;
            Output {
                json: json!({
                    "alpha": alpha,
                    "value": num(value),
                    "support_violated": d.support_violated,
                    "units": g.units(),
                }),
                header: "alpha,value,support_violated",
                row: format!("{alpha},{},{}", cell(value), d.support_violated),
            }
        }
        ComputeCommand::Entropy { rho, alpha } => {
            let rho = load_state(&rho, None)?;
            let value = renyi_entropy(&rho, alpha) * s;
            Output {
                json: json!({ "alpha": alpha, "value": num(value), "units": g.units() }),
                header: "alpha,value",
                row: format!("{alpha},{}", cell(value)),
            }
        }
        ComputeCommand::ConditionalEntropy { rho, alpha, dims, opt } => {
            let rho = load_state(&rho, dims.as_deref())?;
            let r = conditional_renyi_entropy(&rho, alpha, &opt.config(g.seed)?)?;
            optimizer_output("conditional_entropy", alpha, &r, g)
        }
        ComputeCommand::MutualInfo {
            rho,
            alpha,
            dims,
            form,
            opt,
        } => {
            let rho = load_state(&rho, dims.as_deref())?;
            let cfg = opt.config(g.seed)?;
            let (name, r) = match form {
                Form::Primal => ("mutual_info_primal", mutual_info_primal(&rho, alpha, &cfg)?),
                Form::Dual => ("mutual_info_dual", mutual_info_dual(&rho, alpha, &cfg)?),
            };
            optimizer_output(name, alpha, &r, g)
        }
        ComputeCommand::Holevo {
            channel,
            alpha,
            k,
            ensemble,
            opt,
        } => {
            let channel: Channel = read_json(&channel)?;
            let cfg = opt.config(g.seed)?;
            match ensemble {
                Some(path) => {
                    let e: Ensemble = read_json(&path)?;
                    let e = Ensemble::new(e.probabilities, e.states)?;
                    let r = holevo_information(&channel, &e, alpha, &cfg)?;
                    optimizer_output("holevo_information", alpha, &r, g)
                }
                None => {
                    let r = holevo_alpha(&channel, k, alpha, &cfg)?;
                    let value = r.value * s;
                    Output {
                        json: json!({
                            "quantity": "holevo_alpha",
                            "alpha": alpha,
                            "value": num(value),
                            "units": g.units(),
                            "lower_bound": r.lower_bound,
                            "converged": r.converged,
                            "iterations": r.iterations,
                            "restart": r.restart,
                            "ensemble": r.ensemble,
                            "argopt": r.sigma,
                        }),
                        header: "alpha,value,converged,lower_bound",
                        row: format!("{alpha},{},{},{}", cell(value), r.converged, r.lower_bound),
                    }
                }
            }
        }
    };
    let text = match g.format.unwrap_or(Format::Json) {
        Format::Json => pretty(&out.json),
        Format::Csv => format!("{}\n{}\n", out.header, out.row),
    };
    emit(&text, g.out.as_deref())
}
