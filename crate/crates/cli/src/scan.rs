use std::path::PathBuf;

use clap::Args;
use renyi_core::divergence::{sandwiched_renyi, umegaki, ALPHA_ONE_GAP};
use renyi_core::{AlphaOrder, DensityMatrix};
use serde_json::json;

use crate::io::{cell, emit, num, pretty, read_json, CliError, CliResult};
use crate::{Format, Globals};

/// Decrease between adjacent orders above one tolerated before flagging.
const MONOTONE_SLACK: f64 = 1e-9;

#[derive(Args, Debug)]
pub struct ScanArgs {
    #[arg(long)]
    rho: PathBuf,
    #[arg(long)]
    sigma: PathBuf,
    /// `start:stop:count`, log-spaced, all positive.
    #[arg(long)]
    grid: String,
}

pub fn parse_grid(spec: &str) -> CliResult<Vec<f64>> {
    let bad = || CliError::usage(format!("grid must be start:stop:count with 0 < start <= stop, got {spec:?}"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        return Err(bad());
    };
    let start: f64 = a.trim().parse().map_err(|_| bad())?;
    let stop: f64 = b.trim().parse().map_err(|_| bad())?;
    let count: usize = n.trim().parse().map_err(|_| bad())?;
    if !(start > 0.0) || !stop.is_finite() || stop < start || count == 0 {
        return Err(bad());
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let (la, lb) = (start.ln(), stop.ln());
    Ok((0..count)
        .map(|i| match i {
            0 => start,
            _ if i == count - 1 => stop,
            _ => (la + (lb - la) * i as f64 / (count - 1) as f64).exp(),
        })
        .collect())
}

struct Row {
    alpha: AlphaOrder,
    value: f64,
    support_violated: bool,
    relative_entropy: bool,
}

fn scan(rho: &DensityMatrix, sigma: &DensityMatrix, grid: &[f64]) -> CliResult<Vec<Row>> {
    grid.iter()
        .map(|&a| {
            let (alpha, relative_entropy) = if (a - 1.0).abs() <= ALPHA_ONE_GAP {
                (AlphaOrder::One, true)
            } else {
                (AlphaOrder::finite(a)?, false)
            };
            let d = if relative_entropy {
                umegaki(rho, sigma)?
            } else {
                sandwiched_renyi(rho, sigma, alpha)?
            };
            Ok(Row {
                alpha,
                value: d.value,
                support_violated: d.support_violated,
                relative_entropy,
            })
        })
        .collect()
}

/// Adjacent pairs of orders above one where the value decreases.
fn monotone_violations(rows: &[Row]) -> Vec<(f64, f64)> {
    rows.windows(2)
        .filter(|w| w[0].alpha.exceeds_one() && w[1].alpha.exceeds_one())
        .filter(|w| w[1].value < w[0].value - MONOTONE_SLACK)
        .map(|w| (w[0].alpha.value(), w[1].alpha.value()))
        .collect()
}

pub fn run(args: ScanArgs, g: &Globals) -> CliResult<()> {
    let grid = parse_grid(&args.grid)?;
    let rho: DensityMatrix = read_json(&args.rho)?;
    let sigma: DensityMatrix = read_json(&args.sigma)?;
    let rows = scan(&rho, &sigma, &grid)?;
    let violations = monotone_violations(&rows);
    let s = g.unit_scale();
    let text = match g.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut t = String::from("alpha,value,support_violated\n");
            for r in &rows {
                t += &format!("{},{},{}\n", cell(r.alpha.value()), cell(r.value * s), r.support_violated);
            }
            if rows.iter().any(|r| r.relative_entropy) {
                t += "# alpha=1 rows hold the relative entropy\n";
            }
            if violations.is_empty() {
                t += "# monotone for alpha>1: yes\n";
            } else {
                let pairs: Vec<String> = violations.iter().map(|(a, b)| format!("{}->{}", cell(*a), cell(*b))).collect();
                t += &format!("# monotone for alpha>1: no, decreasing at {}\n", pairs.join(" "));
            }
            t
        }
        Format::Json => pretty(&json!({
            "units": g.units(),
            "rows": rows.iter().map(|r| json!({
                "alpha": r.alpha,
                "value": num(r.value * s),
                "support_violated": r.support_violated,
                "relative_entropy": r.relative_entropy,
            })).collect::<Vec<_>>(),
            "monotone": violations.is_empty(),
            "monotone_violations": violations,
        })),
    };
    emit(&text, g.out.as_deref())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("2:2:1").unwrap(), vec![2.0]);
        let g = parse_grid("0.5:8:5").unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(g[0], 0.5);
        assert_eq!(g[4], 8.0);
        assert!((g[2] - 2.0).abs() < 1e-12);
        for bad in ["0:2:3", "2:1:3", "1:2", "1:2:0", "a:2:3", "-1:2:2"] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn unit_point_uses_relative_entropy() {
        let rho = DensityMatrix::from_diagonal(&[0.75, 0.25]).unwrap();
        let sigma = DensityMatrix::maximally_mixed(2);
        let rows = scan(&rho, &sigma, &parse_grid("0.5:2:3").unwrap()).unwrap();
        assert!(rows[1].relative_entropy);
        assert!((rows[1].value - 0.130812035941137).abs() < 1e-12);
        assert!(monotone_violations(&rows).is_empty());
    }
}
