use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{BlockSpec, EngineMode, ExperimentConfig};
use super::svg;
use crate::decoupling::gamma_slope_gap;
use crate::error::{Error, Result};
use crate::exact::{ExactEngine, SpinSystem};
use crate::mc::{estimate_gap, GapSampler};
use crate::model::{Block, BoundaryCondition, DisorderRealization, LatticeRegion, ModelParams, Site};
use crate::rng::auxiliary_stream;

/// Mean boundary-influence gap at the center over disorder replicas.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub n: usize,
    pub beta: f64,
    pub v: f64,
    pub replicas: usize,
    pub gap_mean: f64,
    pub gap_se: f64,
    pub engine: String,
    pub seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Mean |Δ₊ − Δ₋|/h over replicas for one block, against 16βm/h.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockRow {
    pub n: usize,
    pub beta: f64,
    pub v: f64,
    pub replicas: usize,
    pub block: Block,
    pub h: f64,
    pub slope_gap_mean: f64,
    pub slope_gap_se: f64,
    pub bound: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DecayOutput {
    pub rows: Vec<DecayRow>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub block_rows: Vec<BlockRow>,
}

/// Per-replica gaps with the engine name that produced them.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplicaGaps {
    pub gaps: Vec<f64>,
    pub engine: String,
}

fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (mean, (ss / (n * (n - 1.0))).sqrt())
}

/// ⟨σ_x⟩₊ − ⟨σ_x⟩₋ at the center site for replicas 0..replicas of the
/// disorder keyed by `seed`.
pub fn replica_gaps(region: &LatticeRegion, params: ModelParams, replicas: usize, seed: u64, mode: EngineMode, mc: GapSampler, mc_samples: usize) -> Result<ReplicaGaps> {
    let center = region.center();
    let x = region.require_index(center)?;
    let engine = ExactEngine::default();
    let beta = params.beta();
    let probe = SpinSystem::from_region(region, &BoundaryCondition::all_plus(region), &vec![0.0; region.len()])?;
    let exact = match mode {
        EngineMode::Exact => {
            engine.engine_for(&probe)?;
            true
        }
        EngineMode::Mc => false,
        EngineMode::Auto => engine.engine_for(&probe).is_ok(),
    };
    let plus = BoundaryCondition::all_plus(region);
    let minus = BoundaryCondition::all_minus(region);
    let gaps = (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            let disorder = DisorderRealization::generate(region, seed, r);
            let field: Vec<f64> = disorder.values().iter().map(|g| params.sqrt_v() * g).collect();
            if exact {
                let up = engine.magnetization_at(&SpinSystem::from_region(region, &plus, &field)?, x, beta)?;
                let down = engine.magnetization_at(&SpinSystem::from_region(region, &minus, &field)?, x, beta)?;
                Ok(up - down)
            } else {
                let stream: u64 = auxiliary_stream(seed, r).random();
                let est = estimate_gap(region, center, &field, beta, mc_samples, stream, mc)?;
                if est.is_partial() {
                    return Err(Error::CoalescenceBudget { budget: match mc { GapSampler::Cftp { budget } => budget, _ => 0 } });
                }
                Ok(est.mean)
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    let name = if !exact {
        "cftp".to_string()
    } else if beta.is_infinite() {
        "ground_state".to_string()
    } else {
        engine.engine_for(&probe)?.to_string()
    };
    Ok(ReplicaGaps { gaps, engine: name })
}

fn block_for(spec: BlockSpec, region: &LatticeRegion) -> Block {
    match spec {
        BlockSpec::Center { side } => {
            let c = region.center();
            let back = ((side - 1) / 2) as i32;
            Block::new(Site::new(c.x - back, c.y - back), side)
        }
        BlockSpec::At { origin, side } => Block::new(origin, side),
    }
}

/// h = √(log log n)/(2m).
pub fn default_block_shift(n: usize, m: usize) -> f64 {
    (n as f64).ln().ln().max(0.0).sqrt() / (2.0 * m as f64)
}

fn block_row(cfg: &ExperimentConfig, n: usize, region: &LatticeRegion, params: ModelParams, spec: BlockSpec) -> BlockRow {
    let block = block_for(spec, region);
    let h = cfg.h.unwrap_or_else(|| default_block_shift(n, block.side));
    let bound = 16.0 * params.beta() * block.side as f64 / h;
    let run = || -> Result<Vec<f64>> {
        (0..cfg.replicas as u64)
            .into_par_iter()
            .map(|r| {
                let field: Vec<f64> = DisorderRealization::generate(region, cfg.seed, r).values().iter().map(|g| params.sqrt_v() * g).collect();
                gamma_slope_gap(region, &block, &field, &params, h)
            })
            .collect()
    };
    let (mean, se, error) = match run() {
        Ok(v) => {
            let (m, s) = mean_se(&v);
            (m, s, None)
        }
        Err(e) => (f64::NAN, f64::NAN, Some(e.to_string())),
    };
    BlockRow { n, beta: params.beta(), v: params.v(), replicas: cfg.replicas, block, h, slope_gap_mean: mean, slope_gap_se: se, bound, error }
}

/// Runs every (n, β) row of `cfg`. Failing rows carry their error and the
/// sweep continues.
pub fn decay_experiment(cfg: &ExperimentConfig) -> Result<DecayOutput> {
    let regions = cfg.regions()?;
    let sampler = GapSampler::Cftp { budget: cfg.budget };
    let mut out = DecayOutput::default();
    for (n, region) in &regions {
        for &beta in &cfg.betas {
            let params = ModelParams::new(beta, cfg.v)?;
            let start = Instant::now();
            let result = replica_gaps(region, params, cfg.replicas, cfg.seed, cfg.engine, sampler, cfg.mc_samples);
            let seconds = if cfg.timing { start.elapsed().as_secs_f64() } else { 0.0 };
            let row = match result {
                Ok(r) => {
                    let (gap_mean, gap_se) = mean_se(&r.gaps);
                    DecayRow { n: *n, beta, v: cfg.v, replicas: cfg.replicas, gap_mean, gap_se, engine: r.engine, seconds, error: None }
                }
                Err(e) => DecayRow {
                    n: *n,
                    beta,
                    v: cfg.v,
                    replicas: cfg.replicas,
                    gap_mean: f64::NAN,
                    gap_se: f64::NAN,
                    engine: "error".into(),
                    seconds,
                    error: Some(e.to_string()),
                },
            };
            out.rows.push(row);
            if let Some(spec) = cfg.block {
                if beta.is_finite() {
                    out.block_rows.push(block_row(cfg, *n, region, params, spec));
                }
            }
        }
    }
    Ok(out)
}

fn num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x}")
    }
}

pub fn decay_csv(rows: &[DecayRow]) -> String {
    let mut s = String::from("n,beta,v,replicas,gap_mean,gap_se,engine,seconds\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{},{},{},{},{}", r.n, r.beta, r.v, r.replicas, num(r.gap_mean), num(r.gap_se), r.engine, r.seconds);
    }
    s
}

pub fn block_csv(rows: &[BlockRow]) -> String {
    let mut s = String::from("n,beta,v,replicas,block_x,block_y,block_side,h,slope_gap_mean,slope_gap_se,bound\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.n,
            r.beta,
            r.v,
            r.replicas,
            r.block.origin.x,
            r.block.origin.y,
            r.block.side,
            r.h,
            num(r.slope_gap_mean),
            num(r.slope_gap_se),
            r.bound
        );
    }
    s
}

/// Writes decay.csv, decay.json and, when configured, blocks.csv and
/// decay.svg into `cfg.out_dir`. Returns the paths written.
pub fn write_outputs(cfg: &ExperimentConfig, output: &DecayOutput) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(&cfg.out_dir)?;
    let mut written = Vec::new();
    let mut put = |name: &str, body: String| -> Result<()> {
        let path = cfg.out_dir.join(name);
        std::fs::write(&path, body)?;
        written.push(path);
        Ok(())
    };
    put("decay.csv", decay_csv(&output.rows))?;
    put("decay.json", serde_json::to_string_pretty(output)? + "\n")?;
    if !output.block_rows.is_empty() {
        put("blocks.csv", block_csv(&output.block_rows))?;
    }
    if cfg.svg {
        put("decay.svg", svg::decay_plot(&output.rows, cfg.v))?;
    }
    Ok(written)
}
