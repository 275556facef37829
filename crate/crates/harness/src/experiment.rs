//! Sweeps over one parameter, one CSV row per (sweep value, trial, variant).

use std::error::Error;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use isac_core::beamforming::{sca_optimize_masked, ScaOptions};
use isac_core::channel::build_channels_seeded;
use isac_core::estimation::{
    localize, mse_harness, physical_truth, DelayDopplerGrid, DoaMethod, PairMeasurement, MIN_MSE_TRIALS,
};
use isac_core::linalg::CMat;
use isac_core::problem::IsacProblem;
use isac_core::rng::{substream, Purpose, StreamId};
use isac_core::scalar::{dbm_to_watts, wrap_angle};
use isac_core::scenario::{geometry_summary, true_delay, true_doppler, DopplerMode, Pulse};
use isac_core::selection::{
    best_candidate, build_linkage_tree, exhaustive_select, grow_group, kmeans_candidates, select_group, Selection,
    EXHAUSTIVE_MAX_K,
};
use isac_core::transmit::GramSet;
use isac_core::{IsacProblem64, Layout64, ScenarioConfig64};
use rand::Rng;
use rayon::prelude::*;

use crate::config::{ConfigError, HarnessConfig, LayoutSpec};

type CellError = Box<dyn Error + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    /// Mono-static proxy against groups of 1, 2 and 5 receivers.
    Tradeoff,
    AntennasTx,
    AntennasRx,
    /// Tree, k-means, exhaustive and best-singleton selection at uniform power.
    SelectionCompare,
    /// Cosine and sinc pulses over the power budget.
    Pulses,
    /// Matched-filter Monte Carlo error next to the CRB.
    MfVsCrb,
    /// Noiseless localization with both DoA inversions.
    Roundtrip,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::Tradeoff,
        Experiment::AntennasTx,
        Experiment::AntennasRx,
        Experiment::SelectionCompare,
        Experiment::Pulses,
        Experiment::MfVsCrb,
        Experiment::Roundtrip,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Tradeoff => "tradeoff",
            Experiment::AntennasTx => "antennas_tx",
            Experiment::AntennasRx => "antennas_rx",
            Experiment::SelectionCompare => "selection_compare",
            Experiment::Pulses => "pulses",
            Experiment::MfVsCrb => "mf_vs_crb",
            Experiment::Roundtrip => "roundtrip",
        }
    }

    pub fn default_sweep(self) -> Sweep {
        let (param, values): (SweepParam, Vec<f64>) = match self {
            Experiment::Tradeoff => (SweepParam::GroupSize, vec![0.0, 1.0, 2.0, 5.0]),
            Experiment::AntennasTx => (SweepParam::NT, (2..=10).map(f64::from).collect()),
            Experiment::AntennasRx => (SweepParam::NR, (2..=10).map(f64::from).collect()),
            Experiment::SelectionCompare => (SweepParam::K, (4..=8).map(f64::from).collect()),
            Experiment::Pulses => (SweepParam::PtDbm, vec![0.0, 10.0, 20.0, 30.0]),
            Experiment::MfVsCrb => (SweepParam::PtDbm, vec![10.0, 20.0, 30.0]),
            Experiment::Roundtrip => (SweepParam::V, vec![20.0]),
        };
        Sweep { param, values }
    }

    pub fn variants(self) -> &'static [&'static str] {
        match self {
            Experiment::Tradeoff => &["mono", "bi", "multi"],
            Experiment::SelectionCompare => &["tree", "kmeans", "exhaustive", "best_singleton"],
            Experiment::Pulses => &["cosine", "sinc"],
            Experiment::Roundtrip => &["closed_form", "numeric_root"],
            _ => &["pipeline"],
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| ConfigError::invalid("experiment", format!("unknown experiment `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    /// Locked group size; 0 is the mono-static proxy. Tradeoff only.
    GroupSize,
    NT,
    NR,
    K,
    PtDbm,
    RTh,
    Rho,
    V,
    M,
}

impl SweepParam {
    pub const ALL: [SweepParam; 9] = [
        SweepParam::GroupSize,
        SweepParam::NT,
        SweepParam::NR,
        SweepParam::K,
        SweepParam::PtDbm,
        SweepParam::RTh,
        SweepParam::Rho,
        SweepParam::V,
        SweepParam::M,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepParam::GroupSize => "group_size",
            SweepParam::NT => "n_t",
            SweepParam::NR => "n_r",
            SweepParam::K => "k",
            SweepParam::PtDbm => "p_t_dbm",
            SweepParam::RTh => "r_th",
            SweepParam::Rho => "rho",
            SweepParam::V => "v",
            SweepParam::M => "m",
        }
    }

    fn integral(self) -> bool {
        matches!(self, SweepParam::GroupSize | SweepParam::NT | SweepParam::NR | SweepParam::K | SweepParam::M)
    }

    /// `cfg` with the parameter set to `value`.
    pub fn apply(self, cfg: &ScenarioConfig64, value: f64) -> Result<ScenarioConfig64, ConfigError> {
        let key = self.name();
        if !value.is_finite() {
            return Err(ConfigError::invalid(key, "sweep values must be finite"));
        }
        if self.integral() && (value < 0.0 || value.fract() != 0.0) {
            return Err(ConfigError::invalid(key, format!("{value} is not a non-negative integer")));
        }
        let n = value as usize;
        let mut c = cfg.clone();
        match self {
            SweepParam::GroupSize => {
                if n > c.k {
                    return Err(ConfigError::invalid(key, format!("{n} exceeds k = {}", c.k)));
                }
            }
            SweepParam::NT => c.n_t = n,
            SweepParam::NR => c.n_r = n,
            SweepParam::K => c = c.with_receivers(n),
            SweepParam::PtDbm => c.p_t = dbm_to_watts(value),
            SweepParam::RTh => c.r_th = value,
            SweepParam::Rho => c.rho = value,
            SweepParam::V => c.v = value,
            SweepParam::M => c.m = n,
        }
        c.validate()?;
        Ok(c)
    }
}

impl FromStr for SweepParam {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        SweepParam::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| ConfigError::invalid("sweep", format!("unknown sweep parameter `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

/// `name=v1,v2,...`
impl FromStr for Sweep {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        let (name, list) = s
            .split_once('=')
            .ok_or_else(|| ConfigError::invalid("sweep", "expected `name=v1,v2,...`"))?;
        let param: SweepParam = name.trim().parse()?;
        let values = list
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| ConfigError::invalid(param.name(), format!("`{}` is not a number", v.trim())))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Sweep { param, values })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub experiment: Experiment,
    pub sweep: Sweep,
    pub trials: u32,
    pub seed: u64,
    pub out: Option<PathBuf>,
    /// Matched-filter blocks per row in `mf_vs_crb`.
    pub mse_trials: usize,
    /// Fill `wall_time_ms`; off by default so output stays byte-identical.
    pub timing: bool,
}

impl ExperimentSpec {
    pub fn new(experiment: Experiment, trials: u32, seed: u64) -> Self {
        Self {
            experiment,
            sweep: experiment.default_sweep(),
            trials,
            seed,
            out: None,
            mse_trials: MIN_MSE_TRIALS,
            timing: false,
        }
    }

    pub fn validate(&self, cfg: &HarnessConfig) -> Result<(), ConfigError> {
        if self.trials == 0 {
            return Err(ConfigError::invalid("trials", "need at least one trial"));
        }
        if self.sweep.values.is_empty() {
            return Err(ConfigError::invalid("sweep", "no sweep values"));
        }
        let p = self.sweep.param;
        if (p == SweepParam::GroupSize) != (self.experiment == Experiment::Tradeoff) {
            return Err(ConfigError::invalid(
                "sweep",
                format!("`group_size` is the sweep of `tradeoff` only, got `{}` for `{}`", p.name(), self.experiment),
            ));
        }
        if p == SweepParam::K && matches!(cfg.layout, LayoutSpec::Fixed(_)) {
            return Err(ConfigError::invalid("sweep", "cannot sweep `k` over a fixed layout"));
        }
        if self.experiment == Experiment::MfVsCrb && self.mse_trials < MIN_MSE_TRIALS {
            return Err(ConfigError::invalid("mse_trials", format!("need at least {MIN_MSE_TRIALS}")));
        }
        for &v in &self.sweep.values {
            p.apply(&cfg.scenario, v)?;
        }
        Ok(())
    }
}

/// CSV header, in column order.
pub const COLUMNS: [&str; 12] = [
    "sweep_value",
    "trial",
    "crb",
    "rate_min",
    "rate_mean",
    "cost",
    "group_size",
    "objective",
    "mse",
    "wall_time_ms",
    "variant",
    "error",
];

/// One output row. `objective` is the final SCA objective, or the DoA error
/// in radians for `roundtrip`, where `mse` is the squared position error.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Row {
    pub sweep_value: f64,
    pub trial: u32,
    pub crb: Option<f64>,
    pub rate_min: Option<f64>,
    pub rate_mean: Option<f64>,
    pub cost: Option<f64>,
    pub group_size: Option<usize>,
    pub objective: Option<f64>,
    pub mse: Option<f64>,
    pub wall_time_ms: Option<f64>,
    pub variant: String,
    pub error: Option<String>,
}

impl Row {
    pub fn record(&self) -> [String; 12] {
        fn opt<T: ToString>(x: &Option<T>) -> String {
            x.as_ref().map(ToString::to_string).unwrap_or_default()
        }
        fn num(x: &Option<f64>) -> String {
            x.map(|v| format!("{v:e}")).unwrap_or_default()
        }
        [
            self.sweep_value.to_string(),
            self.trial.to_string(),
            num(&self.crb),
            num(&self.rate_min),
            num(&self.rate_mean),
            num(&self.cost),
            opt(&self.group_size),
            num(&self.objective),
            num(&self.mse),
            num(&self.wall_time_ms),
            self.variant.clone(),
            opt(&self.error),
        ]
    }
}

pub fn write_csv<W: Write>(rows: &[Row], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Default)]
struct Outcome {
    crb: Option<f64>,
    rate_min: Option<f64>,
    rate_mean: Option<f64>,
    cost: Option<f64>,
    group_size: Option<usize>,
    objective: Option<f64>,
    mse: Option<f64>,
}

struct Cell<'a> {
    spec: &'a ExperimentSpec,
    layout: &'a LayoutSpec,
    cfg: ScenarioConfig64,
    value: f64,
    trial: u32,
}

impl Cell<'_> {
    fn row(&self, variant: &str, f: impl FnOnce() -> Result<Outcome, CellError>) -> Row {
        let start = Instant::now();
        let res = f();
        let wall_time_ms = self.spec.timing.then(|| start.elapsed().as_secs_f64() * 1e3);
        let mut row = Row {
            sweep_value: self.value,
            trial: self.trial,
            variant: variant.to_string(),
            wall_time_ms,
            ..Row::default()
        };
        match res {
            Ok(o) => {
                row.crb = o.crb;
                row.rate_min = o.rate_min;
                row.rate_mean = o.rate_mean;
                row.cost = o.cost;
                row.group_size = o.group_size;
                row.objective = o.objective;
                row.mse = o.mse;
            }
            Err(e) => {
                log::warn!(
                    "{} {}={} trial {} {variant}: {e}",
                    self.spec.experiment,
                    self.spec.sweep.param.name(),
                    self.value,
                    self.trial
                );
                row.error = Some(e.to_string());
            }
        }
        row
    }

    fn layout(&self) -> Result<Layout64, CellError> {
        Ok(self.layout.realize(self.cfg.k, self.cfg.min_distance, self.spec.seed, self.trial)?)
    }

    fn problem(&self, cfg: ScenarioConfig64) -> Result<IsacProblem64, CellError> {
        Ok(IsacProblem::sample(cfg, self.layout()?, self.spec.seed, self.trial)?)
    }
}

/// Runs every (sweep value, trial) cell; rows come back in that order.
pub fn run_experiment(spec: &ExperimentSpec, cfg: &HarnessConfig) -> Result<Vec<Row>, ConfigError> {
    spec.validate(cfg)?;
    let cells: Vec<(f64, u32)> = spec
        .sweep
        .values
        .iter()
        .flat_map(|&v| (0..spec.trials).map(move |t| (v, t)))
        .collect();
    let rows: Vec<Vec<Row>> = cells
        .into_par_iter()
        .map(|(value, trial)| {
            let cell = Cell {
                spec,
                layout: &cfg.layout,
                cfg: spec.sweep.param.apply(&cfg.scenario, value).expect("validated sweep value"),
                value,
                trial,
            };
            run_cell(&cell)
        })
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

fn run_cell(cell: &Cell<'_>) -> Vec<Row> {
    match cell.spec.experiment {
        Experiment::Tradeoff => {
            let size = cell.value as usize;
            let variant = match size {
                0 => "mono",
                1 => "bi",
                _ => "multi",
            };
            vec![cell.row(variant, || tradeoff(cell, size))]
        }
        Experiment::AntennasTx | Experiment::AntennasRx => {
            vec![cell.row("pipeline", || Ok(pipeline(&cell.problem(cell.cfg.clone())?)?.1))]
        }
        Experiment::SelectionCompare => selection_compare(cell),
        Experiment::Pulses => [Pulse::Cosine, Pulse::Sinc]
            .into_iter()
            .map(|pulse| {
                cell.row(pulse.name(), || {
                    let mut cfg = cell.cfg.clone();
                    cfg.pulse = pulse;
                    Ok(pipeline(&cell.problem(cfg)?)?.1)
                })
            })
            .collect(),
        Experiment::MfVsCrb => vec![cell.row("pipeline", || mf_vs_crb(cell))],
        Experiment::Roundtrip => roundtrip(cell),
    }
}

fn uniform(problem: &IsacProblem64) -> GramSet<f64> {
    GramSet::uniform(problem.receivers(), problem.cfg.n_t, problem.cfg.p_t)
}

/// SCA for a fixed group; rates are reported over `users` only.
fn beamform(problem: &IsacProblem64, b: &[bool], users: &[bool]) -> Result<(Outcome, isac_core::beamforming::ScaOutcome<f64>), CellError> {
    let out = sca_optimize_masked(problem, b, users, None, &ScaOptions::default())?;
    let grams = out.beamformers.grams();
    let crb = problem.crb(b, &grams)?.crb;
    let rates: Vec<f64> = problem
        .rates(b, &grams)?
        .into_iter()
        .zip(users)
        .filter_map(|(r, &u)| u.then_some(r))
        .collect();
    let o = Outcome {
        crb: Some(crb),
        rate_min: rates.iter().copied().reduce(f64::min),
        rate_mean: (!rates.is_empty()).then(|| rates.iter().sum::<f64>() / rates.len() as f64),
        cost: Some(problem.cost(b)?),
        group_size: Some(b.iter().filter(|&&x| x).count()),
        objective: out.trace.iterations.last().map(|i| i.objective),
        mse: None,
    };
    Ok((o, out))
}

/// Tree selection at uniform power, then SCA beamforming for that group.
fn pipeline(problem: &IsacProblem64) -> Result<(Selection<f64>, Outcome, isac_core::beamforming::ScaOutcome<f64>), CellError> {
    let lay = &problem.layout;
    let tree = build_linkage_tree(&lay.p, &lay.p_0, problem.cfg.rho);
    let sel = select_group(&tree, &uniform(problem), problem)?;
    let (o, out) = beamform(problem, &sel.b, &vec![true; sel.b.len()])?;
    Ok((sel, o, out))
}

/// The real receivers plus a virtual one at the transmitter that only
/// senses: same sensing channel model, no communication link.
pub fn monostatic_proxy(cfg: &ScenarioConfig64, layout: &Layout64, seed: u64, trial: u32) -> isac_core::Result<IsacProblem64> {
    let k = cfg.k;
    let cfg1 = cfg.with_receivers(k + 1);
    let mut lay = layout.clone();
    lay.p.push(lay.p_b);
    let geo = geometry_summary(&lay, &cfg1)?;
    let mut ch = build_channels_seeded(&cfg1, &geo, seed, trial);
    ch.h_comm[k] = CMat::zeros(cfg.n_r, cfg.n_t);
    IsacProblem::new(cfg1, lay, ch)
}

fn tradeoff(cell: &Cell<'_>, size: usize) -> Result<Outcome, CellError> {
    let layout = cell.layout()?;
    if size == 0 {
        let problem = monostatic_proxy(&cell.cfg, &layout, cell.spec.seed, cell.trial)?;
        let k = cell.cfg.k;
        let b: Vec<bool> = (0..=k).map(|i| i == k).collect();
        let users: Vec<bool> = (0..=k).map(|i| i < k).collect();
        let (mut o, _) = beamform(&problem, &b, &users)?;
        o.cost = Some(0.0);
        o.group_size = Some(0);
        return Ok(o);
    }
    let problem = IsacProblem::sample(cell.cfg.clone(), layout, cell.spec.seed, cell.trial)?;
    let group = grow_group(&problem.layout.p, &problem.layout.p_0, problem.cfg.rho, size)?;
    let b = problem.selection(&group);
    Ok(beamform(&problem, &b, &vec![true; b.len()])?.0)
}

fn selection_outcome(sel: Selection<f64>) -> Outcome {
    let r = &sel.evaluation.rates;
    Outcome {
        crb: Some(sel.crb),
        rate_min: r.iter().copied().reduce(f64::min),
        rate_mean: (!r.is_empty()).then(|| r.iter().sum::<f64>() / r.len() as f64),
        cost: Some(sel.evaluation.cost),
        group_size: Some(sel.group.len()),
        objective: None,
        mse: None,
    }
}

fn selection_compare(cell: &Cell<'_>) -> Vec<Row> {
    let problem = match cell.problem(cell.cfg.clone()) {
        Ok(p) => p,
        Err(e) => {
            let msg = e.to_string();
            return Experiment::SelectionCompare
                .variants()
                .iter()
                .map(|v| cell.row(v, || Err(msg.clone().into())))
                .collect();
        }
    };
    let q = uniform(&problem);
    let lay = &problem.layout;
    let k = problem.receivers();
    let select = |variant: &str| -> Result<Outcome, CellError> {
        let sel = match variant {
            "tree" => select_group(&build_linkage_tree(&lay.p, &lay.p_0, problem.cfg.rho), &q, &problem)?,
            "kmeans" => best_candidate(&problem, &q, &kmeans_candidates(&lay.p, &lay.p_0, 100))?,
            "exhaustive" if k <= EXHAUSTIVE_MAX_K => exhaustive_select(&problem, &q)?,
            "exhaustive" => return Err(format!("exhaustive search needs k <= {EXHAUSTIVE_MAX_K}").into()),
            _ => best_candidate(&problem, &q, &(0..k).map(|i| vec![i]).collect::<Vec<_>>())?,
        };
        Ok(selection_outcome(sel))
    };
    Experiment::SelectionCompare
        .variants()
        .iter()
        .map(|v| cell.row(v, || select(v)))
        .collect()
}

fn mf_vs_crb(cell: &Cell<'_>) -> Result<Outcome, CellError> {
    let problem = cell.problem(cell.cfg.clone())?;
    let (sel, mut o, out) = pipeline(&problem)?;
    let truth = physical_truth(&problem)?;
    let grid = DelayDopplerGrid::for_block(problem.cfg.m);
    // Same symbols, clutter and noise for every sweep value of a trial.
    let seed = substream(cell.spec.seed, StreamId::new(cell.trial, Purpose::Instance, 0)).random::<u64>();
    let rep = mse_harness(&problem, &out.beamformers, &sel.b, &truth, cell.spec.mse_trials, &grid, seed)?;
    o.crb = Some(rep.crb);
    o.mse = Some(rep.mse);
    Ok(o)
}

fn roundtrip(cell: &Cell<'_>) -> Vec<Row> {
    let setup = || -> Result<(Layout64, PairMeasurement<f64>, f64), CellError> {
        let cfg = &cell.cfg;
        let layout = cell.layout()?;
        let geo = geometry_summary(&layout, cfg)?;
        let k = layout.p.len();
        let (i, j) = (0..k)
            .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
            .find(|&(i, j)| (0.5 * (geo.phi[i] - geo.phi[j])).sin().abs() > 1e-3)
            .ok_or("no receiver pair with distinct arrival angles")?;
        let f = |n: usize| true_doppler(geo.theta, geo.phi[n], cfg.v, cfg.f0, DopplerMode::Approx);
        let meas = PairMeasurement {
            k: i,
            kp: j,
            f_k: f(i),
            f_kp: f(j),
            tau_k: true_delay(geo.d_b0, geo.d_0k[i])?,
            phi_k: geo.phi[i],
            phi_kp: geo.phi[j],
        };
        Ok((layout, meas, geo.theta))
    };
    let setup = setup().map_err(|e| e.to_string());
    [DoaMethod::ClosedForm, DoaMethod::NumericRoot]
        .into_iter()
        .map(|method| {
            cell.row(method.name(), || {
                let (layout, meas, theta) = setup.clone()?;
                let est = localize(&layout, &meas, method)?;
                Ok(Outcome {
                    group_size: Some(2),
                    objective: Some(wrap_angle(est.theta_hat - theta).abs()),
                    mse: Some(est.xy_hat.distance(&layout.p_0).powi(2)),
                    ..Outcome::default()
                })
            })
        })
        .collect()
}
