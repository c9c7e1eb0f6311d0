//! Experiment configuration, the four batch commands and their CSV output.
//!
//! A config is one JSON object with an optional block per command:
//! `region`, `simulate`, `verify` and `ensemble_stats`, plus a root `seed`.

use crate::channel::Dmc;
use crate::error::{Error, Result};
use crate::gf::FieldSpec;
use crate::hash::{estimate_hash_params, EnsembleKind, EnsembleSpec, Mode, Provenance};
use crate::mac::{
    search_code, simulate_error, suggest_eps, CommonDesign, Design, PrivateDesign, Scenario, SimReport, Stage,
    SuperpositionDesign,
};
use crate::regions::{
    constraints_han, constraints_private, constraints_sw, in_region_han, in_region_private, in_region_sw,
    joint_han, joint_sw, joint_ts, rate_split, Constraint, JointLaw, RateSplit, SymbolMap, Verdict,
};
use crate::rng::{Purpose, StreamId};
use crate::types::{CondPmf, Pmf};
use crate::verify::{self, Fault, Suite, SuiteReport};
use serde::Deserialize;
use std::path::Path;
use std::time::Instant;

/// Root seed when neither the config nor the command line sets one.
pub const DEFAULT_SEED: u64 = 1;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub seed: Option<u64>,
    pub region: Option<RegionConfig>,
    pub simulate: Option<SimulateConfig>,
    pub verify: Option<VerifyConfig>,
    pub ensemble_stats: Option<EnsembleStatsConfig>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    /// `binary-adder`, `binary-xor` or `noiseless-pair`.
    pub preset: Option<String>,
    /// Alphabet of each `noiseless-pair` input.
    pub q: Option<usize>,
    pub inputs: Option<Vec<usize>>,
    pub outputs: Option<usize>,
    /// One output pmf per input tuple, first sender most significant.
    pub rows: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSharingConfig {
    pub u: Vec<f64>,
    /// Per sender, one pmf per value of `u`.
    pub inputs: Vec<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapConfig {
    pub inputs: Vec<usize>,
    pub table: Vec<usize>,
}

/// Channel plus input law for one of the three scenarios.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// `private`, `time-sharing`, `common` or `superposition`.
    pub scenario: String,
    pub channel: ChannelConfig,
    /// `private`: one pmf per sender.
    pub inputs: Option<Vec<Vec<f64>>>,
    pub time_sharing: Option<TimeSharingConfig>,
    /// `common`: one pmf per auxiliary message.
    pub aux: Option<Vec<Vec<f64>>>,
    pub maps: Option<Vec<MapConfig>>,
    /// `superposition`: law of `X0`.
    pub cloud: Option<Vec<f64>>,
    /// `superposition`: `μ_{X1|X0}` and `μ_{X2|X0}`, one row per cloud symbol.
    pub satellites: Option<Vec<Vec<Vec<f64>>>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub points: Vec<Vec<f64>>,
    /// Superposition only: include the auxiliary conditions in the verdict.
    #[serde(default = "yes")]
    pub include_aux: bool,
    /// Superposition only: report a rate split for points inside the region
    /// without the auxiliary conditions.
    #[serde(default)]
    pub split: bool,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    /// `uniform-all-linear`, `sparse-linear` or `random-binning`.
    pub kind: String,
    #[serde(default = "two")]
    pub q: u8,
    pub degree: Option<usize>,
    pub slope: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub model: ModelConfig,
    pub rates: Vec<f64>,
    /// Per-message margins; defaults to half the tightest region margin, split evenly.
    pub eps: Option<Vec<f64>>,
    /// Block-length ladder, strictly ascending.
    pub n: Vec<usize>,
    pub ensemble: EnsembleConfig,
    #[serde(default = "default_candidates")]
    pub candidates: usize,
    #[serde(default = "default_pilot")]
    pub pilot_trials: u64,
    #[serde(default = "default_trials")]
    pub trials: u64,
    pub gamma: Option<f64>,
    #[serde(default)]
    pub force: bool,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "default_suite")]
    pub suite: String,
    pub fault: Option<String>,
    pub ns: Option<Vec<usize>>,
    pub gammas: Option<Vec<f64>>,
    pub hash_instances: Option<usize>,
    pub codec_instances: Option<usize>,
    pub split_points: Option<usize>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            suite: default_suite(),
            fault: None,
            ns: None,
            gammas: None,
            hash_instances: None,
            codec_instances: None,
            split_points: None,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleStatsConfig {
    pub ensembles: Vec<EnsembleConfig>,
    pub n: Vec<usize>,
    /// Rows per column, `l = max(1, round(ratio·n))`.
    #[serde(default = "half")]
    pub row_ratio: f64,
    /// `exact` or `monte-carlo`.
    #[serde(default = "default_mode")]
    pub mode: String,
    #[serde(default = "default_samples")]
    pub samples: u64,
}

fn yes() -> bool {
    true
}
fn two() -> u8 {
    2
}
fn half() -> f64 {
    0.5
}
fn default_candidates() -> usize {
    20
}
fn default_pilot() -> u64 {
    100
}
fn default_trials() -> u64 {
    400
}
fn default_suite() -> String {
    "all".into()
}
fn default_mode() -> String {
    "exact".into()
}
fn default_samples() -> u64 {
    20_000
}

fn cfg_err(field: impl Into<String>, msg: impl ToString) -> Error {
    Error::Config {
        field: field.into(),
        msg: msg.to_string(),
    }
}

/// Parses a config document; serde diagnostics carry line and column.
pub fn parse_config(text: &str) -> Result<Config> {
    serde_json::from_str(text).map_err(|e| cfg_err("<document>", e))
}

pub fn load_config(path: &Path) -> Result<Config> {
    let text = std::fs::read_to_string(path).map_err(|e| cfg_err("<file>", format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

fn missing(field: &str) -> Error {
    cfg_err(field, "required for this scenario")
}

fn pmf_at(v: &[f64], field: &str) -> Result<Pmf> {
    Pmf::new(v.to_vec()).map_err(|e| cfg_err(field, e))
}

fn cond_at(rows: &[Vec<f64>], field: &str) -> Result<CondPmf> {
    CondPmf::from_rows(rows.to_vec()).map_err(|e| cfg_err(field, e))
}

fn channel_from(c: &ChannelConfig, field: &str) -> Result<Dmc> {
    match c.preset.as_deref() {
        Some("binary-adder") => Ok(Dmc::binary_adder()),
        Some("binary-xor") => Ok(Dmc::binary_xor()),
        Some("noiseless-pair") => {
            let q = c.q.unwrap_or(2);
            if q < 2 {
                return Err(cfg_err(format!("{field}.q"), "alphabet must have at least 2 symbols"));
            }
            Ok(Dmc::noiseless_pair(q))
        }
        Some(other) => Err(cfg_err(
            format!("{field}.preset"),
            format!("unknown preset `{other}` (binary-adder, binary-xor, noiseless-pair)"),
        )),
        None => {
            let inputs = c.inputs.clone().ok_or_else(|| missing(&format!("{field}.inputs")))?;
            let outputs = c.outputs.ok_or_else(|| missing(&format!("{field}.outputs")))?;
            let rows = c.rows.clone().ok_or_else(|| missing(&format!("{field}.rows")))?;
            Dmc::from_rows(inputs, outputs, rows).map_err(|e| cfg_err(format!("{field}.rows"), e))
        }
    }
}

/// A validated channel-and-law description.
#[derive(Clone, Debug)]
pub enum Model {
    Private { mu_u: Pmf, mu_xgu: Vec<CondPmf>, dmc: Dmc, time_sharing: bool },
    Common { mu_xt: Vec<Pmf>, maps: Vec<SymbolMap>, dmc: Dmc },
    Superposition { mu_x0: Pmf, mu_x1g0: CondPmf, mu_x2g0: CondPmf, dmc: Dmc },
}

impl Model {
    pub fn from_config(c: &ModelConfig, field: &str) -> Result<Model> {
        let dmc = channel_from(&c.channel, &format!("{field}.channel"))?;
        let check_sizes = |sizes: Vec<usize>, what: &str| -> Result<()> {
            if sizes != dmc.input_sizes() {
                return Err(cfg_err(
                    format!("{field}.{what}"),
                    format!("alphabets {sizes:?} do not match channel inputs {:?}", dmc.input_sizes()),
                ));
            }
            Ok(())
        };
        match c.scenario.as_str() {
            "private" => {
                let f = format!("{field}.inputs");
                let inputs = c.inputs.as_ref().ok_or_else(|| missing(&f))?;
                let mu_x = inputs
                    .iter()
                    .enumerate()
                    .map(|(j, p)| pmf_at(p, &format!("{f}[{j}]")))
                    .collect::<Result<Vec<_>>>()?;
                check_sizes(mu_x.iter().map(Pmf::len).collect(), "inputs")?;
                Ok(Model::Private {
                    mu_u: Pmf::uniform(1),
                    mu_xgu: mu_x.iter().map(|m| CondPmf::constant(1, m)).collect(),
                    dmc,
                    time_sharing: false,
                })
            }
            "time-sharing" => {
                let f = format!("{field}.time_sharing");
                let ts = c.time_sharing.as_ref().ok_or_else(|| missing(&f))?;
                let mu_u = pmf_at(&ts.u, &format!("{f}.u"))?;
                let mu_xgu = ts
                    .inputs
                    .iter()
                    .enumerate()
                    .map(|(j, rows)| {
                        let at = format!("{f}.inputs[{j}]");
                        let m = cond_at(rows, &at)?;
                        if m.in_size() != mu_u.len() {
                            return Err(cfg_err(at, format!("needs one row per value of u ({})", mu_u.len())));
                        }
                        Ok(m)
                    })
                    .collect::<Result<Vec<_>>>()?;
                check_sizes(mu_xgu.iter().map(CondPmf::out_size).collect(), "time_sharing.inputs")?;
                Ok(Model::Private {
                    mu_u,
                    mu_xgu,
                    dmc,
                    time_sharing: true,
                })
            }
            "common" => {
                let fa = format!("{field}.aux");
                let aux = c.aux.as_ref().ok_or_else(|| missing(&fa))?;
                let mu_xt = aux
                    .iter()
                    .enumerate()
                    .map(|(j, p)| pmf_at(p, &format!("{fa}[{j}]")))
                    .collect::<Result<Vec<_>>>()?;
                let fm = format!("{field}.maps");
                let maps_cfg = c.maps.as_ref().ok_or_else(|| missing(&fm))?;
                if maps_cfg.len() != dmc.senders() {
                    return Err(cfg_err(&fm, format!("needs one map per sender ({})", dmc.senders())));
                }
                let sizes: Vec<usize> = mu_xt.iter().map(Pmf::len).collect();
                let maps = maps_cfg
                    .iter()
                    .zip(dmc.input_sizes())
                    .enumerate()
                    .map(|(j, (m, &out))| {
                        let map = SymbolMap {
                            inputs: m.inputs.clone(),
                            table: m.table.clone(),
                        };
                        map.validate(&sizes, out).map_err(|e| cfg_err(format!("{fm}[{j}]"), e))?;
                        Ok(map)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Model::Common { mu_xt, maps, dmc })
            }
            "superposition" => {
                let fc = format!("{field}.cloud");
                let mu_x0 = pmf_at(c.cloud.as_ref().ok_or_else(|| missing(&fc))?, &fc)?;
                let fs = format!("{field}.satellites");
                let sats = c.satellites.as_ref().ok_or_else(|| missing(&fs))?;
                if sats.len() != 2 {
                    return Err(cfg_err(&fs, "needs exactly two conditional laws"));
                }
                let conds = sats
                    .iter()
                    .enumerate()
                    .map(|(j, rows)| {
                        let at = format!("{fs}[{j}]");
                        let m = cond_at(rows, &at)?;
                        if m.in_size() != mu_x0.len() {
                            return Err(cfg_err(at, format!("needs one row per cloud symbol ({})", mu_x0.len())));
                        }
                        Ok(m)
                    })
                    .collect::<Result<Vec<_>>>()?;
                check_sizes(conds.iter().map(CondPmf::out_size).collect(), "satellites")?;
                let [mu_x1g0, mu_x2g0]: [CondPmf; 2] = conds.try_into().expect("two laws");
                Ok(Model::Superposition {
                    mu_x0,
                    mu_x1g0,
                    mu_x2g0,
                    dmc,
                })
            }
            other => Err(cfg_err(
                format!("{field}.scenario"),
                format!("unknown scenario `{other}` (private, time-sharing, common, superposition)"),
            )),
        }
    }

    /// Number of rate coordinates.
    pub fn messages(&self) -> usize {
        match self {
            Model::Private { mu_xgu, .. } => mu_xgu.len(),
            Model::Common { mu_xt, .. } => mu_xt.len(),
            Model::Superposition { .. } => 3,
        }
    }

    pub fn law(&self) -> Result<JointLaw> {
        match self {
            Model::Private { mu_u, mu_xgu, dmc, .. } => joint_ts(mu_u, mu_xgu, dmc),
            Model::Common { mu_xt, maps, dmc } => joint_han(mu_xt, maps, dmc),
            Model::Superposition {
                mu_x0,
                mu_x1g0,
                mu_x2g0,
                dmc,
            } => joint_sw(mu_x0, mu_x1g0, mu_x2g0, dmc),
        }
    }

    /// Region constraints; the superposition ones include the auxiliary conditions.
    pub fn constraints(&self, law: &JointLaw) -> Result<Vec<Constraint>> {
        match self {
            Model::Private { .. } => Ok(constraints_private(law)),
            Model::Common { .. } => Ok(constraints_han(law)),
            Model::Superposition { .. } => constraints_sw(law, true),
        }
    }

    pub fn verdict(&self, r: &[f64], law: &JointLaw, include_aux: bool) -> Result<Verdict> {
        match self {
            Model::Private { .. } => in_region_private(r, law),
            Model::Common { .. } => in_region_han(r, law),
            Model::Superposition { .. } => in_region_sw(r, law, include_aux),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Model::Private { time_sharing: false, .. } => "private",
            Model::Private { time_sharing: true, .. } => "time-sharing",
            Model::Common { .. } => "common",
            Model::Superposition { .. } => "superposition",
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn design(
        &self,
        rates: Vec<f64>,
        eps: Vec<f64>,
        ensembles: Vec<EnsembleSpec>,
        n: usize,
        gamma: Option<f64>,
        force: bool,
    ) -> Design {
        match self.clone() {
            Model::Private { mu_u, mu_xgu, dmc, .. } => Design::Private(PrivateDesign {
                mu_u,
                mu_xgu,
                dmc,
                rates,
                eps,
                ensembles,
                n,
                gamma,
                force,
            }),
            Model::Common { mu_xt, maps, dmc } => Design::Common(CommonDesign {
                dmc,
                maps,
                mu_xt,
                rates,
                eps,
                ensembles,
                n,
                gamma,
                force,
            }),
            Model::Superposition {
                mu_x0,
                mu_x1g0,
                mu_x2g0,
                dmc,
            } => Design::Superposition(SuperpositionDesign {
                mu_x0,
                mu_x1g0,
                mu_x2g0,
                dmc,
                rates,
                eps,
                ensembles,
                n,
                gamma,
                force,
            }),
        }
    }
}

fn ensemble_from(c: &EnsembleConfig, field: &str) -> Result<EnsembleSpec> {
    let kind = match c.kind.as_str() {
        "uniform-all-linear" => EnsembleKind::UniformAllLinear,
        "sparse-linear" => EnsembleKind::SparseLinear,
        "random-binning" => EnsembleKind::RandomBinning,
        other => {
            return Err(cfg_err(
                format!("{field}.kind"),
                format!("unknown ensemble `{other}` (uniform-all-linear, sparse-linear, random-binning)"),
            ))
        }
    };
    let f = FieldSpec::new(c.q).map_err(|e| cfg_err(format!("{field}.q"), e))?;
    let mut spec = EnsembleSpec::new(kind, f, 1, 1);
    spec.degree = c.degree;
    if let Some(s) = c.slope {
        if !(s > 0.0) {
            return Err(cfg_err(format!("{field}.slope"), "must be positive"));
        }
        spec.slope = s;
    }
    if c.degree == Some(0) {
        return Err(cfg_err(format!("{field}.degree"), "must be at least 1"));
    }
    Ok(spec)
}

fn check_ladder(n: &[usize], field: &str) -> Result<()> {
    if n.is_empty() {
        return Err(cfg_err(field, "ladder must not be empty"));
    }
    if n[0] == 0 {
        return Err(cfg_err(field, "block lengths must be positive"));
    }
    if n.windows(2).any(|w| w[0] >= w[1]) {
        return Err(cfg_err(field, "ladder must be strictly ascending"));
    }
    Ok(())
}

fn check_rates(r: &[f64], k: usize, field: &str) -> Result<()> {
    if r.len() != k {
        return Err(cfg_err(field, format!("expected {k} rates, got {}", r.len())));
    }
    if let Some(x) = r.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(cfg_err(field, format!("rate {x} must be finite and nonnegative")));
    }
    Ok(())
}

fn join(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(";")
}

// ---------------------------------------------------------------- region

#[derive(Clone, Debug, PartialEq)]
pub struct RegionRow {
    pub point: Vec<f64>,
    pub verdict: Verdict,
    /// Rate split, or why none was found.
    pub split: Option<std::result::Result<RateSplit, String>>,
}

impl RegionRow {
    /// `inside` or `outside: <violated constraint>`.
    pub fn verdict_text(&self) -> String {
        match &self.verdict.witness {
            None => "inside".into(),
            Some(w) => format!("outside: {}", w.label),
        }
    }
}

pub fn cmd_region(cfg: &RegionConfig) -> Result<Vec<RegionRow>> {
    let model = Model::from_config(&cfg.model, "region.model")?;
    let law = model.law()?;
    let k = model.messages();
    let sw = matches!(model, Model::Superposition { .. });
    if cfg.split && !sw {
        return Err(cfg_err("region.split", "rate splitting applies to the superposition scenario only"));
    }
    let mut rows = Vec::with_capacity(cfg.points.len());
    for (i, p) in cfg.points.iter().enumerate() {
        check_rates(p, k, &format!("region.points[{i}]"))?;
        let verdict = model.verdict(p, &law, cfg.include_aux)?;
        let split = if cfg.split && in_region_sw(p, &law, false)?.inside {
            Some(rate_split(p, &law).map_err(|e| e.to_string()))
        } else {
            None
        };
        rows.push(RegionRow {
            point: p.clone(),
            verdict,
            split,
        });
    }
    Ok(rows)
}

pub const REGION_HEADER: [&str; 6] = ["point", "verdict", "lhs", "bound", "split_rates", "split"];

pub fn region_csv(rows: &[RegionRow]) -> Result<String> {
    let mut w = csv_writer();
    w.write_record(REGION_HEADER).map_err(csv_err)?;
    for r in rows {
        let (lhs, bound) = match &r.verdict.witness {
            Some(v) => (v.lhs.to_string(), v.bound.to_string()),
            None => (String::new(), String::new()),
        };
        let (sr, ss) = match &r.split {
            Some(Ok(s)) => (join(&s.rates), join(&s.split)),
            Some(Err(e)) => (String::new(), format!("error: {e}")),
            None => (String::new(), String::new()),
        };
        w.write_record([join(&r.point), r.verdict_text(), lhs, bound, sr, ss])
            .map_err(csv_err)?;
    }
    finish(w)
}

// ---------------------------------------------------------------- simulate

/// One ladder point of a simulation run.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub scenario: String,
    pub n: usize,
    pub rates: Vec<f64>,
    pub ensemble: String,
    pub seed: u64,
    /// Index of the chosen candidate code.
    pub candidate: usize,
    pub report: SimReport,
    pub wall_time_s: f64,
}

pub const SIMULATE_HEADER: [&str; 16] = [
    "scenario",
    "n",
    "rates",
    "ensemble",
    "seed",
    "candidate",
    "trials",
    "errors",
    "block_error",
    "ci_half_width",
    "stage_empty_coset",
    "stage_encoder_atypical",
    "stage_mi_violation",
    "stage_channel_atypical",
    "stage_decoder_collision",
    "wall_time_s",
];

fn scenario_tag(model: &Model) -> u64 {
    // time sharing gets its own stream family so it never reuses private draws
    match model {
        Model::Private { time_sharing: true, .. } => 0x10 | Scenario::PrivateTs.tag(),
        Model::Private { .. } => Scenario::PrivateTs.tag(),
        Model::Common { .. } => Scenario::Common.tag(),
        Model::Superposition { .. } => Scenario::Superposition.tag(),
    }
}

/// Validated simulate run: the model, margins and ensemble shared by every ladder point.
pub struct SimulatePlan {
    model: Model,
    spec: EnsembleSpec,
    eps: Vec<f64>,
    force: bool,
}

impl SimulatePlan {
    pub fn new(cfg: &SimulateConfig, force: bool) -> Result<Self> {
        let model = Model::from_config(&cfg.model, "simulate.model")?;
        let k = model.messages();
        check_rates(&cfg.rates, k, "simulate.rates")?;
        check_ladder(&cfg.n, "simulate.n")?;
        let spec = ensemble_from(&cfg.ensemble, "simulate.ensemble")?;
        if !spec.kind.is_linear() {
            return Err(cfg_err("simulate.ensemble.kind", "codes need a linear ensemble"));
        }
        if cfg.candidates == 0 {
            return Err(cfg_err("simulate.candidates", "must be at least 1"));
        }
        if cfg.trials == 0 {
            return Err(cfg_err("simulate.trials", "must be at least 1"));
        }
        let eps = match &cfg.eps {
            Some(e) => {
                if e.len() != k || e.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                    return Err(cfg_err("simulate.eps", format!("expected {k} nonnegative margins")));
                }
                e.clone()
            }
            None => {
                let law = model.law()?;
                suggest_eps(&cfg.rates, &model.constraints(&law)?)
            }
        };
        Ok(SimulatePlan {
            model,
            spec,
            eps,
            force: force || cfg.force,
        })
    }

    /// Design at block length `n` and the root of its random streams.
    pub fn design(&self, cfg: &SimulateConfig, n: usize) -> (Design, StreamId) {
        let k = self.model.messages();
        let design = self.model.design(
            cfg.rates.clone(),
            self.eps.clone(),
            vec![self.spec.clone(); k],
            n,
            cfg.gamma,
            self.force,
        );
        (design, StreamId::new(scenario_tag(&self.model), n, 0, Purpose::Build, 0))
    }
}

/// Searches and measures one code per ladder point. `force` (or the config's
/// `force`) lets infeasible rates through for outside-region controls.
pub fn cmd_simulate(cfg: &SimulateConfig, seed: u64, force: bool) -> Result<Vec<ResultRow>> {
    let plan = SimulatePlan::new(cfg, force)?;
    let mut rows = Vec::with_capacity(cfg.n.len());
    for &n in &cfg.n {
        let start = Instant::now();
        let (design, stream) = plan.design(cfg, n);
        let found = search_code(&design, cfg.candidates, cfg.pilot_trials, seed, stream)?;
        let measure = stream.with_candidate(found.index).with_purpose(Purpose::Measure);
        let report = simulate_error(&found.code, design.dmc(), cfg.trials, seed, measure)?;
        rows.push(ResultRow {
            scenario: plan.model.name().into(),
            n,
            rates: cfg.rates.clone(),
            ensemble: plan.spec.kind.name().into(),
            seed,
            candidate: found.index,
            report,
            wall_time_s: start.elapsed().as_secs_f64(),
        });
    }
    Ok(rows)
}

/// The simulate CSV; `wall_time` false leaves that column empty so runs can be
/// compared byte for byte.
pub fn simulate_csv(rows: &[ResultRow], wall_time: bool) -> Result<String> {
    let mut w = csv_writer();
    w.write_record(SIMULATE_HEADER).map_err(csv_err)?;
    for r in rows {
        let mut rec = vec![
            r.scenario.clone(),
            r.n.to_string(),
            join(&r.rates),
            r.ensemble.clone(),
            r.seed.to_string(),
            r.candidate.to_string(),
            r.report.trials.to_string(),
            r.report.errors.to_string(),
            r.report.block_error.to_string(),
            r.report.ci_half_width.to_string(),
        ];
        rec.extend(Stage::ALL.iter().map(|&s| r.report.stage_count(s).to_string()));
        rec.push(if wall_time { format!("{:.3}", r.wall_time_s) } else { String::new() });
        w.write_record(&rec).map_err(csv_err)?;
    }
    finish(w)
}

// ---------------------------------------------------------------- verify

pub fn verify_options(cfg: &VerifyConfig, seed: u64) -> Result<(Suite, verify::Options)> {
    let suite = Suite::parse(&cfg.suite)
        .ok_or_else(|| cfg_err("verify.suite", format!("unknown suite `{}` (types, hash, codec, regions, all)", cfg.suite)))?;
    let fault = match &cfg.fault {
        None => None,
        Some(f) => Some(Fault::parse(f).ok_or_else(|| cfg_err("verify.fault", format!("unknown fault `{f}` (lambda-sign)")))?),
    };
    let mut opts = verify::Options {
        seed,
        fault,
        ..verify::Options::default()
    };
    if let Some(ns) = &cfg.ns {
        if ns.is_empty() || ns.iter().any(|&n| n == 0 || n > 12) {
            return Err(cfg_err("verify.ns", "block lengths must lie in 1..=12"));
        }
        opts.types.ns = ns.clone();
    }
    if let Some(g) = &cfg.gammas {
        if g.is_empty() || g.iter().any(|&x| !(x > 0.0 && x <= 0.125)) {
            return Err(cfg_err("verify.gammas", "every gamma must lie in (0, 1/8]"));
        }
        opts.types.gammas = g.clone();
    }
    opts.hash_instances = cfg.hash_instances.unwrap_or(opts.hash_instances);
    opts.codec_instances = cfg.codec_instances.unwrap_or(opts.codec_instances);
    opts.split_points = cfg.split_points.unwrap_or(opts.split_points);
    Ok((suite, opts))
}

pub fn cmd_verify(cfg: &VerifyConfig, seed: u64) -> Result<Vec<SuiteReport>> {
    let (suite, opts) = verify_options(cfg, seed)?;
    verify::run(suite, &opts)
}

pub const VERIFY_HEADER: [&str; 6] = ["suite", "lemma", "cases", "violations", "skipped", "passed"];

pub fn verify_csv(reports: &[SuiteReport]) -> Result<String> {
    let mut w = csv_writer();
    w.write_record(VERIFY_HEADER).map_err(csv_err)?;
    for rep in reports {
        for l in &rep.lemmas {
            w.write_record([
                rep.suite.name().to_string(),
                l.name.clone(),
                l.cases.to_string(),
                l.violations.to_string(),
                l.skipped.to_string(),
                l.passed().to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    finish(w)
}

// ---------------------------------------------------------------- ensemble stats

#[derive(Clone, Debug, PartialEq)]
pub struct StatsRow {
    pub n: usize,
    pub kind: String,
    pub rows: usize,
    /// Column degree for the sparse ensemble.
    pub degree: Option<usize>,
    pub alpha: f64,
    pub beta: f64,
    pub provenance: Provenance,
}

pub const STATS_HEADER: [&str; 8] = ["n", "kind", "rows", "degree", "alpha", "beta", "provenance", "half_width"];

pub fn cmd_ensemble_stats(cfg: &EnsembleStatsConfig, seed: u64) -> Result<Vec<StatsRow>> {
    check_ladder(&cfg.n, "ensemble_stats.n")?;
    if !(cfg.row_ratio > 0.0 && cfg.row_ratio <= 1.0) {
        return Err(cfg_err("ensemble_stats.row_ratio", "must lie in (0, 1]"));
    }
    let mode = match cfg.mode.as_str() {
        "exact" => Mode::Exact,
        "monte-carlo" if cfg.samples > 0 => Mode::MonteCarlo(cfg.samples),
        "monte-carlo" => return Err(cfg_err("ensemble_stats.samples", "must be at least 1")),
        other => {
            return Err(cfg_err(
                "ensemble_stats.mode",
                format!("unknown mode `{other}` (exact, monte-carlo)"),
            ))
        }
    };
    let specs = cfg
        .ensembles
        .iter()
        .enumerate()
        .map(|(i, e)| ensemble_from(e, &format!("ensemble_stats.ensembles[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for &n in &cfg.n {
        let rows = ((cfg.row_ratio * n as f64).round() as usize).max(1);
        for (i, s) in specs.iter().enumerate() {
            let spec = s.with_dims(rows, n);
            let mut rng = StreamId::new(0, n, i, Purpose::Stats, 0).rng(seed);
            let p = estimate_hash_params(&spec, mode, &mut rng)?;
            out.push(StatsRow {
                n,
                kind: spec.kind.name().into(),
                rows,
                degree: (spec.kind == EnsembleKind::SparseLinear).then(|| spec.column_degree()),
                alpha: p.alpha,
                beta: p.beta,
                provenance: p.provenance,
            });
        }
    }
    Ok(out)
}

pub fn stats_csv(rows: &[StatsRow]) -> Result<String> {
    let mut w = csv_writer();
    w.write_record(STATS_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.kind.clone(),
            r.rows.to_string(),
            r.degree.map_or(String::new(), |d| d.to_string()),
            r.alpha.to_string(),
            r.beta.to_string(),
            r.provenance.name().to_string(),
            r.provenance.half_width().to_string(),
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

// ---------------------------------------------------------------- csv plumbing

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

/// Drops the last column (wall time) of every line, for run-to-run comparison.
pub fn strip_wall_time(csv_text: &str) -> String {
    csv_text
        .lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head))
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    const ADDER_REGION: &str = r#"{
        "region": {
            "model": {"scenario": "private", "channel": {"preset": "binary-adder"},
                      "inputs": [[0.5, 0.5], [0.5, 0.5]]},
            "points": [[0.5, 0.5], [1.0, 1.0]]
        }
    }"#;

    #[test]
    fn adder_region_report() {
        let cfg = parse_config(ADDER_REGION).unwrap();
        let rows = cmd_region(cfg.region.as_ref().unwrap()).unwrap();
        assert_eq!(rows[0].verdict_text(), "inside");
        assert_eq!(rows[1].verdict_text(), "outside: J={1,2}");
        let csv = region_csv(&rows).unwrap();
        assert!(csv.starts_with("point,verdict,lhs,bound,split_rates,split\n"));
    }

    #[test]
    fn empty_point_list() {
        let text = ADDER_REGION.replace("[[0.5, 0.5], [1.0, 1.0]]", "[]");
        let cfg = parse_config(&text).unwrap();
        assert!(cmd_region(cfg.region.as_ref().unwrap()).unwrap().is_empty());
    }

    #[test]
    fn errors_name_the_field() {
        let text = ADDER_REGION.replace("[0.5, 0.5], [0.5, 0.5]", "[0.5, 0.6], [0.5, 0.5]");
        let cfg = parse_config(&text).unwrap();
        match cmd_region(cfg.region.as_ref().unwrap()) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "region.model.inputs[0]"),
            other => panic!("{other:?}"),
        }
        let err = parse_config(r#"{"regoin": {}}"#).unwrap_err();
        assert!(err.to_string().contains("regoin"), "{err}");
    }

    #[test]
    fn ladder_must_ascend() {
        assert!(check_ladder(&[4, 8], "n").is_ok());
        assert!(check_ladder(&[8, 4], "n").is_err());
        assert!(check_ladder(&[4, 4], "n").is_err());
        assert!(check_ladder(&[], "n").is_err());
    }

    #[test]
    fn wall_time_strip() {
        assert_eq!(strip_wall_time("a,b,c\n1,2,3.5\n"), "a,b\n1,2");
    }
}
