//! Configured executions: one JSON document in, a trace and a report out.
//!
//! Resolution is deterministic, and the report echoes the resolved
//! configuration, so feeding the echo back reproduces the run bit for bit.
//! Seeds for the individual random choices are derived from
//! `system.seed` with [`hash_words`] and a fixed tag per use.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::complementary::{
    faulty_assignment, ideal_localized_init, FaultyBits, Guarantee, LocalizedProtocolModel,
};
use crate::engine::{self, growth_check, AdversaryScript, Dynamics, InitiationSpec, ScriptKind, ThresholdMode, Trace, TriggerRule};
use crate::error::{Error, Result};
use crate::faults::{compute_p, place_faults, FaultPartition, FaultStrategy};
use crate::graph::{build_lps_graph, build_random_regular, read_adjacency, Graph, Origin};
use crate::params::{
    floor_count, lemma2_holds, lemma5_holds, mu_bound, theorem1_params, threshold, ProtocolParams,
    Theorem1Params, Verdict, DEFAULT_EPS,
};
use crate::properties::{summarize, PropertyReport};
use crate::seed::{hash_words, point_seed};

const TAG_ADVERSARY: u64 = 1;
const TAG_GENERAL_BITS: u64 = 2;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GraphSpec {
    Lps { p: u64, q: u64 },
    Random { n: usize, d: usize, seed: u64 },
    File { path: String },
    Complete { n: usize },
    Cycle { n: usize },
    Petersen,
}

impl GraphSpec {
    pub fn build(&self) -> Result<Graph> {
        match self {
            GraphSpec::Lps { p, q } => build_lps_graph(*p, *q),
            GraphSpec::Random { n, d, seed } => build_random_regular(*n, *d, *seed),
            GraphSpec::File { path } => {
                let text = std::fs::read_to_string(path)?;
                read_adjacency(&text, Origin::File { path: path.clone() })
            }
            GraphSpec::Complete { n } => Graph::complete(*n),
            GraphSpec::Cycle { n } => Graph::cycle(*n),
            GraphSpec::Petersen => Ok(Graph::petersen()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    /// Must match the graph when given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub alpha: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultSection {
    #[serde(default)]
    pub strategy: FaultStrategy,
    /// Defaults to `floor(alpha · n)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneralMode {
    #[default]
    Correct,
    Faulty,
    None,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitiationSection {
    /// Requested General; node 0 when absent. A correct General outside `P`
    /// moves to the nearest `P` node, a faulty one to the nearest faulty
    /// node (BFS order, ascending-id tie-break).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub general: Option<usize>,
    #[serde(default)]
    pub mode: GeneralMode,
    #[serde(default)]
    pub k0: usize,
    /// What a faulty General sends.
    #[serde(default)]
    pub faulty_bits: FaultyBits,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplementarySection {
    pub c: usize,
    /// Reach; derived with `u` from `mu` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<usize>,
    /// Trigger threshold; derived with `s` from `mu` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<usize>,
    /// Closure ratio used to derive `u` and `s`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    /// Channel delay; defaults to `c`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latency: Option<usize>,
    #[serde(default)]
    pub guarantee: Guarantee,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunMode {
    Pure,
    Complementary,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    /// Must agree with the presence of the `complementary` section.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<RunMode>,
    #[serde(default)]
    pub threshold_mode: ThresholdMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kh_budget: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kdelta_budget: Option<usize>,
}

fn default_adversary() -> AdversaryScript {
    AdversaryScript::new(ScriptKind::Blast)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub graph: GraphSpec,
    pub system: SystemSection,
    pub protocol: ProtocolParams,
    #[serde(default)]
    pub faults: FaultSection,
    #[serde(default)]
    pub initiation: InitiationSection,
    #[serde(default = "default_adversary")]
    pub adversary: AdversaryScript,
    #[serde(default)]
    pub complementary: Option<ComplementarySection>,
    #[serde(default)]
    pub run: RunSection,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn mode(&self) -> RunMode {
        if self.complementary.is_some() {
            RunMode::Complementary
        } else {
            RunMode::Pure
        }
    }
}

fn ceil_log2(n: usize) -> usize {
    n.max(1).next_power_of_two().trailing_zeros() as usize
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub n: usize,
    pub d: usize,
    pub lambda: f64,
    pub bipartite: bool,
    pub ramanujan_bound: f64,
    pub origin: Origin,
}

impl GraphSummary {
    pub fn of(g: &Graph) -> Self {
        GraphSummary {
            n: g.n(),
            d: g.degree(),
            lambda: g.lambda(),
            bipartite: g.is_bipartite(),
            ramanujan_bound: g.ramanujan_bound(),
            origin: g.origin().clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionSummary {
    #[serde(rename = "T")]
    pub t: Vec<usize>,
    #[serde(rename = "Z_size")]
    pub z_size: usize,
    #[serde(rename = "P_size")]
    pub p_size: usize,
    pub mu_achieved: f64,
    pub mu_undefined: bool,
    /// `null` when there are no faults.
    pub mu_bound: f64,
    /// Closure bound condition for these coefficients and the measured
    /// spectral value.
    pub closure_condition: Verdict,
    /// `|P| > n - mu_bound · |T|`.
    pub closure_bound_met: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplementarySummary {
    pub c: usize,
    pub s: usize,
    pub u: usize,
    pub latency: usize,
    pub guarantee: Guarantee,
    /// `u` and `s` came from the configuration rather than from `mu`.
    pub constants_overridden: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derived: Option<Theorem1Params>,
    pub min_reach_size: usize,
    /// Nodes whose reach set is smaller than `u`.
    pub unreachable_trigger_nodes: usize,
    pub degree_budget: usize,
    /// `d + degree_budget`.
    pub extended_degree: usize,
    /// Logarithmic-time propagation conditions, when `theta0` is set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fast_propagation: Option<Verdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub graph: GraphSummary,
    pub partition: PartitionSummary,
    pub general: Option<usize>,
    pub general_relocated: bool,
    pub initiation: InitiationSpec,
    pub excitation_threshold: usize,
    pub trigger_threshold: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub complementary: Option<ComplementarySummary>,
    pub properties: PropertyReport,
    /// First firing round per node; `null` for nodes that never fire.
    pub trigger_rounds: Vec<Option<usize>>,
    /// Rounds where excitation over `P` failed to grow after the first
    /// decision.
    pub growth_violations: Vec<usize>,
    pub notes: Vec<String>,
}

impl RunReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

/// Everything about a run except its trace.
pub struct Prepared {
    pub config: RunConfig,
    pub partition: FaultPartition,
    pub general: Option<usize>,
    pub general_relocated: bool,
    pub initiation: InitiationSpec,
    pub dynamics: Dynamics,
    pub kh_budget: usize,
    pub kdelta_budget: usize,
    pub complementary: Option<ComplementarySummary>,
    pub notes: Vec<String>,
}

/// Resolves `config` against `g`.
pub fn prepare(config: &RunConfig, g: &Graph) -> Result<Prepared> {
    let n = g.n();
    let d = g.degree();
    let mut cfg = config.clone();
    let mut notes = Vec::new();
    if let Some(cn) = cfg.system.n {
        if cn != n {
            return Err(Error::Config(format!("system.n = {cn} but the graph has {n} nodes")));
        }
    }
    cfg.system.n = Some(n);
    if !(0.0..1.0).contains(&cfg.system.alpha) {
        return Err(Error::validation(format!("alpha = {} outside [0, 1)", cfg.system.alpha)));
    }
    cfg.protocol.validate()?;
    match (cfg.run.mode, cfg.mode()) {
        (Some(RunMode::Complementary), RunMode::Pure) => {
            return Err(Error::Config("run.mode is complementary but there is no complementary section".into()))
        }
        (Some(RunMode::Pure), RunMode::Complementary) => {
            return Err(Error::Config("run.mode is pure but a complementary section is present".into()))
        }
        _ => {}
    }
    cfg.run.mode = Some(cfg.mode());
    let seed = cfg.system.seed;
    let beta0 = cfg.protocol.beta0;

    // Faults, placed around the requested General where asked.
    let requested = cfg.initiation.general.unwrap_or(0);
    g.check_node(requested)?;
    let f = cfg
        .faults
        .f
        .unwrap_or_else(|| floor_count(cfg.system.alpha * n as f64));
    cfg.faults.f = Some(f);
    if let FaultStrategy::AroundInitiation { anchor, include_anchor } = &mut cfg.faults.strategy {
        if anchor.is_none() {
            *anchor = Some(requested);
            *include_anchor = cfg.initiation.mode == GeneralMode::Faulty;
        }
    }
    let t = place_faults(g, &cfg.faults.strategy, f, seed, beta0)?;
    let partition = compute_p(g, &t, beta0)?;

    // The General.
    let (general, general_relocated) = match cfg.initiation.mode {
        GeneralMode::None => (None, false),
        GeneralMode::Correct => {
            let npc = partition.npc_mask();
            let g0 = g
                .bfs_order(&[requested], None)
                .into_iter()
                .find(|&v| npc[v])
                .ok_or_else(|| Error::Config("no correct node outside the fault closure".into()))?;
            (Some(g0), g0 != requested)
        }
        GeneralMode::Faulty => {
            let faulty = partition.faulty_mask();
            let g0 = g
                .bfs_order(&[requested], None)
                .into_iter()
                .find(|&v| faulty[v])
                .ok_or_else(|| Error::Config("a faulty General needs at least one fault".into()))?;
            (Some(g0), g0 != requested)
        }
    };
    if general_relocated {
        notes.push(format!(
            "general moved from {requested} to {}",
            general.expect("relocation implies a General")
        ));
    }
    cfg.initiation.general = general.or(Some(requested));

    if cfg.adversary.seed.is_none() {
        cfg.adversary.seed = Some(hash_words(&[seed, TAG_ADVERSARY]));
    }
    let bits_seed = hash_words(&[seed, TAG_GENERAL_BITS]);
    let k0 = cfg.initiation.k0;
    let log_n = ceil_log2(n);
    let excitation = threshold(cfg.protocol.beta, d);

    let (initiation, trigger, complementary, k_max_default, budget_default) = match &mut cfg.complementary {
        None => {
            let initiation = match general {
                None => InitiationSpec::none(),
                Some(g0) => {
                    let mut closed = vec![g0];
                    closed.extend_from_slice(g.neighbors(g0));
                    let mut spec = InitiationSpec::correct(Some(g0), closed, k0);
                    if cfg.initiation.mode == GeneralMode::Faulty {
                        spec.general_correct = false;
                        let mut rng = ChaCha8Rng::seed_from_u64(bits_seed);
                        spec.per_node_init_bits = faulty_assignment(&spec.nodes, &cfg.initiation.faulty_bits, &mut rng)?;
                    }
                    spec
                }
            };
            let k_max = k0 + n;
            (
                initiation,
                TriggerRule::neighbours(threshold(cfg.protocol.beta2, d)),
                None,
                k_max,
                k_max - k0 + 1,
            )
        }
        Some(section) => {
            let latency = *section.latency.get_or_insert(section.c);
            let overridden = section.s.is_some() && section.u.is_some();
            let derived = if overridden {
                None
            } else {
                let mu = section.mu.ok_or_else(|| {
                    Error::Config("complementary section needs either both s and u, or mu".into())
                })?;
                Some(theorem1_params(cfg.system.alpha, n, mu)?)
            };
            let s = section.s.or(derived.map(|p| p.s_local)).expect("s resolved");
            let u = section.u.or(derived.map(|p| p.u_trigger)).expect("u resolved");
            section.s = Some(s);
            section.u = Some(u);
            if u == 0 {
                return Err(Error::Config("trigger threshold u must be at least 1".into()));
            }
            let model = LocalizedProtocolModel::select(g, section.c, s, latency, section.guarantee)?;
            let min_reach = model.min_set_size();
            let unreachable = model.sets.iter().filter(|s| s.len() < u).count();
            if !overridden && u >= min_reach {
                return Err(Error::Config(format!(
                    "derived trigger threshold u = {u} is not below the smallest reach set ({min_reach}); set s and u explicitly"
                )));
            }
            if overridden {
                notes.push(format!("s = {s} and u = {u} set explicitly"));
            }
            if unreachable > 0 {
                notes.push(format!("{unreachable} nodes have fewer than u = {u} nodes in reach"));
            }
            let fast_propagation = cfg.protocol.theta0.map(|theta0| {
                if cfg.protocol.eps.is_none() {
                    notes.push(format!("eps not set; using {DEFAULT_EPS}"));
                }
                lemma5_holds(cfg.system.alpha, theta0, d, cfg.protocol.eps(), cfg.protocol.beta, beta0)
            });
            let initiation = match general {
                None => InitiationSpec::none(),
                Some(g0) => ideal_localized_init(&model, g0, &partition, k0, &cfg.initiation.faulty_bits, bits_seed)?,
            };
            let summary = ComplementarySummary {
                c: section.c,
                s,
                u,
                latency,
                guarantee: section.guarantee,
                constants_overridden: overridden,
                derived,
                min_reach_size: min_reach,
                unreachable_trigger_nodes: unreachable,
                degree_budget: model.degree_budget(d),
                extended_degree: d + model.degree_budget(d),
                fast_propagation,
            };
            let horizon = latency + 4 * log_n;
            (initiation, model.trigger_rule(u), Some(summary), k0 + horizon + 16, horizon + 4)
        }
    };
    let k_max = *cfg.run.k_max.get_or_insert(k_max_default);
    let kh_budget = *cfg.run.kh_budget.get_or_insert(budget_default);
    let kdelta_budget = *cfg.run.kdelta_budget.get_or_insert(budget_default);
    if k_max < initiation.delivery_round {
        return Err(Error::Config(format!(
            "k_max = {k_max} ends before the input is delivered at round {}",
            initiation.delivery_round
        )));
    }
    let dynamics = Dynamics::from_counts(excitation, trigger, cfg.run.threshold_mode, k_max);
    Ok(Prepared {
        config: cfg,
        partition,
        general,
        general_relocated,
        initiation,
        dynamics,
        kh_budget,
        kdelta_budget,
        complementary,
        notes,
    })
}

impl Prepared {
    pub fn properties(&self, trace: &Trace) -> Result<PropertyReport> {
        summarize(trace, &self.initiation, self.kh_budget, self.kdelta_budget, &self.partition.p)
    }

    pub fn execute(&self, g: &Graph) -> Result<Trace> {
        engine::run(
            g,
            &self.partition.t,
            &self.config.adversary,
            &self.initiation,
            self.dynamics.clone(),
        )
    }

    fn report(self, g: &Graph, trace: &Trace) -> Result<RunReport> {
        let properties = self.properties(trace)?;
        let alpha = self.config.system.alpha;
        let beta0 = self.config.protocol.beta0;
        let bound = mu_bound(alpha, beta0);
        let part = &self.partition;
        let partition = PartitionSummary {
            t: part.t.clone(),
            z_size: part.z.len(),
            p_size: part.p.len(),
            mu_achieved: part.mu_achieved,
            mu_undefined: part.mu_undefined,
            mu_bound: bound,
            closure_condition: lemma2_holds(alpha, beta0, g.degree(), g.lambda()),
            closure_bound_met: (part.p.len() as f64) > g.n() as f64 - bound * part.t.len() as f64
                || part.t.is_empty(),
        };
        Ok(RunReport {
            graph: GraphSummary::of(g),
            partition,
            general: self.general,
            general_relocated: self.general_relocated,
            excitation_threshold: self.dynamics.excitation_threshold,
            trigger_threshold: self.dynamics.trigger.threshold,
            complementary: self.complementary,
            trigger_rounds: (0..g.n()).map(|i| trace.trigger_round(i)).collect(),
            growth_violations: growth_check(trace, &part.p),
            properties,
            initiation: self.initiation,
            notes: self.notes,
            config: self.config,
        })
    }
}

/// Runs `config` on an already built graph.
pub fn run_on(config: &RunConfig, g: &Graph) -> Result<(Trace, RunReport)> {
    let prepared = prepare(config, g)?;
    let trace = prepared.execute(g)?;
    let report = prepared.report(g, &trace)?;
    Ok((trace, report))
}

pub fn run_config(config: &RunConfig) -> Result<(Trace, RunReport)> {
    let g = config.graph.build()?;
    run_on(config, &g)
}

/// Property report for a stored trace, resolved against `config`.
pub fn check_trace(config: &RunConfig, g: &Graph, trace: &Trace) -> Result<PropertyReport> {
    let prepared = prepare(config, g)?;
    if trace.n() != g.n() || trace.k_max() != prepared.dynamics.k_max {
        return Err(Error::validation(format!(
            "trace has {} nodes and {} rounds; the configuration expects {} and {}",
            trace.n(),
            trace.k_max() + 1,
            g.n(),
            prepared.dynamics.k_max + 1
        )));
    }
    let faulty = prepared.partition.faulty_mask();
    if trace.correct.iter().zip(&faulty).any(|(&c, &f)| c == f) {
        return Err(Error::validation("trace fault set differs from the configured one"));
    }
    prepared.properties(trace)
}

/// One swept parameter: a dotted path into the configuration and its values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub path: String,
    pub values: Vec<Value>,
}

fn default_seeds() -> usize {
    1
}

fn default_cap() -> usize {
    10_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub template: Value,
    #[serde(default)]
    pub axes: Vec<Axis>,
    /// Runs per grid point.
    #[serde(default = "default_seeds")]
    pub seeds: usize,
    /// Largest admissible number of runs.
    #[serde(default = "default_cap")]
    pub cap: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub point_id: usize,
    pub seed: u64,
    pub values: Vec<Value>,
    pub heaviside: bool,
    pub dirac: bool,
    pub unforgeability: bool,
    pub poor_fraction: f64,
    #[serde(rename = "measured_kH")]
    pub measured_kh: Option<usize>,
    pub measured_kdelta: Option<usize>,
    pub error: Option<String>,
}

impl SweepRow {
    pub fn pass(&self) -> bool {
        self.error.is_none() && self.heaviside && self.dirac && self.unforgeability
    }
}

fn set_path(doc: &mut Value, path: &str, value: Value) -> Result<()> {
    let mut cur = doc;
    let parts: Vec<&str> = path.split('.').collect();
    for (k, part) in parts.iter().enumerate() {
        let obj = cur
            .as_object_mut()
            .ok_or_else(|| Error::Config(format!("{path}: {part} is not inside an object")))?;
        if k + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        cur = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    Err(Error::Config("empty axis path".into()))
}

/// One expanded run: point id, seed, axis values and the config.
pub type SweepRun = (usize, u64, Vec<Value>, RunConfig);

/// Configurations of a sweep, in canonical order: grid points in row-major
/// order of the axes, then repetitions. Point `p` runs with seed
/// `template seed XOR splitmix64(p)`.
pub fn expand_sweep(spec: &SweepSpec) -> Result<Vec<SweepRun>> {
    let points: usize = spec.axes.iter().map(|a| a.values.len()).product();
    let total = points * spec.seeds;
    if total > spec.cap {
        return Err(Error::Config(format!("{total} runs exceed the cap of {}", spec.cap)));
    }
    let base: RunConfig = serde_json::from_value(spec.template.clone())?;
    let mut out = Vec::with_capacity(total);
    for point in 0..points {
        let mut doc = spec.template.clone();
        let mut values = Vec::with_capacity(spec.axes.len());
        let mut rest = point;
        for axis in spec.axes.iter().rev() {
            let v = axis.values[rest % axis.values.len()].clone();
            rest /= axis.values.len();
            values.push((axis.path.clone(), v));
        }
        values.reverse();
        for (path, v) in &values {
            set_path(&mut doc, path, v.clone())?;
        }
        for rep in 0..spec.seeds {
            let id = point * spec.seeds + rep;
            let seed = point_seed(base.system.seed, id as u64);
            let mut cfg: RunConfig = serde_json::from_value(doc.clone())?;
            cfg.system.seed = seed;
            out.push((id, seed, values.iter().map(|(_, v)| v.clone()).collect(), cfg));
        }
    }
    Ok(out)
}

/// Runs a sweep in parallel. Distinct graphs are built once; per-run
/// failures are recorded in the row instead of aborting the sweep.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    let runs = expand_sweep(spec)?;
    let mut graphs: BTreeMap<String, Graph> = BTreeMap::new();
    for (_, _, _, cfg) in &runs {
        let key = serde_json::to_string(&cfg.graph)?;
        if let std::collections::btree_map::Entry::Vacant(e) = graphs.entry(key) {
            e.insert(cfg.graph.build()?);
        }
    }
    Ok(runs
        .par_iter()
        .map(|(id, seed, values, cfg)| {
            let key = serde_json::to_string(&cfg.graph).expect("graph spec serialises");
            let outcome = run_on(cfg, &graphs[&key]);
            let mut row = SweepRow {
                point_id: *id,
                seed: *seed,
                values: values.clone(),
                heaviside: false,
                dirac: false,
                unforgeability: false,
                poor_fraction: f64::NAN,
                measured_kh: None,
                measured_kdelta: None,
                error: None,
            };
            match outcome {
                Ok((_, report)) => {
                    let p = report.properties;
                    row.heaviside = p.heaviside_pass;
                    row.dirac = p.dirac_pass;
                    row.unforgeability = p.unforgeability_pass;
                    row.poor_fraction = p.poor_fraction;
                    row.measured_kh = p.measured_kh;
                    row.measured_kdelta = p.measured_kdelta;
                }
                Err(e) => row.error = Some(e.to_string()),
            }
            row
        })
        .collect())
}

/// CSV summary: `point_id, seed, <axis paths>, heaviside, dirac,
/// unforgeability, poor_fraction, measured_kH, measured_kdelta, error`.
pub fn sweep_csv(spec: &SweepSpec, rows: &[SweepRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["point_id".to_string(), "seed".to_string()];
    header.extend(spec.axes.iter().map(|a| a.path.clone()));
    header.extend(
        ["heaviside", "dirac", "unforgeability", "poor_fraction", "measured_kH", "measured_kdelta", "error"]
            .map(String::from),
    );
    let io = |e: csv::Error| Error::Execution(e.to_string());
    w.write_record(&header).map_err(io)?;
    let opt = |v: Option<usize>| v.map_or(String::new(), |v| v.to_string());
    for r in rows {
        let mut rec = vec![r.point_id.to_string(), r.seed.to_string()];
        rec.extend(r.values.iter().map(|v| match v {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        }));
        rec.extend([
            r.heaviside.to_string(),
            r.dirac.to_string(),
            r.unforgeability.to_string(),
            r.poor_fraction.to_string(),
            opt(r.measured_kh),
            opt(r.measured_kdelta),
            r.error.clone().unwrap_or_default(),
        ]);
        w.write_record(&rec).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Execution(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn k4_config() -> Value {
        json!({
            "graph": {"kind": "complete", "n": 4},
            "system": {"alpha": 0.0, "seed": 1},
            "protocol": {"beta": 0.3, "beta0": 0.3, "beta2": 0.3},
            "initiation": {"general": 0}
        })
    }

    #[test]
    fn fault_free_complete_graph() {
        let cfg: RunConfig = serde_json::from_value(k4_config()).unwrap();
        let (trace, report) = run_config(&cfg).unwrap();
        assert_eq!(trace.k_max(), 4);
        assert_eq!(trace.x[1], vec![true; 4]);
        assert!(report.properties.pass());
        assert_eq!(report.properties.poor_fraction, 0.0);
        assert_eq!(report.properties.measured_kh, Some(1));
        assert!(report.growth_violations.is_empty());
        let csv = trace.to_csv().unwrap();
        assert!(csv.contains("\n1,2,0,1,1,1\n"));
    }

    #[test]
    fn unknown_keys_rejected() {
        let mut doc = k4_config();
        doc["protocol"]["gamma"] = json!(0.1);
        assert!(serde_json::from_value::<RunConfig>(doc).is_err());
        let mut doc = k4_config();
        doc["extra"] = json!(1);
        assert!(serde_json::from_value::<RunConfig>(doc).is_err());
    }

    #[test]
    fn echo_reruns_identically() {
        let doc = json!({
            "graph": {"kind": "random", "n": 64, "d": 6, "seed": 3},
            "system": {"alpha": 0.05, "seed": 9},
            "protocol": {"beta": 0.34, "beta0": 0.34, "beta2": 0.5},
            "faults": {"strategy": {"kind": "around-initiation"}},
            "initiation": {"general": 5, "mode": "faulty"},
            "adversary": {"strategy": "flicker"},
            "complementary": {"c": 2, "s": 20, "u": 8}
        });
        let cfg: RunConfig = serde_json::from_value(doc).unwrap();
        let (t1, r1) = run_config(&cfg).unwrap();
        let (t2, r2) = run_config(&r1.config).unwrap();
        assert_eq!(t1, t2);
        assert_eq!(r1.to_json().unwrap(), r2.to_json().unwrap());
        assert!(r1.partition.t.contains(&5));
        assert_eq!(r1.general, Some(5));
    }

    #[test]
    fn stored_trace_check_matches() {
        let doc = json!({
            "graph": {"kind": "random", "n": 64, "d": 6, "seed": 3},
            "system": {"alpha": 0.05, "seed": 2},
            "protocol": {"beta": 0.34, "beta0": 0.34, "beta2": 0.5},
            "adversary": {"strategy": "split-half"}
        });
        let cfg: RunConfig = serde_json::from_value(doc).unwrap();
        let g = cfg.graph.build().unwrap();
        let (trace, report) = run_on(&cfg, &g).unwrap();
        let back = Trace::from_csv(&trace.to_csv().unwrap()).unwrap();
        assert_eq!(check_trace(&report.config, &g, &back).unwrap(), report.properties);
    }

    #[test]
    fn derived_constants_must_be_usable() {
        let mut doc = k4_config();
        doc["complementary"] = json!({"c": 1, "mu": 2.0});
        doc["system"]["alpha"] = json!(0.25);
        let cfg: RunConfig = serde_json::from_value(doc).unwrap();
        assert!(matches!(run_config(&cfg), Err(Error::Config(_))));
        let mut doc = k4_config();
        doc["complementary"] = json!({"c": 1});
        let cfg: RunConfig = serde_json::from_value(doc).unwrap();
        assert!(matches!(run_config(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn mode_must_match_sections() {
        let mut doc = k4_config();
        doc["run"] = json!({"mode": "complementary"});
        let cfg: RunConfig = serde_json::from_value(doc).unwrap();
        assert!(run_config(&cfg).is_err());
    }

    #[test]
    fn sweep_cardinality_and_order() {
        let spec = SweepSpec {
            template: k4_config(),
            axes: vec![Axis { path: "protocol.beta".into(), values: vec![json!(0.2), json!(0.25)] }],
            seeds: 10,
            cap: 100,
        };
        let rows = run_sweep(&spec).unwrap();
        assert_eq!(rows.len(), 20);
        assert!(rows.iter().enumerate().all(|(k, r)| r.point_id == k));
        assert_eq!(rows[13].values, vec![json!(0.25)]);
        assert_eq!(rows[13].seed, 1 ^ crate::seed::splitmix64(13));
        let csv = sweep_csv(&spec, &rows).unwrap();
        assert_eq!(csv.lines().count(), 21);
        assert!(csv.starts_with("point_id,seed,protocol.beta,heaviside"));

        let single = SweepSpec { axes: vec![], seeds: 1, ..spec.clone() };
        assert_eq!(run_sweep(&single).unwrap().len(), 1);
        let capped = SweepSpec { cap: 5, ..spec };
        assert!(run_sweep(&capped).is_err());
    }
}
