//! Stage execution and report writing.

use std::collections::BTreeMap;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use hdx_core::complex::{build_coset_complex, check_strong_symmetry, CosetComplex, SimplicialComplex, SymmetryCertificate};
use hdx_core::cones::{
    build_cone, crad_upper, existence_equivalence_test, m_constants, radius_and_diameter, verify_cone,
    ConeError, ConeOutcome, ConeReport,
};
use hdx_core::expansion::{
    certificate_theorem_crad, certificate_theorem_n0n1, cosystolic_checklist, exp0_known, exp_b,
    expansion_report, verify_chung_bound, ExpansionError, Known,
};
use hdx_core::groups::{bounded_generation_diameter, GroupError};
use hdx_core::homology::{betti, cobetti, sys_cardinality, FillMode, HomologyError};
use hdx_core::presentation::{
    dehn_estimate, field_alphabet, path_to_word, q_independence, relations_from_tables, sfill1_upper,
    triangle_trace, verify_residual_relations, DehnEstimate, Family,
};
use hdx_core::rational::to_text;
use hdx_core::spectral::{certified_lambda2, local_spectral_sweep, second_eigenvalue, WeightedGraph};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{ConstructionKind, ExperimentConfig, Stage};

pub const ARTIFACT: &str = "hdx";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_INVARIANT: i32 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    NotApplicable,
    TooLarge,
    Error,
    Skipped,
}

impl Status {
    fn exit_code(self) -> i32 {
        match self {
            Status::Ok | Status::NotApplicable | Status::Skipped => EXIT_OK,
            Status::TooLarge => EXIT_BUDGET,
            Status::Error => EXIT_INVARIANT,
        }
    }
}

/// How a stage can fail.
#[derive(Debug)]
pub enum StageError {
    Budget(String),
    Invariant(String),
    Config(String),
}

impl From<GroupError> for StageError {
    fn from(e: GroupError) -> Self {
        match e {
            GroupError::GroupTooLarge { .. } => StageError::Budget(format!("GroupTooLarge: {e}")),
            _ => StageError::Invariant(e.to_string()),
        }
    }
}

impl From<HomologyError> for StageError {
    fn from(e: HomologyError) -> Self {
        match e {
            HomologyError::SearchSpaceTooLarge { .. } => StageError::Budget(e.to_string()),
            _ => StageError::Invariant(e.to_string()),
        }
    }
}

impl From<ConeError> for StageError {
    fn from(e: ConeError) -> Self {
        match e {
            ConeError::Homology(h) => h.into(),
            _ => StageError::Invariant(e.to_string()),
        }
    }
}

impl From<ExpansionError> for StageError {
    fn from(e: ExpansionError) -> Self {
        match e {
            ExpansionError::SearchSpaceTooLarge { .. } | ExpansionError::TooManyVertices(_) => {
                StageError::Budget(e.to_string())
            }
            _ => StageError::Invariant(e.to_string()),
        }
    }
}

impl From<hdx_core::complex::ComplexError> for StageError {
    fn from(e: hdx_core::complex::ComplexError) -> Self {
        match e {
            hdx_core::complex::ComplexError::Group(g) => g.into(),
            _ => StageError::Invariant(e.to_string()),
        }
    }
}

impl From<hdx_core::presentation::PresentationError> for StageError {
    fn from(e: hdx_core::presentation::PresentationError) -> Self {
        StageError::Invariant(e.to_string())
    }
}

type StageResult = Result<(Status, Value), StageError>;

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serializes")
}

fn item<T: Serialize, E: Into<StageError>>(r: Result<T, E>) -> (Status, Value) {
    match r.map_err(Into::into) {
        Ok(v) => (Status::Ok, to_value(&v)),
        Err(StageError::Budget(m)) => (Status::TooLarge, json!({ "status": "too_large", "reason": m })),
        Err(StageError::Invariant(m)) | Err(StageError::Config(m)) => {
            (Status::Error, json!({ "status": "error", "reason": m }))
        }
    }
}

fn worst(a: Status, b: Status) -> Status {
    if a.exit_code() >= b.exit_code() {
        a
    } else {
        b
    }
}

/// State shared between stages.
pub struct Context {
    pub config: ExperimentConfig,
    pub out: PathBuf,
    pub hash: String,
    complex: Option<SimplicialComplex>,
    coset: Option<CosetComplex>,
    symmetry: Option<SymmetryCertificate>,
    cones: Option<Result<ConeReport, String>>,
    dehn: Option<Option<DehnEstimate>>,
    generation: Option<Option<u32>>,
}

impl Context {
    fn x(&self) -> &SimplicialComplex {
        self.complex.as_ref().expect("build stage ran")
    }

    fn n(&self) -> isize {
        self.x().top_dim()
    }

    fn symmetry(&mut self) -> Option<&SymmetryCertificate> {
        if self.symmetry.is_none() {
            if let Some(cc) = &self.coset {
                self.symmetry = Some(check_strong_symmetry(cc));
            }
        }
        self.symmetry.as_ref()
    }

    fn strongly_symmetric(&mut self) -> bool {
        self.symmetry().is_some_and(|s| s.criterion_holds && s.transitive)
    }

    /// Apexes tried for cone radii: one vertex per type for coset complexes,
    /// every vertex otherwise.
    fn apexes(&self) -> Vec<u32> {
        match &self.coset {
            Some(cc) => cc.base_face().vertices().to_vec(),
            None => self.x().vertex_ids(),
        }
    }

    fn cones(&mut self) -> Result<ConeReport, String> {
        if self.cones.is_none() {
            let (x, k, budget) = (self.x(), self.config.k, self.config.homology_budget());
            let apexes = self.apexes();
            let r = match crad_upper(x, k, &apexes, FillMode::Exact, budget) {
                Err(ConeError::Homology(HomologyError::SearchSpaceTooLarge { .. })) => {
                    crad_upper(x, k, &apexes, FillMode::Greedy, budget)
                }
                other => other,
            };
            self.cones = Some(r.map_err(|e| e.to_string()));
        }
        self.cones.clone().expect("computed")
    }

    /// Bounded generation diameter over the union of the subgroups.
    fn generation(&mut self) -> Option<u32> {
        if self.generation.is_none() {
            self.generation = Some(
                self.coset
                    .as_ref()
                    .and_then(|cc| bounded_generation_diameter(&cc.group, &cc.subgroups).ok()),
            );
        }
        self.generation.expect("computed")
    }

    /// Sampled Dehn estimate at `m = 2 N₀′ + 1`, for the field family only.
    fn dehn(&mut self) -> Option<DehnEstimate> {
        if self.dehn.is_none() {
            let c = &self.config;
            let est = if c.construction == ConstructionKind::UnipFq {
                let (q, n, seed, samples) = (c.q, c.n, c.seed, dehn_samples(c));
                self.generation().and_then(|d| {
                    let m = 2 * (d as usize + 1) + 1;
                    let alphabet = field_alphabet(q, n).ok()?;
                    dehn_estimate(&alphabet, m, samples, seed).ok()
                })
            } else {
                None
            };
            self.dehn = Some(est);
        }
        self.dehn.clone().expect("computed")
    }
}

fn dehn_samples(c: &ExperimentConfig) -> usize {
    1usize << c.budget_log2.min(10)
}

fn build(ctx: &mut Context) -> StageResult {
    let c = &ctx.config;
    let mut data = BTreeMap::new();
    match c.construction() {
        Some(con) => {
            let cache = std::env::var_os("HDX_CACHE_DIR").map(PathBuf::from);
            if let Some(dir) = &cache {
                fs::create_dir_all(dir).map_err(|e| StageError::Config(e.to_string()))?;
            }
            data.insert("construction", to_value(&con));
            data.insert("size_cap", json!(c.size_cap()));
            let group = match con.build_cached(c.size_cap(), cache.as_deref()) {
                Ok(g) => g,
                Err(e @ GroupError::GroupTooLarge { cap, reached, layers }) => {
                    data.insert(
                        "group_too_large",
                        json!({ "cap": cap, "reached": reached, "layers": layers, "message": e.to_string() }),
                    );
                    return Ok((Status::TooLarge, to_value(&data)));
                }
                Err(e) => return Err(e.into()),
            };
            let group = Arc::new(group);
            let subgroups = con.subgroups(&group)?;
            data.insert("group_order", json!(group.len()));
            data.insert("subgroup_orders", json!(subgroups.iter().map(|k| k.order()).collect::<Vec<_>>()));
            let cc = build_coset_complex(group, subgroups)?;
            ctx.complex = Some(cc.complex.clone());
            ctx.coset = Some(cc);
        }
        None => {
            let path = c.complex.as_ref().expect("validated");
            let text = fs::read_to_string(path).map_err(|e| StageError::Config(format!("{}: {e}", path.display())))?;
            let x = SimplicialComplex::from_json(&text).map_err(|e| StageError::Config(e.to_string()))?;
            ctx.complex = Some(x);
        }
    }
    let x = ctx.x();
    data.insert("dimension", json!(x.top_dim()));
    data.insert("face_counts", json!((0..=x.top_dim()).map(|k| x.count(k)).collect::<Vec<_>>()));
    data.insert("pure", json!(x.is_pure()));
    data.insert("partite", json!(x.is_partite()));
    data.insert("complex_file", json!("complex.json"));
    fs::write(ctx.out.join("complex.json"), x.to_json()).map_err(|e| StageError::Config(e.to_string()))?;
    Ok((Status::Ok, to_value(&data)))
}

fn symmetry(ctx: &mut Context) -> StageResult {
    if ctx.coset.is_none() {
        return Ok((Status::NotApplicable, json!({ "reason": "no group attached" })));
    }
    let cert = ctx.symmetry().cloned().expect("coset complex");
    let generation = ctx.generation();
    let cc = ctx.coset.as_ref().expect("coset complex");
    let mut data = BTreeMap::new();
    data.insert("certificate", to_value(&cert));
    data.insert("bounded_generation_diameter", json!(generation));
    if cc.subgroups.len() == 3 {
        let pair = [cc.subgroups[0].clone(), cc.subgroups[2].clone()];
        data.insert("bounded_generation_diameter_k0_k2", json!(bounded_generation_diameter(&cc.group, &pair).ok()));
    }
    let status = if cert.agree { Status::Ok } else { Status::Error };
    Ok((status, to_value(&data)))
}

fn homology(ctx: &mut Context) -> StageResult {
    let x = ctx.x();
    let n = x.top_dim();
    let budget = ctx.config.homology_budget();
    let mut status = Status::Ok;
    let mut sys = BTreeMap::new();
    for k in 0..n {
        let (s, v) = item(sys_cardinality(x, k, budget).map(|(size, _)| size));
        status = worst(status, s);
        sys.insert(k.to_string(), v);
    }
    let data = json!({
        "coefficients": "F2",
        "reduced_betti": (0..=n).map(|k| betti(x, k)).collect::<Vec<_>>(),
        "reduced_cobetti": (0..=n).map(|k| cobetti(x, k)).collect::<Vec<_>>(),
        "systole_cardinality": sys,
    });
    Ok((status, data))
}

fn cones(ctx: &mut Context) -> StageResult {
    let k = ctx.config.k;
    if k > ctx.n() {
        return Err(StageError::Config(format!("k = {k} exceeds the dimension {}", ctx.n())));
    }
    let report = match ctx.cones() {
        Ok(r) => r,
        Err(m) => return Err(StageError::Budget(m)),
    };
    let x = ctx.x();
    let budget = ctx.config.homology_budget();
    let mut data = BTreeMap::new();
    let mut status = Status::Ok;
    data.insert("radius_diameter", json!(radius_and_diameter(x)));
    if let Some(apex) = report.best_apex {
        let mode = if report.minimal { FillMode::Exact } else { FillMode::Greedy };
        match build_cone(x, apex, k, mode, budget)? {
            ConeOutcome::Built(cone) => {
                let verified = verify_cone(x, &cone).is_ok();
                if !verified {
                    status = Status::Error;
                }
                data.insert("cone_verified", json!(verified));
                let file = format!("cone_k{k}.json");
                fs::write(ctx.out.join(&file), pretty(&cone.to_json(x))).map_err(|e| StageError::Config(e.to_string()))?;
                data.insert("cone_file", json!(file));
            }
            ConeOutcome::Obstructed(o) => {
                status = Status::Error;
                data.insert("cone_verified", json!(false));
                data.insert("unexpected_obstruction", json!(o.face.vertices()));
            }
        }
    }
    let verdict = existence_equivalence_test(x, k, budget)?;
    if !verdict.consistent {
        status = Status::Error;
    }
    data.insert(
        "existence",
        json!({
            "homology_vanishes": verdict.homology_vanishes,
            "first_nonvanishing": verdict.first_nonvanishing,
            "cone_built": verdict.cone_built,
            "obstruction_face": verdict.obstruction.as_ref().map(|o| o.face.vertices().to_vec()),
            "witness_nonbounding": verdict.witness_nonbounding,
            "consistent": verdict.consistent,
        }),
    );
    let (s, m) = item(m_constants(x, k, budget));
    data.insert("m_constants", m);
    // M_j is auxiliary, so exceeding the budget here does not fail the stage
    if s == Status::Error {
        status = Status::Error;
    }
    data.insert("report", to_value(&report));
    Ok((status, to_value(&data)))
}

fn known_for(x: &SimplicialComplex, k: isize, budget: hdx_core::expansion::Budget) -> Known {
    if k == 0 {
        return exp0_known(x, budget).unwrap_or(Known::Unknown);
    }
    match exp_b(x, k, budget) {
        Ok(Some(q)) => Known::Exact(q.value),
        Ok(None) => Known::NotDefined,
        Err(_) => Known::Unknown,
    }
}

fn expansion(ctx: &mut Context) -> StageResult {
    let k = ctx.config.k;
    let budget = ctx.config.budget();
    let n = ctx.n();
    if k >= n {
        return Err(StageError::Config(format!("k = {k} must be below the dimension {n}")));
    }
    let report = expansion_report(ctx.x(), k, budget)?;
    let known = if report.status == "exact" {
        Known::Exact(report.exp_b.expect("exact"))
    } else {
        known_for(ctx.x(), k, budget)
    };
    let mut status = match (&report.status[..], &known) {
        ("too_large", Known::Bracket { .. }) => Status::Ok,
        ("too_large", _) => Status::TooLarge,
        _ => Status::Ok,
    };
    let mut bounds = Vec::new();
    let symmetric = ctx.strongly_symmetric();
    match ctx.cones() {
        Ok(c) => bounds.push(item(certificate_theorem_crad(n, k, symmetric, c.crad_upper, &known)).1),
        Err(m) => bounds.push(json!({ "theorem": "crad", "status": "unavailable", "reason": m })),
    }
    if ctx.coset.is_some() {
        let generation = ctx.generation();
        let dehn = ctx.dehn().map(|d| (d.max_area, !d.estimated));
        let known1 = if k == 1 { known.clone() } else { Known::Unknown };
        let known0 = if k == 0 { known.clone() } else { Known::Unknown };
        match item(certificate_theorem_n0n1(n, generation, dehn, &known0, &known1)).1 {
            Value::Array(records) => bounds.extend(records),
            v => bounds.push(v),
        }
    }
    if bounds.iter().any(|b| b.get("holds") == Some(&json!(false))) {
        status = Status::Error;
    }
    let skeleton = ctx.x().skeleton(1);
    let chung = match verify_chung_bound(&skeleton, None) {
        Ok(r) => json!({ "status": "ok", "report": to_value(&r) }),
        Err(ExpansionError::NotEdgeTransitive { h, diameter }) => {
            json!({ "status": "not_edge_transitive", "h": to_text(&h), "diameter": diameter })
        }
        Err(e) => json!({ "status": "skipped", "reason": e.to_string() }),
    };
    if chung.get("report").and_then(|r| r.get("holds")) == Some(&json!(false)) {
        status = Status::Error;
    }
    let data = json!({
        "k": k,
        "report": to_value(&report),
        "known": to_value(&known),
        "certificates": bounds,
        "chung": chung,
    });
    Ok((status, data))
}

fn spectral(ctx: &mut Context) -> StageResult {
    let x = ctx.x();
    let g = WeightedGraph::from_complex(x);
    let mut data = BTreeMap::new();
    data.insert("convention", json!(hdx_core::spectral::CONVENTION));
    data.insert("vertices", json!(g.len()));
    data.insert("connected", json!(g.is_connected()));
    match second_eigenvalue(&g) {
        Ok(ev) => {
            data.insert("second_eigenvalue", to_value(&ev));
        }
        Err(e) => {
            data.insert("second_eigenvalue", json!({ "status": "undefined", "reason": e.to_string() }));
        }
    }
    data.insert("certified", to_value(&certified_lambda2(&g).ok().flatten()));
    data.insert("local_sweep", to_value(&local_spectral_sweep(x, ctx.config.lambda)));
    Ok((Status::Ok, to_value(&data)))
}

fn presentation(ctx: &mut Context) -> StageResult {
    if ctx.coset.is_none() {
        return Ok((Status::NotApplicable, json!({ "reason": "no group attached" })));
    }
    let dehn = ctx.dehn();
    let generation = ctx.generation();
    let c = ctx.config.clone();
    let cc = ctx.coset.as_ref().expect("coset complex");
    let mut status = Status::Ok;
    let mut data = BTreeMap::new();
    let rels = relations_from_tables(&cc.group, &cc.subgroups);
    data.insert("relation_counts", json!(rels.sizes()));
    if cc.complex.top_dim() >= 2 {
        let mut max_bound = 0u64;
        let mut max_ceiling = 0u64;
        let mut within = true;
        let mut sample = None;
        let triangles = cc.complex.faces(2);
        for f in triangles {
            let pw = path_to_word(cc, f.vertices())?;
            let trace = triangle_trace(cc, &pw.word)?;
            let b = sfill1_upper(&cc.group, &cc.subgroups, &pw.word, &trace)?;
            if sample.is_none() || b.trace_bound > max_bound {
                sample = Some(json!({ "path": f.vertices(), "translation": pw.translation, "bound": to_value(&b) }));
            }
            max_bound = max_bound.max(b.trace_bound);
            max_ceiling = max_ceiling.max(b.ceiling);
            within &= b.within_ceiling;
        }
        if !within {
            status = Status::Error;
        }
        data.insert(
            "triangle_words",
            json!({
                "count": triangles.len(),
                "max_trace_bound": max_bound,
                "max_ceiling": max_ceiling,
                "all_within_ceiling": within,
                "sample_ledger": sample,
            }),
        );
    }
    data.insert("bounded_generation_diameter", json!(generation));
    data.insert("dehn_estimate", to_value(&dehn));
    let family = match c.construction {
        ConstructionKind::UnipFq => Some(Family::Field),
        ConstructionKind::UnipPoly => Some(Family::Polynomial),
        _ => None,
    };
    if let Some(fam) = family {
        let (s, v) = item(verify_residual_relations(fam, c.n, &[c.q]));
        status = worst(status, s);
        if v.get("passed") == Some(&json!(false)) {
            status = Status::Error;
        }
        data.insert("residual_relations", v);
    }
    if c.construction == ConstructionKind::UnipFq {
        let (s, v) = item(q_independence(c.n, &[3, 5, 7]));
        status = worst(status, s);
        if v.as_array().is_some_and(|a| a.iter().any(|s| s.get("equal") == Some(&json!(false)))) {
            status = Status::Error;
        }
        data.insert("q_independence", v);
    }
    Ok((status, to_value(&data)))
}

fn checklist(ctx: &mut Context) -> StageResult {
    let c = &ctx.config;
    let list = cosystolic_checklist(ctx.x(), c.epsilon, c.lambda, c.budget());
    Ok((Status::Ok, to_value(&list)))
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json");
    s.push('\n');
    s
}

fn run_stage(ctx: &mut Context, stage: Stage) -> StageResult {
    match stage {
        Stage::Build => build(ctx),
        Stage::Symmetry => symmetry(ctx),
        Stage::Homology => homology(ctx),
        Stage::Cones => cones(ctx),
        Stage::Expansion => expansion(ctx),
        Stage::Spectral => spectral(ctx),
        Stage::Presentation => presentation(ctx),
        Stage::Checklist => checklist(ctx),
    }
}

/// Outcome of a run: exit code and the summary written to `summary.json`.
pub struct RunOutcome {
    pub exit_code: i32,
    pub summary: Value,
}

fn write_report(ctx: &Context, stage: Stage, status: Status, data: Value) -> std::io::Result<()> {
    let report = json!({
        "artifact": ARTIFACT,
        "version": VERSION,
        "config_hash": ctx.hash,
        "stage": stage.name(),
        "status": status,
        "data": data,
    });
    fs::write(ctx.out.join(format!("{}.json", stage.name())), pretty(&report))
}

/// Runs the configured stages in order, writing one report per stage and a summary.
pub fn run(config: &ExperimentConfig, out: &Path) -> std::io::Result<RunOutcome> {
    let file_bytes = match &config.complex {
        Some(p) if config.construction == ConstructionKind::File => fs::read(p).ok(),
        _ => None,
    };
    let hash = config.hash(file_bytes.as_deref());
    fs::create_dir_all(out)?;
    let mut ctx = Context {
        config: config.clone(),
        out: out.to_path_buf(),
        hash,
        complex: None,
        coset: None,
        symmetry: None,
        cones: None,
        dehn: None,
        generation: None,
    };
    let mut stages = config.stages.clone();
    stages.sort();
    stages.dedup();
    if stages.first() != Some(&Stage::Build) {
        stages.insert(0, Stage::Build);
    }
    let mut exit = EXIT_OK;
    let mut entries = Vec::new();
    let mut abort = false;
    for stage in stages {
        let (status, data) = if abort {
            (Status::Skipped, json!({ "reason": "build did not complete" }))
        } else {
            let r = catch_unwind(AssertUnwindSafe(|| run_stage(&mut ctx, stage)));
            match r {
                Ok(Ok(v)) => v,
                Ok(Err(StageError::Budget(m))) => (Status::TooLarge, json!({ "reason": m })),
                Ok(Err(StageError::Invariant(m))) => (Status::Error, json!({ "reason": m })),
                Ok(Err(StageError::Config(m))) => {
                    exit = exit.max(EXIT_CONFIG);
                    (Status::Error, json!({ "reason": m, "kind": "config" }))
                }
                Err(p) => {
                    let msg = p
                        .downcast_ref::<String>()
                        .cloned()
                        .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                        .unwrap_or_else(|| "panic".into());
                    (Status::Error, json!({ "reason": msg, "kind": "panic" }))
                }
            }
        };
        if stage == Stage::Build && status != Status::Ok {
            abort = true;
        }
        let is_config = data.get("kind") == Some(&json!("config"));
        if !is_config {
            exit = exit.max(status.exit_code());
        }
        write_report(&ctx, stage, status, data)?;
        entries.push(json!({ "stage": stage.name(), "status": status, "report": format!("{}.json", stage.name()) }));
    }
    let summary = json!({
        "artifact": ARTIFACT,
        "version": VERSION,
        "config_hash": ctx.hash,
        "config": to_value(config),
        "stages": entries,
        "exit_code": exit,
    });
    fs::write(out.join("summary.json"), pretty(&summary))?;
    Ok(RunOutcome { exit_code: exit, summary })
}
