//! Generator registry and batch studies over shapes and generators.
//!
//! A study crosses every shape with every generator, draws
//! `samples_per_cell` operators per cell, classifies each one and tabulates
//! verdict counts, inclusion-chain violations, report inconsistencies and
//! label failures (a generator's own class not coming back `Yes`).

use std::collections::BTreeMap;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::channels::Answer;
use crate::classify::{
    classify_unchecked, consistency_violations, ClassReport, ClassifyOptions, CLASS_NAMES,
};
use crate::error::{Error, Result};
use crate::generate::{
    b_not_a_n3, block_diag_a, block_diag_b, both_block, circulant_unitary, const_unitary,
    counterexample, eb_example, haar_unitary, named_counterexamples, product_unitary,
    rng_from_seed,
};
use crate::matcore::{BipartiteOperator, Tolerances};

/// Names accepted by [`Generator::parse`].
pub const GENERATOR_NAMES: [&str; 10] = [
    "haar",
    "product",
    "block_diag_A",
    "block_diag_B",
    "const",
    "circulant",
    "both_block",
    "eb_example",
    "b_not_a",
    "counterexample",
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Generator {
    Haar,
    Product,
    /// `p` distinct coefficient unitaries; defaults to the largest allowed.
    BlockDiagA {
        p: Option<usize>,
    },
    BlockDiagB {
        p: Option<usize>,
    },
    /// `k = n·r`; `r` is inferred from the shape when absent.
    Const {
        r: Option<usize>,
    },
    Circulant,
    BothBlock,
    EbExample,
    BNotA,
    Counterexample {
        name: String,
    },
}

fn param_usize(params: &BTreeMap<String, serde_json::Value>, key: &str) -> Result<Option<usize>> {
    match params.get(key) {
        None => Ok(None),
        Some(v) => v
            .as_u64()
            .filter(|&x| x >= 1)
            .map(|x| Some(x as usize))
            .ok_or_else(|| Error::InvalidParameter(format!("`{key}` must be a positive integer"))),
    }
}

impl Generator {
    pub fn parse(name: &str, params: &BTreeMap<String, serde_json::Value>) -> Result<Self> {
        let allowed: &[&str] = match name {
            "block_diag_A" | "block_diag_B" => &["p"],
            "const" => &["r"],
            "counterexample" => &["name"],
            _ => &[],
        };
        if let Some(bad) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::InvalidParameter(format!(
                "generator `{name}` takes no `{bad}`"
            )));
        }
        Ok(match name {
            "haar" => Generator::Haar,
            "product" => Generator::Product,
            "block_diag_A" => Generator::BlockDiagA {
                p: param_usize(params, "p")?,
            },
            "block_diag_B" => Generator::BlockDiagB {
                p: param_usize(params, "p")?,
            },
            "const" => Generator::Const {
                r: param_usize(params, "r")?,
            },
            "circulant" => Generator::Circulant,
            "both_block" => Generator::BothBlock,
            "eb_example" => Generator::EbExample,
            "b_not_a" => Generator::BNotA,
            "counterexample" => {
                let name = params
                    .get("name")
                    .and_then(|v| v.as_str())
                    .ok_or_else(|| Error::InvalidParameter("counterexample needs `name`".into()))?;
                if !named_counterexamples(0).contains_key(name) {
                    return Err(Error::InvalidParameter(format!(
                        "unknown counterexample `{name}`"
                    )));
                }
                Generator::Counterexample {
                    name: name.to_string(),
                }
            }
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown generator `{other}`"
                )))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Generator::Haar => "haar",
            Generator::Product => "product",
            Generator::BlockDiagA { .. } => "block_diag_A",
            Generator::BlockDiagB { .. } => "block_diag_B",
            Generator::Const { .. } => "const",
            Generator::Circulant => "circulant",
            Generator::BothBlock => "both_block",
            Generator::EbExample => "eb_example",
            Generator::BNotA => "b_not_a",
            Generator::Counterexample { .. } => "counterexample",
        }
    }

    /// Parameters as `key=value`, for table output.
    pub fn params_label(&self) -> String {
        match self {
            Generator::BlockDiagA { p: Some(p) } | Generator::BlockDiagB { p: Some(p) } => {
                format!("p={p}")
            }
            Generator::Const { r: Some(r) } => format!("r={r}"),
            Generator::Counterexample { name } => format!("name={name}"),
            _ => String::new(),
        }
    }

    /// The fixed shape of generators that ignore the requested one.
    pub fn fixed_shape(&self) -> Option<(usize, usize)> {
        match self {
            Generator::Counterexample { name } => named_counterexamples(0)
                .get(name.as_str())
                .map(|u| (u.n(), u.k())),
            _ => None,
        }
    }

    /// Why the generator has no member of shape `(n, k)`, if it has none.
    pub fn obstruction(&self, n: usize, k: usize) -> Option<String> {
        match self {
            Generator::BlockDiagA { p: Some(p) } if *p > k || (n == 1 && *p > 1) => {
                Some(format!("p = {p} distinct blocks do not fit at ({n}, {k})"))
            }
            Generator::BlockDiagB { p: Some(p) } if *p > n || (k == 1 && *p > 1) => {
                Some(format!("p = {p} distinct blocks do not fit at ({n}, {k})"))
            }
            Generator::Const { r } => match r {
                Some(r) if n * r != k => Some(format!("k = {k} is not n·r = {}", n * r)),
                None if k % n != 0 => Some(format!("k = {k} is not a multiple of n = {n}")),
                _ => None,
            },
            Generator::EbExample if n != k => Some(format!("requires n = k, got ({n}, {k})")),
            Generator::BNotA if n != 3 || k < 2 => {
                Some(format!("requires n = 3 and k ≥ 2, got ({n}, {k})"))
            }
            Generator::Counterexample { .. } => match self.fixed_shape() {
                Some(s) if s != (n, k) => Some(format!("fixed shape {s:?}")),
                _ => None,
            },
            _ => None,
        }
    }

    pub fn generate(&self, n: usize, k: usize, seed: u64) -> Result<BipartiteOperator> {
        if let Some(why) = self.obstruction(n, k) {
            return Err(Error::InvalidParameter(format!("{}: {why}", self.name())));
        }
        match self {
            Generator::Haar => BipartiteOperator::from_dims(n, k, haar_unitary(n * k, seed)),
            Generator::Product => product_unitary(n, k, seed),
            Generator::BlockDiagA { p } => {
                block_diag_a(n, k, p.unwrap_or(if n == 1 { 1 } else { k }), seed)
            }
            Generator::BlockDiagB { p } => {
                block_diag_b(n, k, p.unwrap_or(if k == 1 { 1 } else { n }), seed)
            }
            Generator::Const { r } => const_unitary(n, r.unwrap_or(k / n), seed),
            Generator::Circulant => {
                BipartiteOperator::from_dims(n, k, circulant_unitary(n * k, seed)?)
            }
            Generator::BothBlock => both_block(n, k, seed),
            Generator::EbExample => eb_example(n, seed),
            Generator::BNotA => b_not_a_n3(k, seed),
            Generator::Counterexample { name } => counterexample(name, seed),
        }
    }

    /// Classes a sample must land in, as `(class, value)`.
    pub fn expected(&self, n: usize) -> Vec<(&'static str, Answer)> {
        use Answer::{No, Yes};
        match self {
            Generator::Haar => vec![],
            Generator::Product => vec![
                ("aut", Yes),
                ("block_diag_A", Yes),
                ("block_diag_B", Yes),
                ("unital", Yes),
            ],
            Generator::BlockDiagA { .. } => {
                vec![("block_diag_A", Yes), ("unital", Yes), ("mixed", Yes)]
            }
            Generator::BlockDiagB { .. } => {
                vec![("block_diag_B", Yes), ("unital", Yes), ("mixed_b", Yes)]
            }
            Generator::Const { .. } => vec![("const", Yes), ("cppt", Yes)],
            Generator::Circulant => vec![("block_diag_B", Yes)],
            Generator::BothBlock => {
                vec![
                    ("block_diag_A", Yes),
                    ("block_diag_B", Yes),
                    ("block_diag_AB", Yes),
                ]
            }
            Generator::EbExample if n == 2 => vec![("eb_qubit", Yes)],
            Generator::EbExample => vec![],
            Generator::BNotA => vec![("block_diag_B", Yes), ("block_diag_A", No)],
            Generator::Counterexample { name } if name == "mixed_4x2" => {
                vec![("block_diag_B", Yes), ("mixed_necessary", No)]
            }
            Generator::Counterexample { name } if name == "b_not_a_n3" => {
                vec![("block_diag_B", Yes), ("block_diag_A", No)]
            }
            Generator::Counterexample { .. } => vec![],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, serde_json::Value>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum GeneratorEntry {
    Name(String),
    Full(GeneratorSpec),
}

fn generator_entries<'de, D: serde::Deserializer<'de>>(
    d: D,
) -> std::result::Result<Vec<GeneratorSpec>, D::Error> {
    Ok(Vec::<GeneratorEntry>::deserialize(d)?
        .into_iter()
        .map(|e| match e {
            GeneratorEntry::Name(name) => GeneratorSpec {
                name,
                params: BTreeMap::new(),
            },
            GeneratorEntry::Full(g) => g,
        })
        .collect())
}

/// Study input. Generators may be given as bare names or as
/// `{"name": ..., "params": {...}}`; an empty `checks` list means every class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudySpec {
    pub shapes: Vec<(usize, usize)>,
    #[serde(deserialize_with = "generator_entries")]
    pub generators: Vec<GeneratorSpec>,
    pub samples_per_cell: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub checks: Vec<String>,
}

impl StudySpec {
    pub fn validate(&self) -> Result<Vec<Generator>> {
        if self.shapes.is_empty() {
            return Err(Error::InvalidParameter(
                "study needs at least one shape".into(),
            ));
        }
        if self.samples_per_cell == 0 {
            return Err(Error::InvalidParameter(
                "samples_per_cell must be ≥ 1".into(),
            ));
        }
        if let Some(&(n, k)) = self.shapes.iter().find(|&&(n, k)| n == 0 || k == 0) {
            return Err(Error::InvalidParameter(format!(
                "shape ({n}, {k}) has a zero factor"
            )));
        }
        if let Some(c) = self
            .checks
            .iter()
            .find(|c| !CLASS_NAMES.contains(&c.as_str()))
        {
            return Err(Error::InvalidParameter(format!("unknown class `{c}`")));
        }
        self.generators
            .iter()
            .map(|g| Generator::parse(&g.name, &g.params))
            .collect()
    }

    fn check_names(&self) -> Vec<String> {
        if self.checks.is_empty() {
            CLASS_NAMES.iter().map(|s| s.to_string()).collect()
        } else {
            self.checks.clone()
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictCounts {
    pub yes: usize,
    pub no: usize,
    pub unknown: usize,
    /// `No` verdicts that came from a search.
    pub heuristic: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Ok,
    DimensionObstruction,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub cell: usize,
    pub n: usize,
    pub k: usize,
    pub generator: String,
    pub params: String,
    pub status: CellStatus,
    pub note: Option<String>,
    pub samples: usize,
    pub counts: BTreeMap<String, VerdictCounts>,
    pub inclusion_violations: usize,
    pub inconsistencies: usize,
    pub label_failures: usize,
    /// Samples that could not be classified at all.
    pub errors: usize,
    /// First few violation messages, for diagnosis.
    pub examples: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudySummary {
    pub cells: usize,
    pub samples: usize,
    pub inclusion_violations: usize,
    pub inconsistencies: usize,
    pub label_failures: usize,
    pub errors: usize,
    pub obstructions: usize,
    pub checks: Vec<String>,
    pub rows: Vec<StudyRow>,
}

impl StudySummary {
    pub fn is_clean(&self) -> bool {
        self.inclusion_violations == 0
            && self.inconsistencies == 0
            && self.label_failures == 0
            && self.errors == 0
    }

    pub fn to_csv(&self) -> String {
        let mut header: Vec<String> =
            ["cell", "n", "k", "generator", "params", "status", "samples"]
                .map(String::from)
                .to_vec();
        for c in &self.checks {
            header.extend(["yes", "no", "unknown"].map(|v| format!("{c}_{v}")));
        }
        header.extend(
            [
                "inclusion_violations",
                "inconsistencies",
                "label_failures",
                "errors",
            ]
            .map(String::from),
        );
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&header).expect("in-memory write");
        for r in &self.rows {
            let status = match r.status {
                CellStatus::Ok => "ok",
                CellStatus::DimensionObstruction => "dimension_obstruction",
            };
            let mut rec = vec![
                r.cell.to_string(),
                r.n.to_string(),
                r.k.to_string(),
                r.generator.clone(),
                r.params.clone(),
                status.to_string(),
                r.samples.to_string(),
            ];
            for c in &self.checks {
                let v = r.counts.get(c).copied().unwrap_or_default();
                rec.extend([v.yes, v.no, v.unknown].map(|x| x.to_string()));
            }
            rec.extend(
                [
                    r.inclusion_violations,
                    r.inconsistencies,
                    r.label_failures,
                    r.errors,
                ]
                .map(|x| x.to_string()),
            );
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii fields")
    }
}

/// Implications of the inclusion chains on both sides.
pub fn inclusion_violations(r: &ClassReport) -> Vec<String> {
    use Answer::{No, Yes};
    let val = |s: &str| r.value(s);
    let rules: [(&str, &str); 9] = [
        ("aut", "block_diag_A"),
        ("aut", "block_diag_B"),
        ("block_diag_A", "prob_lin"),
        ("prob_lin", "mixed"),
        ("mixed", "unital"),
        ("block_diag_B", "mixed_b"),
        ("mixed_b", "unital"),
        ("block_diag_AB", "block_diag_A"),
        ("block_diag_AB", "block_diag_B"),
    ];
    let mut out: Vec<String> = rules
        .iter()
        .filter(|(p, q)| val(p) == Yes && val(q) != Yes)
        .map(|(p, q)| format!("{p} ⇒ {q}"))
        .collect();
    if val("const") == Yes && val("eb_qubit") == No {
        out.push("const ⇒ eb_qubit".into());
    }
    out
}

const MAX_EXAMPLES: usize = 5;

fn sample_seeds(seed: u64, cell: usize, count: usize) -> Vec<u64> {
    let mut rng = rng_from_seed(seed ^ (cell as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    (0..count).map(|_| rng.next_u64()).collect()
}

fn run_cell(
    cell: usize,
    (n, k): (usize, usize),
    gen: &Generator,
    spec: &StudySpec,
    checks: &[String],
    tol: &Tolerances,
    opts: &ClassifyOptions,
) -> StudyRow {
    let mut row = StudyRow {
        cell,
        n,
        k,
        generator: gen.name().to_string(),
        params: gen.params_label(),
        status: CellStatus::Ok,
        note: None,
        samples: 0,
        counts: checks
            .iter()
            .map(|c| (c.clone(), VerdictCounts::default()))
            .collect(),
        inclusion_violations: 0,
        inconsistencies: 0,
        label_failures: 0,
        errors: 0,
        examples: Vec::new(),
    };
    if let Some(why) = gen.obstruction(n, k) {
        row.status = CellStatus::DimensionObstruction;
        row.note = Some(why);
        return row;
    }
    let expected = gen.expected(n);
    let note = |row: &mut StudyRow, msg: String| {
        if row.examples.len() < MAX_EXAMPLES {
            row.examples.push(msg);
        }
    };
    for (s, seed) in sample_seeds(spec.seed.unwrap_or(0), cell, spec.samples_per_cell)
        .into_iter()
        .enumerate()
    {
        row.samples += 1;
        let report = gen.generate(n, k, seed).and_then(|u| {
            classify_unchecked(
                &u,
                tol,
                &ClassifyOptions {
                    seed: opts.seed ^ seed,
                    ..*opts
                },
            )
        });
        let report = match report {
            Ok(r) => r,
            Err(e) => {
                row.errors += 1;
                note(&mut row, format!("sample {s}: {e}"));
                continue;
            }
        };
        for c in checks {
            if let Some(v) = report.get(c) {
                let slot = row.counts.get_mut(c).expect("initialized");
                match v.value {
                    Answer::Yes => slot.yes += 1,
                    Answer::No => slot.no += 1,
                    Answer::Unknown => slot.unknown += 1,
                }
                if v.is_no() && v.heuristic {
                    slot.heuristic += 1;
                }
            }
        }
        let inc = inclusion_violations(&report);
        let cons = consistency_violations(&report);
        let labels: Vec<String> = expected
            .iter()
            .filter(|(c, want)| report.value(c) != *want)
            .map(|(c, want)| {
                format!(
                    "{c} = {} (expected {})",
                    report.value(c).as_str(),
                    want.as_str()
                )
            })
            .collect();
        row.inclusion_violations += usize::from(!inc.is_empty());
        row.inconsistencies += usize::from(!cons.is_empty());
        row.label_failures += usize::from(!labels.is_empty());
        for msg in inc.into_iter().chain(cons).chain(labels) {
            note(&mut row, format!("sample {s}: {msg}"));
        }
    }
    row
}

/// Runs every cell, in parallel across cells. Rows come back in cell order:
/// shapes outermost, then generators. Generators with a fixed shape run once,
/// at that shape.
pub fn run_study(
    spec: &StudySpec,
    tol: &Tolerances,
    opts: &ClassifyOptions,
) -> Result<StudySummary> {
    let gens = spec.validate()?;
    let checks = spec.check_names();
    let mut cells: Vec<((usize, usize), &Generator)> = Vec::new();
    for &shape in &spec.shapes {
        for g in gens.iter().filter(|g| g.fixed_shape().is_none()) {
            cells.push((shape, g));
        }
    }
    for g in &gens {
        if let Some(shape) = g.fixed_shape() {
            cells.push((shape, g));
        }
    }

    let workers = std::thread::available_parallelism()
        .map_or(1, |p| p.get())
        .min(cells.len())
        .max(1);
    let mut rows: Vec<StudyRow> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let (cells, checks) = (&cells, &checks);
                scope.spawn(move || {
                    cells
                        .iter()
                        .enumerate()
                        .skip(w)
                        .step_by(workers)
                        .map(|(i, &(shape, g))| run_cell(i, shape, g, spec, checks, tol, opts))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("study worker panicked"))
            .collect()
    });
    rows.sort_by_key(|r| r.cell);

    let sum = |f: fn(&StudyRow) -> usize| rows.iter().map(f).sum::<usize>();
    Ok(StudySummary {
        cells: rows.len(),
        samples: sum(|r| r.samples),
        inclusion_violations: sum(|r| r.inclusion_violations),
        inconsistencies: sum(|r| r.inconsistencies),
        label_failures: sum(|r| r.label_failures),
        errors: sum(|r| r.errors),
        obstructions: rows
            .iter()
            .filter(|r| r.status == CellStatus::DimensionObstruction)
            .count(),
        checks,
        rows,
    })
}
