//! File formats: algebra definitions, pair/subpair models and section
//! tables, all JSON with bit-exact scalar strings. Loaders enforce the type
//! invariants of the underlying modules; mutation fixtures can bypass the
//! verdict-style checks with `allow_invalid`, never the structural ones.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::envelope::{PbwMonomial, UeaElement};
use crate::error::{Error, Result};
use crate::exactnum::Scalar;
use crate::groupmodel::{FunctionExpr, GroupModel, GroupPoint, MaskEntry, SampleSet};
use crate::homogeneous::HcSubpair;
use crate::liesuper::{LieSuperAlgebra, MatrixRealization, Parity, SuperBasis};
use crate::linalg::Mat;
use crate::supergroup::{Alpha, HcPair, Section};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BasisEntry {
    pub name: String,
    pub parity: Parity,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoeffEntry {
    pub basis: String,
    pub coeff: Scalar,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BracketEntry {
    pub left: String,
    pub right: String,
    pub result: Vec<CoeffEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RealizationFile {
    pub m: usize,
    pub n: usize,
    /// One (m+n)-square matrix of scalar strings per basis element.
    pub matrices: Vec<Vec<Vec<Scalar>>>,
}

/// Algebra-definition document. Brackets may be omitted when a matrix
/// realization is given (they are then derived from supercommutators); when
/// both are present they must agree.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlgebraFile {
    pub basis: Vec<BasisEntry>,
    #[serde(default)]
    pub brackets: Vec<BracketEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix_realization: Option<RealizationFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlgebraRef {
    File { file: String },
    Inline(AlgebraFile),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupFile {
    pub n: usize,
    pub pattern: Vec<Vec<MaskEntry>>,
    /// Generator sample points, exact matrices; closed under products and
    /// inverses up to the closure depth given on the command line.
    pub samples: Vec<Vec<Vec<Scalar>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaFile {
    Conjugation,
    OddScaledConjugation { factor: String },
}

impl Default for AlphaFile {
    fn default() -> Self {
        AlphaFile::Conjugation
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairFile {
    pub algebra: AlgebraRef,
    pub group: GroupFile,
    #[serde(default)]
    pub alpha: AlphaFile,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PairRef {
    File { file: String },
    Inline(PairFile),
}

/// Subpair document: a pair reference extended with the subgroup pattern,
/// the subalgebra span and subgroup sample points.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubpairFile {
    pub pair: PairRef,
    pub subgroup_pattern: Vec<Vec<MaskEntry>>,
    pub subalgebra_span: Vec<Vec<Scalar>>,
    pub subgroup_samples: Vec<Vec<Vec<Scalar>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableEntry {
    pub word: Vec<String>,
    pub expr: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SectionFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair: Option<String>,
    pub table: Vec<TableEntry>,
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn parse_json<T: serde::de::DeserializeOwned>(path: &Path, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| {
        Error::Parse(format!(
            "{}:{}:{}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

fn scalar_matrix(rows: &[Vec<Scalar>]) -> Result<Mat> {
    Mat::from_rows(rows.to_vec())
}

/// Builds an algebra from a parsed document. `allow_invalid` skips the
/// Jacobi verdict (for mutation fixtures); structural errors always reject.
pub fn algebra_from_file(doc: &AlgebraFile, allow_invalid: bool) -> Result<Arc<LieSuperAlgebra>> {
    let items: Vec<(String, Parity)> = doc
        .basis
        .iter()
        .map(|b| (b.name.clone(), b.parity))
        .collect();
    let basis = SuperBasis::new(items)?;
    let idx = |name: &str| -> Result<usize> {
        basis
            .index_of(name)
            .ok_or_else(|| Error::Parse(format!("unknown basis label {name:?}")))
    };
    let mut alg = if doc.brackets.is_empty() {
        let Some(real) = &doc.matrix_realization else {
            return Err(Error::Parse(
                "algebra needs brackets or a matrix realization".into(),
            ));
        };
        let mats: Vec<(Parity, Mat)> = doc
            .basis
            .iter()
            .zip(&real.matrices)
            .map(|(b, rows)| Ok((b.parity, scalar_matrix(rows)?)))
            .collect::<Result<_>>()?;
        LieSuperAlgebra::from_matrix_basis(
            doc.basis.iter().map(|b| b.name.clone()).collect(),
            mats,
            real.m,
            real.n,
        )?
    } else {
        let mut entries = Vec::new();
        for b in &doc.brackets {
            let i = idx(&b.left)?;
            let j = idx(&b.right)?;
            if i > j {
                return Err(Error::BadBracket(format!(
                    "bracket ({}, {}) stored on the wrong side: antisymmetry fixes it from ({}, {})",
                    b.left, b.right, b.right, b.left
                )));
            }
            let coeffs: Vec<(usize, Scalar)> = b
                .result
                .iter()
                .map(|c| Ok((idx(&c.basis)?, c.coeff.clone())))
                .collect::<Result<_>>()?;
            entries.push((i, j, coeffs));
        }
        let alg = LieSuperAlgebra::new(basis, entries)?;
        alg
    };
    if let (Some(real), false) = (&doc.matrix_realization, doc.brackets.is_empty()) {
        // both given: attach and cross-check structure constants
        let mats: Vec<Mat> = real
            .matrices
            .iter()
            .map(|rows| scalar_matrix(rows))
            .collect::<Result<_>>()?;
        let realization = MatrixRealization::new(real.m, real.n, mats)?;
        let derived = LieSuperAlgebra::from_matrix_basis(
            doc.basis.iter().map(|b| b.name.clone()).collect(),
            realization
                .matrices
                .iter()
                .cloned()
                .zip(doc.basis.iter().map(|b| b.parity))
                .map(|(m, p)| (p, m))
                .collect(),
            real.m,
            real.n,
        )?;
        for i in 0..alg.dim() {
            for j in 0..alg.dim() {
                if alg.bracket_basis(i, j) != derived.bracket_basis(i, j) && !allow_invalid {
                    return Err(Error::BadBracket(format!(
                        "bracket table disagrees with the matrix realization at ({}, {})",
                        alg.basis().name(i),
                        alg.basis().name(j)
                    )));
                }
            }
        }
        alg.set_realization(realization);
    }
    if !allow_invalid {
        let rep = alg.check_jacobi();
        if !rep.passed() {
            let (i, j, k) = rep.violations[0];
            return Err(Error::Invalid(format!(
                "Jacobi identity fails at ({}, {}, {}); rerun with --allow-invalid for mutation fixtures",
                alg.basis().name(i),
                alg.basis().name(j),
                alg.basis().name(k)
            )));
        }
    }
    Ok(Arc::new(alg))
}

pub fn load_algebra(path: &Path, allow_invalid: bool) -> Result<Arc<LieSuperAlgebra>> {
    let text = read_file(path)?;
    let doc: AlgebraFile = parse_json(path, &text)?;
    algebra_from_file(&doc, allow_invalid)
}

fn resolve_algebra(r: &AlgebraRef, base: &Path, allow_invalid: bool) -> Result<Arc<LieSuperAlgebra>> {
    match r {
        AlgebraRef::Inline(doc) => algebra_from_file(doc, allow_invalid),
        AlgebraRef::File { file } => load_algebra(&base.join(file), allow_invalid),
    }
}

/// Pair plus its sample set (generated at the given closure depth).
pub fn pair_from_file(
    doc: &PairFile,
    base: &Path,
    closure_depth: usize,
    allow_invalid: bool,
) -> Result<(Arc<HcPair>, SampleSet)> {
    let alg = resolve_algebra(&doc.algebra, base, allow_invalid)?;
    let model = GroupModel::new(doc.group.n, doc.group.pattern.clone(), alg)?;
    let alpha = match &doc.alpha {
        AlphaFile::Conjugation => Alpha::Conjugation,
        AlphaFile::OddScaledConjugation { factor } => Alpha::OddScaledConjugation {
            factor: factor.parse()?,
        },
    };
    let generators: Vec<GroupPoint> = doc
        .group
        .samples
        .iter()
        .map(|rows| model.point(scalar_matrix(rows)?))
        .collect::<Result<_>>()?;
    let pair = HcPair::new(model, alpha);
    let samples = SampleSet::generate(pair.model(), &generators, closure_depth)?;
    if !allow_invalid {
        let rep = pair.validate(&samples);
        if !rep.all_pass() {
            let failing: Vec<&str> = rep
                .checks
                .iter()
                .filter(|c| !c.pass)
                .map(|c| c.name.as_str())
                .collect();
            return Err(Error::Invalid(format!(
                "pair invariants fail ({}); rerun with --allow-invalid for mutation fixtures",
                failing.join(", ")
            )));
        }
    }
    Ok((pair, samples))
}

pub fn load_pair(
    path: &Path,
    closure_depth: usize,
    allow_invalid: bool,
) -> Result<(Arc<HcPair>, SampleSet)> {
    let text = read_file(path)?;
    let doc: PairFile = parse_json(path, &text)?;
    let base = path.parent().map(PathBuf::from).unwrap_or_default();
    pair_from_file(&doc, &base, closure_depth, allow_invalid)
}

/// Loaded subpair bundle: parent pair with samples, subpair, subgroup samples.
pub struct LoadedSubpair {
    pub parent: Arc<HcPair>,
    pub g_samples: SampleSet,
    pub sub: HcSubpair,
    pub h_samples: SampleSet,
    pub raw_span: Vec<Vec<Scalar>>,
    pub raw_pattern: Vec<Vec<MaskEntry>>,
}

pub fn load_subpair(path: &Path, closure_depth: usize, allow_invalid: bool) -> Result<LoadedSubpair> {
    let text = read_file(path)?;
    let doc: SubpairFile = parse_json(path, &text)?;
    let base = path.parent().map(PathBuf::from).unwrap_or_default();
    let (parent, g_samples) = match &doc.pair {
        PairRef::Inline(p) => pair_from_file(p, &base, closure_depth, allow_invalid)?,
        PairRef::File { file } => load_pair(&base.join(file), closure_depth, allow_invalid)?,
    };
    let sub = HcSubpair::build(
        Arc::clone(&parent),
        doc.subgroup_pattern.clone(),
        doc.subalgebra_span.clone(),
    )?;
    let gens: Vec<GroupPoint> = doc
        .subgroup_samples
        .iter()
        .map(|rows| sub.sub_pair().model().point(scalar_matrix(rows)?))
        .collect::<Result<_>>()?;
    let h_samples = SampleSet::generate(sub.sub_pair().model(), &gens, closure_depth)?;
    Ok(LoadedSubpair {
        parent,
        g_samples,
        sub,
        h_samples,
        raw_span: doc.subalgebra_span,
        raw_pattern: doc.subgroup_pattern,
    })
}

pub fn section_from_file(doc: &SectionFile, pair: &Arc<HcPair>) -> Result<Section> {
    let mut table: BTreeMap<Vec<usize>, FunctionExpr> = BTreeMap::new();
    for entry in &doc.table {
        let word: Vec<usize> = entry
            .word
            .iter()
            .map(|n| {
                pair.algebra()
                    .basis()
                    .index_of(n)
                    .ok_or_else(|| Error::Parse(format!("unknown odd basis label {n:?}")))
            })
            .collect::<Result<_>>()?;
        let expr: FunctionExpr = entry.expr.parse()?;
        if table.insert(word.clone(), expr).is_some() {
            return Err(Error::Parse(format!("duplicate table word {:?}", entry.word)));
        }
    }
    Section::new(Arc::clone(pair), table)
}

pub fn load_section(path: &Path, pair: &Arc<HcPair>) -> Result<Section> {
    let text = read_file(path)?;
    let doc: SectionFile = parse_json(path, &text)?;
    section_from_file(&doc, pair)
}

/// UEA element as a list of `{even, odd, coeff}` records in canonical
/// (BTreeMap) order, for golden-file comparison.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct UeaRecord {
    pub even: Vec<String>,
    pub odd: Vec<String>,
    pub coeff: Scalar,
}

pub fn uea_to_records(alg: &LieSuperAlgebra, a: &UeaElement) -> Vec<UeaRecord> {
    a.terms
        .iter()
        .map(|(m, c)| UeaRecord {
            even: m.even.iter().map(|&i| alg.basis().name(i).to_string()).collect(),
            odd: m.odd.iter().map(|&i| alg.basis().name(i).to_string()).collect(),
            coeff: c.clone(),
        })
        .collect()
}

pub fn uea_from_records(alg: &LieSuperAlgebra, records: &[UeaRecord]) -> Result<UeaElement> {
    let mut out = UeaElement::zero();
    let idx = |name: &str| -> Result<usize> {
        alg.basis()
            .index_of(name)
            .ok_or_else(|| Error::Parse(format!("unknown basis label {name:?}")))
    };
    for r in records {
        let even: Vec<usize> = r.even.iter().map(|n| idx(n)).collect::<Result<_>>()?;
        let odd: Vec<usize> = r.odd.iter().map(|n| idx(n)).collect::<Result<_>>()?;
        if !even.windows(2).all(|w| w[0] <= w[1]) || !odd.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Parse("record not in canonical monomial order".into()));
        }
        out.add_term(PbwMonomial { even, odd }, r.coeff.clone());
    }
    Ok(out)
}
