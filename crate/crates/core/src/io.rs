//! JSON documents for instances, cuts, separation reports and verification
//! reports. Matrices are arrays of rows. Infinite values are written as
//! `null`.

use serde::{Deserialize, Serialize};

use crate::ellipsoid::ContainmentCertificate;
use crate::error::{Error, Result};
use crate::instance::{Bounds, Instance};
use crate::model::{
    Ball, Certificate, Cut, Diagnostics, Ellipsoid, ParaboloidComplement, ParaboloidCut, Polyhedron, Provenance,
    QuadraticForm, Query, Region, SeparatedCut, SeparationReport,
};
use crate::oracle::Validity;
use crate::{Matrix, Vector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceDoc {
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadratic: Option<QuadraticDoc>,
    pub region: RegionDoc,
    pub query: QueryDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundsDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticDoc {
    #[serde(rename = "M")]
    pub m: Vec<Vec<f64>>,
    pub l: Vec<f64>,
    pub m0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegionDoc {
    Polyhedron {
        normals: Vec<Vec<f64>>,
        offsets: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        interior_point: Option<Vec<f64>>,
    },
    Ellipsoid {
        #[serde(rename = "A")]
        a: Vec<Vec<f64>>,
        c: Vec<f64>,
        b: f64,
    },
    ParaboloidComplement { normals: Vec<Vec<f64>>, offsets: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryDoc {
    pub x_star: Vec<f64>,
    pub q_star: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_star: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsDoc {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub q_lo: f64,
    pub q_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum CutDoc {
    /// `delta q - 2 beta' x >= beta0`.
    Standard {
        delta: f64,
        beta: Vec<f64>,
        beta0: f64,
        #[serde(default)]
        provenance: ProvenanceDoc,
    },
    /// `q >= x_coeff' x + w_coeff w + constant`.
    Paraboloid {
        x_coeff: Vec<f64>,
        w_coeff: f64,
        constant: f64,
        anchor: Vec<f64>,
        facet: usize,
        #[serde(default)]
        binding: Option<usize>,
        alpha: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ProvenanceDoc {
    Linearization { anchor: Vec<f64> },
    LiftedFirstOrder { anchor: Vec<f64>, facet: usize, alpha: f64 },
    Ball { center: Vec<f64>, rho: f64 },
    Paraboloid { anchor: Vec<f64>, facet: usize, alpha: f64 },
    ComplementHalfspace { facet: usize },
    #[default]
    External,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CertificateDoc {
    Linearization {
        anchor: Vec<f64>,
    },
    Facet {
        facet: usize,
        anchor: Vec<f64>,
        alpha: f64,
        binding: Option<usize>,
    },
    Ball {
        center: Vec<f64>,
        rho: f64,
        /// `null` for zero-radius balls.
        tau: Option<f64>,
        slack: Option<f64>,
    },
    Halfspace {
        facet: usize,
    },
    Paraboloid {
        facet: usize,
        anchor: Vec<f64>,
        alpha: f64,
        binding: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsDoc {
    pub iterations: usize,
    pub kkt_residual: f64,
    pub subproblems: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skipped: Vec<SkippedDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedDoc {
    pub facet: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance_hash: Option<String>,
    pub region_kind: String,
    pub query: QueryDoc,
    pub cut: CutDoc,
    pub violation: f64,
    pub certificate: CertificateDoc,
    pub diagnostics: DiagnosticsDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance_hash: Option<String>,
    pub seed: u64,
    pub records: Vec<VerificationRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationRecord {
    pub cut_id: String,
    pub oracle: String,
    /// `valid` or `counterexample`.
    pub verdict: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessDoc>,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessDoc {
    pub x: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<f64>,
    pub residual: f64,
}

fn vec_of(v: &Vector) -> Vec<f64> {
    v.iter().copied().collect()
}

fn rows_of(m: &Matrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

fn vector(v: &[f64], dim: usize, what: &str) -> Result<Vector> {
    if v.len() != dim {
        return Err(Error::Parse(format!("{what}: expected {dim} entries, found {}", v.len())));
    }
    Ok(Vector::from_row_slice(v))
}

fn matrix(rows: &[Vec<f64>], dim: usize, what: &str) -> Result<Matrix> {
    if rows.len() != dim {
        return Err(Error::Parse(format!("{what}: expected {dim} rows, found {}", rows.len())));
    }
    let mut m = Matrix::zeros(dim, dim);
    for (r, row) in rows.iter().enumerate() {
        if row.len() != dim {
            return Err(Error::Parse(format!("{what}: row {r} has {} entries, expected {dim}", row.len())));
        }
        for (c, v) in row.iter().enumerate() {
            m[(r, c)] = *v;
        }
    }
    Ok(m)
}

fn facets(normals: &[Vec<f64>], offsets: &[f64], dim: usize) -> Result<Vec<Vector>> {
    if normals.len() != offsets.len() {
        return Err(Error::Parse(format!("{} normals but {} offsets", normals.len(), offsets.len())));
    }
    normals.iter().enumerate().map(|(i, a)| vector(a, dim, &format!("normal {i}"))).collect()
}

impl InstanceDoc {
    pub fn to_instance(&self) -> Result<Instance> {
        let d = self.dimension;
        if d == 0 {
            return Err(Error::Parse("dimension must be positive".into()));
        }
        let quadratic = match &self.quadratic {
            Some(q) => QuadraticForm::new(matrix(&q.m, d, "quadratic.M")?, vector(&q.l, d, "quadratic.l")?, q.m0)?,
            None => QuadraticForm::squared_norm(d),
        };
        let region = match &self.region {
            RegionDoc::Polyhedron { normals, offsets, interior_point } => {
                let a = facets(normals, offsets, d)?;
                Region::Polyhedron(match interior_point {
                    Some(p) => Polyhedron::with_interior_point(a, offsets.clone(), vector(p, d, "interior_point")?)?,
                    None => Polyhedron::new(a, offsets.clone())?,
                })
            }
            RegionDoc::Ellipsoid { a, c, b } => {
                Region::Ellipsoid(Ellipsoid::new(matrix(a, d, "region.A")?, vector(c, d, "region.c")?, *b)?)
            }
            RegionDoc::ParaboloidComplement { normals, offsets } => {
                Region::ParaboloidComplement(ParaboloidComplement::new(facets(normals, offsets, d)?, offsets.clone())?)
            }
        };
        let x = vector(&self.query.x_star, d, "query.x_star")?;
        let query = Query { x, w: self.query.w_star, q: self.query.q_star };
        let mut inst = Instance::new(quadratic, region, query)?;
        if let Some(b) = &self.bounds {
            inst = inst.with_bounds(Bounds {
                lo: vector(&b.lo, d, "bounds.lo")?,
                hi: vector(&b.hi, d, "bounds.hi")?,
                q_lo: b.q_lo,
                q_hi: b.q_hi,
            })?;
        }
        Ok(inst)
    }

    pub fn from_instance(inst: &Instance) -> Self {
        let q = &inst.quadratic;
        let region = match &inst.region {
            Region::Polyhedron(p) => RegionDoc::Polyhedron {
                normals: p.normals().iter().map(vec_of).collect(),
                offsets: p.offsets().to_vec(),
                interior_point: Some(vec_of(p.interior_point())),
            },
            Region::Ellipsoid(e) => {
                RegionDoc::Ellipsoid { a: rows_of(e.matrix()), c: vec_of(e.linear()), b: e.constant() }
            }
            Region::ParaboloidComplement(r) => RegionDoc::ParaboloidComplement {
                normals: r.normals().iter().map(vec_of).collect(),
                offsets: r.offsets().to_vec(),
            },
        };
        InstanceDoc {
            dimension: inst.dim(),
            quadratic: Some(QuadraticDoc { m: rows_of(q.matrix()), l: vec_of(q.linear()), m0: q.constant() }),
            region,
            query: query_doc(&inst.query),
            bounds: inst.bounds.as_ref().map(|b| BoundsDoc {
                lo: vec_of(&b.lo),
                hi: vec_of(&b.hi),
                q_lo: b.q_lo,
                q_hi: b.q_hi,
            }),
        }
    }
}

fn query_doc(q: &Query) -> QueryDoc {
    QueryDoc { x_star: vec_of(&q.x), q_star: q.q, w_star: q.w }
}

impl ProvenanceDoc {
    fn from_provenance(p: &Provenance) -> Self {
        match p {
            Provenance::Linearization { anchor } => ProvenanceDoc::Linearization { anchor: vec_of(anchor) },
            Provenance::LiftedFirstOrder { anchor, facet, alpha } => {
                ProvenanceDoc::LiftedFirstOrder { anchor: vec_of(anchor), facet: *facet, alpha: *alpha }
            }
            Provenance::Ball(b) => ProvenanceDoc::Ball { center: vec_of(&b.center), rho: b.rho },
            Provenance::Paraboloid { anchor, facet, alpha } => {
                ProvenanceDoc::Paraboloid { anchor: vec_of(anchor), facet: *facet, alpha: *alpha }
            }
            Provenance::ComplementHalfspace { facet } => ProvenanceDoc::ComplementHalfspace { facet: *facet },
            Provenance::External => ProvenanceDoc::External,
        }
    }

    fn to_provenance(&self) -> Result<Provenance> {
        let v = |x: &Vec<f64>| Vector::from_row_slice(x);
        Ok(match self {
            ProvenanceDoc::Linearization { anchor } => Provenance::Linearization { anchor: v(anchor) },
            ProvenanceDoc::LiftedFirstOrder { anchor, facet, alpha } => {
                Provenance::LiftedFirstOrder { anchor: v(anchor), facet: *facet, alpha: *alpha }
            }
            ProvenanceDoc::Ball { center, rho } => Provenance::Ball(Ball::new(v(center), *rho)?),
            ProvenanceDoc::Paraboloid { anchor, facet, alpha } => {
                Provenance::Paraboloid { anchor: v(anchor), facet: *facet, alpha: *alpha }
            }
            ProvenanceDoc::ComplementHalfspace { facet } => Provenance::ComplementHalfspace { facet: *facet },
            ProvenanceDoc::External => Provenance::External,
        })
    }
}

impl CutDoc {
    pub fn from_cut(cut: &SeparatedCut) -> Self {
        match cut {
            SeparatedCut::Standard(c) => CutDoc::Standard {
                delta: c.delta,
                beta: vec_of(&c.beta),
                beta0: c.beta0,
                provenance: ProvenanceDoc::from_provenance(&c.provenance),
            },
            SeparatedCut::Paraboloid(c) => CutDoc::Paraboloid {
                x_coeff: vec_of(&c.x_coeff),
                w_coeff: c.w_coeff,
                constant: c.constant,
                anchor: vec_of(&c.anchor),
                facet: c.facet,
                binding: c.binding,
                alpha: c.alpha,
            },
        }
    }

    pub fn to_cut(&self) -> Result<SeparatedCut> {
        Ok(match self {
            CutDoc::Standard { delta, beta, beta0, provenance } => SeparatedCut::Standard(Cut {
                delta: *delta,
                beta: Vector::from_row_slice(beta),
                beta0: *beta0,
                provenance: provenance.to_provenance()?,
            }),
            CutDoc::Paraboloid { x_coeff, w_coeff, constant, anchor, facet, binding, alpha } => {
                if anchor.len() != x_coeff.len() {
                    return Err(Error::Parse("paraboloid cut anchor and x_coeff differ in length".into()));
                }
                SeparatedCut::Paraboloid(ParaboloidCut {
                    x_coeff: Vector::from_row_slice(x_coeff),
                    w_coeff: *w_coeff,
                    constant: *constant,
                    anchor: Vector::from_row_slice(anchor),
                    facet: *facet,
                    binding: *binding,
                    alpha: *alpha,
                })
            }
        })
    }
}

fn certificate_doc(c: &Certificate) -> CertificateDoc {
    match c {
        Certificate::Linearization { anchor } => CertificateDoc::Linearization { anchor: vec_of(anchor) },
        Certificate::Facet { facet, anchor, alpha, binding } => {
            CertificateDoc::Facet { facet: *facet, anchor: vec_of(anchor), alpha: *alpha, binding: *binding }
        }
        Certificate::Ball { ball, containment } => CertificateDoc::Ball {
            center: vec_of(&ball.center),
            rho: ball.rho,
            tau: containment.as_ref().and_then(|c: &ContainmentCertificate| finite(c.tau)),
            slack: containment.as_ref().and_then(|c| finite(c.slack)),
        },
        Certificate::Halfspace { facet } => CertificateDoc::Halfspace { facet: *facet },
        Certificate::Paraboloid { facet, anchor, alpha, binding } => {
            CertificateDoc::Paraboloid { facet: *facet, anchor: vec_of(anchor), alpha: *alpha, binding: *binding }
        }
    }
}

fn diagnostics_doc(d: &Diagnostics) -> DiagnosticsDoc {
    DiagnosticsDoc {
        iterations: d.iterations,
        kkt_residual: d.kkt_residual,
        subproblems: d.subproblems,
        rho: d.rho,
        skipped: d.skipped.iter().map(|s| SkippedDoc { facet: s.facet, reason: s.reason.clone() }).collect(),
    }
}

impl ReportDoc {
    pub fn from_report(region: &Region, r: &SeparationReport) -> Self {
        ReportDoc {
            version: None,
            instance_hash: None,
            region_kind: region.kind().to_string(),
            query: query_doc(&r.query),
            cut: CutDoc::from_cut(&r.cut),
            violation: r.violation,
            certificate: certificate_doc(&r.certificate),
            diagnostics: diagnostics_doc(&r.diagnostics),
            elapsed_seconds: None,
        }
    }
}

impl VerificationRecord {
    pub fn from_validity(cut_id: &str, oracle: &str, v: &Validity) -> Self {
        match v {
            Validity::Valid { samples } => VerificationRecord {
                cut_id: cut_id.into(),
                oracle: oracle.into(),
                verdict: "valid".into(),
                witness: None,
                samples: *samples,
            },
            Validity::CounterExample { point, w, residual, samples } => VerificationRecord {
                cut_id: cut_id.into(),
                oracle: oracle.into(),
                verdict: "counterexample".into(),
                witness: Some(WitnessDoc { x: vec_of(point), w: *w, residual: *residual }),
                samples: *samples,
            },
        }
    }

    pub fn is_valid(&self) -> bool {
        self.verdict == "valid"
    }
}

fn parse_err(e: serde_json::Error) -> Error {
    Error::Parse(e.to_string())
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let doc: InstanceDoc = serde_json::from_str(text).map_err(parse_err)?;
    doc.to_instance()
}

pub fn instance_to_string(inst: &Instance) -> String {
    to_pretty(&InstanceDoc::from_instance(inst))
}

/// Accepts either a cut document or any document with a `cut` field (such
/// as a separation report).
pub fn parse_cut(text: &str) -> Result<SeparatedCut> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(parse_err)?;
    let cut = match value.get("cut") {
        Some(inner) if value.get("form").is_none() => inner.clone(),
        _ => value,
    };
    let doc: CutDoc = serde_json::from_value(cut).map_err(parse_err)?;
    doc.to_cut()
}

pub fn cut_to_string(cut: &SeparatedCut) -> String {
    to_pretty(&CutDoc::from_cut(cut))
}

pub fn to_pretty<T: Serialize>(doc: &T) -> String {
    serde_json::to_string_pretty(doc).expect("documents contain only finite numbers")
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQUARE: &str = r#"{
        "dimension": 2,
        "region": {"kind": "polyhedron",
                   "normals": [[1,0],[0,1],[-1,0],[0,-1]],
                   "offsets": [0,0,-1,-1]},
        "query": {"x_star": [0.5, 0.5], "q_star": 0.5}
    }"#;

    #[test]
    fn parses_square_and_round_trips() {
        let inst = parse_instance(SQUARE).unwrap();
        assert!(inst.is_standard_form());
        let text = instance_to_string(&inst);
        assert_eq!(parse_instance(&text).unwrap(), inst);
    }

    #[test]
    fn round_trips_every_region_kind() {
        let docs = [
            r#"{"dimension": 2,
                "quadratic": {"M": [[2, 0.5],[0.5, 1]], "l": [0.1, -0.3], "m0": 0.7},
                "region": {"kind": "ellipsoid", "A": [[1,0],[0,4]], "c": [0.1, 0.2], "b": -0.9},
                "query": {"x_star": [0.1, 0.3], "q_star": -1e-3},
                "bounds": {"lo": [-1,-1], "hi": [1,1], "q_lo": -10, "q_hi": 10}}"#,
            r#"{"dimension": 1,
                "region": {"kind": "paraboloid_complement", "normals": [[1],[-1]], "offsets": [0,0]},
                "query": {"x_star": [0.0], "q_star": 0.0, "w_star": 0.5}}"#,
        ];
        for d in docs {
            let inst = parse_instance(d).unwrap();
            let again = parse_instance(&instance_to_string(&inst)).unwrap();
            assert_eq!(again, inst);
        }
    }

    #[test]
    fn full_precision_survives() {
        let x = 0.1 + 0.2;
        let text = SQUARE.replace("0.5, 0.5]", &format!("{x:?}, 0.5]"));
        let inst = parse_instance(&text).unwrap();
        assert_eq!(inst.query.x[0], x);
        let again = parse_instance(&instance_to_string(&inst)).unwrap();
        assert_eq!(again.query.x[0].to_bits(), x.to_bits());
    }

    #[test]
    fn malformed_input_is_a_parse_error() {
        for bad in [
            "not json",
            r#"{"dimension": 2}"#,
            r#"{"dimension": 3, "region": {"kind": "polyhedron", "normals": [[1,0]], "offsets": [0]},
                "query": {"x_star": [0,0,0], "q_star": 0}}"#,
            r#"{"dimension": 1, "region": {"kind": "torus"}, "query": {"x_star": [0], "q_star": 0}}"#,
        ] {
            assert!(matches!(parse_instance(bad), Err(Error::Parse(_))), "{bad}");
        }
    }

    #[test]
    fn cut_round_trip_and_report_embedding() {
        let cut = SeparatedCut::Standard(Cut {
            delta: 1.0,
            beta: Vector::from_row_slice(&[0.5, 0.5]),
            beta0: -0.25,
            provenance: Provenance::LiftedFirstOrder { anchor: Vector::from_row_slice(&[0.0, 0.5]), facet: 0, alpha: 0.5 },
        });
        let text = cut_to_string(&cut);
        assert_eq!(parse_cut(&text).unwrap(), cut);
        let wrapped = format!(r#"{{"violation": 0.25, "cut": {text}}}"#);
        assert_eq!(parse_cut(&wrapped).unwrap(), cut);
        let bare = r#"{"form": "standard", "delta": 0, "beta": [0.5, 0], "beta0": 0}"#;
        let c = parse_cut(bare).unwrap();
        assert_eq!(c.as_standard().unwrap().provenance, Provenance::External);
    }

    #[test]
    fn infinite_multiplier_becomes_null() {
        let cert = Certificate::Ball {
            ball: Ball::point(Vector::from_row_slice(&[0.0])),
            containment: Some(ContainmentCertificate {
                tau: f64::INFINITY,
                v: Vector::zeros(1),
                y: Vector::zeros(1),
                slack: 0.5,
            }),
        };
        let text = serde_json::to_string(&certificate_doc(&cert)).unwrap();
        assert!(text.contains("\"tau\":null"), "{text}");
    }
}
