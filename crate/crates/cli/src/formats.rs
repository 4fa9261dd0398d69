//! JSON schemas for the file-oriented interfaces: graphs, analysis
//! reports, spectra, correspondence tables, prime scans, and SIDH
//! transcripts. Field elements are serialized as [c0, c1] coordinate
//! pairs, points as [x, y] pairs of those, with infinity as null.

use ramanujan_core::ec::{Curve, Point};
use ramanujan_core::ff::{Field, Fp2};
use ramanujan_core::graph::{LabeledMultigraph, StructureReport};
use ramanujan_core::lps::{CorrespondenceTable, EpsBranch};
use ramanujan_core::sidh::{PublicKey, SidhParams};
use ramanujan_core::Error;
use serde::{Deserialize, Serialize};

#[derive(Serialize, Deserialize)]
pub struct GraphJson {
    pub directed: bool,
    pub vertices: Vec<String>,
    pub edges: Vec<(String, String)>,
}

pub fn parse_graph(text: &str) -> Result<LabeledMultigraph, String> {
    let g: GraphJson = serde_json::from_str(text).map_err(|e| format!("bad graph JSON: {e}"))?;
    LabeledMultigraph::from_parts(g.directed, g.vertices, g.edges).map_err(|e| e.to_string())
}

#[derive(Serialize)]
pub struct ReportJson {
    pub vertices: usize,
    pub edges: usize,
    pub regular_degree: Option<u64>,
    pub connected: bool,
    pub bipartite: bool,
    pub girth: Option<u64>,
    pub loop_count: usize,
    pub multi_edge_count: usize,
}

impl ReportJson {
    pub fn new(g: &LabeledMultigraph, r: &StructureReport) -> Self {
        ReportJson {
            vertices: g.vertex_count(),
            edges: g.edge_count(),
            regular_degree: r.regular_degree,
            connected: r.connected,
            bipartite: r.bipartite,
            girth: r.girth,
            loop_count: r.loop_count,
            multi_edge_count: r.multi_edge_count,
        }
    }
}

#[derive(Serialize)]
pub struct SpectrumJson {
    pub vertices: usize,
    pub eigenvalues: Vec<f64>,
}

#[derive(Serialize)]
pub struct SparseSpectrumJson {
    pub vertices: usize,
    pub second_eigenvalue: f64,
    pub tolerance: f64,
}

#[derive(Serialize)]
pub struct CorrespondenceJson {
    pub l: u64,
    pub a: u64,
    pub b: u64,
    pub e: u64,
    pub branch: String,
    pub eps_residue: u64,
    pub entries: Vec<CorrespondenceEntry>,
}

#[derive(Serialize)]
pub struct CorrespondenceEntry {
    pub h: u64,
    pub quaternion: [i64; 4],
}

impl CorrespondenceJson {
    pub fn new(t: &CorrespondenceTable) -> Self {
        CorrespondenceJson {
            l: t.l,
            a: t.a,
            b: t.b,
            e: t.e,
            branch: match t.branch {
                EpsBranch::PlusE => "plus".into(),
                EpsBranch::MinusE => "minus".into(),
            },
            eps_residue: t.eps_residue,
            entries: t
                .entries
                .iter()
                .enumerate()
                .map(|(h, q)| CorrespondenceEntry {
                    h: h as u64,
                    quaternion: [q.x0, q.x1, q.x2, q.x3],
                })
                .collect(),
        }
    }
}

#[derive(Serialize)]
pub struct ScanJson {
    pub scanned_primes: usize,
    pub admissible: Vec<u64>,
}

type Fp2Pair = (u64, u64);
type PointJson = Option<(Fp2Pair, Fp2Pair)>;

#[derive(Serialize, Deserialize)]
pub struct TranscriptParams {
    pub ell_a: u64,
    pub n: u32,
    pub ell_b: u64,
    pub m: u32,
    pub cofactor: u64,
    pub sign: i8,
    pub p: u64,
}

#[derive(Serialize, Deserialize)]
pub struct TranscriptPublic {
    pub curve: (Fp2Pair, Fp2Pair),
    pub points: (PointJson, PointJson),
}

#[derive(Serialize, Deserialize)]
pub struct TranscriptJson {
    pub params: TranscriptParams,
    #[serde(rename = "public_A")]
    pub public_a: TranscriptPublic,
    #[serde(rename = "public_B")]
    pub public_b: TranscriptPublic,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shared_j: Option<Fp2Pair>,
}

fn fp2_pair(v: Fp2) -> Fp2Pair {
    (v.c0(), v.c1())
}

fn point_json(pt: &Point) -> PointJson {
    pt.xy().map(|(x, y)| (fp2_pair(x), fp2_pair(y)))
}

pub fn public_to_json(pk: &PublicKey) -> TranscriptPublic {
    TranscriptPublic {
        curve: (fp2_pair(pk.curve.a()), fp2_pair(pk.curve.b())),
        points: (point_json(&pk.basis_image.0), point_json(&pk.basis_image.1)),
    }
}

pub fn params_to_json(params: &SidhParams) -> TranscriptParams {
    TranscriptParams {
        ell_a: params.ell_a,
        n: params.n,
        ell_b: params.ell_b,
        m: params.m,
        cofactor: params.cofactor,
        sign: params.sign,
        p: params.p,
    }
}

pub fn params_from_json(t: &TranscriptParams) -> Result<SidhParams, Error> {
    let params = SidhParams::setup(t.ell_a, t.n, t.ell_b, t.m, t.cofactor, t.sign)?;
    if params.p != t.p {
        return Err(Error::Parameter(
            "transcript p does not match its parameters",
        ));
    }
    Ok(params)
}

pub fn public_from_json(field: Field, t: &TranscriptPublic) -> Result<PublicKey, Error> {
    let fp2 = |(c0, c1): Fp2Pair| field.fp2_u(c0, c1);
    let curve = Curve::new(fp2(t.curve.0), fp2(t.curve.1))?;
    let point = |pj: &PointJson| -> Result<Point, Error> {
        match pj {
            None => Ok(curve.infinity()),
            Some((x, y)) => curve.point(fp2(*x), fp2(*y)),
        }
    };
    Ok(PublicKey {
        curve,
        basis_image: (point(&t.points.0)?, point(&t.points.1)?),
    })
}
