//! JSON group specs and witness certificates.
//!
//! A certificate records the group, the classes and the generator images, and
//! can be re-checked without trusting whoever produced it.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cohomology::CohClass1;
use crate::error::{Error, Result};
use crate::groups::{
    free_product, generator_label, semidirect_zp, Construction, EtypeBuilder, EtypePresentation,
    DEFAULT_PRECISION,
};
use crate::massey::{superdiagonal_mismatch, WitnessAssignment};
use crate::unitriangular::UniTriangular;

fn default_precision() -> u32 {
    DEFAULT_PRECISION
}

/// `{"p": .., "precision": .., "tree": node}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub p: u32,
    #[serde(default = "default_precision")]
    pub precision: u32,
    pub tree: NodeSpec,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum NodeSpec {
    Free {
        d: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        theta: Option<Vec<u64>>,
    },
    Demushkin {
        d: usize,
        f: u32,
    },
    ThetaAbelian {
        d: usize,
        f: Option<u32>,
    },
    FreeProduct {
        left: Box<NodeSpec>,
        right: Box<NodeSpec>,
    },
    SemidirectZp {
        base: Box<NodeSpec>,
    },
}

impl GroupSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Input(format!("group spec: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("specs serialize")
    }

    pub fn build(&self) -> Result<EtypePresentation> {
        let b = EtypeBuilder::new(self.p, self.precision)?;
        let g = build_node(&b, &self.tree)?;
        g.validate()?;
        Ok(g)
    }

    pub fn of(g: &EtypePresentation) -> Self {
        GroupSpec {
            p: g.p(),
            precision: g.precision(),
            tree: node_of(g),
        }
    }
}

fn build_node(b: &EtypeBuilder, node: &NodeSpec) -> Result<EtypePresentation> {
    match node {
        NodeSpec::Free { d, theta } => b.free(*d, theta.clone()),
        NodeSpec::Demushkin { d, f } => b.demushkin(*d, *f),
        NodeSpec::ThetaAbelian { d, f } => b.theta_abelian(*d, *f),
        NodeSpec::FreeProduct { left, right } => free_product(build_node(b, left)?, build_node(b, right)?),
        NodeSpec::SemidirectZp { base } => semidirect_zp(build_node(b, base)?),
    }
}

fn node_of(g: &EtypePresentation) -> NodeSpec {
    match g.tree() {
        Construction::Free { d } => {
            let theta = &g.orientation().values;
            NodeSpec::Free {
                d: *d,
                theta: theta.iter().any(|&v| v != 1).then(|| theta.clone()),
            }
        }
        Construction::Demushkin { d, f } => NodeSpec::Demushkin { d: *d, f: *f },
        Construction::ThetaAbelian { d, f } => NodeSpec::ThetaAbelian { d: *d, f: *f },
        Construction::FreeProduct { left, right } => NodeSpec::FreeProduct {
            left: Box::new(node_of(left)),
            right: Box::new(node_of(right)),
        },
        Construction::SemidirectZp { base } => NodeSpec::SemidirectZp {
            base: Box::new(node_of(base)),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checks {
    pub relators: String,
    pub superdiagonal: String,
}

/// A serialized witness. Images are the strictly upper entries of each matrix
/// in row-major order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub group: GroupSpec,
    pub p: u32,
    pub n: usize,
    pub alphas: Vec<Vec<u32>>,
    pub images: IndexMap<String, Vec<u32>>,
    pub checks: Checks,
}

impl Certificate {
    /// Packages a witness, after checking it.
    pub fn new(g: &EtypePresentation, alphas: &[CohClass1], w: &WitnessAssignment) -> Result<Self> {
        let images = (0..g.generator_count())
            .zip(w.images())
            .map(|(x, m)| (generator_label(x), m.entries().to_vec()))
            .collect();
        let cert = Certificate {
            group: GroupSpec::of(g),
            p: g.p(),
            n: w.n(),
            alphas: alphas.iter().map(|a| a.coeffs.clone()).collect(),
            images,
            checks: Checks {
                relators: "pass".into(),
                superdiagonal: "pass".into(),
            },
        };
        match verify_certificate(&cert)? {
            Verdict::Pass => Ok(cert),
            v => Err(Error::Internal(format!("fresh certificate fails: {v}"))),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Input(format!("certificate: {e}")))
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificates serialize")
    }

    /// SHA-256 of the compact JSON form, in hex.
    pub fn digest(&self) -> String {
        hex_digest(serde_json::to_string(self).expect("certificates serialize").as_bytes())
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Result of re-checking a certificate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    /// Relator `index` (0-based) is not sent to the identity.
    RelatorFails { index: usize, relator: String },
    /// Entry `(i, i+1)` of `generator` differs from `α_i` (1-based `i`).
    SuperdiagonalMismatch { i: usize, generator: String },
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Pass => write!(f, "pass"),
            Verdict::RelatorFails { index, relator } => {
                write!(f, "relator {} ({relator}) is not satisfied", index + 1)
            }
            Verdict::SuperdiagonalMismatch { i, generator } => {
                write!(f, "superdiagonal mismatch at i={i}, generator {generator}")
            }
        }
    }
}

/// Rebuilds the group from the spec and re-runs both checks from scratch.
pub fn verify_certificate(cert: &Certificate) -> Result<Verdict> {
    let g = cert.group.build()?;
    if cert.p != g.p() {
        return Err(Error::Input(format!(
            "certificate says p = {} but the group has p = {}",
            cert.p,
            g.p()
        )));
    }
    if cert.alphas.len() != cert.n {
        return Err(Error::Input(format!(
            "{} classes for n = {}",
            cert.alphas.len(),
            cert.n
        )));
    }
    let d = g.generator_count();
    let field = g.field();
    let mut images = Vec::with_capacity(d);
    for x in 0..d {
        let label = generator_label(x);
        let entries = cert
            .images
            .get(&label)
            .ok_or_else(|| Error::Input(format!("no image for generator {label}")))?;
        images.push(UniTriangular::from_entries(field, cert.n, entries.clone())?);
    }
    if cert.images.len() != d {
        return Err(Error::Input(format!(
            "{} images for {d} generators",
            cert.images.len()
        )));
    }
    let alphas: Vec<CohClass1> = cert.alphas.iter().cloned().map(CohClass1::new).collect();
    for a in &alphas {
        crate::cohomology::check_class(&g, a)?;
    }
    if let Some(index) = g.first_failing_relator(&images)? {
        return Ok(Verdict::RelatorFails {
            index,
            relator: g.presentation().relator_strings()[index].clone(),
        });
    }
    let w = WitnessAssignment::new(field, cert.n, images)?;
    if let Some((i, x)) = superdiagonal_mismatch(&w, &alphas) {
        return Ok(Verdict::SuperdiagonalMismatch {
            i: i + 1,
            generator: generator_label(x),
        });
    }
    Ok(Verdict::Pass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{demushkin, free};
    use crate::massey::{strong_vanishing_witness, SearchOptions};

    #[test]
    fn spec_round_trip() {
        let text = r#"{"p": 3, "tree": {"semidirect_zp": {"base": {"free_product": {
            "left": {"demushkin": {"d": 2, "f": 1}},
            "right": {"free": {"d": 1, "theta": [4]}}}}}}}"#;
        let spec = GroupSpec::from_json(text).unwrap();
        assert_eq!(spec.precision, 8);
        let g = spec.build().unwrap();
        assert_eq!(g.generator_count(), 4);
        assert_eq!(GroupSpec::of(&g), spec);
        assert_eq!(GroupSpec::from_json(&spec.to_json()).unwrap(), spec);
        let t = GroupSpec::from_json(r#"{"p": 5, "tree": {"theta_abelian": {"d": 2, "f": null}}}"#).unwrap();
        assert!(t.build().unwrap().orientation().values.iter().all(|&v| v == 1));
    }

    #[test]
    fn bad_specs() {
        assert!(GroupSpec::from_json("{").is_err());
        assert!(GroupSpec::from_json(r#"{"p": 3, "tree": {"cyclic": {"d": 1}}}"#).is_err());
        let s = GroupSpec::from_json(r#"{"p": 2, "tree": {"demushkin": {"d": 2, "f": 1}}}"#).unwrap();
        assert!(s.build().unwrap_err().to_string().contains("torsion-free"));
        let s = GroupSpec::from_json(r#"{"p": 4, "tree": {"free": {"d": 1}}}"#).unwrap();
        assert!(s.build().is_err());
    }

    fn sample() -> Certificate {
        let g = demushkin(3, 2, 1).unwrap();
        let alphas = vec![CohClass1::dual(2, 0); 3];
        let w = strong_vanishing_witness(&g, &alphas, SearchOptions::default()).unwrap();
        Certificate::new(&g, &alphas, &w).unwrap()
    }

    #[test]
    fn certificate_round_trip_and_tamper() {
        let cert = sample();
        let back = Certificate::from_json(&cert.to_json_pretty()).unwrap();
        assert_eq!(back, cert);
        assert_eq!(verify_certificate(&back).unwrap(), Verdict::Pass);
        assert_eq!(back.digest(), cert.digest());

        let mut t = cert.clone();
        let e = t.images.get_mut("x2").unwrap();
        e[1] = (e[1] + 1) % 3;
        assert!(matches!(
            verify_certificate(&t).unwrap(),
            Verdict::RelatorFails { index: 0, .. }
        ));

        let mut t = cert.clone();
        t.alphas[1] = vec![2, 0];
        assert_eq!(
            verify_certificate(&t).unwrap(),
            Verdict::SuperdiagonalMismatch {
                i: 2,
                generator: "x1".into()
            }
        );
    }

    #[test]
    fn certificates_are_deterministic() {
        assert_eq!(sample().to_json_pretty(), sample().to_json_pretty());
        let g = free(5, 2, None).unwrap();
        let alphas = vec![CohClass1::new(vec![1, 2]); 3];
        let w = strong_vanishing_witness(&g, &alphas, SearchOptions::default()).unwrap();
        let c = Certificate::new(&g, &alphas, &w).unwrap();
        assert_eq!(c.images.keys().collect::<Vec<_>>(), vec!["x1", "x2"]);
    }
}
