//! JSON schema for multi-object densities and state-set files.
//!
//! One document per density, tagged by `kind`:
//!
//! ```json
//! { "kind": "lmb",
//!   "components": [
//!     { "label": [6, 1], "existence": 0.99,
//!       "density": { "components": [
//!         { "weight": 1.0, "mean": [0.0, 0.0, 0.0, 0.0],
//!           "cov": [[1.0, 0.0, ...], ...] } ] } } ] }
//! ```
//!
//! `glmb` documents carry `label_space` plus weighted hypotheses with
//! per-label densities; `gmb`/`mb` are their unlabeled counterparts
//! keyed by integer indices. Labels serialize as `[birth_time, index]`
//! pairs. Floats round-trip exactly (shortest representation), so a
//! read-back density is bit-identical.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use rfs_fusion_core::gaussian::{Gaussian, GaussianMixture};
use rfs_fusion_core::labeled_rfs::{
    BernoulliComponent, GlmbDensity, GlmbHypothesis, GmbDensity, GmbHypothesis, Label, LmbDensity,
    MbDensity,
};

use crate::SimError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianDoc {
    pub weight: f64,
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureDoc {
    pub components: Vec<GaussianDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabeledBernoulliDoc {
    pub label: [u32; 2],
    pub existence: f64,
    pub density: MixtureDoc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabeledDensityEntry {
    pub label: [u32; 2],
    pub density: MixtureDoc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlmbHypothesisDoc {
    pub labels: Vec<[u32; 2]>,
    pub weight: f64,
    pub densities: Vec<LabeledDensityEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexedDensityEntry {
    pub index: usize,
    pub density: MixtureDoc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GmbHypothesisDoc {
    pub indices: Vec<usize>,
    pub weight: f64,
    pub densities: Vec<IndexedDensityEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexedBernoulliDoc {
    pub index: usize,
    pub existence: f64,
    pub density: MixtureDoc,
}

/// Any density document, dispatched by the `kind` tag.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DensityDoc {
    Lmb {
        components: Vec<LabeledBernoulliDoc>,
    },
    Glmb {
        label_space: Vec<[u32; 2]>,
        hypotheses: Vec<GlmbHypothesisDoc>,
    },
    Gmb {
        index_space: Vec<usize>,
        hypotheses: Vec<GmbHypothesisDoc>,
    },
    Mb {
        components: Vec<IndexedBernoulliDoc>,
    },
}

/// A read density in core form.
#[derive(Debug, Clone)]
pub enum Density {
    Lmb(LmbDensity),
    Glmb(GlmbDensity),
    Gmb(GmbDensity),
    Mb(MbDensity),
}

impl Density {
    pub fn kind(&self) -> &'static str {
        match self {
            Density::Lmb(_) => "lmb",
            Density::Glmb(_) => "glmb",
            Density::Gmb(_) => "gmb",
            Density::Mb(_) => "mb",
        }
    }
}

fn mixture_to_doc(gm: &GaussianMixture) -> MixtureDoc {
    MixtureDoc {
        components: gm
            .components()
            .iter()
            .map(|(w, g)| GaussianDoc {
                weight: *w,
                mean: g.mean().iter().copied().collect(),
                cov: (0..g.dim())
                    .map(|i| (0..g.dim()).map(|j| g.cov()[(i, j)]).collect())
                    .collect(),
            })
            .collect(),
    }
}

fn mixture_from_doc(doc: &MixtureDoc) -> Result<GaussianMixture, SimError> {
    let components = doc
        .components
        .iter()
        .map(|c| {
            let d = c.mean.len();
            if c.cov.len() != d || c.cov.iter().any(|row| row.len() != d) {
                return Err(SimError::Format("covariance shape mismatch".into()));
            }
            let mut cov = DMatrix::zeros(d, d);
            for (i, row) in c.cov.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    cov[(i, j)] = *v;
                }
            }
            Ok((c.weight, Gaussian::new(DVector::from_vec(c.mean.clone()), cov)?))
        })
        .collect::<Result<Vec<_>, SimError>>()?;
    Ok(GaussianMixture::new(components)?)
}

pub fn to_doc(density: &Density) -> DensityDoc {
    match density {
        Density::Lmb(lmb) => DensityDoc::Lmb {
            components: lmb
                .components()
                .map(|c| LabeledBernoulliDoc {
                    label: [c.label.time, c.label.index],
                    existence: c.existence,
                    density: mixture_to_doc(&c.density),
                })
                .collect(),
        },
        Density::Glmb(glmb) => DensityDoc::Glmb {
            label_space: glmb.sorted_labels().iter().map(|l| [l.time, l.index]).collect(),
            hypotheses: glmb
                .hypotheses()
                .iter()
                .enumerate()
                .map(|(i, h)| GlmbHypothesisDoc {
                    labels: h.labels.iter().map(|l| [l.time, l.index]).collect(),
                    weight: glmb.weight(i),
                    densities: h
                        .densities
                        .iter()
                        .map(|(l, gm)| LabeledDensityEntry {
                            label: [l.time, l.index],
                            density: mixture_to_doc(gm),
                        })
                        .collect(),
                })
                .collect(),
        },
        Density::Gmb(gmb) => DensityDoc::Gmb {
            index_space: gmb.index_space().iter().copied().collect(),
            hypotheses: gmb
                .hypotheses()
                .iter()
                .enumerate()
                .map(|(i, h)| GmbHypothesisDoc {
                    indices: h.indices.iter().copied().collect(),
                    weight: gmb.weight(i),
                    densities: h
                        .densities
                        .iter()
                        .map(|(idx, gm)| IndexedDensityEntry {
                            index: *idx,
                            density: mixture_to_doc(gm),
                        })
                        .collect(),
                })
                .collect(),
        },
        Density::Mb(mb) => DensityDoc::Mb {
            components: mb
                .components()
                .map(|(idx, (r, gm))| IndexedBernoulliDoc {
                    index: *idx,
                    existence: *r,
                    density: mixture_to_doc(gm),
                })
                .collect(),
        },
    }
}

pub fn from_doc(doc: &DensityDoc) -> Result<Density, SimError> {
    Ok(match doc {
        DensityDoc::Lmb { components } => Density::Lmb(LmbDensity::new(
            components
                .iter()
                .map(|c| {
                    Ok(BernoulliComponent::new(
                        Label::new(c.label[0], c.label[1]),
                        c.existence,
                        mixture_from_doc(&c.density)?,
                    )?)
                })
                .collect::<Result<Vec<_>, SimError>>()?,
        )?),
        DensityDoc::Glmb {
            label_space,
            hypotheses,
        } => {
            let hyps = hypotheses
                .iter()
                .map(|h| {
                    if h.weight <= 0.0 {
                        return Err(SimError::Format("hypothesis weights must be positive".into()));
                    }
                    let mut densities = BTreeMap::new();
                    for e in &h.densities {
                        densities.insert(
                            Label::new(e.label[0], e.label[1]),
                            std::sync::Arc::new(mixture_from_doc(&e.density)?),
                        );
                    }
                    Ok(GlmbHypothesis {
                        labels: h.labels.iter().map(|l| Label::new(l[0], l[1])).collect(),
                        log_weight: h.weight.ln(),
                        densities,
                    })
                })
                .collect::<Result<Vec<_>, SimError>>()?;
            Density::Glmb(GlmbDensity::new(
                label_space.iter().map(|l| Label::new(l[0], l[1])).collect(),
                hyps,
            )?)
        }
        DensityDoc::Gmb {
            index_space,
            hypotheses,
        } => {
            let hyps = hypotheses
                .iter()
                .map(|h| {
                    if h.weight <= 0.0 {
                        return Err(SimError::Format("hypothesis weights must be positive".into()));
                    }
                    let mut densities = BTreeMap::new();
                    for e in &h.densities {
                        densities.insert(e.index, std::sync::Arc::new(mixture_from_doc(&e.density)?));
                    }
                    Ok(GmbHypothesis {
                        indices: h.indices.iter().copied().collect(),
                        log_weight: h.weight.ln(),
                        densities,
                    })
                })
                .collect::<Result<Vec<_>, SimError>>()?;
            Density::Gmb(GmbDensity::new(index_space.iter().copied().collect(), hyps)?)
        }
        DensityDoc::Mb { components } => {
            let mut map = BTreeMap::new();
            for c in components {
                map.insert(c.index, (c.existence, mixture_from_doc(&c.density)?));
            }
            Density::Mb(MbDensity::new(map)?)
        }
    })
}

pub fn read_density(path: &Path) -> Result<Density, SimError> {
    let text = std::fs::read_to_string(path)?;
    let doc: DensityDoc = serde_json::from_str(&text)?;
    from_doc(&doc)
}

pub fn write_density(path: &Path, density: &Density) -> Result<(), SimError> {
    let doc = to_doc(density);
    let text = serde_json::to_string_pretty(&doc)?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

/// State-set file for the `ospa` command: a list of state vectors.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSetDoc {
    pub states: Vec<Vec<f64>>,
}

pub fn read_state_set(path: &Path) -> Result<Vec<DVector<f64>>, SimError> {
    let text = std::fs::read_to_string(path)?;
    let doc: StateSetDoc = serde_json::from_str(&text)?;
    Ok(doc.states.into_iter().map(DVector::from_vec).collect())
}
