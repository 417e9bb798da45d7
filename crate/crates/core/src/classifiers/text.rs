//! Versioned plain-text model format.
//!
//! ```text
//! illusion-lab-model 1
//! kind lda
//! dim 2
//! weights 2 1.2500000000000000e0 -3.0000000000000000e-1
//! bias 1 4.0000000000000000e-2
//! ridge 1 0.0000000000000000e0
//! end
//! ```
//!
//! After the header, each line is `name count values...`. Every number is
//! written in scientific notation with 17 significant digits, which
//! round-trips an `f64` exactly. Integer fields (indices, widths) are stored
//! the same way.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

use super::mlp::{MlpParams, Network, Standardizer};
use super::tree::Node;
use super::{
    ClassifierKind, ClassifierModel, DefaultRule, LinearDiscriminant, OneRule, Perceptron,
    PrunedTree,
};

pub const MODEL_FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "illusion-lab-model";

pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fields(model: &ClassifierModel) -> Vec<(&'static str, Vec<f64>)> {
    match model {
        ClassifierModel::Default(m) => vec![("score", vec![m.score])],
        ClassifierModel::OneR(m) => vec![
            ("feature", vec![m.feature as f64]),
            ("cuts", m.cuts.clone()),
            ("cell-scores", m.cell_scores.clone()),
        ],
        ClassifierModel::Lda(m) => vec![
            ("weights", m.weights.clone()),
            ("bias", vec![m.bias]),
            ("ridge", vec![m.ridge_used]),
        ],
        ClassifierModel::Tree(m) => {
            let mut feature = Vec::new();
            let mut threshold = Vec::new();
            let mut left = Vec::new();
            let mut right = Vec::new();
            let mut score = Vec::new();
            for n in &m.nodes {
                match n {
                    Node::Leaf { score: s } => {
                        feature.push(-1.0);
                        threshold.push(0.0);
                        left.push(0.0);
                        right.push(0.0);
                        score.push(*s);
                    }
                    Node::Split {
                        feature: f,
                        threshold: t,
                        left: l,
                        right: r,
                    } => {
                        feature.push(*f as f64);
                        threshold.push(*t);
                        left.push(*l as f64);
                        right.push(*r as f64);
                        score.push(0.0);
                    }
                }
            }
            vec![
                ("node-feature", feature),
                ("node-threshold", threshold),
                ("node-left", left),
                ("node-right", right),
                ("node-score", score),
            ]
        }
        ClassifierModel::Mlp(m) => match &m.net {
            Network::Baseline(rule) => vec![("hidden", vec![0.0]), ("score", vec![rule.score])],
            Network::Hidden {
                standardizer,
                params,
            } => vec![
                ("hidden", vec![params.hidden() as f64]),
                ("mean", standardizer.mean.clone()),
                ("scale", standardizer.scale.clone()),
                ("params", params.to_vec()),
            ],
        },
    }
}

pub fn model_to_text(model: &ClassifierModel) -> String {
    let mut out = format!(
        "{MAGIC} {MODEL_FORMAT_VERSION}\nkind {}\ndim {}\n",
        model.kind(),
        model.dim()
    );
    for (name, values) in fields(model) {
        out.push_str(name);
        out.push(' ');
        out.push_str(&values.len().to_string());
        for v in values {
            out.push(' ');
            out.push_str(&fmt_f64(v));
        }
        out.push('\n');
    }
    out.push_str("end\n");
    out
}

fn bad(msg: impl Into<String>) -> Error {
    Error::ModelFormat(msg.into())
}

struct Fields(BTreeMap<String, Vec<f64>>);

impl Fields {
    fn get(&self, name: &str) -> Result<&[f64]> {
        self.0
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| bad(format!("missing field `{name}`")))
    }

    fn scalar(&self, name: &str) -> Result<f64> {
        match self.get(name)? {
            [v] => Ok(*v),
            other => Err(bad(format!(
                "field `{name}` has {} values, expected 1",
                other.len()
            ))),
        }
    }

    fn index(&self, name: &str) -> Result<usize> {
        as_index(self.scalar(name)?, name)
    }
}

fn as_index(v: f64, name: &str) -> Result<usize> {
    if v >= 0.0 && v.fract() == 0.0 && v < u32::MAX as f64 {
        Ok(v as usize)
    } else {
        Err(bad(format!("field `{name}` value {v} is not an index")))
    }
}

pub fn model_from_text(text: &str) -> Result<ClassifierModel> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty input"))?;
    let version = header
        .strip_prefix(MAGIC)
        .map(str::trim)
        .ok_or_else(|| bad("missing model header"))?;
    if version != MODEL_FORMAT_VERSION.to_string() {
        return Err(bad(format!("unsupported model format version `{version}`")));
    }
    let kind: ClassifierKind = lines
        .next()
        .and_then(|l| l.strip_prefix("kind "))
        .ok_or_else(|| bad("missing kind line"))?
        .trim()
        .parse()
        .map_err(|_| bad("unknown model kind"))?;
    let dim: usize = lines
        .next()
        .and_then(|l| l.strip_prefix("dim "))
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| bad("missing dim line"))?;
    let mut map = BTreeMap::new();
    let mut ended = false;
    for line in lines {
        if line == "end" {
            ended = true;
            break;
        }
        let mut parts = line.split_ascii_whitespace();
        let name = parts.next().ok_or_else(|| bad("blank field line"))?;
        let count: usize = parts
            .next()
            .and_then(|c| c.parse().ok())
            .ok_or_else(|| bad(format!("field `{name}` lacks a count")))?;
        let values = parts
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| bad(format!("bad number `{v}` in `{name}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        if values.len() != count {
            return Err(bad(format!(
                "field `{name}` declares {count} values, has {}",
                values.len()
            )));
        }
        map.insert(name.to_string(), values);
    }
    if !ended {
        return Err(bad("missing `end` line"));
    }
    let f = Fields(map);
    let model = match kind {
        ClassifierKind::Default => ClassifierModel::Default(DefaultRule {
            score: f.scalar("score")?,
            dim,
        }),
        ClassifierKind::OneR => {
            let cuts = f.get("cuts")?.to_vec();
            let cell_scores = f.get("cell-scores")?.to_vec();
            if cell_scores.len() != cuts.len() + 1 {
                return Err(bad("1R needs one more cell score than cuts"));
            }
            ClassifierModel::OneR(OneRule {
                feature: f.index("feature")?,
                cuts,
                cell_scores,
                dim,
            })
        }
        ClassifierKind::Lda => {
            let weights = f.get("weights")?.to_vec();
            if weights.len() != dim {
                return Err(bad("LDA weight count differs from dim"));
            }
            ClassifierModel::Lda(LinearDiscriminant {
                weights,
                bias: f.scalar("bias")?,
                ridge_used: f.scalar("ridge")?,
            })
        }
        ClassifierKind::Tree => {
            let feature = f.get("node-feature")?;
            let threshold = f.get("node-threshold")?;
            let left = f.get("node-left")?;
            let right = f.get("node-right")?;
            let score = f.get("node-score")?;
            let n = feature.len();
            if [threshold.len(), left.len(), right.len(), score.len()]
                .iter()
                .any(|&l| l != n)
                || n == 0
            {
                return Err(bad("tree node arrays differ in length"));
            }
            let mut nodes = Vec::with_capacity(n);
            for i in 0..n {
                nodes.push(if feature[i] < 0.0 {
                    Node::Leaf { score: score[i] }
                } else {
                    let (l, r) = (
                        as_index(left[i], "node-left")?,
                        as_index(right[i], "node-right")?,
                    );
                    if l <= i || r <= i || l >= n || r >= n {
                        return Err(bad("tree child index out of order"));
                    }
                    Node::Split {
                        feature: as_index(feature[i], "node-feature")?,
                        threshold: threshold[i],
                        left: l,
                        right: r,
                    }
                });
            }
            ClassifierModel::Tree(PrunedTree { nodes, dim })
        }
        ClassifierKind::Mlp => {
            let hidden = f.index("hidden")?;
            let net = if hidden == 0 {
                Network::Baseline(DefaultRule {
                    score: f.scalar("score")?,
                    dim,
                })
            } else {
                let params = f.get("params")?;
                if params.len() != hidden * (dim + 2) + 1 {
                    return Err(bad("perceptron parameter count differs from hidden/dim"));
                }
                Network::Hidden {
                    standardizer: Standardizer {
                        mean: f.get("mean")?.to_vec(),
                        scale: f.get("scale")?.to_vec(),
                    },
                    params: MlpParams::from_vec(hidden, dim, params),
                }
            };
            ClassifierModel::Mlp(Perceptron { net, dim })
        }
    };
    Ok(model)
}
